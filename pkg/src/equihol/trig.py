"""Real trigonometric polynomials with exact derivatives.

Fixtures in this package are built from finite Fourier sums so that spatial
derivatives, line integrals over lattice links, and L^2 pairings can be
evaluated analytically.  A :class:`TrigPoly` stores complex coefficients
indexed by integer frequency vectors; evaluation broadcasts over arbitrary
coordinate meshes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

FreqVector = Tuple[int, ...]


@dataclass
class TrigPoly:
    """f(x) = sum_k c_k exp(2 pi i k . x) with integer frequency vectors k."""

    nvars: int
    coeffs: Dict[FreqVector, complex] = field(default_factory=dict)

    @staticmethod
    def constant(nvars: int, value: complex) -> "TrigPoly":
        return TrigPoly(nvars, {(0,) * nvars: complex(value)})

    @staticmethod
    def wave(nvars: int, freq: FreqVector, amplitude: complex = 1.0, phase: float = 0.0) -> "TrigPoly":
        """amplitude * cos(2 pi k.x + phase), as a real trig polynomial."""
        freq = tuple(freq)
        half = 0.5 * complex(amplitude)
        out: Dict[FreqVector, complex] = {}
        pos = half * np.exp(1.0j * phase)
        neg = half * np.exp(-1.0j * phase)
        mfreq = tuple(-k for k in freq)
        out[freq] = out.get(freq, 0.0) + pos
        out[mfreq] = out.get(mfreq, 0.0) + neg
        return TrigPoly(nvars, out)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return TrigPoly(self.nvars, out)

    def __mul__(self, scalar: complex) -> "TrigPoly":
        return TrigPoly(self.nvars, {k: c * scalar for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def product(self, other: "TrigPoly") -> "TrigPoly":
        out: Dict[FreqVector, complex] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + c1 * c2
        return TrigPoly(self.nvars, out)

    def partial(self, axis: int) -> "TrigPoly":
        out = {}
        for k, c in self.coeffs.items():
            if k[axis] != 0:
                out[k] = c * (2.0j * math.pi * k[axis])
        return TrigPoly(self.nvars, out)

    def sample(self, meshes) -> np.ndarray:
        """Evaluate on coordinate meshes (list of broadcastable arrays)."""
        if len(meshes) != self.nvars:
            raise ValueError("mesh count does not match variable count")
        shape = np.broadcast(*meshes).shape if self.nvars > 1 else np.shape(meshes[0])
        out = np.zeros(shape, dtype=complex)
        for k, c in self.coeffs.items():
            phase = np.zeros(shape)
            for axis, ka in enumerate(k):
                if ka != 0:
                    phase = phase + (2.0 * math.pi * ka) * meshes[axis]
            out = out + c * np.exp(1.0j * phase)
        return out

    def eval_at(self, point) -> complex:
        meshes = [np.asarray(float(x)) for x in point]
        return complex(self.sample(meshes))

    def mean(self) -> complex:
        return complex(self.coeffs.get((0,) * self.nvars, 0.0))

    def max_frequency(self) -> int:
        if not self.coeffs:
            return 0
        return max(max(abs(ka) for ka in k) for k in self.coeffs)

    def is_real(self, tol: float = 1e-12) -> bool:
        for k, c in self.coeffs.items():
            mk = tuple(-a for a in k)
            if abs(np.conj(self.coeffs.get(mk, 0.0)) - c) > tol:
                return False
        return True
