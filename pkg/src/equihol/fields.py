"""Sampled differential forms on product grids.

A :class:`Grid` is a product of unit-length axes, each either periodic
(circle, N samples at j/N) or an interval ([0,1], N+1 samples including both
endpoints, N even so composite Simpson applies).  A :class:`FormField` stores
the components of a differential form on such a grid, keyed by strictly
increasing multi-indices; values are either complex scalars or complex
matrices (for Lie-algebra valued forms).

Derivatives along periodic axes use FFT spectral differentiation, which is
exact for band-limited samples.  Fields may carry analytic per-axis
derivative overrides (``partials``); these are essential on interval axes
and for the smoothed time axis of mapping-torus assemblies, where finite
differences would dominate the error budget.

Integration uses the trapezoid rule on periodic axes (spectrally accurate)
and composite Simpson on interval axes.  Only the orientation given by the
coordinate order is built in; any global orientation factor (e.g. for
mapping tori) is applied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]
CompDict = Dict[MultiIndex, np.ndarray]


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Product of unit-length axes; periodic axes drop the right endpoint."""

    sizes: Tuple[int, ...]
    periodic: Tuple[bool, ...]
    axis_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.sizes) != len(self.periodic):
            raise ValueError("sizes and periodic must have equal length")
        if not self.axis_names:
            object.__setattr__(self, "axis_names", tuple(f"x{i}" for i in range(len(self.sizes))))
        for n, per in zip(self.sizes, self.periodic):
            if n < 4:
                raise ValueError("grid axes need at least 4 samples")
            if not per and n % 2 != 0:
                raise ValueError("interval axes need an even number of subintervals for Simpson")

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(n if per else n + 1 for n, per in zip(self.sizes, self.periodic))

    def axis_points(self, axis: int) -> np.ndarray:
        n = self.sizes[axis]
        if self.periodic[axis]:
            return np.arange(n) / n
        return np.arange(n + 1) / n

    def meshes(self):
        pts = [self.axis_points(a) for a in range(self.dim)]
        return np.meshgrid(*pts, indexing="ij")

    def spacing(self, axis: int) -> float:
        return 1.0 / self.sizes[axis]

    def axis_weights(self, axis: int) -> np.ndarray:
        """Quadrature weights for one axis (trapezoid-periodic or Simpson)."""
        n = self.sizes[axis]
        h = 1.0 / n
        if self.periodic[axis]:
            return np.full(n, h)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (h / 3.0)


def torus_grid(*sizes: int, axis_names: Tuple[str, ...] = ()) -> Grid:
    return Grid(sizes=tuple(sizes), periodic=tuple(True for _ in sizes), axis_names=axis_names)


# ---------------------------------------------------------------------------
# multi-index combinatorics
# ---------------------------------------------------------------------------


def insert_sign(idx: MultiIndex, axis: int) -> Tuple[MultiIndex, int]:
    """dx_axis ^ dx_idx = sign * dx_sorted; returns (sorted index, sign)."""
    if axis in idx:
        return idx, 0
    pos = sum(1 for i in idx if i < axis)
    out = tuple(sorted(idx + (axis,)))
    return out, (-1) ** pos


def merge_sign(i1: MultiIndex, i2: MultiIndex) -> Tuple[MultiIndex, int]:
    """dx_i1 ^ dx_i2 = sign * dx_sorted for disjoint indices (else sign 0)."""
    if set(i1) & set(i2):
        return (), 0
    inversions = sum(1 for a in i1 for b in i2 if b < a)
    return tuple(sorted(i1 + i2)), (-1) ** inversions


# ---------------------------------------------------------------------------
# derivative kernels
# ---------------------------------------------------------------------------


def spectral_derivative(values: np.ndarray, axis: int, size: int) -> np.ndarray:
    """d/dx along a periodic unit axis via FFT; exact below Nyquist."""
    k = np.fft.fftfreq(size, d=1.0 / size)
    if size % 2 == 0:
        k = k.copy()
        k[size // 2] = 0.0  # zero the Nyquist mode's derivative
    shape = [1] * values.ndim
    shape[axis] = size
    mult = (2.0j * math.pi * k).reshape(shape)
    return np.fft.ifft(np.fft.fft(values, axis=axis) * mult, axis=axis)


_FD4_LEFT = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_FD4_NEXT = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def fd4_derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """4th-order finite differences on an interval axis (N+1 points)."""
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / 12.0
    out[0] = sum(c * v[i] for i, c in enumerate(_FD4_LEFT))
    out[1] = sum(c * v[i] for i, c in enumerate(_FD4_NEXT))
    out[-1] = -sum(c * v[-1 - i] for i, c in enumerate(_FD4_LEFT))
    out[-2] = -sum(c * v[-1 - i] for i, c in enumerate(_FD4_NEXT))
    return np.moveaxis(out, 0, axis) / h


# ---------------------------------------------------------------------------
# form fields
# ---------------------------------------------------------------------------


@dataclass
class FormField:
    """A degree-p form sampled on a grid; optionally matrix (Lie algebra) valued.

    ``comps`` maps strictly increasing multi-indices to arrays of shape
    ``grid.shape`` (scalar-valued) or ``grid.shape + (n, n)``.
    ``partials`` maps an axis to a dict of analytic derivative arrays for
    every stored component along that axis.
    """

    grid: Grid
    degree: int
    comps: CompDict
    matrix_dim: int = 0  # 0 = scalar-valued
    partials: Dict[int, CompDict] = field(default_factory=dict)

    # -- bookkeeping --------------------------------------------------------

    def _value_shape(self) -> Tuple[int, ...]:
        return (self.matrix_dim, self.matrix_dim) if self.matrix_dim else ()

    def zeros_like_component(self) -> np.ndarray:
        return np.zeros(self.grid.shape + self._value_shape(), dtype=complex)

    def component(self, idx: MultiIndex) -> np.ndarray:
        """Component for an arbitrary-order index (antisymmetry applied)."""
        key = tuple(sorted(idx))
        if len(set(idx)) != len(idx):
            return self.zeros_like_component()
        sign = _permutation_sign(idx, key)
        arr = self.comps.get(key)
        if arr is None:
            return self.zeros_like_component()
        return sign * arr

    def has_partials(self, axis: int) -> bool:
        return axis in self.partials or not self.comps

    def copy(self) -> "FormField":
        return FormField(
            grid=self.grid,
            degree=self.degree,
            comps={k: v.copy() for k, v in self.comps.items()},
            matrix_dim=self.matrix_dim,
            partials={a: {k: v.copy() for k, v in d.items()} for a, d in self.partials.items()},
        )

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "FormField") -> "FormField":
        _check_compatible(self, other)
        keys = set(self.comps) | set(other.comps)
        comps = {k: self.component(k) + other.component(k) for k in keys}
        partials: Dict[int, CompDict] = {}
        for a in range(self.grid.dim):
            if self.has_partials(a) and other.has_partials(a):
                partials[a] = {
                    k: self._partial_entry(a, k) + other._partial_entry(a, k) for k in keys
                }
        return FormField(self.grid, self.degree, comps, max(self.matrix_dim, other.matrix_dim), partials)

    def __sub__(self, other: "FormField") -> "FormField":
        return self + (other * (-1.0))

    def __mul__(self, scalar: complex) -> "FormField":
        comps = {k: v * scalar for k, v in self.comps.items()}
        partials = {a: {k: v * scalar for k, v in d.items()} for a, d in self.partials.items()}
        return FormField(self.grid, self.degree, comps, self.matrix_dim, partials)

    __rmul__ = __mul__

    def _partial_entry(self, axis: int, idx: MultiIndex) -> np.ndarray:
        d = self.partials.get(axis)
        if d is not None and idx in d:
            return d[idx]
        if idx not in self.comps:
            return self.zeros_like_component()
        return self.partial(axis, idx)

    # -- calculus -----------------------------------------------------------

    def partial(self, axis: int, idx: MultiIndex) -> np.ndarray:
        """d/dx_axis of one stored component (override, spectral, or FD4)."""
        override = self.partials.get(axis)
        if override is not None:
            if idx in override:
                return override[idx]
            if idx not in self.comps:
                return self.zeros_like_component()
        arr = self.comps.get(idx)
        if arr is None:
            return self.zeros_like_component()
        if self.grid.periodic[axis]:
            return spectral_derivative(arr, axis, self.grid.sizes[axis])
        return fd4_derivative(arr, axis, self.grid.spacing(axis))

    def exterior_derivative(self) -> "FormField":
        out: CompDict = {}
        for idx in self.comps:
            for axis in range(self.grid.dim):
                if axis in idx:
                    continue
                key, sign = insert_sign(idx, axis)
                term = sign * self.partial(axis, idx)
                if key in out:
                    out[key] = out[key] + term
                else:
                    out[key] = term
        return FormField(self.grid, self.degree + 1, out, self.matrix_dim)

    def sup_norm(self) -> float:
        if not self.comps:
            return 0.0
        return max(float(np.max(np.abs(v))) for v in self.comps.values())

    def integrate(self) -> complex:
        """Integral of a top-degree form in the coordinate orientation."""
        if self.degree != self.grid.dim:
            raise ValueError("integrate expects a top-degree form")
        top = tuple(range(self.grid.dim))
        arr = self.comps.get(top)
        if arr is None:
            return 0.0
        if self.matrix_dim:
            raise ValueError("integrate expects a scalar-valued form")
        out = arr
        for axis in range(self.grid.dim - 1, -1, -1):
            w = self.grid.axis_weights(axis)
            out = np.tensordot(out, w, axes=([axis], [0]))
        return complex(out)


def _permutation_sign(idx: MultiIndex, key: MultiIndex) -> int:
    perm = [key.index(i) for i in idx]
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, cycle = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cycle += 1
        if cycle % 2 == 0:
            sign = -sign
    return sign


def _check_compatible(a: FormField, b: FormField) -> None:
    if a.grid != b.grid or a.degree != b.degree:
        raise ValueError("form fields live on different grids or degrees")
    if a.matrix_dim and b.matrix_dim and a.matrix_dim != b.matrix_dim:
        raise ValueError("matrix dimensions differ")


def zero_form(grid: Grid, degree: int, matrix_dim: int = 0) -> FormField:
    return FormField(grid, degree, {}, matrix_dim)


def wedge(a: FormField, b: FormField, product: Optional[Callable] = None) -> FormField:
    """Wedge product; matrix-valued components multiply as matrices."""
    if a.grid != b.grid:
        raise ValueError("wedge needs a common grid")
    if product is None:
        if a.matrix_dim and b.matrix_dim:
            product = lambda x, y: np.einsum("...ij,...jk->...ik", x, y)
        elif a.matrix_dim or b.matrix_dim:
            product = lambda x, y: (x[..., None, None] * y) if not a.matrix_dim else (x * y[..., None, None])
        else:
            product = lambda x, y: x * y
    out: CompDict = {}
    for i1, c1 in a.comps.items():
        for i2, c2 in b.comps.items():
            key, sign = merge_sign(i1, i2)
            if sign == 0:
                continue
            term = sign * product(c1, c2)
            if key in out:
                out[key] = out[key] + term
            else:
                out[key] = term
    mdim = a.matrix_dim if a.matrix_dim else b.matrix_dim
    if a.matrix_dim and b.matrix_dim:
        mdim = a.matrix_dim
    return FormField(a.grid, a.degree + b.degree, out, mdim)


def pair_wedge(pair, a: FormField, b: FormField) -> FormField:
    """Scalar-valued wedge p(a ^ b) built from an invariant pairing.

    Combines components with wedge signs and applies pair.value slotwise;
    the result is a scalar (complex) form of degree deg a + deg b.
    """
    if a.grid != b.grid:
        raise ValueError("pair_wedge needs a common grid")
    out: CompDict = {}
    for i1, c1 in a.comps.items():
        for i2, c2 in b.comps.items():
            key, sign = merge_sign(i1, i2)
            if sign == 0:
                continue
            term = sign * pair.value(c1, c2)
            if key in out:
                out[key] = out[key] + term
            else:
                out[key] = term
    return FormField(a.grid, a.degree + b.degree, out, 0)


def matrix_trace_form(a: FormField) -> FormField:
    """Componentwise matrix trace, producing a scalar-valued form."""
    comps = {k: np.einsum("...ii->...", v) for k, v in a.comps.items()}
    return FormField(a.grid, a.degree, comps, 0)
