"""Structure groups U(1) and SU(2) and their invariant pairings.

Everything is matrix-valued: U(1) elements are 1x1 unitary matrices and
SU(2) elements 2x2 special unitary ones, so a single set of vectorised
routines (exponential, adjoint action, trace pairing) serves both.  Arrays
carry arbitrary leading grid axes and end in the two matrix axes.

Sign conventions (documented once, tested in tests/test_lie.py and used
consistently everywhere else):

* Lie algebras consist of anti-Hermitian matrices (traceless for su(2)).
* The level-k invariant pairing of two algebra elements is
      U(1):  p(X, Y) = -k/(4 pi^2) * X*Y
      SU(2): p(X, Y) = -k/(8 pi^2) * tr(X@Y)
  (the U(1) case is the same formula since tr of a 1x1 matrix is its entry).
  With this choice the flat two-torus pairing examples come out positive and
  the closed-manifold action equals MINUS the classical
  (1/8 pi^2) tr(a da + 2/3 a^3) integral; see tests/test_acceptance.py.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Pauli matrices; i*sigma_a is the anti-Hermitian su(2) basis used below.
_SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...jk->...ik", a, b)


def mat_trace(a: np.ndarray) -> np.ndarray:
    return np.einsum("...ii->...", a)


def trace_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """tr(a @ b), vectorised over leading axes."""
    return np.einsum("...ij,...ji->...", a, b)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return mat_mul(a, b) - mat_mul(b, a)


def unitary_inverse(g: np.ndarray) -> np.ndarray:
    """Inverse of a unitary matrix field: the conjugate transpose."""
    return np.conj(np.swapaxes(g, -1, -2))


def adjoint_action(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Ad_g x = g x g^{-1} for unitary g."""
    return mat_mul(mat_mul(g, x), unitary_inverse(g))


@dataclass(frozen=True)
class StructureGroup:
    """U(1) or SU(2) with its matrix realisation."""

    name: str
    matrix_dim: int
    algebra_dim: int

    def algebra_basis(self) -> np.ndarray:
        """Anti-Hermitian basis, shape (algebra_dim, n, n)."""
        if self.name == "U1":
            return np.array([[[1.0j]]])
        return 1.0j * _SIGMA

    def exponential(self, x: np.ndarray) -> np.ndarray:
        """Matrix exponential of an algebra element (closed form)."""
        x = np.asarray(x, dtype=complex)
        if self.matrix_dim == 1:
            return np.exp(x)
        # su(2): x^2 = -theta^2 * Id with theta = sqrt(-tr(x^2)/2) >= 0,
        # hence exp(x) = cos(theta) Id + sinc(theta) x.
        theta2 = (-trace_product(x, x) / 2.0).real
        theta = np.sqrt(np.maximum(theta2, 0.0))
        eye = np.eye(2, dtype=complex)
        cos = np.cos(theta)[..., None, None]
        sinc = np.sinc(theta / math.pi)[..., None, None]
        return cos * eye + sinc * x

    def project_algebra(self, x: np.ndarray) -> np.ndarray:
        """Anti-Hermitian (and traceless for su(2)) part of x."""
        x = np.asarray(x, dtype=complex)
        x = 0.5 * (x - np.conj(np.swapaxes(x, -1, -2)))
        if self.matrix_dim > 1:
            n = self.matrix_dim
            tr = mat_trace(x)[..., None, None] / n
            x = x - tr * np.eye(n, dtype=complex)
        return x

    def random_algebra(self, rng: np.random.Generator, shape=(), scale: float = 1.0) -> np.ndarray:
        comps = rng.standard_normal(tuple(shape) + (self.algebra_dim,)) * scale
        return np.tensordot(comps, self.algebra_basis(), axes=([-1], [0]))

    def zero_algebra(self, shape=()) -> np.ndarray:
        n = self.matrix_dim
        return np.zeros(tuple(shape) + (n, n), dtype=complex)

    def identity(self, shape=()) -> np.ndarray:
        n = self.matrix_dim
        out = np.zeros(tuple(shape) + (n, n), dtype=complex)
        out[..., range(n), range(n)] = 1.0
        return out


U1 = StructureGroup(name="U1", matrix_dim=1, algebra_dim=1)
SU2 = StructureGroup(name="SU2", matrix_dim=2, algebra_dim=3)

_GROUPS = {"U1": U1, "SU2": SU2}


def group_by_name(name: str) -> StructureGroup:
    try:
        return _GROUPS[name]
    except KeyError:
        raise ValueError(f"unknown structure group {name!r}; expected U1 or SU2") from None


def su2_from_components(c1, c2, c3) -> np.ndarray:
    """c1*i*sigma1 + c2*i*sigma2 + c3*i*sigma3 with array components."""
    comps = np.stack(np.broadcast_arrays(c1, c2, c3), axis=-1)
    return np.tensordot(comps, 1.0j * _SIGMA, axes=([-1], [0]))


def right_log_derivative_of_exp(xi: np.ndarray, dxi: np.ndarray, terms: int = 30) -> np.ndarray:
    """(d exp(xi)) exp(-xi) for a variation d with d(xi) = dxi.

    Computed from the convergent series sum_{m>=0} ad_xi^m(dxi) / (m+1)!.
    Exact to machine precision for the moderate |xi| used in this package.
    """
    acc = np.array(dxi, dtype=complex, copy=True)
    term = acc
    fact = 1.0
    for m in range(1, terms):
        term = commutator(xi, term)
        fact *= m + 1
        contrib = term / fact
        acc = acc + contrib
        if np.max(np.abs(contrib)) < 1e-18:
            break
    return acc


@dataclass(frozen=True)
class InvariantPair:
    """Degree-2 symmetric invariant polynomial p(X, Y) = coeff * tr(X@Y)."""

    group: StructureGroup
    level: int
    coefficient: float
    degree: int = 2

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.coefficient * trace_product(x, y)


def invariant_pair(group: StructureGroup, level: int = 1) -> InvariantPair:
    """The built-in level-k pairing for U(1) or SU(2) (see module docstring)."""
    if group.name == "U1":
        coeff = -level / (4.0 * math.pi**2)
    elif group.name == "SU2":
        coeff = -level / (8.0 * math.pi**2)
    else:
        raise ValueError(f"no built-in pairing for group {group.name!r}")
    return InvariantPair(group=group, level=level, coefficient=coeff)
