"""Gauge maps, the gauge action on connections, and families of connections.

A connection on the trivial bundle is a Lie-algebra valued 1-form field.
A :class:`GaugeMap` stores the pointwise group element together with its
right logarithmic derivative (d phi) phi^{-1}; the latter is never obtained
by differencing group samples.  For U(1) maps the derivative is exact from
the phase data; for exponential SU(2) maps it comes from the convergent
series for (d exp(xi)) exp(-xi).

Winding-free gauge maps carry a *nullhomotopy witness*: a smooth path
g(s) of gauge maps with g(0) = phi and g(1) = identity, exposing both its
spatial log-derivative and its s-velocity (ds g) g^{-1}.  Mapping-torus
trivialisations consume this witness.

A :class:`FamilyCurve` is a piecewise-smooth path of connections; each
segment knows its value and exact parameter velocity.  Segments are glued
with a flat-ended smoothing profile when sampled on a time grid, so the
assembled spacetime fields are C^infinity across junctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .fields import FormField, Grid, wedge, zero_form
from .lie import (
    StructureGroup,
    U1,
    SU2,
    adjoint_action,
    commutator,
    mat_mul,
    right_log_derivative_of_exp,
    unitary_inverse,
)
from .trig import TrigPoly

TWO_PI_I = 2.0j * math.pi


# ---------------------------------------------------------------------------
# gauge maps
# ---------------------------------------------------------------------------


@dataclass
class WitnessPoint:
    """One parameter value of a nullhomotopy g(s): value, (d_M g)g^-1, (d_s g)g^-1."""

    mats: np.ndarray
    dlog: FormField
    ds_rightlog: np.ndarray


@dataclass
class GaugeMap:
    """Group-valued map on the base grid with exact derivative data."""

    group: StructureGroup
    grid: Grid
    mats: np.ndarray
    dlog: FormField
    winding: Tuple[int, ...]
    witness: Optional[Callable[[float], WitnessPoint]] = None

    @property
    def has_winding(self) -> bool:
        return any(w != 0 for w in self.winding)

    def inverse_mats(self) -> np.ndarray:
        return unitary_inverse(self.mats)


def identity_gauge_map(group: StructureGroup, grid: Grid) -> GaugeMap:
    n = group.matrix_dim
    mats = np.broadcast_to(np.eye(n, dtype=complex), grid.shape + (n, n)).copy()
    dlog = zero_form(grid, 1, matrix_dim=n)
    wit = lambda s: WitnessPoint(mats.copy(), zero_form(grid, 1, matrix_dim=n), np.zeros_like(mats))
    return GaugeMap(group, grid, mats, dlog, (0,) * grid.dim, wit)


def u1_gauge_map(
    grid: Grid,
    winding: Sequence[int] = (),
    phase: Optional[TrigPoly] = None,
    constant: float = 0.0,
) -> GaugeMap:
    """phi = exp(2 pi i (sum_a w_a x_a + phase(x) + constant)).

    ``winding`` lists integer winding numbers along the grid axes (must be
    zero along interval axes).  The log-derivative is exact.
    """
    winding = tuple(winding) if winding else (0,) * grid.dim
    if len(winding) != grid.dim:
        raise ValueError("winding length must match grid dimension")
    for w, per in zip(winding, grid.periodic):
        if w != 0 and not per:
            raise ValueError("winding only makes sense along periodic axes")
    meshes = grid.meshes()
    expo = np.zeros(grid.shape, dtype=float)
    for a, w in enumerate(winding):
        if w != 0:
            expo = expo + w * meshes[a]
    phase_vals = np.zeros(grid.shape, dtype=complex)
    if phase is not None:
        if not phase.is_real():
            raise ValueError("u1 gauge phase must be a real trig polynomial")
        phase_vals = phase.sample(meshes)
    total = expo + phase_vals.real + constant
    mats = np.exp(TWO_PI_I * total)[..., None, None]
    dcomps = {}
    for a in range(grid.dim):
        comp = np.full(grid.shape, TWO_PI_I * winding[a], dtype=complex)
        if phase is not None:
            comp = comp + TWO_PI_I * phase.partial(a).sample(meshes)
        dcomps[(a,)] = comp[..., None, None]
    dlog = FormField(grid, 1, dcomps, matrix_dim=1)

    witness = None
    if all(w == 0 for w in winding):

        def witness(s: float, _total=phase_vals.real + constant, _phase=phase) -> WitnessPoint:
            mats_s = np.exp(TWO_PI_I * (1.0 - s) * _total)[..., None, None]
            comps_s = {}
            for a in range(grid.dim):
                if _phase is not None:
                    comps_s[(a,)] = (TWO_PI_I * (1.0 - s) * _phase.partial(a).sample(meshes))[
                        ..., None, None
                    ]
            dl = FormField(grid, 1, comps_s, matrix_dim=1)
            ds = (-TWO_PI_I * _total)[..., None, None] * np.ones_like(mats_s)
            return WitnessPoint(mats_s, dl, ds)

    return GaugeMap(U1, grid, mats, dlog, winding, witness)


def su2_gauge_map_exp(
    grid: Grid,
    xi: np.ndarray,
    xi_partials: Optional[dict] = None,
) -> GaugeMap:
    """phi = exp(xi) for an su(2)-valued 0-form sample xi.

    ``xi_partials`` optionally maps axis -> array of exact d_a xi values;
    missing axes use spectral differentiation (requires periodicity).
    """
    xi = np.asarray(xi, dtype=complex)
    mats = SU2.exponential(xi)
    partials = {}
    for a in range(grid.dim):
        if xi_partials is not None and a in xi_partials:
            partials[a] = np.asarray(xi_partials[a], dtype=complex)
        else:
            if not grid.periodic[a]:
                raise ValueError("need analytic xi partials along interval axes")
            from .fields import spectral_derivative

            partials[a] = spectral_derivative(xi, a, grid.sizes[a])
    dcomps = {(a,): right_log_derivative_of_exp(xi, partials[a]) for a in range(grid.dim)}
    dlog = FormField(grid, 1, dcomps, matrix_dim=2)

    def witness(s: float) -> WitnessPoint:
        scale = 1.0 - s
        mats_s = SU2.exponential(scale * xi)
        comps_s = {(a,): right_log_derivative_of_exp(scale * xi, scale * partials[a]) for a in range(grid.dim)}
        dl = FormField(grid, 1, comps_s, matrix_dim=2)
        return WitnessPoint(mats_s, dl, -xi)

    return GaugeMap(SU2, grid, mats, dlog, (0,) * grid.dim, witness)


def constant_gauge_map(group: StructureGroup, grid: Grid, algebra_element: np.ndarray) -> GaugeMap:
    """Constant map exp(X0); nullhomotopic along exp((1-s) X0)."""
    x0 = np.asarray(algebra_element, dtype=complex)
    n = group.matrix_dim
    base = group.exponential(x0)
    mats = np.broadcast_to(base, grid.shape + (n, n)).copy()

    def witness(s: float) -> WitnessPoint:
        g = group.exponential((1.0 - s) * x0)
        mats_s = np.broadcast_to(g, grid.shape + (n, n)).copy()
        ds = np.broadcast_to(-x0, grid.shape + (n, n)).copy()
        return WitnessPoint(mats_s, zero_form(grid, 1, matrix_dim=n), ds)

    return GaugeMap(group, grid, mats, zero_form(grid, 1, matrix_dim=n), (0,) * grid.dim, witness)


def compose_gauge_maps(a: GaugeMap, b: GaugeMap) -> GaugeMap:
    """Pointwise product (a*b)(x) = a(x) b(x)."""
    if a.grid != b.grid or a.group.name != b.group.name:
        raise ValueError("gauge maps live on different grids or groups")
    mats = mat_mul(a.mats, b.mats)
    dlog_b_transported = FormField(
        a.grid,
        1,
        {k: adjoint_action(a.mats, v) for k, v in b.dlog.comps.items()},
        matrix_dim=a.group.matrix_dim,
    )
    dlog = a.dlog + dlog_b_transported
    winding = tuple(wa + wb for wa, wb in zip(a.winding, b.winding))
    witness = None
    if a.witness is not None and b.witness is not None:
        wa_fn, wb_fn = a.witness, b.witness

        def witness(s: float) -> WitnessPoint:
            wa, wb = wa_fn(s), wb_fn(s)
            m = mat_mul(wa.mats, wb.mats)
            dl = wa.dlog + FormField(
                a.grid,
                1,
                {k: adjoint_action(wa.mats, v) for k, v in wb.dlog.comps.items()},
                matrix_dim=a.group.matrix_dim,
            )
            ds = wa.ds_rightlog + adjoint_action(wa.mats, wb.ds_rightlog)
            return WitnessPoint(m, dl, ds)

    return GaugeMap(a.group, a.grid, mats, dlog, winding, witness)


def inverse_gauge_map(a: GaugeMap) -> GaugeMap:
    inv = a.inverse_mats()
    dlog = FormField(
        a.grid,
        1,
        {k: -adjoint_action(inv, v) for k, v in a.dlog.comps.items()},
        matrix_dim=a.group.matrix_dim,
    )
    winding = tuple(-w for w in a.winding)
    witness = None
    if a.witness is not None:
        wit_fn = a.witness

        def witness(s: float) -> WitnessPoint:
            w = wit_fn(s)
            m = unitary_inverse(w.mats)
            dl = FormField(
                a.grid,
                1,
                {k: -adjoint_action(m, v) for k, v in w.dlog.comps.items()},
                matrix_dim=a.group.matrix_dim,
            )
            ds = -adjoint_action(m, w.ds_rightlog)
            return WitnessPoint(m, dl, ds)

    return GaugeMap(a.group, a.grid, inv, dlog, winding, witness)


def conjugate_gauge_map(by: GaugeMap, a: GaugeMap) -> GaugeMap:
    """by * a * by^{-1}."""
    return compose_gauge_maps(compose_gauge_maps(by, a), inverse_gauge_map(by))


# ---------------------------------------------------------------------------
# gauge action and curvature
# ---------------------------------------------------------------------------


def gauge_transform(phi: GaugeMap, a: FormField) -> FormField:
    """phi . A = Ad_phi A - (d phi) phi^{-1}."""
    keys = set(a.comps) | set(phi.dlog.comps)
    comps = {}
    for k in keys:
        comps[k] = adjoint_action(phi.mats, a.component(k)) - phi.dlog.component(k)
    return FormField(a.grid, 1, comps, matrix_dim=max(a.matrix_dim, phi.group.matrix_dim))


def curvature(a: FormField) -> FormField:
    """F = dA + A ^ A (the matrix wedge; vanishing term for U(1))."""
    return a.exterior_derivative() + wedge(a, a)


def covariant_derivative_scalar(a: FormField, xi: np.ndarray) -> FormField:
    """d_A xi = d xi + [A, xi] for an algebra-valued 0-form sample xi."""
    grid = a.grid
    xi_form = FormField(grid, 0, {(): np.asarray(xi, dtype=complex)}, matrix_dim=a.matrix_dim)
    dxi = xi_form.exterior_derivative()
    comps = {}
    for k in set(a.comps) | set(dxi.comps):
        comps[k] = dxi.component(k) + commutator(a.component(k), np.asarray(xi, dtype=complex))
    return FormField(grid, 1, comps, matrix_dim=a.matrix_dim)


def orbit_velocity(a: FormField, xi: np.ndarray) -> FormField:
    """d/ds exp(s xi) . A at s = 0, namely -d_A xi."""
    return covariant_derivative_scalar(a, xi) * (-1.0)


# ---------------------------------------------------------------------------
# curves of connections
# ---------------------------------------------------------------------------


class CurveSegment:
    """Smooth path of connections on [0,1] with exact velocity."""

    def at(self, s: float) -> FormField:
        raise NotImplementedError

    def velocity(self, s: float) -> FormField:
        raise NotImplementedError


@dataclass
class LinearSegment(CurveSegment):
    a0: FormField
    a1: FormField

    def at(self, s: float) -> FormField:
        return self.a0 * (1.0 - s) + self.a1 * s

    def velocity(self, s: float) -> FormField:
        return self.a1 - self.a0


@dataclass
class OrbitSegment(CurveSegment):
    """s -> exp(s * scale * xi) . A along a gauge orbit."""

    base: FormField
    xi: np.ndarray
    scale: float = 1.0
    group: StructureGroup = SU2
    xi_partials: Optional[dict] = None

    def _map_at(self, s: float) -> GaugeMap:
        x = (s * self.scale) * np.asarray(self.xi, dtype=complex)
        if self.group.name == "U1":
            # xi = 2 pi i f(x); realise as a u1 map with phase f scaled
            raise NotImplementedError("use Su2/u1-specific orbit helpers in fixtures")
        parts = None
        if self.xi_partials is not None:
            parts = {a: (s * self.scale) * v for a, v in self.xi_partials.items()}
        return su2_gauge_map_exp(self.base.grid, x, parts)

    def at(self, s: float) -> FormField:
        return gauge_transform(self._map_at(s), self.base)

    def velocity(self, s: float) -> FormField:
        return orbit_velocity(self.at(s), np.asarray(self.xi, dtype=complex)) * self.scale


@dataclass
class GaugeActedSegment(CurveSegment):
    phi: GaugeMap
    inner: CurveSegment

    def at(self, s: float) -> FormField:
        return gauge_transform(self.phi, self.inner.at(s))

    def velocity(self, s: float) -> FormField:
        v = self.inner.velocity(s)
        comps = {k: adjoint_action(self.phi.mats, c) for k, c in v.comps.items()}
        return FormField(v.grid, 1, comps, matrix_dim=v.matrix_dim)


@dataclass
class ReversedSegment(CurveSegment):
    inner: CurveSegment

    def at(self, s: float) -> FormField:
        return self.inner.at(1.0 - s)

    def velocity(self, s: float) -> FormField:
        return self.inner.velocity(1.0 - s) * (-1.0)


@dataclass
class ReparametrisedSegment(CurveSegment):
    inner: CurveSegment
    mapping: Callable[[float], float]
    mapping_velocity: Callable[[float], float]

    def at(self, s: float) -> FormField:
        return self.inner.at(self.mapping(s))

    def velocity(self, s: float) -> FormField:
        return self.inner.velocity(self.mapping(s)) * self.mapping_velocity(s)


@dataclass
class FamilyCurve:
    """Piecewise-smooth curve of connections, uniformly parametrised on [0,1]."""

    segments: List[CurveSegment]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a curve needs at least one segment")

    def _locate(self, t: float) -> Tuple[CurveSegment, float, float]:
        n = len(self.segments)
        t = min(max(t, 0.0), 1.0)
        i = min(int(t * n), n - 1)
        return self.segments[i], t * n - i, float(n)

    def at(self, t: float) -> FormField:
        seg, s, _ = self._locate(t)
        return seg.at(s)

    def velocity(self, t: float) -> FormField:
        seg, s, n = self._locate(t)
        return seg.velocity(s) * n

    def smoothed_at(self, t: float, profile) -> FormField:
        """Value with each segment reparametrised by the smoothing profile."""
        seg, s, _ = self._locate(t)
        return seg.at(profile.value(s))

    def smoothed_velocity(self, t: float, profile) -> FormField:
        seg, s, n = self._locate(t)
        return seg.velocity(profile.value(s)) * (profile.derivative(s) * n)

    def start(self) -> FormField:
        return self.segments[0].at(0.0)

    def end(self) -> FormField:
        return self.segments[-1].at(1.0)

    def reverse(self) -> "FamilyCurve":
        return FamilyCurve([ReversedSegment(s) for s in reversed(self.segments)])

    def transform(self, phi: GaugeMap) -> "FamilyCurve":
        return FamilyCurve([GaugeActedSegment(phi, s) for s in self.segments])

    def concat(self, other: "FamilyCurve") -> "FamilyCurve":
        return FamilyCurve(self.segments + other.segments)


def twisted_endpoint_residual(curve: FamilyCurve, phi: GaugeMap) -> float:
    """sup |curve(1) - phi . curve(0)|; zero for curves in the twist class of phi."""
    return (curve.end() - gauge_transform(phi, curve.start())).sup_norm()
