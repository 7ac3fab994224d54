"""Transgression forms, level-k actions, and mapping-torus values.

Conventions (fixed once here, used by every caller):

* ``MT_ORIENTATION = -1``: spacetime integrals over a mapping torus (or a
  cylinder M x [0,1] of connections) are taken in coordinate order
  (spatial axes..., t) and multiplied by this factor.  Equivalently the
  mapping torus is oriented by or(M) ^ (-dt).  This single choice makes
  the small-loop curvature axiom, the twist-derivative/moment identity,
  and the cocycle round trip all come out with plus signs.
* The closed-manifold action with the built-in pairings equals MINUS the
  classical (1/8 pi^2) tr(a da + 2/3 a^3) integral for SU(2) level 1; the
  acceptance suite asserts exactly that relation (the sign table).

The mapping-torus value of a twist (phi, curve) is computed by
trivialising: a nullhomotopy witness g(s) of phi gives h(t) = g(u(t))
phi^{-1}, the curve is acted on pointwise, a dt-leg -(d_t h)h^{-1} is
added, and the result is a periodic connection on M x S^1 whose action is
the twisted-loop value.  Time derivatives are assembled analytically
(never by differencing samples) via

    d_t (Ad_h B - (d_M h)h^{-1}) = Ad_h(d_t B) + [w, A-bar] - d_M w,

with w = (d_t h) h^{-1}; the dt-leg of the curvature then collapses to
Ad_h(d_t B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .circle import CircleValue
from .fields import FormField, Grid, pair_wedge, spectral_derivative, wedge
from .gauge import FamilyCurve, GaugeMap, curvature, gauge_transform, twisted_endpoint_residual
from .lie import InvariantPair, adjoint_action, commutator, mat_mul

MT_ORIENTATION = -1.0

TWIST_CLASS_TOL = 1e-8


class WindingTwistError(ValueError):
    """Raised when a U(1) twist with winding reaches the smooth pipeline.

    Such twists have no nullhomotopy, so the trivialised mapping-torus
    integral does not exist; the exact lattice oracle handles them.
    """


class InvariantViolation(ValueError):
    """Raised when an input breaks a documented precondition."""


# ---------------------------------------------------------------------------
# smoothing profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothingProfile:
    """Monotone ramp u: [0,1] -> [0,1] with flat ends.

    ``kind="bump"`` (default): the smooth step f(s)/(f(s) + f(1-s)) with
    f(s) = exp(-1/s).  Every derivative vanishes at the endpoints, so
    trapezoid sums over assembled mapping-torus fields converge
    superalgebraically; value and derivative have closed forms.
    ``kind="poly"``: the minimal polynomial ramp with u'(s) proportional
    to (s(1-s))^4, flat through 4th order (cheapest, lower accuracy).
    ``plateau`` widens either ramp with exactly-constant tails, keeping
    assembled fields constant near the seam.
    """

    plateau: float = 0.1
    kind: str = "bump"

    def _core(self, s: float) -> float:
        if self.kind == "poly":
            return s**5 * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + s * 70.0))))
        if s <= 0.0:
            return 0.0
        if s >= 1.0:
            return 1.0
        f = math.exp(-1.0 / s)
        g = math.exp(-1.0 / (1.0 - s))
        return f / (f + g)

    def _core_derivative(self, s: float) -> float:
        if self.kind == "poly":
            return 630.0 * (s * (1.0 - s)) ** 4
        if s <= 0.0 or s >= 1.0:
            return 0.0
        f = math.exp(-1.0 / s)
        g = math.exp(-1.0 / (1.0 - s))
        return (f * g) * (1.0 / s**2 + 1.0 / (1.0 - s) ** 2) / (f + g) ** 2

    def value(self, s: float) -> float:
        e = self.plateau
        if s <= e:
            return 0.0
        if s >= 1.0 - e:
            return 1.0
        return self._core((s - e) / (1.0 - 2.0 * e))

    def derivative(self, s: float) -> float:
        e = self.plateau
        if s <= e or s >= 1.0 - e:
            return 0.0
        return self._core_derivative((s - e) / (1.0 - 2.0 * e)) / (1.0 - 2.0 * e)


DEFAULT_PROFILE = SmoothingProfile()

# 8-point Gauss-Legendre on [0,1]; the transgression integrand is polynomial
# of degree <= 2 in the path parameter for degree-2 pairings, so this is exact.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


# ---------------------------------------------------------------------------
# transgression and actions
# ---------------------------------------------------------------------------


def p_of_curvature(pair: InvariantPair, conn: FormField) -> FormField:
    """The closed form p(F, F) of the connection's curvature."""
    f = curvature(conn)
    return pair_wedge(pair, f, f)


def transgression(a: FormField, b: FormField, pair: InvariantPair) -> FormField:
    """Tp(A, B) = 2 int_0^1 p(A - B, F_s) ds along the straight line s A + (1-s) B.

    Satisfies d Tp(A,B) = p(F_A) - p(F_B); Gauss-Legendre in s is exact
    because the integrand is quadratic in s for degree-2 pairings.
    """
    diff = a - b
    acc: Optional[FormField] = None
    for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
        mid = a * node + b * (1.0 - node)
        f_mid = curvature(mid)
        term = pair_wedge(pair, diff, f_mid) * (2.0 * weight)
        acc = term if acc is None else acc + term
    return acc


def transgression_from_zero(conn: FormField, pair: InvariantPair) -> FormField:
    """Tp(A, 0) with the polynomial s-dependence of F_{sA} integrated exactly.

    F_{sA} = s dA + s^2 A^A, so 2 int_0^1 p(A, F_{sA}) ds collapses to
    p(A, dA) + (2/3) p(A, A^A); this equals the Gauss-Legendre evaluation
    of :func:`transgression` against the product connection to roundoff
    (the suite asserts the agreement) at a fraction of the cost.
    """
    p1 = pair_wedge(pair, conn, conn.exterior_derivative())
    p2 = pair_wedge(pair, conn, wedge(conn, conn))
    return p1 + p2 * (2.0 / 3.0)


def chern_simons_action(conn: FormField, pair: InvariantPair) -> CircleValue:
    """Level-k action of a connection on a closed oriented grid, mod 1.

    Computed as the integral of the transgression from the product
    connection, in the coordinate orientation of the grid.
    """
    val = transgression_from_zero(conn, pair).integrate()
    if abs(val.imag) > 1e-8:
        raise InvariantViolation(f"action integral has imaginary part {val.imag:.2e}")
    return CircleValue.from_real(val.real)


def classical_chern_simons_su2(conn: FormField) -> float:
    """The textbook (1/8 pi^2) int tr(a da + 2/3 a^3) for SU(2), unreduced.

    Used for reporting the sign table; the acceptance suite additionally
    carries its own inline implementation of the same formula.
    """
    g = conn.grid
    if g.dim != 3:
        raise InvariantViolation("classical formula needs a 3-dimensional grid")
    a = [conn.component((i,)) for i in range(3)]
    da = {}
    for i in range(3):
        for j in range(3):
            if i < j:
                dij = spectral_derivative(a[j], i, g.sizes[i]) - spectral_derivative(a[i], j, g.sizes[j])
                da[(i, j)] = dij
    tr = lambda m: np.einsum("...ii->...", m)
    mm = lambda x, y: np.einsum("...ij,...jk->...ik", x, y)
    ada = (
        tr(mm(a[0], da[(1, 2)])) - tr(mm(a[1], da[(0, 2)])) + tr(mm(a[2], da[(0, 1)]))
    )
    aaa = 3.0 * (tr(mm(mm(a[0], a[1]), a[2])) - tr(mm(mm(a[0], a[2]), a[1])))
    dens = ada + (2.0 / 3.0) * aaa
    total = dens.mean()  # trapezoid on the unit torus = plain mean
    return float((total / (8.0 * math.pi**2)).real)


# ---------------------------------------------------------------------------
# mapping-torus assembly
# ---------------------------------------------------------------------------


def _append_time_axis(spatial: Grid, nt: int, periodic: bool) -> Grid:
    return Grid(
        sizes=spatial.sizes + (nt,),
        periodic=spatial.periodic + (periodic,),
        axis_names=spatial.axis_names + ("t",),
    )


def _stack_time(slices: List[np.ndarray]) -> np.ndarray:
    return np.stack(slices, axis=slices[0].ndim - 2)


def _embed_spatial_comps(
    grid_t: Grid,
    spatial_dim: int,
    per_slice: List[FormField],
    per_slice_dt: Optional[List[FormField]],
    dt_leg: Optional[List[np.ndarray]],
    matrix_dim: int,
) -> FormField:
    """Assemble per-time-slice spatial 1-forms (+ optional dt leg) into a
    spacetime 1-form with analytic time-partials."""
    t_axis = spatial_dim
    comps = {}
    keys = sorted({k for sl in per_slice for k in sl.comps})
    for k in keys:
        comps[k] = _stack_time([sl.component(k) for sl in per_slice])
    if dt_leg is not None:
        comps[(t_axis,)] = _stack_time(dt_leg)
    partials = {}
    if per_slice_dt is not None:
        partials[t_axis] = {k: _stack_time([sl.component(k) for sl in per_slice_dt]) for k in keys}
        if dt_leg is not None:
            # d of a 1-form never differentiates the dt component along t
            partials[t_axis][(t_axis,)] = np.zeros_like(comps[(t_axis,)])
    return FormField(grid_t, 1, comps, matrix_dim, partials)


def _transported(field: FormField, mats: np.ndarray) -> FormField:
    comps = {k: adjoint_action(mats, v) for k, v in field.comps.items()}
    return FormField(field.grid, field.degree, comps, field.matrix_dim)


def mapping_torus_connection(
    phi: GaugeMap,
    curve: FamilyCurve,
    nt: int = 128,
    profile: SmoothingProfile = DEFAULT_PROFILE,
) -> FormField:
    """Trivialised periodic connection on M x S^1 representing (phi, curve).

    Requires curve(1) = phi . curve(0) (checked) and a nullhomotopy witness
    on phi (winding twists have none and are refused).
    """
    if phi.has_winding:
        raise WindingTwistError(
            "U(1) twists with winding cannot be trivialised; "
            "use the exact lattice oracle (equihol.abelian_oracle) instead"
        )
    if phi.witness is None:
        raise InvariantViolation("twist lacks a nullhomotopy witness")
    resid = twisted_endpoint_residual(curve, phi)
    if resid > TWIST_CLASS_TOL:
        raise InvariantViolation(
            f"curve endpoint differs from twisted start by {resid:.2e} "
            f"(tolerance {TWIST_CLASS_TOL}); refusing to repair"
        )
    spatial = curve.start().grid
    mdim = max(curve.start().matrix_dim, phi.group.matrix_dim)
    grid_t = _append_time_axis(spatial, nt, periodic=True)
    phi_inv_mats = phi.inverse_mats()

    per_slice: List[FormField] = []
    per_slice_dt: List[FormField] = []
    dt_leg: List[np.ndarray] = []
    for j in range(nt):
        t = j / nt
        b = curve.smoothed_at(t, profile)
        bdot = curve.smoothed_velocity(t, profile)
        wit = phi.witness(profile.value(t))
        h_mats = mat_mul(wit.mats, phi_inv_mats)
        # (d_M h) h^{-1} = dlog g + Ad_g dlog(phi^{-1}) = dlog g - Ad_{g phi^{-1}} dlog phi
        dlog_h = wit.dlog + _transported(phi.dlog, h_mats) * (-1.0)
        abar_comps = {}
        for k in set(b.comps) | set(dlog_h.comps):
            abar_comps[k] = adjoint_action(h_mats, b.component(k)) - dlog_h.component(k)
        abar = FormField(spatial, 1, abar_comps, mdim)
        w = profile.derivative(t) * wit.ds_rightlog
        w = np.broadcast_to(w, spatial.shape + (mdim, mdim))
        # d_t A-bar = Ad_h(B-dot) + [w, A-bar] - d_M w
        w_form = FormField(spatial, 0, {(): np.asarray(w, dtype=complex)}, mdim)
        dw = w_form.exterior_derivative()
        abar_dt_comps = {}
        for k in abar.comps:
            abar_dt_comps[k] = (
                adjoint_action(h_mats, bdot.component(k))
                + commutator(np.asarray(w, dtype=complex), abar.comps[k])
                - dw.component(k)
            )
        per_slice.append(abar)
        per_slice_dt.append(FormField(spatial, 1, abar_dt_comps, mdim))
        dt_leg.append(-np.asarray(w, dtype=complex))

    return _embed_spatial_comps(grid_t, spatial.dim, per_slice, per_slice_dt, dt_leg, mdim)


def twisted_loop_value(
    phi: GaugeMap,
    curve: FamilyCurve,
    pair: InvariantPair,
    nt: int = 128,
    profile: SmoothingProfile = DEFAULT_PROFILE,
) -> CircleValue:
    """Level-k value of the twisted loop (phi, curve) on the mapping torus."""
    conn = mapping_torus_connection(phi, curve, nt=nt, profile=profile)
    val = transgression_from_zero(conn, pair).integrate()
    if abs(val.imag) > 1e-8:
        raise InvariantViolation(f"mapping-torus integral has imaginary part {val.imag:.2e}")
    return CircleValue.from_real(MT_ORIENTATION * val.real)


def curvature_polynomial_integral(conn: FormField, pair: InvariantPair) -> float:
    """MT-oriented integral of p(F, F) of an assembled spacetime connection."""
    val = pair_wedge(pair, curvature(conn), curvature(conn)).integrate()
    if abs(val.imag) > 1e-6:
        raise InvariantViolation(f"p(F) integral has imaginary part {val.imag:.2e}")
    return MT_ORIENTATION * val.real


# ---------------------------------------------------------------------------
# line integrals of the character one-form
# ---------------------------------------------------------------------------


def _segment_line_integral(segment, pair: InvariantPair, nt: int) -> float:
    """Integral of the character 1-form along one smooth segment.

    Realised as the MT-oriented transgression integral of the tautological
    connection on M x [0,1] (no dt-leg, analytic time partials), which for
    degree-2 pairings reduces to int dt int_M p(B, B-dot)-type densities.
    """
    a0 = segment.at(0.0)
    spatial = a0.grid
    grid_t = _append_time_axis(spatial, nt, periodic=False)
    per_slice, per_slice_dt = [], []
    for j in range(nt + 1):
        t = j / nt
        per_slice.append(segment.at(t))
        per_slice_dt.append(segment.velocity(t))
    conn = _embed_spatial_comps(grid_t, spatial.dim, per_slice, per_slice_dt, None, a0.matrix_dim)
    val = transgression_from_zero(conn, pair).integrate()
    if abs(val.imag) > 1e-8:
        raise InvariantViolation(f"line integral has imaginary part {val.imag:.2e}")
    return MT_ORIENTATION * val.real


def character_line_integral(curve: FamilyCurve, pair: InvariantPair, nt: int = 32) -> float:
    """Integral of the character 1-form along a piecewise-smooth curve.

    Integrates segment by segment (structurally additive under
    concatenation; junction kinks never meet the quadrature).
    """
    return sum(_segment_line_integral(seg, pair, nt) for seg in curve.segments)


# ---------------------------------------------------------------------------
# curvature and moment pairings
# ---------------------------------------------------------------------------


def curvature_pairing(pair: InvariantPair, a: FormField, b: FormField) -> float:
    """omega(a, b) = 2 int_M p(a ^ b) for tangent directions a, b at any point.

    For degree-2 pairings the curvature of the character is independent of
    the base connection, so no connection argument is needed.
    """
    val = (pair_wedge(pair, a, b) * 2.0).integrate()
    if abs(val.imag) > 1e-9:
        raise InvariantViolation(f"curvature pairing has imaginary part {val.imag:.2e}")
    return val.real


def moment_pairing(pair: InvariantPair, xi: np.ndarray, conn: FormField) -> float:
    """mu(xi; A) = -2 int_M p(xi, F_A) for an algebra-valued 0-form xi."""
    xi_form = FormField(conn.grid, 0, {(): np.asarray(xi, dtype=complex)}, conn.matrix_dim)
    val = (pair_wedge(pair, xi_form, curvature(conn)) * (-2.0)).integrate()
    if abs(val.imag) > 1e-9:
        raise InvariantViolation(f"moment pairing has imaginary part {val.imag:.2e}")
    return val.real
