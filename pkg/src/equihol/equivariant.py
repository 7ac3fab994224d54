"""Equivariant differential characters: axioms, cocycles, cycles, residuals.

A character here is a triple of evaluators over a family of connections
(or any affine parameter space):

* ``evaluator(twist, curve) -> CircleValue`` — the circle-valued holonomy
  of a curve whose endpoint is the twist applied to its start point;
* ``curvature(a, b, base) -> float`` — the symplectic 2-form paired with
  two tangent directions at a base point;
* ``moment(direction, base) -> float`` — the comoment paired with an
  algebra direction at a base point.

The module certifies the defining properties of such a triple on fixture
batteries (:func:`verify_character`), constructs characters from invariant
1-forms (:func:`line_integral_character`) and from other characters by
pullback (:func:`pullback_character`), encodes the induced principal
U(1)-bundle over the parameter space as a cocycle/line-integrator pair
(:func:`build_cocycle`, :func:`holonomy_from_cocycle`), evaluates closed
equivariant 1-cycles (:func:`cycle_value`), and measures projectability
(:func:`projectability_check`) and triviality (:func:`triviality_residual`).

All checks are numerical predicates: each returns residuals against stated
tolerances and never mutates its inputs.  The bundle induced by a character
is represented only by the pair (cocycle, line-integrator); the total space
over an affine (hence contractible) parameter space carries no further
information.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .circle import CircleValue, circle_distance
from .cschar import (
    DEFAULT_PROFILE,
    SmoothingProfile,
    character_line_integral,
    curvature_pairing,
    moment_pairing,
    twisted_loop_value,
)
from .fields import FormField
from .gauge import (
    CurveSegment,
    FamilyCurve,
    GaugeMap,
    LinearSegment,
    OrbitSegment,
    ReparametrisedSegment,
    compose_gauge_maps,
    conjugate_gauge_map,
    gauge_transform,
    identity_gauge_map,
    inverse_gauge_map,
    orbit_velocity,
    su2_gauge_map_exp,
    twisted_endpoint_residual,
)
from .lie import InvariantPair, adjoint_action

__all__ = [
    "EquivariantCharacter",
    "BundleCocycle",
    "EquivariantCycle",
    "AxiomFixture",
    "CheckResult",
    "CharacterReport",
    "ParameterOneForm",
    "ParameterMap",
    "NonInvariantFormError",
    "EquivarianceError",
    "CurvatureMismatchError",
    "TwistMismatchError",
    "CycleClosureError",
    "twisted_loop_character",
    "line_integral_character",
    "pullback_character",
    "build_cocycle",
    "holonomy_from_cocycle",
    "cycle_value",
    "projectability_check",
    "triviality_residual",
    "verify_character",
    "drifted_character",
    "build_axiom_fixture",
    "square_loop",
    "expected_square_flux",
    "straight_twist_path",
    "parameter_line_integral",
    "cocycle_identity_residual",
    "cocycle_path_spread",
    "lift_invariance_residual",
    "signed_fraction",
    "DEFAULT_CHECK_TOLERANCES",
]


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------


class NonInvariantFormError(ValueError):
    """A 1-form supplied as invariant fails an invariance probe."""


class EquivarianceError(ValueError):
    """A parameter map is not equivariant for the supplied group map."""


class CurvatureMismatchError(ValueError):
    """A line-integrator's square-loop values disagree with the curvature."""


class TwistMismatchError(ValueError):
    """A curve's endpoint is not the twist applied to its start point."""


class CycleClosureError(ValueError):
    """An equivariant cycle's segments fail the cyclic closure rule."""


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivariantCharacter:
    """Circle-valued holonomy functional with curvature and moment evaluators.

    ``tag`` records how the character was built: ``"mapping_torus"`` for the
    integrated twisted-loop character, ``"line_integral"`` for characters of
    invariant 1-forms, ``"pullback"`` for pulled-back characters, and
    ``"custom"`` otherwise.
    """

    evaluator: Callable[[Any, Any], CircleValue]
    curvature: Callable[[Any, Any, Any], float]
    moment: Callable[[Any, Any], float]
    tag: str = "custom"

    def value(self, twist: Any, curve: Any) -> CircleValue:
        return self.evaluator(twist, curve)


@dataclass(frozen=True)
class BundleCocycle:
    """The induced U(1)-bundle with connection, encoded as (cocycle, line-integrator).

    ``value(twist, base)`` is the circle-valued cocycle at a base point;
    ``line_integral(curve)`` integrates the connection 1-form along a curve
    of base points (a real number, not reduced mod 1).  ``descriptor``
    documents the connection form: the vertical angular form minus
    2*pi*i times the line-integrand.
    """

    value: Callable[[Any, Any], CircleValue]
    line_integral: Callable[[Any], float]
    descriptor: str = "vertical angular form minus 2*pi*i times the line-integrand"


@dataclass(frozen=True)
class EquivariantCycle:
    """Ordered (twist, curve) pairs subject to the cyclic closure rule.

    The endpoint of each curve, pushed by its twist, must be the start
    point of the next curve (cyclically).
    """

    pairs: Tuple[Tuple[Any, Any], ...]

    def __init__(self, pairs: Sequence[Tuple[Any, Any]]):
        if not pairs:
            raise CycleClosureError("a cycle needs at least one (twist, curve) pair")
        object.__setattr__(self, "pairs", tuple(pairs))

    def closure_residuals(self) -> List[float]:
        """Sup-norm defect at each joint, in cyclic order."""
        out = []
        n = len(self.pairs)
        for i, (twist, curve) in enumerate(self.pairs):
            nxt = self.pairs[(i + 1) % n][1]
            out.append((gauge_transform(twist, curve.end()) - nxt.start()).sup_norm())
        return out


# ---------------------------------------------------------------------------
# character constructors
# ---------------------------------------------------------------------------


def twisted_loop_character(
    pair: InvariantPair,
    nt: int = 128,
    profile: SmoothingProfile = DEFAULT_PROFILE,
) -> EquivariantCharacter:
    """The integrated twisted-loop character of a level-k invariant pairing.

    Evaluation assembles the mapping torus of (twist, curve) and takes its
    circle-valued action; curvature and moment are the closed-form pairings.
    """

    def evaluator(twist: GaugeMap, curve: FamilyCurve) -> CircleValue:
        return twisted_loop_value(twist, curve, pair, nt=nt, profile=profile)

    def curvature(a: FormField, b: FormField, base: Any = None) -> float:
        return curvature_pairing(pair, a, b)

    def moment(direction: np.ndarray, base: FormField) -> float:
        return moment_pairing(pair, direction, base)

    return EquivariantCharacter(evaluator, curvature, moment, tag="mapping_torus")


@dataclass(frozen=True)
class ParameterOneForm:
    """A 1-form on the affine parameter space of connections.

    ``pairing(base, tangent)`` evaluates the form; optional ``exterior``
    supplies an analytic exterior derivative ``(a, b, base) -> float`` and
    ``orbit_contraction`` an analytic ``(direction, base) -> float`` for the
    contraction with the orbit direction.  Missing evaluators fall back to
    central finite differences / the generic orbit-velocity contraction.
    """

    pairing: Callable[[Any, Any], float]
    exterior: Optional[Callable[[Any, Any, Any], float]] = None
    orbit_contraction: Optional[Callable[[Any, Any], float]] = None
    derivative_step: float = 1e-4


def _one_form_exterior(beta: ParameterOneForm, a: Any, b: Any, base: Any) -> float:
    if beta.exterior is not None:
        return beta.exterior(a, b, base)
    h = beta.derivative_step
    da_of_b = (beta.pairing(base + a * h, b) - beta.pairing(base + a * (-h), b)) / (2.0 * h)
    db_of_a = (beta.pairing(base + b * h, a) - beta.pairing(base + b * (-h), a)) / (2.0 * h)
    return da_of_b - db_of_a


_SEG_NODES, _SEG_WEIGHTS = np.polynomial.legendre.leggauss(32)
_SEG_NODES = 0.5 * (_SEG_NODES + 1.0)
_SEG_WEIGHTS = 0.5 * _SEG_WEIGHTS


def parameter_line_integral(beta: ParameterOneForm, curve: Any, nodes=None) -> float:
    """Gauss-Legendre line integral of a parameter-space 1-form along a curve."""
    if nodes is None:
        ns, ws = _SEG_NODES, _SEG_WEIGHTS
    else:
        ns, ws = np.polynomial.legendre.leggauss(nodes)
        ns = 0.5 * (ns + 1.0)
        ws = 0.5 * ws
    total = 0.0
    for seg in curve.segments:
        for s, w in zip(ns, ws):
            total += w * beta.pairing(seg.at(s), seg.velocity(s))
    return total


def _pushed_tangent(twist: GaugeMap, tangent: FormField) -> FormField:
    comps = {k: adjoint_action(twist.mats, v) for k, v in tangent.comps.items()}
    return FormField(tangent.grid, 1, comps, matrix_dim=max(tangent.matrix_dim, twist.group.matrix_dim))


def line_integral_character(
    beta: ParameterOneForm,
    invariance_probes: Iterable[Tuple[Any, Any, Any]] = (),
    invariance_tol: float = 1e-8,
) -> EquivariantCharacter:
    """Character of an invariant parameter-space 1-form: value = line integral mod 1.

    ``invariance_probes`` is an iterable of (twist, base, tangent) triples;
    each checks |beta(twist.base, twist_*tangent) - beta(base, tangent)|
    within ``invariance_tol``.  The resulting character has curvature equal
    to the exterior derivative of the form and moment equal to minus its
    contraction with the orbit direction.
    """
    for twist, base, tangent in invariance_probes:
        moved = beta.pairing(gauge_transform(twist, base), _pushed_tangent(twist, tangent))
        resid = abs(moved - beta.pairing(base, tangent))
        if resid > invariance_tol:
            raise NonInvariantFormError(
                f"1-form moves by {resid:.2e} under a declared symmetry (tolerance {invariance_tol})"
            )

    def evaluator(twist: Any, curve: Any) -> CircleValue:
        return CircleValue.from_real(parameter_line_integral(beta, curve))

    def curvature(a: Any, b: Any, base: Any) -> float:
        return _one_form_exterior(beta, a, b, base)

    def moment(direction: Any, base: Any) -> float:
        if beta.orbit_contraction is not None:
            return -beta.orbit_contraction(direction, base)
        return -beta.pairing(base, orbit_velocity(base, direction))

    return EquivariantCharacter(evaluator, curvature, moment, tag="line_integral")


@dataclass(frozen=True)
class ParameterMap:
    """A smooth map between parameter spaces with its tangent pushforward.

    ``point`` maps base points, ``tangent(base, a)`` pushes tangents
    forward at a base point, and ``algebra`` (optional) maps algebra
    directions alongside a group map, for moment evaluation.
    """

    point: Callable[[Any], Any]
    tangent: Callable[[Any, Any], Any]
    algebra: Optional[Callable[[Any], Any]] = None


@dataclass(frozen=True)
class _MappedSegment(CurveSegment):
    inner: CurveSegment
    mapping: ParameterMap

    def at(self, s: float):
        return self.mapping.point(self.inner.at(s))

    def velocity(self, s: float):
        return self.mapping.tangent(self.inner.at(s), self.inner.velocity(s))


def _mapped_curve(curve: FamilyCurve, mapping: ParameterMap) -> FamilyCurve:
    return FamilyCurve([_MappedSegment(seg, mapping) for seg in curve.segments])


def pullback_character(
    char: EquivariantCharacter,
    mapping: ParameterMap,
    group_map: Callable[[Any], Any],
    equivariance_probes: Iterable[Tuple[Any, Any]] = (),
    equivariance_tol: float = 1e-8,
) -> EquivariantCharacter:
    """Pull a character back along a parameter map and a group homomorphism.

    The new evaluator is (twist, curve) -> char(group_map(twist), mapped
    curve).  ``equivariance_probes`` is an iterable of (twist, base) pairs,
    each checking that mapping the twisted point equals twisting the mapped
    point within ``equivariance_tol``.
    """
    for twist, base in equivariance_probes:
        lhs = mapping.point(gauge_transform(twist, base))
        rhs = gauge_transform(group_map(twist), mapping.point(base))
        resid = (lhs - rhs).sup_norm()
        if resid > equivariance_tol:
            raise EquivarianceError(
                f"parameter map fails equivariance by {resid:.2e} (tolerance {equivariance_tol})"
            )

    def evaluator(twist: Any, curve: Any) -> CircleValue:
        return char.evaluator(group_map(twist), _mapped_curve(curve, mapping))

    def curvature(a: Any, b: Any, base: Any) -> float:
        return char.curvature(mapping.tangent(base, a), mapping.tangent(base, b), mapping.point(base))

    def moment(direction: Any, base: Any) -> float:
        if mapping.algebra is None:
            raise EquivarianceError("pullback moment needs an algebra map on the parameter map")
        return char.moment(mapping.algebra(direction), mapping.point(base))

    return EquivariantCharacter(evaluator, curvature, moment, tag="pullback")


# ---------------------------------------------------------------------------
# geometric helpers on the affine parameter space
# ---------------------------------------------------------------------------


def square_loop(base: Any, a: Any, b: Any, eps: float) -> FamilyCurve:
    """Boundary loop of the affine square spanned by eps*a and eps*b at base."""
    c0 = base
    c1 = base + a * eps
    c2 = base + a * eps + b * eps
    c3 = base + b * eps
    return FamilyCurve(
        [LinearSegment(c0, c1), LinearSegment(c1, c2), LinearSegment(c2, c3), LinearSegment(c3, c0)]
    )


_SQ_NODES, _SQ_WEIGHTS = np.polynomial.legendre.leggauss(6)
_SQ_NODES = 0.5 * (_SQ_NODES + 1.0)
_SQ_WEIGHTS = 0.5 * _SQ_WEIGHTS


def expected_square_flux(char: EquivariantCharacter, base: Any, a: Any, b: Any, eps: float) -> float:
    """Flux of the character's curvature through the filled affine square.

    2D Gauss-Legendre quadrature of curvature(a, b; base + u a + v b) over
    u, v in [0, eps]; exact when the curvature is affine-independent.
    """
    total = 0.0
    for u, wu in zip(_SQ_NODES, _SQ_WEIGHTS):
        for v, wv in zip(_SQ_NODES, _SQ_WEIGHTS):
            point = base + a * (u * eps) + b * (v * eps)
            total += wu * wv * char.curvature(a, b, point)
    return total * eps * eps


def straight_twist_path(twist: GaugeMap, base: FormField) -> FamilyCurve:
    """The straight segment from a base point to its twist image."""
    return FamilyCurve([LinearSegment(base, gauge_transform(twist, base))])


def signed_fraction(value: CircleValue) -> float:
    """Representative of a circle value in (-1/2, 1/2]."""
    x = value.value
    return x if x <= 0.5 else x - 1.0


# ---------------------------------------------------------------------------
# cocycle construction and holonomy
# ---------------------------------------------------------------------------


def cocycle_path_spread(
    char: EquivariantCharacter,
    line_integrator: Callable[[FamilyCurve], float],
    twist: GaugeMap,
    base: FormField,
    via: FormField,
) -> float:
    """Circle distance between the two cocycle values computed along the
    straight path and along a two-leg detour through ``via``."""
    straight = straight_twist_path(twist, base)
    end = gauge_transform(twist, base)
    detour = FamilyCurve([LinearSegment(base, via), LinearSegment(via, end)])
    v1 = CircleValue.from_real(line_integrator(straight)) - char.evaluator(twist, straight)
    v2 = CircleValue.from_real(line_integrator(detour)) - char.evaluator(twist, detour)
    return v1.distance(v2)


def build_cocycle(
    char: EquivariantCharacter,
    line_integrator: Callable[[FamilyCurve], float],
    square_probes: Iterable[Tuple[Any, Any, Any, float]] = (),
    square_tol: float = 1e-5,
    path_probes: Iterable[Tuple[GaugeMap, FormField, FormField]] = (),
    path_tol: float = 1e-6,
) -> BundleCocycle:
    """Cocycle of the induced U(1)-bundle: value = line integral minus character.

    ``line_integrator`` must integrate a 1-form whose exterior derivative is
    the character's curvature; ``square_probes`` (base, a, b, eps) verify
    this on small affine square loops within ``square_tol`` and
    ``path_probes`` (twist, base, via) verify path independence of the
    cocycle within ``path_tol``.  Both failures raise
    :class:`CurvatureMismatchError`.
    """
    for base, a, b, eps in square_probes:
        loop = square_loop(base, a, b, eps)
        resid = abs(line_integrator(loop) - expected_square_flux(char, base, a, b, eps))
        if resid > square_tol:
            raise CurvatureMismatchError(
                f"square-loop integral differs from curvature flux by {resid:.2e} "
                f"(tolerance {square_tol})"
            )
    for twist, base, via in path_probes:
        spread = cocycle_path_spread(char, line_integrator, twist, base, via)
        if spread > path_tol:
            raise CurvatureMismatchError(
                f"cocycle value depends on the path by {spread:.2e} (tolerance {path_tol})"
            )

    def value(twist: GaugeMap, base: FormField) -> CircleValue:
        curve = straight_twist_path(twist, base)
        return CircleValue.from_real(line_integrator(curve)) - char.evaluator(twist, curve)

    return BundleCocycle(value=value, line_integral=line_integrator)


def cocycle_identity_residual(
    cocycle: BundleCocycle, outer: GaugeMap, inner: GaugeMap, base: FormField
) -> float:
    """Residual of value(outer*inner, base) = value(inner, base) + value(outer, inner.base)."""
    combined = cocycle.value(compose_gauge_maps(outer, inner), base)
    split = cocycle.value(inner, base) + cocycle.value(outer, gauge_transform(inner, base))
    return combined.distance(split)


def holonomy_from_cocycle(
    cocycle: BundleCocycle,
    twist: GaugeMap,
    curve: FamilyCurve,
    twist_tol: float = 1e-8,
) -> CircleValue:
    """Holonomy of a twisted curve in the induced bundle: line integral minus
    the cocycle at the start point."""
    resid = twisted_endpoint_residual(curve, twist)
    if resid > twist_tol:
        raise TwistMismatchError(
            f"curve endpoint differs from twisted start by {resid:.2e} (tolerance {twist_tol})"
        )
    return CircleValue.from_real(cocycle.line_integral(curve)) - cocycle.value(twist, curve.start())


# ---------------------------------------------------------------------------
# equivariant cycles
# ---------------------------------------------------------------------------


def _straight_connector(index: int, start: FormField, end: FormField) -> FamilyCurve:
    return FamilyCurve([LinearSegment(start, end)])


def cycle_value(
    char: EquivariantCharacter,
    cycle: EquivariantCycle,
    connector: Callable[[int, Any, Any], FamilyCurve] = _straight_connector,
    closure_tol: float = 1e-8,
) -> CircleValue:
    """Value of a character on a closed equivariant 1-cycle.

    Each pair (twist_i, curve_i) is closed off by an auxiliary curve tau_i
    from curve_i's endpoint to its twist image (``connector`` chooses it;
    straight segments by default); the value is the character of the
    concatenated untwisted loop minus the sum of the characters of the
    (twist_i, tau_i).  The result is independent of the connector choice up
    to the evaluator's discretisation error, and on a one-pair cycle
    (inverse twist, curve) reproduces the character of (twist, curve).
    """
    residuals = cycle.closure_residuals()
    worst = max(residuals)
    if worst > closure_tol:
        raise CycleClosureError(
            f"cycle joints fail closure by {worst:.2e} (tolerance {closure_tol})"
        )
    loop: Optional[FamilyCurve] = None
    correction: Optional[CircleValue] = None
    for i, (twist, curve) in enumerate(cycle.pairs):
        tail = connector(i, curve.end(), gauge_transform(twist, curve.end()))
        piece = curve.concat(tail)
        loop = piece if loop is None else loop.concat(piece)
        term = char.evaluator(twist, tail)
        correction = term if correction is None else correction + term
    first_twist = cycle.pairs[0][0]
    neutral = identity_gauge_map(first_twist.group, first_twist.grid)
    return char.evaluator(neutral, loop) - correction


# ---------------------------------------------------------------------------
# projectability and triviality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectabilityResult:
    projectable: bool
    residual: float
    tolerance: float


def projectability_check(
    char: EquivariantCharacter,
    generators: Sequence[Any],
    bases: Sequence[Any],
    tol: float = 1e-6,
) -> ProjectabilityResult:
    """Whether the character descends along the declared symmetry directions.

    Projectable iff the moment paired with every generator vanishes (within
    ``tol``) at every supplied base point; the worst residual is returned.
    When projectable, evaluation on curves that lift loops of the quotient
    is well defined: see :func:`lift_invariance_residual`.
    """
    worst = 0.0
    for base in bases:
        for direction in generators:
            worst = max(worst, abs(char.moment(direction, base)))
    return ProjectabilityResult(projectable=worst < tol, residual=worst, tolerance=tol)


def lift_invariance_residual(
    char: EquivariantCharacter,
    twist_a: Any,
    curve_a: Any,
    twist_b: Any,
    curve_b: Any,
) -> float:
    """Circle distance between the character's values on two lifts of the
    same quotient loop; small for projectable characters."""
    return char.evaluator(twist_a, curve_a).distance(char.evaluator(twist_b, curve_b))


def triviality_residual(
    char: EquivariantCharacter,
    beta: ParameterOneForm,
    battery: Iterable[Tuple[Any, Any]],
) -> float:
    """Worst circle distance between the character and the line integral of a
    candidate trivialising invariant 1-form over a battery of (twist, curve)."""
    worst = 0.0
    for twist, curve in battery:
        lhs = char.evaluator(twist, curve)
        rhs = CircleValue.from_real(parameter_line_integral(beta, curve))
        worst = max(worst, lhs.distance(rhs))
    return worst


# ---------------------------------------------------------------------------
# axiom fixtures and verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomFixture:
    """Prepared inputs for the axiom suite on one fixture.

    All derived objects (composites, inverses, reversals) are prepared by
    the builder so that verification stays agnostic of the parameter-space
    representation.  Optional cases may be ``None``; the report counts how
    many fixtures exercised each check.
    """

    name: str
    twist: Any
    curve: Any
    second_twist: Any = None
    second_curve: Any = None
    composed_twist: Any = None
    composed_curve: Any = None
    basepoint_curve: Any = None
    inverse_twist: Any = None
    reversed_curve: Any = None
    conjugated_twist: Any = None
    conjugated_curve: Any = None
    reparametrised_curve: Any = None
    identity_twist: Any = None
    square: Optional[Tuple[Any, Any, Any, float]] = None
    square_curve: Any = None
    orbit_base: Any = None
    orbit_direction: Any = None
    orbit_case: Optional[Callable[[float], Tuple[Any, Any]]] = None


def _smoothstep(s: float) -> float:
    return s * s * (3.0 - 2.0 * s)


def _smoothstep_velocity(s: float) -> float:
    return 6.0 * s * (1.0 - s)


def build_axiom_fixture(
    name: str,
    twist: GaugeMap,
    curve: FamilyCurve,
    second_twist: GaugeMap,
    second_leg: Optional[FormField] = None,
    basepoint_offset: Optional[FormField] = None,
    square: Optional[Tuple[FormField, FormField, FormField, float]] = None,
    orbit_direction: Optional[np.ndarray] = None,
    orbit_partials: Optional[dict] = None,
) -> AxiomFixture:
    """Prepare the full axiom case list from minimal gauge-world data.

    * ``second_leg``: optional way point for the second curve (which runs
      from the first curve's endpoint to its ``second_twist`` image);
    * ``basepoint_offset``: tangent offset defining the auxiliary curve for
      the basepoint-independence case;
    * ``square``: (base, a, b, eps) for the filled-loop case;
    * ``orbit_direction``/``orbit_partials``: algebra-valued 0-form sample
      (with exact partials) for the derivative-vs-moment case.
    """
    start = curve.start()
    end = curve.end()

    second_end = gauge_transform(second_twist, end)
    if second_leg is not None:
        second_curve = FamilyCurve([LinearSegment(end, second_leg), LinearSegment(second_leg, second_end)])
    else:
        second_curve = FamilyCurve([LinearSegment(end, second_end)])
    composed_twist = compose_gauge_maps(second_twist, twist)
    composed_curve = curve.concat(second_curve)

    basepoint_curve = None
    if basepoint_offset is not None:
        zeta = FamilyCurve([LinearSegment(start, start + basepoint_offset)])
        basepoint_curve = zeta.reverse().concat(curve).concat(zeta.transform(twist))

    square_curve = None
    if square is not None:
        base, a, b, eps = square
        square_curve = square_loop(base, a, b, eps)

    orbit_case = None
    orbit_base = None
    if orbit_direction is not None:
        orbit_base = start
        grid = start.grid
        direction = np.asarray(orbit_direction, dtype=complex)

        def orbit_case(t: float) -> Tuple[GaugeMap, FamilyCurve]:
            parts = None
            if orbit_partials is not None:
                parts = {axis: t * v for axis, v in orbit_partials.items()}
            moved = su2_gauge_map_exp(grid, t * direction, parts)
            path = FamilyCurve(
                [OrbitSegment(base=start, xi=direction, scale=t, group=twist.group, xi_partials=orbit_partials)]
            )
            return moved, path

    reparametrised = FamilyCurve(
        [ReparametrisedSegment(seg, _smoothstep, _smoothstep_velocity) for seg in curve.segments]
    )

    return AxiomFixture(
        name=name,
        twist=twist,
        curve=curve,
        second_twist=second_twist,
        second_curve=second_curve,
        composed_twist=composed_twist,
        composed_curve=composed_curve,
        basepoint_curve=basepoint_curve,
        inverse_twist=inverse_gauge_map(twist),
        reversed_curve=curve.reverse(),
        conjugated_twist=conjugate_gauge_map(second_twist, twist),
        conjugated_curve=curve.transform(second_twist),
        reparametrised_curve=reparametrised,
        identity_twist=identity_gauge_map(twist.group, twist.grid),
        square=square,
        square_curve=square_curve,
        orbit_base=orbit_base,
        orbit_direction=orbit_direction,
        orbit_case=orbit_case,
    )


@dataclass
class CheckResult:
    name: str
    tolerance: float
    max_residual: float = 0.0
    count: int = 0
    worst_fixture: str = ""

    @property
    def passed(self) -> bool:
        return self.count == 0 or self.max_residual <= self.tolerance

    def record(self, fixture_name: str, residual: float) -> None:
        self.count += 1
        if residual >= self.max_residual:
            self.max_residual = residual
            self.worst_fixture = fixture_name

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "count": self.count,
            "passed": self.passed,
            "worst_fixture": self.worst_fixture,
        }


@dataclass
class CharacterReport:
    tag: str
    checks: Dict[str, CheckResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "passed": self.passed,
            "checks": {name: c.to_dict() for name, c in sorted(self.checks.items())},
        }

    def lines(self) -> List[str]:
        out = []
        for name, c in self.checks.items():
            status = "pass" if c.passed else "FAIL"
            out.append(
                f"{status}  {name}: max residual {c.max_residual:.3e} "
                f"(tolerance {c.tolerance:.0e}, {c.count} fixtures)"
            )
        return out


DEFAULT_CHECK_TOLERANCES = {
    "composition": 1e-6,
    "basepoint_independence": 1e-6,
    "filled_loop_flux": 1e-5,
    "orbit_derivative": 1e-4,
    "reversal": 1e-6,
    "conjugation": 1e-6,
    "reparametrisation": 1e-6,
}

CHECK_ORDER = tuple(DEFAULT_CHECK_TOLERANCES)


def verify_character(
    char: EquivariantCharacter,
    fixtures: Sequence[AxiomFixture],
    tolerances: Optional[Dict[str, float]] = None,
    derivative_step: float = 0.1,
) -> CharacterReport:
    """Run the axiom suite on a fixture battery; a report is always produced.

    Checks, in report order:

    * ``composition`` — the value of a composite twist on a concatenated
      curve is the sum of the two values;
    * ``basepoint_independence`` — conjugating the curve by an auxiliary
      path from a new base point leaves the value unchanged;
    * ``filled_loop_flux`` — on an untwisted affine square boundary the
      value is the curvature flux through the square, mod 1;
    * ``orbit_derivative`` — the central finite difference (step
      ``derivative_step``) of the value along exponential orbit paths
      matches the moment;
    * ``reversal`` — the value of the inverse twist on the reversed curve
      is minus the value;
    * ``conjugation`` — conjugating the twist and pushing the curve by the
      conjugator leaves the value unchanged;
    * ``reparametrisation`` — smooth monotone reparametrisation of the
      curve leaves the value unchanged.
    """
    tols = dict(DEFAULT_CHECK_TOLERANCES)
    if tolerances:
        tols.update(tolerances)
    report = CharacterReport(tag=char.tag)
    for key in CHECK_ORDER:
        report.checks[key] = CheckResult(name=key, tolerance=tols[key])

    for fx in fixtures:
        base_value = char.evaluator(fx.twist, fx.curve)

        if fx.composed_twist is not None and fx.composed_curve is not None:
            combined = char.evaluator(fx.composed_twist, fx.composed_curve)
            second = char.evaluator(fx.second_twist, fx.second_curve)
            resid = combined.distance(base_value + second)
            report.checks["composition"].record(fx.name, resid)

        if fx.basepoint_curve is not None:
            moved = char.evaluator(fx.twist, fx.basepoint_curve)
            report.checks["basepoint_independence"].record(fx.name, moved.distance(base_value))

        if fx.square is not None and fx.square_curve is not None:
            base, a, b, eps = fx.square
            flux = expected_square_flux(char, base, a, b, eps)
            loop_value = char.evaluator(fx.identity_twist, fx.square_curve)
            report.checks["filled_loop_flux"].record(fx.name, loop_value.distance(flux))

        if fx.orbit_case is not None:
            h = derivative_step
            twist_p, curve_p = fx.orbit_case(h)
            twist_m, curve_m = fx.orbit_case(-h)
            diff = char.evaluator(twist_p, curve_p) - char.evaluator(twist_m, curve_m)
            derivative = signed_fraction(diff) / (2.0 * h)
            expected = char.moment(fx.orbit_direction, fx.orbit_base)
            report.checks["orbit_derivative"].record(fx.name, abs(derivative - expected))

        if fx.inverse_twist is not None and fx.reversed_curve is not None:
            opposite = char.evaluator(fx.inverse_twist, fx.reversed_curve)
            report.checks["reversal"].record(fx.name, (opposite + base_value).distance(0.0))

        if fx.conjugated_twist is not None and fx.conjugated_curve is not None:
            conjugated = char.evaluator(fx.conjugated_twist, fx.conjugated_curve)
            report.checks["conjugation"].record(fx.name, conjugated.distance(base_value))

        if fx.reparametrised_curve is not None:
            rep = char.evaluator(fx.twist, fx.reparametrised_curve)
            report.checks["reparametrisation"].record(fx.name, rep.distance(base_value))

    return report


def drifted_character(char: EquivariantCharacter, drift: float = 0.1) -> EquivariantCharacter:
    """Deliberately corrupted copy: every evaluation picks up a constant
    drift (the endpoint value of a drift growing linearly along the curve).
    Used to demonstrate that the suite detects broken characters: the
    composition check then fails with residual equal to the drift."""

    def evaluator(twist: Any, curve: Any) -> CircleValue:
        return char.evaluator(twist, curve) + CircleValue.from_real(drift)

    return EquivariantCharacter(evaluator, char.curvature, char.moment, tag="custom")
