"""Command line interface: scenario configs in, machine-readable reports out.

Scenarios are INI files.  A single-scenario file uses a ``[scenario]``
section; a multi-scenario file (for the ``report`` subcommand) uses
``[scenario:<name>]`` sections, each with optional companion sections
``[twist:<name>]``, ``[curve:<name>]``, ``[tolerances:<name>]`` and
``[expected:<name>]`` (the unsuffixed companions pair with ``[scenario]``).

``[scenario]`` keys
    name            free-form label (defaults to the section suffix)
    operation       cs | xi | verify | curvature | moment | oracle
                    (forced by the subcommand for single-operation runs)
    group           U1 | SU2 (required)
    level           nonzero integer scaling the invariant pairing (default 1)
    grid            spatial resolution per axis, at least 8 (default 16)
    nt              loop-parameter resolution (default 128)
    seed            RNG seed for the deterministic fixture draws
    fixtures        F1 (abelian trig) | F2 (SU2 trig) | flat-twisted-lattice
                    | resonant | diag-pair | flat | curved-moment | loop-ellipse
    count           battery size for verify (default 4)
    steps           lattice path length for oracle runs (default 3)
    alpha           amplitude of the resonant constant connection (default 0.7)
    amplitude       amplitude of random trig draws (default 0.3)
    convergence     whitespace-separated grid sizes for a refinement table

``[twist]`` keys: winding (two integers, default ``0 0``), amplitude
(trig phase amplitude, default 0), constant (circle offset; a rational
like ``1/3`` for lattice runs, a float otherwise).

``[curve]`` keys: kind (constant | linear | loop-square | loop-ellipse |
program), amplitude, eps (square side), waypoints (program legs), b, c
(ellipse semi-axes).

``[tolerances]``: per-check overrides for the verify battery (composition,
basepoint_independence, filled_loop_flux, orbit_derivative, reversal,
conjugation, reparametrisation).

``[expected]``: value (float) or num/den (exact rational), plus tol.

Exit codes: 0 all verdicts pass, 1 a numerical verdict failed (the report,
including residual tables, is still emitted), 2 the config could not be
parsed (the message names the offending line or field), 3 the config parsed
but violates an input invariant (grid too small, nonpositive tolerance,
winding twist on the smooth pipeline, ...).

JSON reports are canonical: keys sorted, floats rounded to 12 significant
digits, rationals as ``{"num": ..., "den": ...}``, no whitespace, single
trailing newline.  Repeated runs of the same config on one platform emit
byte-identical JSON; wall-clock timings are only embedded when requested
with ``--with-timings``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .abelian_oracle import (
    LatticeTwist,
    apply_twist_to_slice,
    exact_twisted_loop_value_u1,
    random_lattice_path,
    random_lattice_slice,
)
from .circle import CircleValue
from .cschar import (
    chern_simons_action,
    curvature_pairing,
    twisted_loop_value,
)
from .equivariant import (
    CHECK_ORDER,
    DEFAULT_CHECK_TOLERANCES,
    CharacterReport,
    CheckResult,
    projectability_check,
    square_loop,
    straight_twist_path,
    twisted_loop_character,
    verify_character,
)
from .fields import FormField, torus_grid
from .fixtures import (
    random_trig_poly,
    su2_axiom_battery,
    su2_generic_t3,
    su2_resonant_t3,
    su2_trig_one_form,
    su2_trig_scalar,
    u1_axiom_battery,
    u1_curved_moment_fixture,
    u1_flat_family,
    u1_trig_one_form,
    u1_winding_zero_lattice_path,
    u1_winding_zero_loop,
)
from .gauge import gauge_transform, identity_gauge_map, su2_gauge_map_exp, u1_gauge_map
from .gauge import FamilyCurve, LinearSegment
from .lie import SU2, U1, invariant_pair, su2_from_components

__all__ = [
    "ConfigError",
    "ScenarioInvariantError",
    "Scenario",
    "Report",
    "parse_scenarios",
    "run_scenario",
    "emit_report",
    "main",
]

THREADS_ENV_VAR = "EQUIHOL_THREADS"

OPERATIONS = ("cs", "xi", "verify", "curvature", "moment", "oracle")

SIGN_CONVENTIONS = (
    "pairing: p(X,Y) = c * trace(XY) with c = -level/(4 pi^2) for U1 "
    "and c = -level/(8 pi^2) for SU2",
    "circle values: holonomies and actions are reported in [0,1) as "
    "fractions of a full turn",
    "curvature pairing: omega(a,b) = 2 * integral of p(a wedge b) over the base",
    "moment pairing: mu(xi;A) = -2 * integral of p(xi, F_A) over the base",
    "mapping torus: the loop parameter is the last coordinate and temporal "
    "integrals carry an orientation factor of -1",
    "boundary slabs: the boundary character is the top-face pullback minus "
    "the bottom-face pullback, matching the bulk integral with factor +1",
)

_CS_FAMILIES = ("resonant", "F1", "F2")
_XI_FAMILIES = ("F1", "F2")
_VERIFY_FAMILIES = ("F1", "F2")
_CURVATURE_FAMILIES = ("diag-pair", "F1", "F2")
_MOMENT_FAMILIES = ("flat", "curved-moment")
_ORACLE_FAMILIES = ("flat-twisted-lattice", "loop-ellipse")

_CURVE_KINDS = ("constant", "linear", "loop-square", "loop-ellipse", "program")

_DEFAULT_VALUE_TOL = {
    "cs": 1e-8,
    "xi": 1e-8,
    "curvature": 1e-8,
    "moment": 1e-6,
    "oracle": 1e-5,
}

_MIN_GRID = 8
_CONVERGENCE_ORDER_THRESHOLD = 1.9


class ConfigError(Exception):
    """The scenario config could not be parsed (exit code 2)."""


class ScenarioInvariantError(Exception):
    """The config parsed but violates an input invariant (exit code 3)."""


# ---------------------------------------------------------------------------
# scenario parsing
# ---------------------------------------------------------------------------


_SCENARIO_KEYS = {
    "name",
    "operation",
    "group",
    "level",
    "grid",
    "nt",
    "seed",
    "fixtures",
    "count",
    "steps",
    "alpha",
    "amplitude",
    "convergence",
}
_TWIST_KEYS = {"winding", "amplitude", "constant"}
_CURVE_KEYS = {"kind", "amplitude", "eps", "waypoints", "b", "c"}
_EXPECTED_KEYS = {"value", "num", "den", "tol"}


@dataclass(frozen=True)
class Scenario:
    """One parsed scenario: typed fields plus the raw key/value echo."""

    name: str
    operation: str
    group: str
    level: int
    grid: int
    nt: int
    seed: int
    fixtures: str
    count: int
    steps: int
    alpha: float
    amplitude: float
    convergence: Tuple[int, ...]
    twist: Dict[str, str]
    curve: Dict[str, str]
    tolerances: Dict[str, float]
    expected: Dict[str, str]
    tolerance: Optional[float]
    echo: Dict[str, Any]


def _section_int(section: str, raw: Dict[str, str], key: str, default: int) -> int:
    if key not in raw:
        return default
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(f"[{section}] field '{key}': expected an integer, got {raw[key]!r}")


def _section_float(section: str, raw: Dict[str, str], key: str, default: float) -> float:
    if key not in raw:
        return default
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"[{section}] field '{key}': expected a number, got {raw[key]!r}")


def _parse_fraction(section: str, key: str, text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"[{section}] field '{key}': expected a rational like 1/3, got {text!r}")


def _parse_ints(section: str, key: str, text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split())
    except ValueError:
        raise ConfigError(f"[{section}] field '{key}': expected whitespace-separated integers")


def _check_keys(section: str, raw: Dict[str, str], allowed: set) -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"[{section}] unknown field '{unknown[0]}'")


def parse_scenarios(config_text: str) -> List[Scenario]:
    """Parse an INI scenario config into a list of scenarios, in file order."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(config_text)
    except configparser.Error as exc:
        raise ConfigError(str(exc))

    suffixes: List[str] = []
    known: Dict[str, Dict[str, Dict[str, str]]] = {}
    for section in parser.sections():
        base, _, suffix = section.partition(":")
        if base not in ("scenario", "twist", "curve", "tolerances", "expected"):
            raise ConfigError(f"unknown section [{section}]")
        known.setdefault(suffix, {})[base] = dict(parser.items(section))
        if base == "scenario":
            suffixes.append(suffix)
    if not suffixes:
        raise ConfigError("no [scenario] section found")
    for suffix, sections in known.items():
        if "scenario" not in sections:
            extras = ", ".join(sorted(sections))
            label = suffix or "(unsuffixed)"
            raise ConfigError(f"sections for {label} ({extras}) have no matching [scenario] section")

    scenarios: List[Scenario] = []
    for suffix in suffixes:
        sections = known[suffix]
        sec = "scenario" + (f":{suffix}" if suffix else "")
        raw = sections["scenario"]
        _check_keys(sec, raw, _SCENARIO_KEYS)
        twist_raw = sections.get("twist", {})
        _check_keys("twist" + (f":{suffix}" if suffix else ""), twist_raw, _TWIST_KEYS)
        curve_raw = sections.get("curve", {})
        _check_keys("curve" + (f":{suffix}" if suffix else ""), curve_raw, _CURVE_KEYS)
        tol_raw = sections.get("tolerances", {})
        _check_keys(
            "tolerances" + (f":{suffix}" if suffix else ""), tol_raw, set(DEFAULT_CHECK_TOLERANCES)
        )
        expected_raw = sections.get("expected", {})
        _check_keys("expected" + (f":{suffix}" if suffix else ""), expected_raw, _EXPECTED_KEYS)

        if "group" not in raw:
            raise ConfigError(f"[{sec}] missing required field: group")
        group = raw["group"].strip()
        if group not in ("U1", "SU2"):
            raise ConfigError(f"[{sec}] field 'group': expected U1 or SU2, got {group!r}")
        operation = raw.get("operation", "").strip()
        if operation and operation not in OPERATIONS:
            raise ConfigError(
                f"[{sec}] field 'operation': expected one of {', '.join(OPERATIONS)}, "
                f"got {operation!r}"
            )
        name = raw.get("name", "").strip() or suffix or "scenario"

        tolerances: Dict[str, float] = {}
        for key, text in tol_raw.items():
            tolerances[key] = _section_float("tolerances", tol_raw, key, 0.0)

        convergence = _parse_ints(sec, "convergence", raw.get("convergence", ""))
        tolerance = (
            _section_float(sec, raw, "tolerance", 0.0) if "tolerance" in raw else None
        )

        echo: Dict[str, Any] = {"scenario": dict(raw)}
        for label, block in (
            ("twist", twist_raw),
            ("curve", curve_raw),
            ("tolerances", tol_raw),
            ("expected", expected_raw),
        ):
            if block:
                echo[label] = dict(block)

        scenarios.append(
            Scenario(
                name=name,
                operation=operation,
                group=group,
                level=_section_int(sec, raw, "level", 1),
                grid=_section_int(sec, raw, "grid", 16),
                nt=_section_int(sec, raw, "nt", 128),
                seed=_section_int(sec, raw, "seed", 20260813),
                fixtures=raw.get("fixtures", "").strip(),
                count=_section_int(sec, raw, "count", 4),
                steps=_section_int(sec, raw, "steps", 3),
                alpha=_section_float(sec, raw, "alpha", 0.7),
                amplitude=_section_float(sec, raw, "amplitude", 0.30),
                convergence=convergence,
                twist=dict(twist_raw),
                curve=dict(curve_raw),
                tolerances=tolerances,
                expected=dict(expected_raw),
                tolerance=tolerance,
                echo=echo,
            )
        )
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise ConfigError(f"duplicate scenario name {dup!r}; give each [scenario:<name>] a unique name")
    return scenarios


_FAMILY_BY_OP = {
    "cs": _CS_FAMILIES,
    "xi": _XI_FAMILIES,
    "verify": _VERIFY_FAMILIES,
    "curvature": _CURVATURE_FAMILIES,
    "moment": _MOMENT_FAMILIES,
    "oracle": _ORACLE_FAMILIES,
}

_DEFAULT_FAMILY = {
    "cs": {"U1": "F1", "SU2": "F2"},
    "xi": {"U1": "F1", "SU2": "F2"},
    "verify": {"U1": "F1", "SU2": "F2"},
    "curvature": {"U1": "F1", "SU2": "diag-pair"},
    "moment": {"U1": "curved-moment", "SU2": "curved-moment"},
    "oracle": {"U1": "flat-twisted-lattice", "SU2": "flat-twisted-lattice"},
}


def _resolved_family(scenario: Scenario) -> str:
    family = scenario.fixtures or _DEFAULT_FAMILY[scenario.operation][scenario.group]
    allowed = _FAMILY_BY_OP[scenario.operation]
    if family not in allowed:
        raise ScenarioInvariantError(
            f"scenario {scenario.name!r}: fixtures family {family!r} is not usable with "
            f"operation {scenario.operation!r} (allowed: {', '.join(allowed)})"
        )
    return family


def _validate_scenario(scenario: Scenario) -> None:
    s = scenario
    if not s.operation:
        raise ConfigError(f"[scenario] {s.name!r}: missing required field: operation")
    if s.grid < _MIN_GRID:
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: grid sizes must be at least {_MIN_GRID}, got {s.grid}"
        )
    if s.nt < 2:
        raise ScenarioInvariantError(f"scenario {s.name!r}: nt must be at least 2, got {s.nt}")
    if s.level == 0:
        raise ScenarioInvariantError(f"scenario {s.name!r}: level must be a nonzero integer")
    if s.count < 0:
        raise ScenarioInvariantError(f"scenario {s.name!r}: count must be nonnegative")
    if s.steps < 1:
        raise ScenarioInvariantError(f"scenario {s.name!r}: steps must be positive")
    if s.tolerance is not None and s.tolerance <= 0:
        raise ScenarioInvariantError(f"scenario {s.name!r}: tolerance must be positive")
    for key, value in s.tolerances.items():
        if value <= 0:
            raise ScenarioInvariantError(
                f"scenario {s.name!r}: tolerance '{key}' must be positive, got {value}"
            )
    if "tol" in s.expected:
        tol = _section_float("expected", s.expected, "tol", 0.0)
        if tol <= 0:
            raise ScenarioInvariantError(f"scenario {s.name!r}: expected tol must be positive")
    family = _resolved_family(s)
    winding = _parse_ints("twist", "winding", s.twist.get("winding", "0 0"))
    if len(winding) != 2:
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: twist winding needs exactly two integers"
        )
    if any(winding) and s.operation != "oracle":
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: nonzero twist winding is only supported on the exact "
            "lattice pipeline (operation 'oracle'); the smooth evaluator needs a "
            "winding-free gauge map"
        )
    if any(winding) and s.group == "SU2":
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: winding twists only exist for the abelian group"
        )
    if s.operation == "oracle" and s.group != "U1":
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: the exact lattice oracle is abelian; set group = U1"
        )
    if family == "F2" and s.group != "SU2":
        raise ScenarioInvariantError(f"scenario {s.name!r}: fixtures F2 require group SU2")
    if family in ("F1", "flat", "curved-moment", "loop-ellipse") and s.group != "U1":
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: fixtures {family!r} require group U1"
        )
    if family in ("resonant", "diag-pair") and s.group != "SU2":
        raise ScenarioInvariantError(
            f"scenario {s.name!r}: fixtures {family!r} require group SU2"
        )
    kind = s.curve.get("kind", "linear")
    if kind not in _CURVE_KINDS:
        raise ConfigError(
            f"[curve] field 'kind': expected one of {', '.join(_CURVE_KINDS)}, got {kind!r}"
        )


# ---------------------------------------------------------------------------
# report container and canonical emission
# ---------------------------------------------------------------------------


@dataclass
class Report:
    """Everything a run produced, ready for canonical serialisation."""

    scenarios: List[Dict[str, Any]] = field(default_factory=list)
    results: List[Dict[str, Any]] = field(default_factory=list)
    residual_tables: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    convergence: List[Dict[str, Any]] = field(default_factory=list)
    verdicts: Dict[str, bool] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_payload(self, with_timings: bool = False) -> Dict[str, Any]:
        verdicts = dict(self.verdicts)
        verdicts["overall"] = self.passed
        payload: Dict[str, Any] = {
            "format_version": 1,
            "scenarios": self.scenarios,
            "results": self.results,
            "residual_tables": self.residual_tables,
            "convergence": self.convergence,
            "verdicts": verdicts,
            "sign_conventions": list(SIGN_CONVENTIONS),
        }
        if with_timings:
            payload["timings"] = self.timings
        return payload


def _canonical(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    if isinstance(value, CircleValue):
        return _canonical(float(value))
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        out = float(value)
        if not math.isfinite(out):
            raise ValueError(f"non-finite value in report: {out}")
        out = float(f"{out:.12g}")
        return 0.0 if out == 0.0 else out
    raise TypeError(f"cannot serialise {type(value).__name__} in a report")


def _format_csv_number(value: Any) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{_canonical(float(value)):.12g}"
    return str(value)


_CSV_COLUMNS = (
    "scenario",
    "section",
    "name",
    "operation",
    "value",
    "tolerance",
    "max_residual",
    "count",
    "passed",
    "worst_fixture",
)


def emit_report(report: Report, format: str = "json", with_timings: bool = False) -> bytes:
    """Serialise a report canonically as JSON or as a CSV summary."""
    if format == "json":
        payload = _canonical(report.to_payload(with_timings))
        return (json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")
    if format in ("csv", "csv-summary"):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for row in report.results:
            writer.writerow(
                [
                    row.get("scenario", ""),
                    "result",
                    row.get("name", ""),
                    row.get("operation", ""),
                    _format_csv_number(row.get("value")),
                    _format_csv_number(row.get("tolerance")),
                    _format_csv_number(row.get("residual")),
                    "",
                    str(bool(row.get("passed", True))),
                    "",
                ]
            )
        for scenario_name, table in report.residual_tables.items():
            for check_name in CHECK_ORDER:
                if check_name not in table:
                    continue
                entry = table[check_name]
                writer.writerow(
                    [
                        scenario_name,
                        "axiom",
                        check_name,
                        "verify",
                        "",
                        _format_csv_number(entry["tolerance"]),
                        _format_csv_number(entry["max_residual"]),
                        str(entry["count"]),
                        str(bool(entry["passed"])),
                        entry["worst_fixture"],
                    ]
                )
        return buffer.getvalue().encode("utf-8")
    raise ConfigError(f"unknown report format {format!r}; expected json or csv")


# ---------------------------------------------------------------------------
# fixture builders driven by scenario fields
# ---------------------------------------------------------------------------


def _pair_for(scenario: Scenario):
    return invariant_pair(SU2 if scenario.group == "SU2" else U1, scenario.level)


def _value_tolerance(scenario: Scenario) -> float:
    if scenario.tolerance is not None:
        return scenario.tolerance
    return _DEFAULT_VALUE_TOL[scenario.operation]


def _expected_entry(scenario: Scenario) -> Optional[Tuple[Any, float]]:
    """Expected value from the [expected] section: (float-or-Fraction, tol)."""
    exp = scenario.expected
    if not exp:
        return None
    tol = _section_float("expected", exp, "tol", _value_tolerance(scenario))
    if "num" in exp or "den" in exp:
        num = _section_int("expected", exp, "num", 0)
        den = _section_int("expected", exp, "den", 1)
        if den == 0:
            raise ScenarioInvariantError(f"scenario {scenario.name!r}: expected den must be nonzero")
        return Fraction(num, den), tol
    if "value" in exp:
        return _section_float("expected", exp, "value", 0.0), tol
    return None


def _twist_is_identity(scenario: Scenario) -> bool:
    amp = _section_float("twist", scenario.twist, "amplitude", 0.0)
    const = scenario.twist.get("constant", "0")
    winding = _parse_ints("twist", "winding", scenario.twist.get("winding", "0 0"))
    return amp == 0.0 and float(Fraction(const)) == 0.0 and not any(winding)


def _build_twist(scenario: Scenario, grid, rng):
    amp = _section_float("twist", scenario.twist, "amplitude", 0.0)
    if scenario.group == "U1":
        const = float(Fraction(scenario.twist.get("constant", "0")))
        phase = random_trig_poly(rng, grid.dim, waves=2, amplitude=amp) if amp else None
        return u1_gauge_map(grid, winding=(0,) * grid.dim, phase=phase, constant=const)
    if amp == 0.0:
        return identity_gauge_map(SU2, grid)
    value, partials = su2_trig_scalar(grid, rng, amp)
    return su2_gauge_map_exp(grid, value, partials)


def _base_form(scenario: Scenario, grid, rng, amplitude: Optional[float] = None):
    amp = scenario.amplitude if amplitude is None else amplitude
    if scenario.group == "U1":
        return u1_trig_one_form(grid, rng, amp)
    return su2_trig_one_form(grid, rng, amp)


def _build_curve(scenario: Scenario, grid, rng, twist):
    kind = scenario.curve.get("kind", "linear")
    curve_amp = _section_float("curve", scenario.curve, "amplitude", scenario.amplitude)
    base = _base_form(scenario, grid, rng, curve_amp)
    if kind in ("constant", "loop-square", "loop-ellipse") and not _twist_is_identity(scenario):
        raise ScenarioInvariantError(
            f"scenario {scenario.name!r}: curve kind {kind!r} closes on itself and "
            "requires the identity twist"
        )
    if kind == "constant":
        return FamilyCurve([LinearSegment(base, base)])
    if kind == "linear":
        return straight_twist_path(twist, base)
    if kind == "loop-square":
        eps = _section_float("curve", scenario.curve, "eps", 0.125)
        if eps <= 0:
            raise ScenarioInvariantError(f"scenario {scenario.name!r}: eps must be positive")
        a = _base_form(scenario, grid, rng, curve_amp)
        b = _base_form(scenario, grid, rng, curve_amp)
        return square_loop(base, a, b, eps)
    if kind == "loop-ellipse":
        b_amp = _section_float("curve", scenario.curve, "b", 0.01)
        c_amp = _section_float("curve", scenario.curve, "c", 0.005)
        _, curve, _ = u1_winding_zero_loop(scenario.grid, b_amp, c_amp)
        return curve
    # program: base -> waypoints -> twisted base
    waypoints = _section_int("curve", scenario.curve, "waypoints", 1)
    if waypoints < 0:
        raise ScenarioInvariantError(f"scenario {scenario.name!r}: waypoints must be nonnegative")
    points = [base]
    for _ in range(waypoints):
        points.append(_base_form(scenario, grid, rng, curve_amp))
    points.append(gauge_transform(twist, base))
    return FamilyCurve(
        [LinearSegment(points[i], points[i + 1]) for i in range(len(points) - 1)]
    )


def _result_row(
    scenario: Scenario,
    name: str,
    value: Any,
    *,
    rational: Optional[Fraction] = None,
    residual: Optional[float] = None,
    tolerance: Optional[float] = None,
    passed: bool = True,
) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "scenario": scenario.name,
        "name": name,
        "operation": scenario.operation,
        "value": value,
        "passed": bool(passed),
    }
    if rational is not None:
        row["rational"] = rational
    if residual is not None:
        row["residual"] = residual
    if tolerance is not None:
        row["tolerance"] = tolerance
    return row


def _verdict_against_expected(
    scenario: Scenario, value: CircleValue, default_expected: Optional[float] = None
) -> Tuple[Optional[float], Optional[float], bool]:
    """Residual/tolerance/verdict of a circle value against the expected entry."""
    entry = _expected_entry(scenario)
    if entry is None and default_expected is not None:
        entry = (default_expected, _value_tolerance(scenario))
    if entry is None:
        return None, None, True
    expected, tol = entry
    residual = value.distance(CircleValue.from_real(float(expected)))
    return residual, tol, residual <= tol


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _run_cs(scenario: Scenario, report: Report) -> None:
    family = _resolved_family(scenario)
    pair = _pair_for(scenario)
    if family == "resonant":
        grid, conn, classical = su2_resonant_t3(scenario.grid, scenario.alpha)
        default_expected: Optional[float] = -scenario.level * classical
    elif family == "F2":
        grid, conn = su2_generic_t3(scenario.grid, scenario.seed, scenario.amplitude)
        default_expected = None
    else:  # F1
        grid = torus_grid(scenario.grid, scenario.grid, scenario.grid)
        conn = u1_trig_one_form(grid, np.random.default_rng(scenario.seed), scenario.amplitude)
        default_expected = None
    action = chern_simons_action(conn, pair)
    residual, tol, passed = _verdict_against_expected(scenario, action, default_expected)
    report.results.append(
        _result_row(
            scenario,
            "cs-action",
            float(action),
            residual=residual,
            tolerance=tol,
            passed=passed,
        )
    )


def _run_xi(scenario: Scenario, report: Report) -> None:
    _resolved_family(scenario)
    pair = _pair_for(scenario)
    grid = torus_grid(scenario.grid, scenario.grid)
    rng = np.random.default_rng(scenario.seed)
    twist = _build_twist(scenario, grid, rng)
    curve = _build_curve(scenario, grid, rng, twist)
    value = twisted_loop_value(twist, curve, pair, nt=scenario.nt)
    residual, tol, passed = _verdict_against_expected(scenario, value)
    report.results.append(
        _result_row(
            scenario,
            "twisted-loop-value",
            float(value),
            residual=residual,
            tolerance=tol,
            passed=passed,
        )
    )


def _thread_count() -> int:
    env = os.environ.get(THREADS_ENV_VAR, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ScenarioInvariantError(
                f"environment variable {THREADS_ENV_VAR} must be an integer, got {env!r}"
            )
    return min(8, os.cpu_count() or 1)


def _merged_verify(char, fixtures, tolerances, parallel: bool):
    """Per-fixture verification reports plus their deterministic merge.

    The merge folds fixture sub-reports in battery order with the same
    greater-or-equal tie-breaking the serial path uses, so parallel and
    serial runs emit identical bytes.
    """
    if parallel and len(fixtures) > 1:
        with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
            sub_reports = list(
                pool.map(lambda fx: verify_character(char, [fx], tolerances), fixtures)
            )
    else:
        sub_reports = [verify_character(char, [fx], tolerances) for fx in fixtures]

    resolved = dict(DEFAULT_CHECK_TOLERANCES)
    resolved.update(tolerances or {})
    merged = CharacterReport(tag=char.tag)
    for name in CHECK_ORDER:
        merged.checks[name] = CheckResult(name=name, tolerance=resolved[name])
    for sub in sub_reports:
        for name, check in sub.checks.items():
            target = merged.checks[name]
            if check.count == 0:
                continue
            target.count += check.count
            if check.max_residual >= target.max_residual:
                target.max_residual = check.max_residual
                target.worst_fixture = check.worst_fixture
    return merged, sub_reports


def _run_verify(scenario: Scenario, report: Report, parallel: bool) -> None:
    family = _resolved_family(scenario)
    pair = _pair_for(scenario)
    if family == "F2":
        battery = su2_axiom_battery(scenario.grid, scenario.count, scenario.seed)
    else:
        battery = u1_axiom_battery(scenario.grid, scenario.count, scenario.seed)
    char = twisted_loop_character(pair, nt=scenario.nt)
    merged, sub_reports = _merged_verify(char, battery, scenario.tolerances, parallel)
    for fixture, sub in zip(battery, sub_reports):
        worst = max((c.max_residual for c in sub.checks.values() if c.count), default=0.0)
        report.results.append(
            _result_row(scenario, fixture.name, worst, passed=sub.passed)
        )
    report.residual_tables[scenario.name] = merged.to_dict()["checks"]


def _run_curvature(scenario: Scenario, report: Report) -> None:
    family = _resolved_family(scenario)
    pair = _pair_for(scenario)
    grid = torus_grid(scenario.grid, scenario.grid)
    rng = np.random.default_rng(scenario.seed)
    default_expected: Optional[float] = None
    if family == "diag-pair":
        ones = np.ones(grid.shape)
        zeros = np.zeros(grid.shape)
        x_mat = su2_from_components(zeros, zeros, ones)  # diag(i, -i)
        a = FormField(grid, 1, {(0,): x_mat}, matrix_dim=2)
        b = FormField(grid, 1, {(1,): x_mat}, matrix_dim=2)
        default_expected = scenario.level / (2.0 * math.pi**2)
    else:
        a = _base_form(scenario, grid, rng)
        b = _base_form(scenario, grid, rng)
    value = curvature_pairing(pair, a, b)
    entry = _expected_entry(scenario)
    if entry is None and default_expected is not None:
        entry = (default_expected, _value_tolerance(scenario))
    if entry is None:
        residual, tol, passed = None, None, True
    else:
        expected, tol = entry
        residual = abs(value - float(expected))
        passed = residual <= tol
    report.results.append(
        _result_row(
            scenario, "curvature-pairing", value, residual=residual, tolerance=tol, passed=passed
        )
    )


def _run_moment(scenario: Scenario, report: Report) -> None:
    family = _resolved_family(scenario)
    if family == "flat":
        tol = scenario.tolerance if scenario.tolerance is not None else 1e-10
        grid, bases, generators = u1_flat_family(scenario.grid, scenario.level)
        char = twisted_loop_character(_pair_for(scenario), nt=scenario.nt)
        result = projectability_check(char, generators, bases, tol=tol)
        report.results.append(
            _result_row(
                scenario,
                "projectability-residual",
                result.residual,
                residual=result.residual,
                tolerance=tol,
                passed=result.projectable,
            )
        )
        return
    tol = _value_tolerance(scenario)
    grid, base, generator, expected = u1_curved_moment_fixture(scenario.grid, scenario.level)
    char = twisted_loop_character(_pair_for(scenario), nt=scenario.nt)
    result = projectability_check(char, [generator], [base], tol=tol)
    residual = abs(result.residual - expected)
    report.results.append(
        _result_row(
            scenario,
            "moment-obstruction",
            result.residual,
            residual=residual,
            tolerance=tol,
            passed=residual <= tol,
        )
    )


def _mod1(q: Fraction) -> Fraction:
    return q - math.floor(q)


def _lattice_second_path(rng, second_twist: LatticeTwist, start: dict, steps: int) -> list:
    end = apply_twist_to_slice(second_twist, start)
    nx, ny = start["x"].shape
    path = [start]
    for tau in range(1, steps):
        lam = Fraction(tau, steps)
        jitter = random_lattice_slice(rng, nx, ny, 256)
        path.append({k: (1 - lam) * start[k] + lam * end[k] + jitter[k] for k in ("x", "y")})
    path.append(end)
    return path


def _run_oracle(scenario: Scenario, report: Report) -> None:
    family = _resolved_family(scenario)
    if family == "loop-ellipse":
        _run_oracle_convergence(scenario, report)
        return
    winding = _parse_ints("twist", "winding", scenario.twist.get("winding", "0 0"))
    constant = _parse_fraction("twist", "constant", scenario.twist.get("constant", "0"))
    twist = LatticeTwist((winding[0], winding[1]), constant)
    rng = np.random.default_rng(scenario.seed)
    n = scenario.grid
    path = random_lattice_path(rng, twist, n, n, scenario.steps)
    value = exact_twisted_loop_value_u1(twist, path, k=scenario.level)

    entry = _expected_entry(scenario)
    if entry is not None and isinstance(entry[0], Fraction):
        passed = value.exact == _mod1(entry[0])
        residual = float(abs(_mod1(value.exact - entry[0])))
    else:
        residual, _, passed = _verdict_against_expected(scenario, value)
    report.results.append(
        _result_row(
            scenario,
            "twisted-loop-value",
            float(value),
            rational=value.exact,
            residual=residual,
            passed=passed,
        )
    )

    # concatenation and reversal identities, bit for bit
    second = LatticeTwist(
        (int(rng.integers(-2, 3)), int(rng.integers(-2, 3))), Fraction(1, 7)
    )
    second_path = _lattice_second_path(rng, second, path[-1], max(2, scenario.steps - 1))
    v1 = value.exact
    v2 = exact_twisted_loop_value_u1(second, second_path, k=scenario.level).exact
    combined = exact_twisted_loop_value_u1(
        second.compose(twist), path[:-1] + second_path, k=scenario.level
    ).exact
    additivity = _mod1(combined - v1 - v2)
    report.results.append(
        _result_row(
            scenario,
            "concatenation-defect",
            float(additivity),
            rational=additivity,
            passed=additivity == 0,
        )
    )
    reversed_value = exact_twisted_loop_value_u1(
        twist.inverse(), list(reversed(path)), k=scenario.level
    ).exact
    reversal = _mod1(v1 + reversed_value)
    report.results.append(
        _result_row(
            scenario,
            "reversal-defect",
            float(reversal),
            rational=reversal,
            passed=reversal == 0,
        )
    )


def _run_oracle_convergence(scenario: Scenario, report: Report) -> None:
    b_amp = _section_float("curve", scenario.curve, "b", 0.01)
    c_amp = _section_float("curve", scenario.curve, "c", 0.005)
    grids = scenario.convergence or (scenario.grid, 2 * scenario.grid)
    for n in grids:
        if n < _MIN_GRID:
            raise ScenarioInvariantError(
                f"scenario {scenario.name!r}: convergence grid sizes must be at least {_MIN_GRID}"
            )
    if list(grids) != sorted(set(grids)):
        raise ScenarioInvariantError(
            f"scenario {scenario.name!r}: convergence grid sizes must be strictly increasing"
        )
    _, curve, _ = u1_winding_zero_loop(scenario.grid, b_amp, c_amp)
    pair = invariant_pair(U1, scenario.level)
    smooth = twisted_loop_value(
        identity_gauge_map(U1, curve.start().grid), curve, pair, nt=scenario.nt
    )
    identity = LatticeTwist((0, 0), Fraction(0))
    distances: List[float] = []
    for n in grids:
        path = u1_winding_zero_lattice_path(n, scenario.nt, b_amp, c_amp)
        lattice = exact_twisted_loop_value_u1(identity, path, k=scenario.level)
        dist = smooth.distance(lattice)
        distances.append(dist)
        report.convergence.append(
            {
                "scenario": scenario.name,
                "grid": int(n),
                "value": float(lattice),
                "rational": lattice.exact,
                "distance": dist,
            }
        )
    tol = _value_tolerance(scenario)
    report.results.append(
        _result_row(
            scenario,
            "cross-pipeline-distance",
            distances[0],
            residual=distances[0],
            tolerance=tol,
            passed=distances[0] <= tol,
        )
    )
    if len(distances) >= 2 and distances[-1] > 0:
        order = math.log2(distances[0] / distances[-1]) / math.log2(grids[-1] / grids[0])
        report.results.append(
            _result_row(
                scenario,
                "convergence-order",
                order,
                tolerance=_CONVERGENCE_ORDER_THRESHOLD,
                passed=order >= _CONVERGENCE_ORDER_THRESHOLD,
            )
        )


def _run_one(scenario: Scenario, report: Report, parallel: bool) -> None:
    if scenario.operation == "cs":
        _run_cs(scenario, report)
    elif scenario.operation == "xi":
        _run_xi(scenario, report)
    elif scenario.operation == "verify":
        _run_verify(scenario, report, parallel)
    elif scenario.operation == "curvature":
        _run_curvature(scenario, report)
    elif scenario.operation == "moment":
        _run_moment(scenario, report)
    elif scenario.operation == "oracle":
        _run_oracle(scenario, report)
    else:  # pragma: no cover - guarded by parsing
        raise ConfigError(f"unknown operation {scenario.operation!r}")


def _run_scenarios(scenarios: Sequence[Scenario], parallel: bool = False) -> Report:
    report = Report()
    total_start = time.monotonic()
    for scenario in scenarios:
        _validate_scenario(scenario)
    for scenario in scenarios:
        report.scenarios.append({"name": scenario.name, **scenario.echo})
        before = len(report.results)
        start = time.monotonic()
        _run_one(scenario, report, parallel)
        report.timings[scenario.name] = time.monotonic() - start
        rows = report.results[before:]
        table = report.residual_tables.get(scenario.name, {})
        table_ok = all(entry["passed"] for entry in table.values())
        report.verdicts[scenario.name] = all(r["passed"] for r in rows) and table_ok
    report.timings["total"] = time.monotonic() - total_start
    return report


def run_scenario(
    config_text: str,
    operation: Optional[str] = None,
    grid: Optional[int] = None,
    tol: Optional[float] = None,
    parallel: bool = False,
) -> Report:
    """Parse a scenario config and run it, returning the report.

    ``operation`` forces every scenario to one operation (as the
    single-operation subcommands do); ``grid`` and ``tol`` override the
    corresponding scenario fields.
    """
    scenarios = parse_scenarios(config_text)
    adjusted: List[Scenario] = []
    for scenario in scenarios:
        changes: Dict[str, Any] = {}
        if operation:
            changes["operation"] = operation
        if grid is not None:
            changes["grid"] = grid
        if tol is not None:
            if tol <= 0:
                raise ScenarioInvariantError("tolerance must be positive")
            changes["tolerance"] = tol
        if changes:
            scenario = replace(scenario, **changes)
        adjusted.append(scenario)
    return _run_scenarios(adjusted, parallel=parallel)


# ---------------------------------------------------------------------------
# report-path figures
# ---------------------------------------------------------------------------


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name) or "scenario"


def _render_figures(report: Report, outdir: str) -> List[str]:
    """Render residual and convergence figures as PNG files; return paths."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    paths: List[str] = []
    for scenario_name, table in report.residual_tables.items():
        names = [n for n in CHECK_ORDER if n in table and table[n]["count"]]
        if not names:
            continue
        residuals = [max(table[n]["max_residual"], 1e-17) for n in names]
        tolerances = [table[n]["tolerance"] for n in names]
        fig, ax = plt.subplots(figsize=(8, 4.5))
        positions = np.arange(len(names))
        ax.bar(positions, residuals, color="#4878d0", label="max residual")
        ax.scatter(positions, tolerances, color="#d65f5f", marker="_", s=400, label="tolerance")
        ax.set_yscale("log")
        ax.set_xticks(positions)
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel("residual")
        ax.set_title(f"{scenario_name}: axiom residuals")
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        path = os.path.join(outdir, f"{_safe_filename(scenario_name)}-residuals.png")
        fig.savefig(path, dpi=110)
        plt.close(fig)
        paths.append(path)

    by_scenario: Dict[str, List[Dict[str, Any]]] = {}
    for row in report.convergence:
        by_scenario.setdefault(row["scenario"], []).append(row)
    for scenario_name, rows in by_scenario.items():
        grids = [row["grid"] for row in rows]
        distances = [max(row["distance"], 1e-17) for row in rows]
        fig, ax = plt.subplots(figsize=(6, 4.5))
        ax.loglog(grids, distances, "o-", color="#4878d0")
        ax.set_xlabel("grid size")
        ax.set_ylabel("distance to smooth value")
        ax.set_title(f"{scenario_name}: cross-pipeline convergence")
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path = os.path.join(outdir, f"{_safe_filename(scenario_name)}-convergence.png")
        fig.savefig(path, dpi=110)
        plt.close(fig)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equihol",
        description="Equivariant holonomy and Chern-Simons calculations from scenario configs.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the scenario config (INI)")
    common.add_argument("--grid", type=int, default=None, help="override the grid size")
    common.add_argument("--tol", type=float, default=None, help="override the value tolerance")
    common.add_argument(
        "--format", choices=("json", "csv"), default="json", help="stdout report format"
    )
    common.add_argument(
        "--parallel", action="store_true", help="verify battery fixtures on a thread pool"
    )
    common.add_argument(
        "--with-timings",
        action="store_true",
        help="embed wall-clock timings (forfeits byte-identical output)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "cs": "Chern-Simons action of a 3-torus connection",
        "xi": "twisted-loop holonomy of a curve of connections",
        "verify": "run the character axiom battery",
        "curvature": "curvature two-form pairing of two directions",
        "moment": "projectability / moment obstruction of a family",
        "oracle": "exact rational lattice evaluation and identities",
    }
    for op in OPERATIONS:
        sub.add_parser(op, parents=[common], help=helps[op])
    report_parser = sub.add_parser(
        "report",
        parents=[common],
        help="run every scenario in the config; write JSON, CSV, and figures",
    )
    report_parser.add_argument(
        "--out", default="report-out", help="output directory for report files"
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                config_text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}")
        operation = None if args.command == "report" else args.command
        if operation is None:
            for scenario in parse_scenarios(config_text):
                if not scenario.operation:
                    raise ConfigError(
                        f"[scenario] {scenario.name!r}: missing required field: operation "
                        "(required for report runs)"
                    )
        report = run_scenario(
            config_text,
            operation=operation,
            grid=args.grid,
            tol=args.tol,
            parallel=args.parallel,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ScenarioInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3

    if args.command == "report":
        os.makedirs(args.out, exist_ok=True)
        json_path = os.path.join(args.out, "report.json")
        csv_path = os.path.join(args.out, "report.csv")
        with open(json_path, "wb") as handle:
            handle.write(emit_report(report, "json", with_timings=args.with_timings))
        with open(csv_path, "wb") as handle:
            handle.write(emit_report(report, "csv"))
        figure_paths = _render_figures(report, args.out)
        for path in [json_path, csv_path] + figure_paths:
            print(path)
    else:
        sys.stdout.buffer.write(
            emit_report(report, args.format, with_timings=args.with_timings)
        )
        sys.stdout.buffer.flush()

    if not report.passed:
        for name, verdict in report.verdicts.items():
            if not verdict:
                print(f"FAIL {name}", file=sys.stderr)
                table = report.residual_tables.get(name, {})
                for check_name, entry in table.items():
                    if not entry["passed"]:
                        print(
                            f"  {check_name}: max residual {entry['max_residual']:.3e} "
                            f"> tolerance {entry['tolerance']:.0e} "
                            f"(worst fixture {entry['worst_fixture']})",
                            file=sys.stderr,
                        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
