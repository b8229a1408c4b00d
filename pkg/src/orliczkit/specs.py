"""Tagged-record config parsing: spaces, generators, phi builds, operators.

All resolvers validate keys strictly (unknown keys are rejected) so config
mistakes surface before any computation. Scenario dictionaries normalize to
a canonical form with defaults filled in; serializing a normalized scenario
is byte-stable, which the shipped scenario files rely on.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from . import operators as ops
from . import quasiconcave as qc
from .measure import DiscreteMeasureSpace, uniform_space
from .orlicz import ExponentCouple, OrliczFunction, build_from_generator, build_from_h, power_phi


class SpecError(ValueError):
    """A config record failed validation."""


def _require_keys(record: dict, required: set[str], optional: set[str] = frozenset(),
                  what: str = "record") -> None:
    keys = set(record)
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise SpecError(f"{what} missing keys: {sorted(missing)}")
    if unknown:
        raise SpecError(f"{what} has unknown keys: {sorted(unknown)}")


def parse_exponent(value: Any, what: str = "exponent") -> float:
    if value in ("inf", "Infinity"):
        return math.inf
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise SpecError(f"{what} must be a number or 'inf', got {value!r}") from None
    return out


def resolve_couple(record: dict) -> ExponentCouple:
    _require_keys(record, {"p", "q"}, what="couple")
    try:
        return ExponentCouple(parse_exponent(record["p"]), parse_exponent(record["q"]))
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def resolve_space(record: dict) -> DiscreteMeasureSpace:
    _require_keys(record, {"weights"}, {"n"}, what="space")
    weights = record["weights"]
    if weights == "uniform":
        n = record.get("n")
        if not isinstance(n, int) or n < 1:
            raise SpecError("uniform space needs a positive integer 'n'")
        return uniform_space(n)
    try:
        return DiscreteMeasureSpace([float(w) for w in weights])
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad space weights: {exc}") from None


def resolve_rho(record: dict) -> qc.QuasiConcaveFn:
    if "kind" not in record:
        raise SpecError("rho spec needs a 'kind'")
    kind = record["kind"]
    if kind == "powerlog":
        _require_keys(record, {"kind", "theta", "a", "b"}, what="powerlog rho")
        return qc.power_log_rho(float(record["theta"]), float(record["a"]), float(record["b"]))
    if kind == "power":
        _require_keys(record, {"kind", "theta"}, what="power rho")
        return qc.power_rho(float(record["theta"]))
    if kind == "min_one":
        _require_keys(record, {"kind"}, what="min_one rho")
        return qc.min_one_rho()
    if kind == "max_one":
        _require_keys(record, {"kind"}, what="max_one rho")
        return qc.max_one_rho()
    if kind == "pwl":
        plc = resolve_plc({k: v for k, v in record.items() if k != "kind"})
        return qc.QuasiConcaveFn(plc, "piecewise_linear")
    raise SpecError(f"unknown rho kind {kind!r}")


def resolve_plc(record: dict) -> qc.PiecewiseLinearConcave:
    _require_keys(record, {"knots", "values", "slope0", "slope_inf"}, what="piecewise linear spec")
    try:
        return qc.PiecewiseLinearConcave(
            [float(v) for v in record["knots"]],
            [float(v) for v in record["values"]],
            float(record["slope0"]),
            float(record["slope_inf"]),
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def resolve_phi(record: dict) -> OrliczFunction:
    if "kind" not in record:
        raise SpecError("phi spec needs a 'kind'")
    kind = record["kind"]
    try:
        if kind == "power":
            _require_keys(record, {"kind", "p"}, what="power phi")
            return power_phi(float(record["p"]))
        if kind == "generator":
            _require_keys(record, {"kind", "p", "q", "rho"}, what="generator phi")
            couple = ExponentCouple(parse_exponent(record["p"]), parse_exponent(record["q"]))
            return build_from_generator(couple, resolve_rho(record["rho"]))
        if kind == "h":
            _require_keys(record, {"kind", "p", "q", "h"}, what="h phi")
            couple = ExponentCouple(parse_exponent(record["p"]), parse_exponent(record["q"]))
            return build_from_h(couple, resolve_plc(record["h"]))
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    raise SpecError(f"unknown phi kind {kind!r}")


def resolve_operator(record: dict, space: DiscreteMeasureSpace,
                     couple: ExponentCouple) -> ops.CertifiedOperator:
    if "kind" not in record:
        raise SpecError("operator spec needs a 'kind'")
    kind = record["kind"]
    try:
        if kind == "identity":
            _require_keys(record, {"kind"}, what="identity operator")
            return ops.identity_operator(space, couple)
        if kind == "multiplier":
            _require_keys(record, {"kind", "m"}, what="multiplier operator")
            return ops.multiplier(space, [float(v) for v in record["m"]], couple)
        if kind == "truncation":
            _require_keys(record, {"kind", "keep_first"}, what="truncation operator")
            k = int(record["keep_first"])
            m = np.zeros(space.n)
            m[:k] = 1.0
            return ops.multiplier(space, m, couple)
        if kind == "matrix":
            _require_keys(record, {"kind", "rows"}, what="matrix operator")
            return ops.contractive_matrix(space, record["rows"], couple)
        if kind == "averaging":
            _require_keys(record, {"kind"}, what="averaging operator")
            return ops.averaging_operator(space, couple)
        if kind == "maximal":
            _require_keys(record, {"kind"}, what="maximal operator")
            return ops.discrete_maximal(space, couple)
        if kind == "random_contractive":
            _require_keys(record, {"kind", "seed"}, what="random contractive operator")
            return random_contractive(space, couple, int(record["seed"]))
        if kind == "max_of":
            _require_keys(record, {"kind", "ops"}, what="max_of operator")
            members = [resolve_operator(sub, space, couple) for sub in record["ops"]]
            return ops.max_of(members)
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    raise SpecError(f"unknown operator kind {kind!r}")


def random_contractive(space: DiscreteMeasureSpace, couple: ExponentCouple,
                       seed: int) -> ops.CertifiedOperator:
    """Deterministic signed matrix scaled to satisfy the row/column sums."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    a = rng.uniform(-1.0, 1.0, (space.n, space.n))
    scale = max(np.abs(a).sum(axis=1).max(), np.abs(a).sum(axis=0).max())
    return ops.contractive_matrix(space, a / scale, couple)


THEOREM_TAGS = (
    "prop22",
    "sparr_lemma",
    "thm31a",
    "thm31b_norm",
    "thm46a",
    "thm46b_norm",
    "remark_concave_h",
    "thm51_linear",
)

INPUT_DISTRIBUTIONS = ("mixed", "uniform", "lognormal", "spikes", "constant", "bounded")

DEFAULT_TOLERANCES = {
    "violation_rel": 1e-9,
    "norm_rel": 1e-8,
    "hypothesis_slack": 1e-12,
    "abs_floor": 1e-12,
    "chain_rel": 1e-6,
    "chain_abs_floor": 1e-9,
}

_SCENARIO_REQUIRED = {"theorem", "seed", "space", "couple"}
_SCENARIO_OPTIONAL = {"phi", "operator", "inputs", "t_grid", "tolerances", "fault",
                      "diagnostics", "pair_inputs"}


def normalize_scenario(raw: dict) -> dict:
    """Validated canonical scenario with all defaults made explicit."""
    _require_keys(raw, _SCENARIO_REQUIRED, _SCENARIO_OPTIONAL, what="scenario")
    theorem = raw["theorem"]
    if theorem not in THEOREM_TAGS:
        raise SpecError(f"unknown theorem tag {theorem!r}; expected one of {THEOREM_TAGS}")
    if not isinstance(raw["seed"], int):
        raise SpecError("scenario seed must be an integer (and is mandatory)")

    out: dict[str, Any] = {"theorem": theorem, "seed": raw["seed"]}
    resolve_space(raw["space"])        # validation only
    out["space"] = raw["space"]
    resolve_couple(raw["couple"])
    out["couple"] = raw["couple"]

    inputs = dict(raw.get("inputs") or {})
    _require_keys(inputs, set(), {"count", "distribution", "scale"}, what="inputs spec")
    inputs.setdefault("count", 100)
    inputs.setdefault("distribution", "mixed")
    inputs.setdefault("scale", 1.0)
    if inputs["distribution"] not in INPUT_DISTRIBUTIONS:
        raise SpecError(f"unknown input distribution {inputs['distribution']!r}")
    if not isinstance(inputs["count"], int) or inputs["count"] < 1:
        raise SpecError("inputs.count must be a positive integer")
    out["inputs"] = {k: inputs[k] for k in ("count", "distribution", "scale")}

    if raw.get("t_grid") is not None:
        grid = dict(raw["t_grid"])
        _require_keys(grid, {"start", "stop", "points"}, {"spacing"}, what="t_grid")
        grid.setdefault("spacing", "log")
        if grid["spacing"] not in ("log", "linear"):
            raise SpecError("t_grid spacing must be 'log' or 'linear'")
        if float(grid["start"]) <= 0.0 and grid["spacing"] == "log":
            raise SpecError("log t_grid needs a positive start")
        out["t_grid"] = {k: grid[k] for k in ("start", "stop", "points", "spacing")}
    else:
        out["t_grid"] = None

    tol = dict(DEFAULT_TOLERANCES)
    extra = dict(raw.get("tolerances") or {})
    _require_keys(extra, set(), set(DEFAULT_TOLERANCES), what="tolerances")
    tol.update({k: float(v) for k, v in extra.items()})
    out["tolerances"] = {k: tol[k] for k in sorted(tol)}

    out["phi"] = raw.get("phi")
    if out["phi"] is not None:
        resolve_phi(out["phi"])
    out["operator"] = raw.get("operator")
    if out["operator"] is not None:
        resolve_operator(out["operator"], resolve_space(raw["space"]), resolve_couple(raw["couple"]))

    fault = raw.get("fault")
    if fault is not None:
        _require_keys(fault, set(), {"halve_certificate"}, what="fault")
        fault = {"halve_certificate": bool(fault.get("halve_certificate", False))}
    out["fault"] = fault
    out["diagnostics"] = bool(raw.get("diagnostics", False))
    return out


def t_grid_points(grid: dict) -> np.ndarray:
    start, stop, points = float(grid["start"]), float(grid["stop"]), int(grid["points"])
    if grid.get("spacing", "log") == "log":
        return np.logspace(math.log10(start), math.log10(stop), points)
    return np.linspace(start, stop, points)


def dump_normalized(obj: dict) -> str:
    """Canonical JSON serialization (sorted keys, stable separators)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def parse_range(text: str, what: str = "grid") -> np.ndarray:
    """'start:stop:count' linear ranges for CLI grids."""
    parts = text.split(":")
    if len(parts) != 3:
        raise SpecError(f"{what} must look like start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SpecError(f"{what} must look like start:stop:count") from None
    if count < 1:
        raise SpecError(f"{what} needs at least one point")
    return np.linspace(start, stop, count)


def parse_log_range(text: str, what: str = "t-grid") -> np.ndarray:
    """'start:stop:count' log-spaced ranges for CLI t-grids."""
    parts = text.split(":")
    if len(parts) != 3:
        raise SpecError(f"{what} must look like start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SpecError(f"{what} must look like start:stop:count") from None
    if start <= 0.0 or stop < start or count < 1 or (stop == start and count > 1):
        raise SpecError(f"{what} needs 0 < start <= stop and a positive count")
    return np.logspace(math.log10(start), math.log10(stop), count)
