"""Orlicz functions, the modular, and the Luxemburg-Nakano / Amemiya norms.

An Orlicz function is a nondecreasing convex function with value 0 at 0.
Four representations are supported: pure powers, numerically inverted
generator builds (the inverse is u^{1/p} * rho(u^{1/q-1/p}), with 1/q = 0
when q is infinite), closed-form builds u^q * h(u^{p-q}) from a concave
piecewise linear h, and plain tabulations. Generator builds tabulate the
inverse on a dense log grid and invert with monotone piecewise-cubic
interpolation; convexity is checked numerically rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from .measure import SampleFunction, sup_norm
from .quasiconcave import (
    PiecewiseLinearConcave,
    QuasiConcaveFn,
    concavity_violation,
    is_quasiconcave,
    log_grid,
    rho_star,
)

INVERSION_U_LO = 1e-12
INVERSION_U_HI = 1e12
INVERSION_POINTS_PER_DECADE = 4096


class DomainOverflowError(ValueError):
    """An argument exceeded the evaluation domain of a tabulated function."""


class NonConvergenceError(RuntimeError):
    """An iterative norm computation failed to converge."""


@dataclass(frozen=True)
class ExponentCouple:
    """Exponent pair with 1 <= p < q <= inf."""

    p: float
    q: float

    def __post_init__(self):
        if not (1.0 <= self.p < self.q <= np.inf):
            raise ValueError("need 1 <= p < q <= inf")

    @property
    def q_is_inf(self) -> bool:
        return math.isinf(self.q)


@dataclass(frozen=True)
class OrliczFunction:
    """Evaluable Orlicz function with a documented domain [0, u_max]."""

    kind: str
    p: float | None
    q: float | None
    u_max: float
    evaluator: Callable[[np.ndarray], np.ndarray]
    meta: dict = field(default_factory=dict)

    def __call__(self, u, strict: bool = True) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0):
            raise ValueError("Orlicz functions take nonnegative arguments")
        if np.any(u > self.u_max * (1.0 + 1e-12)):
            if strict:
                raise DomainOverflowError(
                    f"argument {float(np.max(u)):.6g} exceeds u_max {self.u_max:.6g}"
                )
            out = np.full(np.shape(u), np.inf)
            ok = u <= self.u_max * (1.0 + 1e-12)
            out[ok] = self.evaluator(np.minimum(np.asarray(u)[ok], self.u_max))
            return out
        return np.asarray(self.evaluator(np.minimum(u, self.u_max)), dtype=float)


def _validate_shape(phi: OrliczFunction, probe_hi: float, require_convex: bool = True) -> float:
    """Cheap construction-time check: phi(0)=0, nondecreasing, near-convex.

    Returns the worst second difference on the probe grid. Convexity is only
    enforced when required: the concave-h route legitimately produces
    nondecreasing functions with concave kinks at min-branch crossovers,
    which serve the modular comparisons but are not Orlicz functions proper.
    """
    hi = min(probe_hi, phi.u_max)
    grid = np.linspace(0.0, hi, 513)
    vals = phi(grid)
    if abs(float(vals[0])) > 1e-12:
        raise ValueError("phi(0) must be 0")
    if np.any(np.diff(vals) < -1e-12 * max(float(vals[-1]), 1.0)):
        raise ValueError("phi must be nondecreasing")
    d2 = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
    worst = float(d2.min(initial=0.0))
    if require_convex and worst < -1e-9 * max(float(np.abs(vals).max()), 1e-300):
        raise ValueError("phi fails the convexity tolerance")
    return worst


def power_phi(p: float) -> OrliczFunction:
    """phi(u) = u^p."""
    if p < 1.0:
        raise ValueError("p must be >= 1")
    phi = OrliczFunction("power", p, None, np.inf, lambda u: np.asarray(u, dtype=float) ** p)
    _validate_shape(phi, 10.0)
    return phi


def tabulated_phi(grid, values) -> OrliczFunction:
    """Monotone piecewise-cubic interpolant through strictly increasing data."""
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 4 or x.shape != y.shape:
        raise ValueError("need matching 1-d arrays with at least 4 points")
    if np.any(np.diff(x) <= 0.0) or np.any(np.diff(y) < 0.0):
        raise ValueError("grid must increase strictly and values must not decrease")
    phi = OrliczFunction("tabulated", None, None, float(x[-1]),
                         _inverse_free_evaluator(x, y), {"points": x.size})
    _validate_shape(phi, float(x[-1]))
    return phi


def _inverse_free_evaluator(x: np.ndarray, y: np.ndarray) -> Callable:
    interp = PchipInterpolator(x, y, extrapolate=False)
    x0, y0 = float(x[0]), float(y[0])
    # below the grid: power-law continuation matching the lowest segment
    x1, y1 = float(x[1]), float(y[1])
    alpha = (math.log(y1) - math.log(y0)) / (math.log(x1) - math.log(x0)) if y0 > 0 else 1.0

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        low = (u > 0.0) & (u < x0)
        mid = u >= x0
        if np.any(mid):
            out[mid] = interp(np.minimum(u[mid], x[-1]))
        if np.any(low):
            out[low] = y0 * (u[low] / x0) ** alpha if y0 > 0 else 0.0
        return out

    return evaluate


def build_from_generator(couple: ExponentCouple, rho: QuasiConcaveFn, *,
                         u_lo: float = INVERSION_U_LO, u_hi: float = INVERSION_U_HI,
                         points_per_decade: int = INVERSION_POINTS_PER_DECADE) -> OrliczFunction:
    """Orlicz function whose inverse is u^{1/p} * rho(u^{1/q - 1/p}).

    The inverse is tabulated on a log grid and inverted by monotone
    interpolation. Saturating generators (the inverse stops increasing, e.g.
    rho = min(1,t) with q infinite) keep only the strictly increasing prefix,
    which bounds the evaluation domain: u_max is the last tabulated ordinate
    and larger arguments overflow.
    """
    qc = is_quasiconcave(rho)
    if not qc.ok:
        raise ValueError(f"rho fails the quasi-concavity check ({qc.worst_violation:.3e})")
    conc = concavity_violation(rho, log_grid(points_per_decade=16))
    if conc > 1e-8:
        raise ValueError(f"rho fails the concavity check ({conc:.3e})")
    p, q = couple.p, couple.q
    e = (0.0 if couple.q_is_inf else 1.0 / q) - 1.0 / p
    u = log_grid(u_lo, u_hi, points_per_decade)
    v = u ** (1.0 / p) * np.asarray(rho(u**e), dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
        raise ValueError("generator produced non-finite or non-positive inverse values")
    # strictly increasing prefix (a flat tail signals saturation)
    running = np.maximum.accumulate(v)
    keep = np.concatenate(([True], v[1:] > running[:-1] * (1.0 + 1e-12)))
    if keep.sum() < 2 * points_per_decade:
        raise ValueError("inverse not strictly increasing on grid")
    vk, uk = v[keep], u[keep]
    phi = OrliczFunction(
        "generator", p, (np.inf if couple.q_is_inf else q), float(vk[-1]),
        _inverse_free_evaluator(vk, uk),
        {"rho_family": rho.family, "rho_params": tuple(rho.params),
         "saturated": bool(keep.size - keep.sum()), "tab_points": int(keep.sum())},
    )
    _validate_shape(phi, 100.0)
    return phi


def build_from_h(couple: ExponentCouple, h: PiecewiseLinearConcave) -> OrliczFunction:
    """Orlicz function u^q * h(u^{p-q}) for finite q and concave h > 0."""
    if couple.q_is_inf:
        raise ValueError("q must be finite for the h-form build")
    p, q = couple.p, couple.q
    if h.value_at_zero < 0.0 or np.any(h.values <= 0.0):
        raise ValueError("h must be positive on (0, inf)")
    knots, hvals = h.knots, h.values
    s_lo, s_hi = float(knots[0]), float(knots[-1])
    # beyond the first/last knot h is linear; expand those branches in powers
    # of u so no intermediate overflows when u^{p-q} leaves float range
    left_cq, left_cp = h.value_at_zero, h.slope0      # s below s_lo
    right_cq, right_cp = (float(hvals[-1]) - h.slope_inf * s_hi, h.slope_inf)

    def term(c, u, r):
        return np.where(c == 0.0, 0.0, c * u**r)

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        pos = u > 0.0
        if not np.any(pos):
            return out
        up = u[pos]
        with np.errstate(over="ignore", under="ignore"):
            s = up ** (p - q)
            inner = (s >= s_lo) & (s <= s_hi)
            vals = np.empty(up.shape)
            vals[inner] = up[inner] ** q * np.interp(s[inner], knots, hvals)
            lo_mask = s < s_lo
            hi_mask = s > s_hi
            vals[lo_mask] = term(left_cq, up[lo_mask], q) + term(left_cp, up[lo_mask], p)
            vals[hi_mask] = term(right_cq, up[hi_mask], q) + term(right_cp, up[hi_mask], p)
        out[pos] = vals
        return out

    phi = OrliczFunction("h", p, q, np.inf, evaluate, {"h_knots": int(knots.size)})
    worst = _validate_shape(phi, 50.0, require_convex=False)
    phi.meta["worst_second_difference"] = worst
    return phi


def modular(phi: OrliczFunction, x: SampleFunction) -> float:
    """Weighted sum of phi(|x_i|); rearrangement invariant by construction."""
    return float(np.sum(phi(x.abs_values()) * x.space.weights))


def modular_of_step(phi: OrliczFunction, step) -> float:
    """Integral of phi over a step function (cross-check path for modular)."""
    return float(np.sum(phi(step.levels) * step.widths))


def _modular_scaled(phi: OrliczFunction, x: SampleFunction, scale: float) -> float:
    """Modular of scale*x, returning +inf instead of raising on overflow."""
    vals = x.abs_values() * scale
    if vals.max(initial=0.0) > phi.u_max * (1.0 + 1e-12):
        return np.inf
    return float(np.sum(phi.evaluator(np.minimum(vals, phi.u_max)) * x.space.weights))


def luxemburg_norm(phi: OrliczFunction, x: SampleFunction, *,
                   rtol: float = 1e-10, max_iter: int = 400) -> float:
    """inf of lambda > 0 with modular(x / lambda) <= 1, by bisection.

    Returns the upper bracket end, so the modular at the returned norm never
    exceeds 1 beyond roundoff.
    """
    m = sup_norm(x)
    if m == 0.0:
        return 0.0
    hi = m
    if np.isfinite(phi.u_max):
        hi = max(hi, m / phi.u_max)
    iters = 0
    while _modular_scaled(phi, x, 1.0 / hi) > 1.0:
        hi *= 2.0
        iters += 1
        if iters > max_iter:
            raise NonConvergenceError("no upper bracket for the Luxemburg norm")
    lo = 0.5 * hi
    while _modular_scaled(phi, x, 1.0 / lo) <= 1.0:
        hi = lo
        lo *= 0.5
        iters += 1
        if lo < 1e-300 or iters > max_iter:
            raise NonConvergenceError("no lower bracket for the Luxemburg norm")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _modular_scaled(phi, x, 1.0 / mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        iters += 1
        if iters > 10 * max_iter:
            raise NonConvergenceError("Luxemburg bisection failed to converge")
    return hi


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def amemiya_norm(phi: OrliczFunction, x: SampleFunction, *, rtol: float = 1e-9) -> float:
    """inf over k > 0 of (1 + modular(k*x)) / k.

    Golden-section over log k on [1e-8, 1e8] (clipped to the evaluation
    domain), then a short ternary polish. Unimodality of the objective rests
    on convexity of the modular in k, so for the non-convex concave-h
    crossover functions the result is only an upper bound on the infimum.
    """
    m = sup_norm(x)
    if m == 0.0:
        return 0.0

    def objective(k: float) -> float:
        return (1.0 + _modular_scaled(phi, x, k)) / k

    lo, hi = 1e-8, 1e8
    if np.isfinite(phi.u_max):
        hi = min(hi, phi.u_max / m)
        if hi <= lo:
            return objective(hi)
    a, b = math.log(lo), math.log(hi)
    best_k = None
    best_v = min(objective(lo), objective(hi))
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = objective(math.exp(c)), objective(math.exp(d))
    while b - a > rtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = objective(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = objective(math.exp(d))
    k0 = math.exp(0.5 * (a + b))
    lo_k, hi_k = k0 * (1.0 - 1e-7), k0 * (1.0 + 1e-7)
    for _ in range(40):
        k1 = lo_k + (hi_k - lo_k) / 3.0
        k2 = hi_k - (hi_k - lo_k) / 3.0
        if objective(k1) <= objective(k2):
            hi_k = k2
        else:
            lo_k = k1
    best_k = 0.5 * (lo_k + hi_k)
    return min(best_v, objective(best_k), objective(k0))


class ConvexityCheck(NamedTuple):
    ok: bool
    worst_second_difference: float


def check_convexity(f: Callable, grid) -> ConvexityCheck:
    """Centered second differences on a uniform grid, with a relative floor.

    Passes when every second difference is >= -1e-8 * max|f| on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 100:
        raise ValueError("grid must contain at least 100 points")
    steps = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("grid must be uniform")
    vals = np.asarray(f(grid), dtype=float)
    d2 = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
    worst = float(d2.min())
    tol = 1e-8 * max(float(np.abs(vals).max()), 1e-300)
    return ConvexityCheck(worst >= -tol, worst)


def check_delta2(phi: OrliczFunction, grid) -> float:
    """Grid supremum of phi(2u)/phi(u); finite certifies doubling growth."""
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0.0):
        raise ValueError("grid points must be positive")
    if 2.0 * grid.max() > phi.u_max * (1.0 + 1e-12):
        raise DomainOverflowError("2*u leaves the evaluation domain")
    base = phi(grid)
    if np.any(base == 0.0):
        raise ZeroDivisionError("phi vanishes at a positive grid point")
    return float(np.max(phi(2.0 * grid) / base))


class SurjectivityReport(NamedTuple):
    covers: bool
    low: float
    high: float


def surjectivity_report(rho: QuasiConcaveFn, *, span_lo: float = 1e-10,
                        span_hi: float = 1e10) -> SurjectivityReport:
    """Whether t * rho(1/t) ranges over [span_lo, span_hi] on a wide grid.

    Reported, never enforced: generator builds are not rejected on failure.
    The probe grid spans 200 decades so slowly varying transforms (t^theta
    with theta near 0 or 1) still reveal their range.
    """
    star = rho_star(rho)
    vals = star(log_grid(1e-100, 1e100, 4))
    low, high = float(vals.min()), float(vals.max())
    return SurjectivityReport(low <= span_lo and high >= span_hi, low, high)
