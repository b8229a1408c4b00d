"""Quasi-concave functions, concave majorants, and concave decompositions.

A quasi-concave generator is positive and nondecreasing on (0, inf) with
rho(t)/t nonincreasing. Its concave majorant is the least concave function
above it, here computed exactly on a log grid as the lower envelope of the
line family rho(s) + t * rho(s)/s and returned as a certified piecewise
linear concave object. Concave piecewise linear functions decompose into
(value at 0+, asymptotic slope, slope-drop atoms), which later expands the
associated Orlicz function into pure-power and min-of-powers pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

DEFAULT_GRID_LO = 1e-8
DEFAULT_GRID_HI = 1e8
DEFAULT_POINTS_PER_DECADE = 512


def log_grid(lo: float = DEFAULT_GRID_LO, hi: float = DEFAULT_GRID_HI,
             points_per_decade: int = DEFAULT_POINTS_PER_DECADE) -> np.ndarray:
    decades = math.log10(hi) - math.log10(lo)
    n = int(round(decades * points_per_decade)) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass(frozen=True)
class QuasiConcaveFn:
    """Positive function on (0, inf) with an evaluator and a family tag."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    family: str = "custom"
    params: tuple = ()

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.asarray(self.evaluator(t), dtype=float)


class QuasiConcavityCheck(NamedTuple):
    ok: bool
    worst_violation: float


def is_quasiconcave(rho: Callable, grid: np.ndarray | None = None,
                    rtol: float = 1e-10) -> QuasiConcavityCheck:
    """Grid check that rho is nondecreasing with rho(t)/t nonincreasing.

    Violations are measured relative to the local value; the worst one is
    returned (0 when clean).
    """
    if grid is None:
        grid = log_grid(points_per_decade=16)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 200:
        raise ValueError("grid must contain at least 200 points")
    vals = np.asarray(rho(grid), dtype=float)
    if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
        raise ValueError("rho must be finite and positive on the grid")
    inc = (vals[:-1] - vals[1:]) / vals[:-1]          # >0 where decreasing
    ratio = vals / grid
    dec = (ratio[1:] - ratio[:-1]) / ratio[:-1]       # >0 where ratio increases
    worst = float(max(inc.max(initial=0.0), dec.max(initial=0.0), 0.0))
    return QuasiConcavityCheck(worst <= rtol, worst)


def concavity_violation(rho: Callable, grid: np.ndarray) -> float:
    """Worst relative increase of chord slopes (0 for a concave function)."""
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(rho(grid), dtype=float)
    slopes = np.diff(vals) / np.diff(grid)
    scale = np.maximum(np.abs(slopes[:-1]), np.abs(slopes[1:]))
    scale = np.maximum(scale, 1e-300)
    rises = (slopes[1:] - slopes[:-1]) / scale
    return float(max(rises.max(initial=0.0), 0.0))


def power_log_rho(theta: float, a: float, b: float) -> QuasiConcaveFn:
    """The power-log family t^theta * ln(e+t)^a * ln(e+1/t)^b, 0 at t=0."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        pos = t > 0.0
        tp = t[pos]
        out[pos] = tp**theta * np.log(np.e + tp) ** a * np.log(np.e + 1.0 / tp) ** b
        return out

    return QuasiConcaveFn(evaluate, "power_log", (theta, a, b))


def power_rho(theta: float) -> QuasiConcaveFn:
    """t^theta for theta in [0, 1]; theta=0 is the constant generator."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    return QuasiConcaveFn(lambda t: np.asarray(t, dtype=float) ** theta, "power", (theta,))


def min_one_rho() -> QuasiConcaveFn:
    return QuasiConcaveFn(lambda t: np.minimum(1.0, np.asarray(t, dtype=float)), "min_one")


def max_one_rho() -> QuasiConcaveFn:
    return QuasiConcaveFn(lambda t: np.maximum(1.0, np.asarray(t, dtype=float)), "max_one")


def rho_star(rho: QuasiConcaveFn) -> QuasiConcaveFn:
    """The transform t -> t * rho(1/t); applying it twice returns rho."""
    inner = rho.evaluator

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        return t * np.asarray(inner(1.0 / t), dtype=float)

    return QuasiConcaveFn(evaluate, "custom", ("star", rho.family) + tuple(rho.params))


@dataclass(frozen=True, eq=False)
class PiecewiseLinearConcave:
    """Concave piecewise linear function on (0, inf), nonnegative.

    Linear with slope0 on (0, knots[0]], interpolates the knots, and
    continues with slope_inf beyond the last knot. Slopes must be
    nonincreasing and the limit at 0+ nonnegative.
    """

    knots: np.ndarray
    values: np.ndarray
    slope0: float
    slope_inf: float

    def __init__(self, knots: Sequence[float], values: Sequence[float],
                 slope0: float, slope_inf: float):
        k = np.asarray(knots, dtype=float).copy()
        v = np.asarray(values, dtype=float).copy()
        if k.ndim != 1 or k.size == 0 or k.shape != v.shape:
            raise ValueError("knots and values must be matching non-empty 1-d sequences")
        if np.any(k <= 0.0) or np.any(np.diff(k) <= 0.0):
            raise ValueError("knots must be positive and strictly increasing")
        slopes = self._slope_sequence(k, v, slope0, slope_inf)
        tol = 1e-12 * max(np.abs(slopes).max(), 1.0)
        if np.any(np.diff(slopes) > tol):
            raise ValueError("slopes increase: not concave")
        if v[0] - slope0 * k[0] < -1e-12 * max(abs(v[0]), 1.0) or np.any(v < 0.0) or slope_inf < 0.0:
            raise ValueError("function must be nonnegative on (0, inf)")
        k.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "slope0", float(slope0))
        object.__setattr__(self, "slope_inf", float(slope_inf))

    @staticmethod
    def _slope_sequence(k, v, slope0, slope_inf) -> np.ndarray:
        seg = np.diff(v) / np.diff(k) if k.size > 1 else np.empty(0)
        return np.concatenate(([slope0], seg, [slope_inf]))

    @property
    def value_at_zero(self) -> float:
        return float(self.values[0] - self.slope0 * self.knots[0])

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.interp(u, self.knots, self.values)
        below = u < self.knots[0]
        above = u > self.knots[-1]
        if np.any(below):
            out = np.where(below, self.values[0] + self.slope0 * (u - self.knots[0]), out)
        if np.any(above):
            out = np.where(above, self.values[-1] + self.slope_inf * (u - self.knots[-1]), out)
        return out


def _lower_line_envelope(intercepts: np.ndarray, slopes: np.ndarray):
    """Vertices of min_j (intercepts[j] + slopes[j] * t) over t > 0.

    Monotone-chain pass: insert lines by slope descending; a kept line owns
    the interval between its crossings with its hull neighbours, and lines
    whose interval collapses (crossing not to the right of the previous one,
    or left of 0) are popped. Returns (kept intercepts, kept slopes,
    crossings between consecutive kept lines).
    """
    order = np.lexsort((intercepts, -slopes))
    a_sorted, b_sorted = intercepts[order], slopes[order]
    fresh = np.ones(b_sorted.size, dtype=bool)
    fresh[1:] = b_sorted[1:] != b_sorted[:-1]   # equal slopes: keep lowest intercept
    a_sorted, b_sorted = a_sorted[fresh], b_sorted[fresh]
    hull_a: list[float] = []
    hull_b: list[float] = []
    cuts: list[float] = []
    for aj, bj in zip(a_sorted, b_sorted):
        while hull_a:
            x = (aj - hull_a[-1]) / (hull_b[-1] - bj)
            if x <= (cuts[-1] if cuts else 0.0):
                hull_a.pop()
                hull_b.pop()
                if cuts:
                    cuts.pop()
            else:
                cuts.append(x)
                break
        hull_a.append(aj)
        hull_b.append(bj)
    return np.array(hull_a), np.array(hull_b), np.array(cuts)


def concave_majorant(rho: QuasiConcaveFn, grid: np.ndarray | None = None,
                     rtol: float = 1e-10, extend_decades: float = 10.0) -> PiecewiseLinearConcave:
    """Concave transform inf over s of (1+t/s) rho(s), certified on the grid.

    Each grid point s contributes the line rho(s) + t * rho(s)/s; their lower
    envelope in t is concave and piecewise linear, and evaluating it on the
    same grid gives the two-sided comparison rho <= majorant <= 2 rho (the
    upper bound is exact at shared points, where s = t is allowed). The line
    family extends extend_decades beyond the grid at the same log density so
    that near-boundary infima (attained as s -> 0 or s -> inf) are resolved;
    pass 0 when rho is only evaluable on the grid itself.
    """
    if grid is None:
        grid = log_grid()
    grid = np.asarray(grid, dtype=float)
    check = is_quasiconcave(rho, grid=grid, rtol=rtol)
    if not check.ok:
        raise ValueError(f"rho fails the quasi-concavity check (violation {check.worst_violation:.3e})")
    s_grid = grid
    if extend_decades > 0.0:
        step = float(np.median(np.diff(np.log10(grid))))
        n_ext = max(int(round(extend_decades / step)), 1)
        below = grid[0] * 10.0 ** (-step * np.arange(n_ext, 0, -1))
        above = grid[-1] * 10.0 ** (step * np.arange(1, n_ext + 1))
        s_grid = np.concatenate((below, grid, above))
    vals = np.asarray(rho(s_grid), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        raise ValueError("rho must be finite and positive on the grid")
    intercepts = vals
    slopes = vals / s_grid
    a, b, cuts = _lower_line_envelope(intercepts, slopes)
    if a.size == 0:
        raise ValueError("envelope construction failed")
    if cuts.size == 0:
        # single active line: one artificial knot keeps the type well-formed
        t0 = float(grid[grid.size // 2])
        return PiecewiseLinearConcave([t0], [a[0] + b[0] * t0], float(b[0]), float(b[0]))
    knots = cuts
    values = a[:-1] + b[:-1] * knots
    return PiecewiseLinearConcave(knots, values, float(b[0]), float(b[-1]))


@dataclass(frozen=True, eq=False)
class PeetreRepresentation:
    """Concave decomposition h(u) = a + b*u + sum_i m_i * min(u, t_i)."""

    a: float
    b: float
    atom_locations: np.ndarray
    atom_masses: np.ndarray

    def __init__(self, a: float, b: float,
                 atom_locations: Sequence[float] = (), atom_masses: Sequence[float] = ()):
        locs = np.asarray(atom_locations, dtype=float).copy()
        masses = np.asarray(atom_masses, dtype=float).copy()
        if locs.shape != masses.shape or locs.ndim != 1:
            raise ValueError("atom locations and masses must match")
        if np.any(locs <= 0.0) or np.any(masses <= 0.0):
            raise ValueError("atoms need positive locations and masses")
        if a < 0.0 or b < 0.0:
            raise ValueError("a and b must be nonnegative")
        locs.flags.writeable = False
        masses.flags.writeable = False
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "atom_locations", locs)
        object.__setattr__(self, "atom_masses", masses)

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = self.a + self.b * u
        if self.atom_locations.size:
            out = out + np.minimum(u[..., None], self.atom_locations).dot(self.atom_masses)
        return out


def peetre_decompose(h: PiecewiseLinearConcave, drop_tol: float = 0.0) -> PeetreRepresentation:
    """Read (a, b, slope-drop atoms) off a concave piecewise linear function.

    a is the limit at 0+, b the asymptotic slope, and each knot where the
    slope strictly drops contributes an atom of mass equal to the drop. The
    reconstruction is exact at the knots by construction.
    """
    slopes = PiecewiseLinearConcave._slope_sequence(h.knots, h.values, h.slope0, h.slope_inf)
    drops = slopes[:-1] - slopes[1:]
    tol = max(drop_tol, 0.0)
    keep = drops > tol
    return PeetreRepresentation(
        max(h.value_at_zero, 0.0), h.slope_inf, h.knots[keep], drops[keep]
    )


def reconstruct(rep: PeetreRepresentation) -> PiecewiseLinearConcave:
    """Piecewise linear concave function with the given decomposition."""
    if rep.atom_locations.size == 0:
        knots = np.array([1.0])
    else:
        knots = rep.atom_locations
    values = rep(knots)
    slope0 = rep.b + float(rep.atom_masses.sum())
    return PiecewiseLinearConcave(knots, values, slope0, rep.b)


def phi_expansion(rep: PeetreRepresentation, p: float, q: float, u) -> np.ndarray:
    """a*u^q + b*u^p + sum_i m_i * min(u^p, t_i * u^q).

    Expands the convex function u^q * h(u^{p-q}) directly from the
    decomposition of h; agrees with evaluating the h route.
    """
    if not (1.0 <= p < q < np.inf):
        raise ValueError("need 1 <= p < q < inf")
    u = np.asarray(u, dtype=float)
    up, uq = u**p, u**q
    out = rep.a * uq + rep.b * up
    if rep.atom_locations.size:
        out = out + np.minimum(up[..., None], rep.atom_locations * uq[..., None]).dot(rep.atom_masses)
    return out
