"""K- and L-functionals for couples of Lebesgue spaces on discrete measures.

For the couple (L^p, L^inf) the classical functional reduces to a truncation
search: the best split of |x| at height lam costs ||(|x|-lam)_+||_p + t*lam.
For (L^p, L^q) with both exponents finite, the lattice reduction to
nonnegative pointwise decompositions makes the infimum separate across
atoms, leaving one convex scalar problem per atom. A signed full-grid brute
force over decompositions is provided as the independent oracle; it never
assumes the reduction it is used to check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import SampleFunction, cumulative_p_integral, rearrangement

TERNARY_ITERATIONS = 200


@dataclass(frozen=True)
class KEvaluation:
    """One functional evaluation: parameter, value, and how it was computed."""

    t: float
    value: float
    method: str


def _check_exponent(p: float, name: str = "p") -> None:
    if not (1.0 <= p < np.inf):
        raise ValueError(f"{name} must lie in [1, inf)")


def _truncation_objective(mags: np.ndarray, w: np.ndarray, p: float,
                          lams: np.ndarray, ts: np.ndarray) -> np.ndarray:
    rest = np.clip(mags[None, :] - lams[:, None], 0.0, None)
    return np.sum(rest**p * w, axis=1) ** (1.0 / p) + ts * lams


def k_lp_linf_grid(ts, x: SampleFunction, p: float) -> np.ndarray:
    """K(t, x; L^p, L^inf) for every t in ts, via the truncation reduction.

    The objective is convex in the truncation height with kinks only at the
    data magnitudes, so the minimum over all heights is the minimum over a
    golden-section refinement plus the exact kink candidates.
    """
    _check_exponent(p)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    mags = x.abs_values()
    w = x.space.weights
    lam_max = float(mags.max(initial=0.0))
    if lam_max == 0.0:
        return np.zeros(ts.shape)
    cands = np.unique(np.concatenate(([0.0, lam_max], mags)))
    rest_p = np.sum(np.clip(mags[None, :] - cands[:, None], 0.0, None) ** p * w, axis=1) ** (1.0 / p)
    best = np.min(rest_p[:, None] + cands[:, None] * ts[None, :], axis=0)

    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    lo = np.zeros(ts.shape)
    hi = np.full(ts.shape, lam_max)
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc = _truncation_objective(mags, w, p, c, ts)
    fd = _truncation_objective(mags, w, p, d, ts)
    while float(np.max(hi - lo)) > 1e-12 * max(lam_max, 1.0):
        take = fc <= fd
        hi = np.where(take, d, hi)
        lo = np.where(take, lo, c)
        c = hi - inv_phi * (hi - lo)
        d = lo + inv_phi * (hi - lo)
        fc = _truncation_objective(mags, w, p, c, ts)
        fd = _truncation_objective(mags, w, p, d, ts)
    mid = 0.5 * (lo + hi)
    return np.minimum(best, _truncation_objective(mags, w, p, mid, ts))


def k_lp_linf(t: float, x: SampleFunction, p: float) -> KEvaluation:
    """Classical K-functional of the couple (L^p, L^inf) at one parameter."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    value = float(k_lp_linf_grid(np.array([t]), x, p)[0])
    return KEvaluation(float(t), value, "truncation")


def kree_bounds(t: float, x: SampleFunction, p: float) -> tuple[float, float]:
    """Two-sided comparison for K(t^{1/p}, x; L^p, L^inf).

    lower is the 1/p-th power of the running rearrangement integral up to t;
    upper multiplies it by 2^{1-1/p}, which is sharp. The sandwiched quantity
    is the K-functional at parameter t^{1/p}, not t.
    """
    _check_exponent(p)
    if t <= 0.0:
        raise ValueError("t must be positive")
    step = rearrangement(x)
    lower = float(cumulative_p_integral(step, p, t)[0]) ** (1.0 / p)
    return lower, 2.0 ** (1.0 - 1.0 / p) * lower


def _pointwise_min_split(c: np.ndarray, ts: np.ndarray, p: float, q: float) -> np.ndarray:
    """min over a in [0, c] of a^p + t*(c-a)^q, for each (t, atom) pair.

    Vectorized ternary search (the objective is convex for p, q >= 1)
    followed by one guarded Newton polish, then the boundary candidates.
    """
    nt, n = ts.size, c.size
    lo = np.zeros((nt, n))
    hi = np.broadcast_to(c, (nt, n)).copy()
    tcol = ts[:, None]
    for _ in range(TERNARY_ITERATIONS):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        f1 = m1**p + tcol * (c - m1) ** q
        f2 = m2**p + tcol * (c - m2) ** q
        take = f1 <= f2
        hi = np.where(take, m2, hi)
        lo = np.where(take, lo, m1)
    a = 0.5 * (lo + hi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g1 = p * a ** (p - 1.0) - tcol * q * (c - a) ** (q - 1.0)
        g2 = p * (p - 1.0) * a ** (p - 2.0) + tcol * q * (q - 1.0) * (c - a) ** (q - 2.0)
        step = np.where((g2 > 0.0) & np.isfinite(g2), g1 / g2, 0.0)
    a_newton = np.clip(a - step, 0.0, c)

    def value(av):
        return av**p + tcol * (c - av) ** q

    out = np.minimum(value(a), value(a_newton))
    out = np.minimum(out, tcol * c**q)      # a = 0
    out = np.minimum(out, np.broadcast_to(c**p, (nt, n)))  # a = c
    return out


def l_functional_grid(ts, x: SampleFunction, p: float, q: float) -> np.ndarray:
    """K_{p,q}(t, x; L^p, L^q) for every t in ts, exact up to 1e-12 per atom."""
    _check_exponent(p)
    _check_exponent(q, "q")
    if not p < q:
        raise ValueError("need p < q")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    c = x.abs_values()
    per_atom = _pointwise_min_split(c, ts, p, q)
    return per_atom.dot(x.space.weights)


def l_functional(t: float, x: SampleFunction, p: float, q: float) -> KEvaluation:
    """L-functional of (L^p, L^q) at one parameter, by pointwise splits."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    value = float(l_functional_grid(np.array([t]), x, p, q)[0])
    return KEvaluation(float(t), value, "pointwise")


def l_star_grid(ts, x: SampleFunction, p: float, q: float) -> np.ndarray:
    """Modified L-functional: weighted sum of min(|x|^p, t |x|^q)."""
    _check_exponent(p)
    _check_exponent(q, "q")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    c = x.abs_values()
    vals = np.minimum(c[None, :] ** p, ts[:, None] * c[None, :] ** q)
    return vals.dot(x.space.weights)


def l_star_functional(t: float, x: SampleFunction, p: float, q: float) -> float:
    if t <= 0.0:
        raise ValueError("t must be positive")
    return float(l_star_grid(np.array([t]), x, p, q)[0])


def brute_force_k(t: float, x: SampleFunction, p: float, q: float, n: int = 201) -> float:
    """Grid minimum of ||x0||_p^p + t ||x1||_q^q over signed decompositions.

    Each atom's component of x0 ranges over n points in [-2|x_i|, 2|x_i|]
    and x1 = x - x0. The full product grid is searched, so no pointwise or
    sign reduction is assumed; the result is an upper bound on the infimum
    that tightens as n grows.
    """
    _check_exponent(p)
    _check_exponent(q, "q")
    if t <= 0.0:
        raise ValueError("t must be positive")
    if x.space.n > 3:
        raise ValueError("brute force is limited to 3 atoms")
    if n > 201 or n < 3:
        raise ValueError("n must lie in [3, 201]")
    per_atom = []
    for ci_signed, wi in zip(x.values, x.space.weights):
        ci = abs(float(ci_signed))
        s = np.linspace(-2.0 * ci, 2.0 * ci, n) if ci > 0.0 else np.zeros(1)
        per_atom.append(wi * (np.abs(s) ** p + t * np.abs(ci_signed - s) ** q))
    total = per_atom[0]
    for arr in per_atom[1:]:
        total = total[..., None] + arr
    return float(total.min())
