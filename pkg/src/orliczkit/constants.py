"""Sparr constants and the interpolation-constant formulas built on them.

gamma(p, q) is the smallest gamma such that the two-piece cost
inf_{x+y=gamma, x,y>=0} (x^p + y^q) reaches 1. Two routes are provided:
a stationarity characterization solved by dense scan plus bisection (fast)
and a direct bisection on the defining condition (oracle). The interpolation
constants for subadditive, concave-h, and linear settings are arithmetic on
gamma with their proven envelope bounds asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROOT_SCAN_POINTS = 100_000


@dataclass(frozen=True)
class SparrConstant:
    p: float
    q: float
    value: float
    method: str

    def __post_init__(self):
        if not (1.0 - 1e-12 <= self.value < 2.0):
            raise ValueError(f"gamma out of [1, 2): {self.value}")


def _bisect(fn, lo: float, hi: float, xtol: float) -> float:
    flo = fn(lo)
    if flo == 0.0:
        return lo
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _gamma_closed_diagonal(q: float) -> float:
    return 2.0 ** (1.0 - 1.0 / q)


def _gamma_closed_one_q(q: float) -> float:
    return 1.0 + q ** (1.0 / (1.0 - q)) - q ** (q / (1.0 - q))


def sparr_gamma(p: float, q: float) -> SparrConstant:
    """Sharp constant via the stationarity characterization.

    For q > 1 the interior optimum of the two-piece cost ties y to x through
    p*x^{p-1} = q*y^{q-1}; scanning x over (0,1) for all roots of the unit
    cost constraint and taking the smallest x + y over roots gives gamma.
    Closed forms on the diagonal and at p = 1 are cross-checked.
    """
    if not (1.0 <= p <= 64.0 and 1.0 <= q <= 64.0):
        raise ValueError("p and q must lie in [1, 64]")
    if p == 1.0 and q == 1.0:
        return SparrConstant(p, q, 1.0, "closed_form")
    if q == 1.0:
        return SparrConstant(p, q, sparr_gamma(q, p).value, "root_finding")

    s = q / (q - 1.0)

    def y_of_x(x: float) -> float:
        return ((p / q) * x ** (p - 1.0)) ** (1.0 / (q - 1.0))

    def constraint(x: float) -> float:
        return x**p + ((p / q) * x ** (p - 1.0)) ** s - 1.0

    xs = np.linspace(0.0, 1.0, ROOT_SCAN_POINTS + 1)[1:]
    with np.errstate(over="ignore"):
        vals = xs**p + ((p / q) * xs ** (p - 1.0)) ** s - 1.0
    signs = np.sign(vals)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]
    roots = [float(xs[i]) for i in np.nonzero(signs == 0.0)[0]]
    roots += [_bisect(constraint, float(xs[i]), float(xs[i + 1]), 1e-13) for i in flips]
    if not roots:
        raise RuntimeError("no stationarity root found; the constraint should cross zero")
    value = min(x + y_of_x(x) for x in roots)

    method = "root_finding"
    if abs(p - q) < 1e-12:
        closed = _gamma_closed_diagonal(q)
        if abs(value - closed) > 1e-9:
            raise RuntimeError(f"diagonal closed form mismatch: {value} vs {closed}")
        value, method = closed, "closed_form"
    elif p == 1.0:
        closed = _gamma_closed_one_q(q)
        if abs(value - closed) > 1e-9:
            raise RuntimeError(f"p=1 closed form mismatch: {value} vs {closed}")
        value, method = closed, "closed_form"
    return SparrConstant(p, q, value, method)


def sparr_gamma_oracle(p: float, q: float) -> SparrConstant:
    """Sharp constant straight from the definition, by nested bisection.

    The inner cost m(gamma) = min_{0<=y<=gamma} ((gamma-y)^p + y^q) is convex
    in y and strictly increasing in gamma, so bisecting m(gamma) = 1 on
    [1, 2] converges; the inner minimum uses ternary search to 1e-12.
    """
    if not (1.0 <= p <= 16.0 and 1.0 <= q <= 16.0):
        raise ValueError("p and q must lie in [1, 16]")

    def inner_min(gamma: float) -> float:
        lo, hi = 0.0, gamma
        while hi - lo > 1e-13 * gamma:
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if (gamma - m1) ** p + m1**q <= (gamma - m2) ** p + m2**q:
                hi = m2
            else:
                lo = m1
        y = 0.5 * (lo + hi)
        return min((gamma - y) ** p + y**q, gamma**p, gamma**q)

    if inner_min(1.0) >= 1.0 - 1e-14:
        return SparrConstant(p, q, 1.0, "bisection_oracle")
    value = _bisect(lambda g: inner_min(g) - 1.0, 1.0, 2.0, 1e-8 / 4.0)
    return SparrConstant(p, q, value, "bisection_oracle")


def gamma_bounds_check(p: float, q: float, slack: float = 1e-9) -> bool:
    """Whether gamma(p, q) sits inside [2^{1-1/p}, 2^{1-1/q}] for p <= q."""
    if p > q:
        raise ValueError("need p <= q")
    g = sparr_gamma(p, q).value
    return (2.0 ** (1.0 - 1.0 / p) - slack <= g <= 2.0 ** (1.0 - 1.0 / q) + slack)


def interp_constant_subadditive(p: float, q: float) -> float:
    """(2 gamma)^{1/p}, the norm constant for subadditive interpolation."""
    if not (1.0 <= p < q < np.inf):
        raise ValueError("need 1 <= p < q < inf")
    c = (2.0 * sparr_gamma(p, q).value) ** (1.0 / p)
    envelope = 2.0 ** ((2.0 - 1.0 / q) / p)
    if c > envelope * (1.0 + 1e-12) or not c < 4.0:
        raise RuntimeError(f"constant {c} escaped its envelope {envelope}")
    return c


def interp_constant_concave_h(p: float, q: float) -> float:
    """gamma^{1/p}, the improved constant when phi has the concave-h form."""
    if not (1.0 <= p < q < np.inf):
        raise ValueError("need 1 <= p < q < inf")
    c = sparr_gamma(p, q).value ** (1.0 / p)
    q_conj = q / (q - 1.0)
    envelope = 2.0 ** (1.0 / (q_conj * p))
    if c > envelope * (1.0 + 1e-12) or not c < 2.0:
        raise RuntimeError(f"constant {c} escaped its envelope {envelope}")
    return c


def interp_constant_linear(p: float, q: float) -> float:
    """Duality-improved constant for linear operators, 1 < p < q < inf."""
    if not (1.0 < p < q < np.inf):
        raise ValueError("need 1 < p < q < inf")
    p_conj = conjugate_exponent(p)
    q_conj = conjugate_exponent(q)
    branch_direct = (2.0 * sparr_gamma(p, q).value) ** (1.0 / p)
    branch_dual = (2.0 * sparr_gamma(q_conj, p_conj).value) ** (1.0 / q_conj)
    c = min(branch_direct, branch_dual)
    envelope = 2.0 ** (1.0 / (p * q_conj) + min(1.0 / p, 1.0 / q_conj))
    if c > envelope * (1.0 + 1e-12) or not c < 4.0:
        raise RuntimeError(f"constant {c} escaped its envelope {envelope}")
    if (q <= 2.0 or p >= 2.0) and not c < 2.0:
        raise RuntimeError(f"constant {c} should be < 2 for this exponent range")
    return c


def bergh_constant(p: float) -> float:
    """Sharp upper factor 2^{1-1/p} in the truncation comparison."""
    if not 1.0 <= p < np.inf:
        raise ValueError("p must lie in [1, inf)")
    return 2.0 ** (1.0 - 1.0 / p)


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1; an involution on (1, inf)."""
    if not p > 1.0:
        raise ValueError("p must exceed 1")
    return p / (p - 1.0)
