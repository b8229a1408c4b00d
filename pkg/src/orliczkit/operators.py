"""Test operators with analytically certified norm bounds.

Every operator carries certified upper bounds on its L^p -> L^p and
L^q -> L^q norms for a declared exponent couple. Certificates come only
from composition rules that are provable at desk scale: multipliers are
exact, doubly substochastic matrices interpolate between their row and
column sums, and a pointwise max of operators sums certificates in the
r-th power. The sliding-window maximal operator therefore ships with a
deliberately conservative certificate. Empirical norm estimation gives
lower bounds only and must never cross a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .measure import DiscreteMeasureSpace, SampleFunction
from .orlicz import ExponentCouple

KIND_LINEAR = "linear"
KIND_SUBLINEAR = "sublinear"
KIND_SUBADDITIVE = "subadditive"


@dataclass(frozen=True)
class CertifiedOperator:
    """Operator on sample functions with certified couple norm bounds."""

    space: DiscreteMeasureSpace
    kind: str
    couple: ExponentCouple
    bound_p: float
    bound_q: float
    certificate: str
    _apply: Callable[[np.ndarray], np.ndarray]

    @property
    def max_bound(self) -> float:
        return max(self.bound_p, self.bound_q)

    def apply(self, x: SampleFunction) -> SampleFunction:
        if x.space is not self.space and not np.array_equal(x.space.weights, self.space.weights):
            raise ValueError("operator and input live on different spaces")
        return SampleFunction(x.space, self._apply(x.values))

    def with_bounds(self, bound_p: float, bound_q: float, note: str) -> "CertifiedOperator":
        """Copy with replaced certificate (used to plant faults in tests)."""
        return CertifiedOperator(self.space, self.kind, self.couple, bound_p, bound_q,
                                 f"{self.certificate}; {note}", self._apply)


def _interp_bound(max_row: float, max_col: float, r: float) -> float:
    if math.isinf(r):
        return max_row
    return max_col ** (1.0 / r) * max_row ** (1.0 - 1.0 / r)


def _require_uniform(space: DiscreteMeasureSpace) -> None:
    if not np.allclose(space.weights, space.weights[0], rtol=1e-12, atol=0.0):
        raise ValueError("matrix certificates require uniform atom weights")


def contractive_matrix(space: DiscreteMeasureSpace, matrix, couple: ExponentCouple) -> CertifiedOperator:
    """Linear operator from a matrix with row and column l1 sums at most 1.

    On uniform weights those sums bound the L^1 and L^inf norms, and the
    interpolated bound max_col^{1/r} * max_row^{1-1/r} certifies every
    intermediate exponent.
    """
    _require_uniform(space)
    a = np.asarray(matrix, dtype=float)
    if a.shape != (space.n, space.n):
        raise ValueError("matrix shape must match the atom count")
    max_row = float(np.abs(a).sum(axis=1).max())
    max_col = float(np.abs(a).sum(axis=0).max())
    if max_row > 1.0 + 1e-12 or max_col > 1.0 + 1e-12:
        raise ValueError(f"row or column l1 sum exceeds 1 (row {max_row:.6g}, col {max_col:.6g})")
    a = a.copy()
    a.flags.writeable = False
    return CertifiedOperator(
        space, KIND_LINEAR, couple,
        _interp_bound(max_row, max_col, couple.p),
        _interp_bound(max_row, max_col, couple.q),
        f"matrix contraction: max row l1 {max_row:.12g}, max col l1 {max_col:.12g}",
        lambda v: a.dot(v),
    )


def multiplier(space: DiscreteMeasureSpace, m, couple: ExponentCouple) -> CertifiedOperator:
    """Atomwise multiplication by m with |m_i| <= 1; exact bound max |m_i|."""
    mv = np.asarray(m, dtype=float).copy()
    if mv.shape != (space.n,):
        raise ValueError("multiplier length must match the atom count")
    peak = float(np.abs(mv).max())
    if peak > 1.0 + 1e-12:
        raise ValueError("multiplier entries must satisfy |m_i| <= 1")
    mv.flags.writeable = False
    return CertifiedOperator(
        space, KIND_LINEAR, couple, peak, peak,
        f"multiplier: max |m| = {peak:.12g} (exact for every exponent)",
        lambda v: mv * v,
    )


def identity_operator(space: DiscreteMeasureSpace, couple: ExponentCouple) -> CertifiedOperator:
    return multiplier(space, np.ones(space.n), couple)


def averaging_operator(space: DiscreteMeasureSpace, couple: ExponentCouple) -> CertifiedOperator:
    """Full average: all matrix entries 1/n (doubly stochastic)."""
    n = space.n
    return contractive_matrix(space, np.full((n, n), 1.0 / n), couple)


def max_of(ops: Sequence[CertifiedOperator]) -> CertifiedOperator:
    """Pointwise maximum of |T_j x|: subadditive, sublinear if all linear.

    Certified bound for finite r is the l^r sum of member certificates;
    for r = inf it is their maximum.
    """
    if not ops:
        raise ValueError("need at least one operator")
    first = ops[0]
    for op in ops[1:]:
        if op.space is not first.space and not np.array_equal(op.space.weights, first.space.weights):
            raise ValueError("operators live on different spaces")
        if op.couple != first.couple:
            raise ValueError("operators certify different couples")
    applies = [op._apply for op in ops]

    def combine(bounds: list[float], r: float) -> float:
        if math.isinf(r):
            return max(bounds)
        return float(sum(b**r for b in bounds)) ** (1.0 / r)

    kind = KIND_SUBLINEAR if all(op.kind in (KIND_LINEAR, KIND_SUBLINEAR) for op in ops) else KIND_SUBADDITIVE
    return CertifiedOperator(
        first.space, kind, first.couple,
        combine([op.bound_p for op in ops], first.couple.p),
        combine([op.bound_q for op in ops], first.couple.q),
        f"max of {len(ops)} operators; certificate is the lr sum of member bounds",
        lambda v: np.max(np.abs(np.stack([ap(v) for ap in applies])), axis=0),
    )


def _window_average_matrices(n: int) -> list[np.ndarray]:
    mats = []
    for lo in range(n):
        for hi in range(lo, n):
            a = np.zeros((n, n))
            a[lo : hi + 1, lo : hi + 1] = 1.0 / (hi - lo + 1)
            mats.append(a)
    return mats


def discrete_maximal(space: DiscreteMeasureSpace, couple: ExponentCouple) -> CertifiedOperator:
    """Sliding-window maximal operator over all contiguous atom intervals.

    (Tx)_i is the largest average of |x| over a window containing i. This is
    the pointwise max of the window averaging matrices applied to |x|, so it
    inherits the max_of certificate: each window matrix is a contraction on
    every exponent, leaving W^{1/r} with W = n(n+1)/2 windows for finite r
    and exactly 1 for r = inf. The apply path uses prefix sums instead of
    materializing the W matrices.
    """
    _require_uniform(space)
    n = space.n
    windows = n * (n + 1) // 2

    def apply(v: np.ndarray) -> np.ndarray:
        prefix = np.concatenate(([0.0], np.cumsum(np.abs(v))))
        lengths = np.arange(1, n + 1, dtype=float)
        # means[lo, hi] = average of |v| over atoms lo..hi (upper triangle)
        with np.errstate(divide="ignore", invalid="ignore"):
            means = (prefix[None, 1:] - prefix[:-1, None]) / (lengths[None, :] - np.arange(n)[:, None])
        means = np.where(np.arange(n)[None, :] >= np.arange(n)[:, None], means, -np.inf)
        # best window ending at or after i, for each start lo <= i
        tail_best = np.maximum.accumulate(means[:, ::-1], axis=1)[:, ::-1]
        return np.maximum.accumulate(tail_best, axis=0).diagonal().copy()

    def bound(r: float) -> float:
        return 1.0 if math.isinf(r) else windows ** (1.0 / r)

    return CertifiedOperator(
        space, KIND_SUBLINEAR, couple, bound(couple.p), bound(couple.q),
        f"window maximal over {windows} averaging contractions; lr-sum certificate, exact 1 at inf",
        apply,
    )


def estimate_norm(op: CertifiedOperator, r: float, trials: int = 64, seed: int = 0) -> float:
    """Empirical lower bound on the L^r operator norm.

    Probes random shapes (uniform, signed log-normal, spikes, constants) and
    then runs a fixed-point boost that reweights inputs by |Tx|^{r-1}. The
    result never certifies anything; it only sanity-checks certificates from
    below.
    """
    if not (1.0 <= r):
        raise ValueError("r must be at least 1")
    n = op.space.n
    w = op.space.weights
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    def norm_r(v: np.ndarray) -> float:
        if math.isinf(r):
            return float(np.abs(v).max(initial=0.0))
        return float(np.sum(np.abs(v) ** r * w)) ** (1.0 / r)

    def ratio(v: np.ndarray) -> float:
        nv = norm_r(v)
        if nv == 0.0:
            return 0.0
        return norm_r(op._apply(v)) / nv

    probes = [np.ones(n)]
    probes.extend(np.eye(n)[i] for i in range(n))
    for _ in range(max(trials, 1)):
        shape = rng.integers(0, 3)
        if shape == 0:
            probes.append(rng.uniform(-1.0, 1.0, n))
        elif shape == 1:
            probes.append(rng.choice([-1.0, 1.0], n) * np.exp(rng.normal(0.0, 1.0, n)))
        else:
            v = np.zeros(n)
            v[rng.integers(0, n)] = rng.uniform(0.5, 2.0)
            probes.append(v)
    best = 0.0
    best_probe = probes[0]
    for v in probes:
        rv = ratio(v)
        if rv > best:
            best, best_probe = rv, v
    x = best_probe
    for _ in range(50):
        y = np.abs(op._apply(x))
        if not np.any(y > 0.0):
            break
        if math.isinf(r):
            boosted = (y == y.max()).astype(float)
        else:
            boosted = y ** (r - 1.0) if r > 1.0 else (y > 0.0).astype(float)
        nb = norm_r(boosted)
        if nb == 0.0:
            break
        x = boosted / nb
        best = max(best, ratio(x))
    return best


def subadditivity_violation(op: CertifiedOperator, pairs: int = 1000, seed: int = 7,
                            scale: float = 1.0) -> float:
    """Worst atomwise violation of |T(x+y)| <= |Tx| + |Ty| over random pairs."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n = op.space.n
    worst = 0.0
    for _ in range(pairs):
        a = rng.uniform(-scale, scale, n)
        b = rng.choice([-1.0, 1.0], n) * np.exp(rng.normal(0.0, 1.0, n)) * scale
        lhs = np.abs(op._apply(a + b))
        rhs = np.abs(op._apply(a)) + np.abs(op._apply(b))
        gap = float((lhs - rhs).max(initial=0.0))
        denom = max(float(rhs.max(initial=0.0)), 1e-300)
        worst = max(worst, gap / denom)
    return worst


def homogeneity_violation(op: CertifiedOperator, trials: int = 200, seed: int = 11) -> float:
    """Worst atomwise violation of |T(c x)| = |c| |Tx| over random scalings."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n = op.space.n
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-1.0, 1.0, n)
        c = float(rng.choice([-1.0, 1.0]) * np.exp(rng.normal(0.0, 1.0)))
        lhs = np.abs(op._apply(c * x))
        rhs = abs(c) * np.abs(op._apply(x))
        scale = max(float(rhs.max(initial=0.0)), 1e-300)
        worst = max(worst, float(np.abs(lhs - rhs).max(initial=0.0)) / scale)
    return worst
