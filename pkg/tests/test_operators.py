import numpy as np
import pytest

import orliczkit as ok
from orliczkit.operators import (
    _window_average_matrices,
    homogeneity_violation,
    subadditivity_violation,
)
from orliczkit.orlicz import ExponentCouple

COUPLE = ExponentCouple(1, 2)


@pytest.fixture(scope="module")
def space():
    return ok.uniform_space(6)


def shipped_operators(space):
    cyclic = 0.9 * np.roll(np.eye(space.n), 1, axis=1)
    return {
        "identity": ok.identity_operator(space, COUPLE),
        "averaging": ok.averaging_operator(space, COUPLE),
        "scaled_shift": ok.contractive_matrix(space, cyclic, COUPLE),
        "half_multiplier": ok.multiplier(space, np.full(space.n, 0.5), COUPLE),
        "truncation": ok.multiplier(space, [1, 1, 1, 0, 0, 0], COUPLE),
        "maximal": ok.discrete_maximal(space, COUPLE),
        "max_of_mix": ok.max_of([
            ok.identity_operator(space, COUPLE),
            ok.multiplier(space, np.full(space.n, 0.25), COUPLE),
        ]),
    }


class TestContractiveMatrix:
    def test_identity(self, space):
        op = ok.contractive_matrix(space, np.eye(space.n), COUPLE)
        assert op.bound_p == op.bound_q == 1.0
        x = ok.SampleFunction(space, np.arange(space.n, dtype=float))
        assert np.array_equal(op.apply(x).values, x.values)

    def test_averaging_bounds_one(self, space):
        op = ok.averaging_operator(space, COUPLE)
        assert op.bound_p == pytest.approx(1.0)
        assert op.bound_q == pytest.approx(1.0)

    def test_scaled_cyclic_shift(self, space):
        cyclic = 0.9 * np.roll(np.eye(space.n), 1, axis=1)
        op = ok.contractive_matrix(space, cyclic, COUPLE)
        assert op.bound_p == pytest.approx(0.9)
        assert op.bound_q == pytest.approx(0.9)

    def test_row_sum_violation(self, space):
        bad = np.eye(space.n) * 1.5
        with pytest.raises(ValueError):
            ok.contractive_matrix(space, bad, COUPLE)

    def test_requires_uniform_weights(self):
        sp = ok.DiscreteMeasureSpace([1.0, 2.0])
        with pytest.raises(ValueError):
            ok.contractive_matrix(sp, np.eye(2), ExponentCouple(1, 2))


class TestMultiplier:
    def test_ones_is_identity(self, space):
        op = ok.multiplier(space, np.ones(space.n), COUPLE)
        assert op.bound_p == 1.0
        x = ok.SampleFunction(space, np.linspace(-1, 1, space.n))
        assert np.array_equal(op.apply(x).values, x.values)

    def test_indicator_truncation(self, space):
        op = ok.multiplier(space, [1, 0, 1, 0, 0, 0], COUPLE)
        x = ok.SampleFunction(space, np.arange(space.n, dtype=float))
        assert op.apply(x).values.tolist() == [0, 0, 2, 0, 0, 0]

    def test_half_bound(self, space):
        op = ok.multiplier(space, np.full(space.n, 0.5), COUPLE)
        assert op.bound_p == op.bound_q == 0.5

    def test_cap_enforced(self, space):
        with pytest.raises(ValueError):
            ok.multiplier(space, np.full(space.n, 1.5), COUPLE)


class TestMaxOf:
    def test_singleton_is_absolute_value(self, space):
        op = ok.max_of([ok.identity_operator(space, COUPLE)])
        x = ok.SampleFunction(space, np.linspace(-2, 2, space.n))
        assert np.array_equal(op.apply(x).values, np.abs(x.values))
        assert op.bound_p == 1.0

    def test_scaled_identities_certificate_is_upper_bound(self, space):
        cs = [1.0, 0.5, 0.25]
        members = [ok.multiplier(space, np.full(space.n, c), COUPLE) for c in cs]
        op = ok.max_of(members)
        assert op.bound_p == pytest.approx(sum(c**1 for c in cs))
        assert op.bound_q == pytest.approx(np.sqrt(sum(c**2 for c in cs)))
        est = ok.estimate_norm(op, 2, trials=64, seed=0)
        assert est <= op.bound_q + 1e-9
        assert est == pytest.approx(max(cs), rel=1e-9)

    def test_subadditivity_probes(self, space):
        op = ok.max_of([
            ok.averaging_operator(space, COUPLE),
            ok.multiplier(space, np.full(space.n, 0.7), COUPLE),
        ])
        assert subadditivity_violation(op, pairs=1000, seed=5) <= 1e-10

    def test_linear_members_make_it_sublinear(self, space):
        op = ok.max_of([ok.identity_operator(space, COUPLE),
                        ok.averaging_operator(space, COUPLE)])
        assert op.kind == "sublinear"
        # exact up to one rounding of the matrix products
        assert homogeneity_violation(op) <= 1e-14

    def test_space_mismatch(self, space):
        other = ok.uniform_space(3)
        with pytest.raises(ValueError):
            ok.max_of([ok.identity_operator(space, COUPLE),
                       ok.identity_operator(other, COUPLE)])


class TestDiscreteMaximal:
    def test_constant_function_fixed(self, space):
        op = ok.discrete_maximal(space, COUPLE)
        x = ok.SampleFunction(space, np.full(space.n, -1.5))
        assert np.allclose(op.apply(x).values, 1.5)

    def test_single_spike_decay(self):
        sp = ok.uniform_space(4)
        op = ok.discrete_maximal(sp, COUPLE)
        x = ok.SampleFunction(sp, [1, 0, 0, 0])
        assert np.allclose(op.apply(x).values, [1, 1 / 2, 1 / 3, 1 / 4])

    def test_inf_bound_is_one_and_probes_pass(self, space):
        op = ok.discrete_maximal(space, ExponentCouple(2, np.inf))
        assert op.bound_q == 1.0
        assert subadditivity_violation(op, pairs=500, seed=9) <= 1e-10

    def test_matches_literal_window_max_of(self):
        sp = ok.uniform_space(5)
        op = ok.discrete_maximal(sp, COUPLE)
        members = [ok.contractive_matrix(sp, a, COUPLE) for a in _window_average_matrices(5)]
        literal = ok.max_of(members)
        assert literal.bound_p == pytest.approx(op.bound_p)
        assert literal.bound_q == pytest.approx(op.bound_q)
        rng = np.random.default_rng(41)
        for _ in range(20):
            v = rng.normal(size=5)
            got = op.apply(ok.SampleFunction(sp, v)).values
            want = literal.apply(ok.SampleFunction(sp, np.abs(v))).values
            assert np.allclose(got, want, atol=1e-13)

    def test_between_average_and_sup(self, space):
        op = ok.discrete_maximal(space, COUPLE)
        rng = np.random.default_rng(42)
        for _ in range(20):
            v = rng.uniform(-2, 2, space.n)
            out = op.apply(ok.SampleFunction(space, v)).values
            assert np.all(out >= np.mean(np.abs(v)) - 1e-12)
            assert np.all(out <= np.max(np.abs(v)) + 1e-12)


class TestEstimateNorm:
    def test_identity_exact(self, space):
        assert ok.estimate_norm(ok.identity_operator(space, COUPLE), 2) == 1.0

    def test_multiplier_spike_achieves_peak(self, space):
        op = ok.multiplier(space, [0.5, 0.2, 0.1, 0.0, 0.3, 0.4], COUPLE)
        est = ok.estimate_norm(op, 1.5, trials=32, seed=3)
        assert est == pytest.approx(0.5, rel=1e-9)

    @pytest.mark.parametrize("r", [1.0, 1.5, 2.0, 3.0, np.inf])
    def test_never_exceeds_certificates(self, space, r):
        # rebuild each operator on a couple that carries a certificate at r
        from orliczkit.specs import random_contractive

        couple = ExponentCouple(2, np.inf) if np.isinf(r) else ExponentCouple(r, r + 1)
        cyclic = 0.9 * np.roll(np.eye(space.n), 1, axis=1)
        operators = [
            ok.identity_operator(space, couple),
            ok.averaging_operator(space, couple),
            ok.contractive_matrix(space, cyclic, couple),
            ok.multiplier(space, np.full(space.n, 0.5), couple),
            ok.discrete_maximal(space, couple),
            ok.max_of([ok.identity_operator(space, couple),
                       ok.multiplier(space, np.full(space.n, 0.25), couple)]),
            random_contractive(space, couple, 5),
            random_contractive(space, couple, 6),
        ]
        for op in operators:
            cert = op.bound_q if np.isinf(r) else op.bound_p
            est = ok.estimate_norm(op, r, trials=48, seed=17)
            assert est <= cert * (1 + 1e-9), op.certificate


class TestSubadditivityInvariant:
    def test_all_shipped_operators(self, space):
        for name, op in shipped_operators(space).items():
            assert subadditivity_violation(op, pairs=1000, seed=13) <= 1e-10, name
