import numpy as np
import pytest

import orliczkit as ok
from orliczkit.quasiconcave import concavity_violation, log_grid


def random_concave_plc(rng, knots=5):
    """Concave piecewise linear function with strictly decreasing slopes."""
    xs = np.sort(rng.uniform(0.1, 10.0, knots))
    slopes = np.sort(rng.uniform(0.0, 3.0, knots + 1))[::-1]
    values = [rng.uniform(0.5, 2.0) + slopes[0] * xs[0]]
    for i in range(1, knots):
        values.append(values[-1] + slopes[i] * (xs[i] - xs[i - 1]))
    return ok.PiecewiseLinearConcave(xs, values, slopes[0], slopes[-1])


class TestIsQuasiConcave:
    def test_min_one_passes(self):
        assert ok.is_quasiconcave(ok.min_one_rho()).ok

    def test_square_fails(self):
        check = ok.is_quasiconcave(lambda t: np.asarray(t) ** 2)
        assert not check.ok and check.worst_violation > 1e-3

    def test_max_one_passes(self):
        assert ok.is_quasiconcave(ok.max_one_rho()).ok

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            ok.is_quasiconcave(ok.min_one_rho(), grid=np.logspace(-2, 2, 50))

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            ok.is_quasiconcave(lambda t: np.asarray(t) - 1e5)


class TestPowerLog:
    def test_plain_power_at_one(self):
        assert float(ok.power_log_rho(0.5, 0, 0)(1.0)) == pytest.approx(1.0)

    def test_log_factor_at_one(self):
        assert float(ok.power_log_rho(0.5, 1, 0)(1.0)) == pytest.approx(np.log(np.e + 1.0))

    @pytest.mark.parametrize("params", [(0.3, 1, -1), (0.7, -1, 1)])
    def test_admissible_members_are_quasiconcave(self, params):
        assert ok.is_quasiconcave(ok.power_log_rho(*params)).ok

    def test_theta_range_enforced(self):
        with pytest.raises(ValueError):
            ok.power_log_rho(1.0, 0, 0)

    def test_zero_at_zero(self):
        assert float(ok.power_log_rho(0.4, 2, 1)(0.0)) == 0.0


class TestConcaveMajorant:
    def test_min_one_is_fixed_point(self):
        maj = ok.concave_majorant(ok.min_one_rho())
        grid = log_grid()
        rho = np.minimum(1.0, grid)
        assert np.max(np.abs(maj(grid) - rho) / rho) < 1e-8

    def test_max_one_becomes_affine(self):
        maj = ok.concave_majorant(ok.max_one_rho())
        ts = np.logspace(-6, 6, 200)
        assert np.max(np.abs(maj(ts) - (1.0 + ts)) / (1.0 + ts)) < 1e-8

    @pytest.mark.parametrize("params", [(0.5, 0, 0), (0.3, 1, -1), (0.7, -1, 1)])
    def test_two_sided_comparison(self, params):
        rho = ok.power_log_rho(*params)
        maj = ok.concave_majorant(rho)
        grid = log_grid()
        ratio = maj(grid) / rho(grid)
        assert ratio.min() >= 1.0 - 1e-8
        assert ratio.max() <= 2.0 + 1e-8

    def test_output_is_certified_concave(self):
        maj = ok.concave_majorant(ok.power_log_rho(0.4, 1, 0))
        assert concavity_violation(maj, log_grid(1e-6, 1e6, 32)) <= 1e-12

    def test_non_quasiconcave_rejected(self):
        with pytest.raises(ValueError):
            ok.concave_majorant(ok.QuasiConcaveFn(lambda t: np.asarray(t) ** 2))

    def test_envelope_matches_direct_pairwise_minimum(self):
        # independent O(n^2) route to inf over grid s of (1 + t/s) rho(s)
        rho = ok.power_log_rho(0.4, 1, 0)
        coarse = log_grid(1e-4, 1e4, 32)
        maj = ok.concave_majorant(rho, grid=coarse, extend_decades=0.0)
        vals = rho(coarse)
        direct = np.min(vals[None, :] * (1.0 + coarse[:, None] / coarse[None, :]), axis=1)
        assert np.allclose(maj(coarse), direct, rtol=1e-12)


class TestRhoStar:
    def test_power_transform(self):
        star = ok.rho_star(ok.power_rho(0.25))
        assert float(star(16.0)) == pytest.approx(8.0, rel=1e-12)

    def test_constant_becomes_identity(self):
        star = ok.rho_star(ok.power_rho(0.0))
        ts = np.logspace(-3, 3, 20)
        assert np.allclose(star(ts), ts, rtol=1e-12)

    def test_involution(self):
        rho = ok.power_log_rho(0.6, 1, -1)
        twice = ok.rho_star(ok.rho_star(rho))
        ts = np.logspace(-5, 5, 100)
        assert np.max(np.abs(twice(ts) - rho(ts)) / rho(ts)) < 1e-12

    def test_preserves_quasiconcavity(self):
        for rho in (ok.min_one_rho(), ok.max_one_rho(), ok.power_log_rho(0.3, 1, -1)):
            assert ok.is_quasiconcave(ok.rho_star(rho)).ok


class TestPeetre:
    def test_min_form(self):
        h = ok.PiecewiseLinearConcave([1.0], [1.0], 1.0, 0.0)
        rep = ok.peetre_decompose(h)
        assert rep.a == 0.0 and rep.b == 0.0
        assert rep.atom_locations.tolist() == [1.0]
        assert rep.atom_masses.tolist() == [1.0]

    def test_affine_form(self):
        rep = ok.peetre_decompose(ok.PiecewiseLinearConcave([1.0], [2.0], 1.0, 1.0))
        assert rep.a == 1.0 and rep.b == 1.0 and rep.atom_locations.size == 0

    def test_random_round_trip_exact_at_knots(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            h = random_concave_plc(rng)
            rep = ok.peetre_decompose(h)
            assert np.allclose(rep(h.knots), h.values, rtol=1e-12, atol=1e-12)
            mids = np.sqrt(h.knots[:-1] * h.knots[1:])
            assert np.allclose(rep(mids), h(mids), rtol=1e-12, atol=1e-12)

    def test_decompose_reconstruct_identity(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            rep = ok.peetre_decompose(random_concave_plc(rng))
            back = ok.peetre_decompose(ok.reconstruct(rep))
            assert back.a == pytest.approx(rep.a, rel=1e-12, abs=1e-12)
            assert back.b == pytest.approx(rep.b, rel=1e-12, abs=1e-12)
            assert np.allclose(back.atom_locations, rep.atom_locations, rtol=1e-12)
            assert np.allclose(back.atom_masses, rep.atom_masses, rtol=1e-12)

    def test_non_concave_data_rejected(self):
        with pytest.raises(ValueError):
            ok.PiecewiseLinearConcave([1.0, 2.0], [1.0, 3.0], 1.0, 0.0)


class TestPhiExpansion:
    def test_affine_part(self):
        rep = ok.PeetreRepresentation(1.0, 1.0)
        assert float(ok.phi_expansion(rep, 1, 2, 3.0)) == pytest.approx(12.0)

    def test_single_atom(self):
        rep = ok.PeetreRepresentation(0.0, 0.0, [1.0], [1.0])
        assert float(ok.phi_expansion(rep, 1, 2, 2.0)) == pytest.approx(2.0)

    def test_matches_h_route_on_random_inputs(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            h = random_concave_plc(rng)
            rep = ok.peetre_decompose(h)
            p, q = sorted(rng.uniform(1.0, 4.0, 2))
            if q - p < 0.2:
                q = p + 0.5
            phi = ok.build_from_h(ok.ExponentCouple(p, q), h)
            us = rng.uniform(0.01, 20.0, 50)
            direct = phi(us)
            expanded = ok.phi_expansion(rep, p, q, us)
            assert np.allclose(expanded, direct, rtol=1e-10, atol=1e-12)

    def test_atom_free_expansion_is_convex(self):
        rep = ok.PeetreRepresentation(0.7, 1.3)
        grid = np.linspace(0.0, 10.0, 2001)
        assert ok.check_convexity(lambda u: ok.phi_expansion(rep, 1.5, 3.0, u), grid).ok

    def test_single_atom_expansion_has_concave_kink(self):
        # min(u^p, t*u^q) drops slope at its crossover, so expansions with
        # atoms are not convex in general; the convexity claim belongs to
        # generator-built functions.
        rep = ok.PeetreRepresentation(0.0, 0.0, [1.0], [1.0])
        grid = np.linspace(0.0, 4.0, 2001)
        assert not ok.check_convexity(lambda u: ok.phi_expansion(rep, 1, 2, u), grid).ok
