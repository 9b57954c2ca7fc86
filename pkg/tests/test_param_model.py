"""Feasible region, unit normalization, Beta sampling, and CDF machinery."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from graphbargain.params import (
    A_MAX,
    A_MIN,
    BetaSpec,
    ParamBounds,
    QVector,
    UnitPoint,
    beta_cdf,
    cell_probability,
    params_from_unit,
    sample_baseline,
    sample_from_q,
    unit_point,
)


def beta_cdf_quadrature(x: float, alpha: float, beta: float) -> float:
    """Adaptive quadrature of the Beta density, fully independent of betainc.

    The reflection identity keeps the upper endpoint away from t = 1.  For
    alpha < 1 the substitution t = y ** (1 / alpha) removes the t = 0
    singularity; for alpha >= 1 the density is bounded and integrates as is.
    """
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x > 0.5:
        return 1.0 - beta_cdf_quadrature(1.0 - x, beta, alpha)
    log_norm = math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)

    if alpha < 1.0:

        def transformed(y: float) -> float:
            t = y ** (1.0 / alpha)
            return (1.0 - t) ** (beta - 1.0)

        value, _ = integrate.quad(transformed, 0.0, x**alpha, epsabs=1e-15, epsrel=1e-12, limit=300)
        return value / alpha / math.exp(log_norm)

    def density(t: float) -> float:
        if t <= 0.0:
            return 0.0 if alpha > 1.0 else math.exp(-log_norm)
        return math.exp((alpha - 1.0) * math.log(t) + (beta - 1.0) * math.log1p(-t) - log_norm)

    value, _ = integrate.quad(density, 0.0, x, epsabs=1e-15, epsrel=1e-12, limit=300)
    return value


class TestParamBounds:
    def test_n_min_is_exact_density_threshold(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            e = int(rng.integers(19, 1_000_000))
            bounds = ParamBounds.for_edges(e)
            assert bounds.n_min * (bounds.n_min - 1) >= 20 * e
            assert (bounds.n_min - 1) * (bounds.n_min - 2) < 20 * e
            assert bounds.n_max == e + 1

    def test_smallest_feasible_edge_count(self):
        bounds = ParamBounds.for_edges(19)
        assert bounds.n_min == 20
        assert bounds.n_max == 20

    def test_infeasible_edge_counts_rejected(self):
        for e in (1, 5, 18):
            with pytest.raises(ValueError, match="feasible"):
                ParamBounds.for_edges(e)
        with pytest.raises(ValueError, match="positive"):
            ParamBounds.for_edges(0)

    def test_a_range(self):
        assert ParamBounds.a_range() == (A_MIN, A_MAX) == (0.25, 1.0)

    def test_nested_intervals_are_consistent(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            a = float(rng.uniform(A_MIN, A_MAX))
            b_lo, b_hi = ParamBounds.b_range(a)
            assert 0.0 <= b_lo <= b_hi <= min(a, 1.0 - a) + 1e-15
            b = float(rng.uniform(b_lo, b_hi))
            c_lo, c_hi = ParamBounds.c_range(a, b)
            assert 0.0 <= c_lo <= c_hi <= min(a, 1.0 - a - b) + 1e-15
            c = float(rng.uniform(c_lo, c_hi))
            d = 1.0 - a - b - c
            # any point drawn inside the nested intervals is a valid vector
            assert d <= a + 1e-12
            assert d >= -1e-12

    def test_interval_lower_bounds_are_active(self):
        # for small a the sum constraint forces b and c strictly positive
        b_lo, _ = ParamBounds.b_range(0.26)
        assert b_lo == pytest.approx(1.0 - 3 * 0.26)
        c_lo, _ = ParamBounds.c_range(0.3, 0.3)
        assert c_lo == pytest.approx(1.0 - 2 * 0.3 - 0.3)


class TestUnitNormalization:
    def test_round_trip_through_unit_coordinates(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            p = sample_baseline(100, 5000, rng)
            u = unit_point(p)
            for coord in (u.u_n, u.u_a, u.u_b, u.u_c):
                assert -1e-12 <= coord <= 1.0 + 1e-12
            q = params_from_unit(p.e_param, u)
            assert q.n_param == p.n_param
            assert q.a == pytest.approx(p.a, abs=1e-9)
            assert q.b == pytest.approx(p.b, abs=1e-9)
            assert q.c == pytest.approx(p.c, abs=1e-9)
            assert q.d == pytest.approx(p.d, abs=1e-9)

    def test_corner_coordinates_always_produce_valid_params(self):
        rng = np.random.default_rng(19)
        corners = [0.0, 1e-13, 3.2e-7, 0.5, 1.0 - 1e-16, 1.0]
        for _ in range(400):
            u = UnitPoint(*(float(rng.choice(corners)) for _ in range(4)))
            e = int(rng.integers(19, 20000))
            p = params_from_unit(e, u)
            assert p.e_param == e

    def test_rounding_inversion_regression(self):
        # coordinates observed to invert the c interval by one ulp
        u = UnitPoint(0.9999989721431102, 8.494593471030542e-13, 3.1696722737229873e-07, 1.7320543629898558e-26)
        p = params_from_unit(3799, u)
        assert p.a >= max(p.b, p.c, p.d)

    def test_extreme_unit_values_map_to_interval_ends(self):
        e = 1000
        bounds = ParamBounds.for_edges(e)
        lo = params_from_unit(e, UnitPoint(0.0, 0.0, 0.0, 0.0))
        hi = params_from_unit(e, UnitPoint(1.0, 1.0, 1.0, 1.0))
        assert lo.n_param == bounds.n_min
        assert hi.n_param == bounds.n_max
        assert lo.a == A_MIN
        assert hi.a == A_MAX


class TestSampling:
    def test_baseline_unit_coordinates_are_uniform(self):
        rng = np.random.default_rng(23)
        coords = np.array([unit_point(sample_baseline(50, 4000, rng)).as_array() for _ in range(4000)])
        for k in range(4):
            res = stats.kstest(coords[:, k], "uniform")
            assert res.pvalue > 1e-3, f"coordinate {k} not uniform (p={res.pvalue})"
        corr = np.corrcoef(coords, rowvar=False)
        off = corr[~np.eye(4, dtype=bool)]
        assert np.max(np.abs(off)) < 0.06

    def test_all_ones_q_matches_baseline_distribution(self):
        rng = np.random.default_rng(29)
        coords = np.array(
            [unit_point(sample_from_q(QVector.all_ones(), 50, 4000, rng)).as_array() for _ in range(2000)]
        )
        for k in range(4):
            res = stats.kstest(coords[:, k], "uniform")
            assert res.pvalue > 1e-3

    def test_concentrated_q_concentrates_coordinates(self):
        rng = np.random.default_rng(31)
        q = QVector(*(BetaSpec(100.0, 100.0) for _ in range(4)))
        for _ in range(100):
            u = unit_point(sample_from_q(q, 100, 2000, rng))
            assert abs(u.u_a - 0.5) < 0.35

    def test_edge_interval_validation(self):
        rng = np.random.default_rng(1)
        with pytest.raises(ValueError, match="e_min"):
            sample_baseline(5, 100, rng)
        with pytest.raises(ValueError, match="e_max"):
            sample_baseline(100, 100, rng)

    def test_baseline_respects_bounds(self):
        rng = np.random.default_rng(37)
        for _ in range(200):
            p = sample_baseline(19, 400, rng)
            assert 19 <= p.e_param <= 400
            bounds = ParamBounds.for_edges(p.e_param)
            assert bounds.n_min <= p.n_param <= bounds.n_max

    def test_sampling_is_deterministic_per_rng_state(self):
        a = sample_baseline(50, 500, np.random.default_rng(5))
        b = sample_baseline(50, 500, np.random.default_rng(5))
        assert a == b


class TestBetaSpec:
    def test_accepts_boundary_values(self):
        BetaSpec(100.0, 1e-9)

    def test_rejects_out_of_range(self):
        for alpha, beta in [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (100.0001, 1.0), (1.0, 101.0)]:
            with pytest.raises(ValueError, match="must lie in"):
                BetaSpec(alpha, beta)

    def test_qvector_array_round_trip(self):
        q = QVector(BetaSpec(1.5, 2.0), BetaSpec(0.5, 0.25), BetaSpec(3.0, 1.0), BetaSpec(2.5, 4.0))
        assert QVector.from_array(q.as_array()) == q
        assert q.as_array().shape == (8,)

    def test_qvector_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="8 values"):
            QVector.from_array(np.ones(7))

    def test_all_ones_is_uniform(self):
        q = QVector.all_ones()
        assert q.as_array().tolist() == [1.0] * 8


class TestBetaCdf:
    def test_endpoint_values(self):
        spec = BetaSpec(2.5, 0.7)
        assert beta_cdf(0.0, spec) == 0.0
        assert beta_cdf(1.0, spec) == 1.0

    def test_uniform_spec_is_identity(self):
        spec = BetaSpec(1.0, 1.0)
        x = np.linspace(0.0, 1.0, 11)
        assert np.allclose(beta_cdf(x, spec), x, atol=1e-14)

    def test_symmetric_spec_midpoint(self):
        for shape in (0.3, 1.0, 7.0, 50.0):
            assert beta_cdf(0.5, BetaSpec(shape, shape)) == pytest.approx(0.5, abs=1e-12)

    def test_matches_quadrature(self):
        for alpha, beta in [(0.05, 3.0), (0.5, 0.5), (2.0, 5.0), (40.0, 1.5), (90.0, 90.0)]:
            spec = BetaSpec(alpha, beta)
            for x in (0.05, 0.3, 0.5, 0.8, 0.99):
                oracle = beta_cdf_quadrature(x, alpha, beta)
                assert beta_cdf(x, spec) == pytest.approx(oracle, abs=1e-8)

    def test_monotone_nondecreasing(self):
        spec = BetaSpec(0.2, 4.0)
        values = beta_cdf(np.linspace(0, 1, 50), spec)
        assert np.all(np.diff(values) >= -1e-15)

    def test_domain_validation(self):
        spec = BetaSpec(1.0, 1.0)
        with pytest.raises(ValueError, match="domain"):
            beta_cdf(-0.1, spec)
        with pytest.raises(ValueError, match="domain"):
            beta_cdf(np.array([0.2, 1.4]), spec)

    def test_scalar_in_scalar_out(self):
        assert isinstance(beta_cdf(0.5, BetaSpec(2.0, 2.0)), float)


class _Box:
    def __init__(self, lower, upper):
        self.lower = lower
        self.upper = upper


class TestCellProbability:
    def test_uniform_q_gives_volume(self):
        box = _Box((0.1, 0.2, 0.0, 0.5), (0.3, 0.4, 1.0, 0.55))
        vol = 0.2 * 0.2 * 1.0 * 0.05
        assert cell_probability(QVector.all_ones(), box) == pytest.approx(vol, abs=1e-12)

    def test_full_cube_has_mass_one(self):
        q = QVector(BetaSpec(2.0, 0.7), BetaSpec(0.3, 0.3), BetaSpec(5.0, 1.0), BetaSpec(1.0, 9.0))
        box = _Box((0.0, 0.0, 0.0, 0.0), (1.0, 1.0, 1.0, 1.0))
        assert cell_probability(q, box) == pytest.approx(1.0, abs=1e-12)

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(41)
        q = QVector(BetaSpec(2.0, 0.7), BetaSpec(0.4, 1.3), BetaSpec(5.0, 2.0), BetaSpec(1.0, 3.0))
        box = _Box((0.2, 0.0, 0.3, 0.05), (0.6, 0.5, 0.9, 0.8))
        n = 200_000
        draws = np.column_stack([rng.beta(s.alpha, s.beta, n) for s in q.specs])
        inside = np.all((draws >= box.lower) & (draws < box.upper), axis=1)
        estimate = inside.mean()
        sigma = math.sqrt(estimate * (1 - estimate) / n)
        assert cell_probability(q, box) == pytest.approx(estimate, abs=5 * sigma)
