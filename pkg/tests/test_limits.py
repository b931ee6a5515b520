import math
from fractions import Fraction

import numpy as np
import pytest

from inarlim.immigration import (
    bernoulli_immigration,
    heavy_tail_immigration,
    poisson_immigration,
)
from inarlim.inar import ModelSpec, TriangularSpec
from inarlim.laws import IntensityMeasure, dirac
from inarlim.limits import (
    BracketNotConverged,
    FactorialLimitProfile,
    check_hypotheses,
    check_triangular,
    intensity_from_lambdas,
    lambdas_from_intensity,
    toeplitz_transform,
    toeplitz_weight,
    toeplitz_weights,
)
from inarlim.schedules import explicit_rho, near_critical_rho

from conftest import disk_grid


class TestToeplitzWeights:
    def test_telescoping_schedule_flat_weights(self):
        # 1 - 1/l: weight (1/j)(j/n) = 1/n for every j.
        assert toeplitz_weight(near_critical_rho(), 5, 2, 1) == pytest.approx(0.2)
        w = toeplitz_weights(near_critical_rho(), 100, 1)
        np.testing.assert_allclose(w, np.full(100, 0.01), rtol=1e-12)

    def test_last_weight_is_deficit(self, rng):
        vals = rng.random(20) * 0.9
        rho = explicit_rho(vals)
        assert toeplitz_weight(rho, 20, 20, 3) == pytest.approx(1.0 - vals[-1])

    def test_higher_powers_dominated(self, rng):
        for _ in range(10):
            vals = rng.random(30) * 0.98
            rho = explicit_rho(vals)
            w1 = toeplitz_weights(rho, 30, 1)
            for k in (2, 3, 5):
                wk = toeplitz_weights(rho, 30, k)
                assert np.all(wk <= w1 + 1e-15)

    def test_max_weight_vanishes(self):
        # For 1 - 1/n the largest weight is exactly 1/n.
        prev = None
        for n in (10, 100, 1_000, 10_000):
            w = toeplitz_weights(near_critical_rho(), n, 1)
            m = float(w.max())
            assert m == pytest.approx(1.0 / n, rel=1e-12)
            if prev is not None:
                assert m < prev
            prev = m
        assert prev < 0.01

    def test_weight_sums_approach_reciprocal_power(self):
        for k in (1, 2, 3):
            w = toeplitz_weights(near_critical_rho(), 10_000, k)
            assert abs(float(w.sum()) - 1.0 / k) < 0.02

    def test_transform_constant_sequence(self):
        ones = np.ones(10_000)
        # k = 1: the sum telescopes to 1 - prod rho = 1 exactly (rho_1 = 0).
        for n in (10, 500, 10_000):
            assert toeplitz_transform(near_critical_rho(), ones, 1, n) == pytest.approx(
                1.0, abs=1e-13
            )
        got = toeplitz_transform(near_critical_rho(), ones, 2, 10_000)
        assert abs(got - 0.5) < 0.01

    def test_transform_zero_sequence(self):
        assert toeplitz_transform(near_critical_rho(), np.zeros(50), 3, 50) == 0.0

    def test_rejects_bad_indices(self):
        with pytest.raises(ValueError):
            toeplitz_weight(near_critical_rho(), 5, 6, 1)


class TestIntensityFromLambdas:
    def test_single_atom(self):
        profile = FactorialLimitProfile((2.5, 0.0), bounded_j=2)
        mu = intensity_from_lambdas(profile)
        assert mu.weight(1) == pytest.approx(2.5)

    def test_two_atoms_by_hand(self):
        # mu{1} = l1 - l2, mu{2} = l2 / 2.
        profile = FactorialLimitProfile((2.0, 1.0, 0.0), bounded_j=3)
        mu = intensity_from_lambdas(profile)
        assert mu.weight(1) == pytest.approx(1.0)
        assert mu.weight(2) == pytest.approx(0.5)

    def test_round_trip(self, rng):
        for _ in range(100):
            support = int(rng.integers(1, 9))
            weights = rng.random(support) * 2.0
            mu = IntensityMeasure(weights)
            J = support + 2
            profile = lambdas_from_intensity(mu, J)
            back = intensity_from_lambdas(profile)
            a = np.zeros(support)
            a[: back.weights.size] += back.weights[:support]
            assert np.max(np.abs(a - weights)) < 1e-10

    def test_polynomial_identity(self, rng):
        # sum_i mu{i}(z^i - 1) = sum_j (lambda_j / j!)(z-1)^j on the disk.
        for _ in range(20):
            support = int(rng.integers(1, 7))
            weights = rng.random(support)
            mu = IntensityMeasure(weights)
            J = support + 2
            prof = lambdas_from_intensity(mu, J)
            for z in [0.3 + 0.4j, -0.9, 1j, 0.99, -0.2 - 0.7j]:
                lhs = sum(weights[i] * (z ** (i + 1) - 1) for i in range(support))
                rhs = sum(
                    prof.lambdas[j - 1] / math.factorial(j) * (z - 1) ** j
                    for j in range(1, J)
                )
                assert abs(lhs - rhs) < 1e-10

    def test_unbounded_bracketing_converges(self):
        # Geometric intensity with ratio < 1/2: the alternating series for
        # the weights converges and the odd/even brackets pin it down.
        weights = 0.2 ** np.arange(1, 45)
        mu = IntensityMeasure(weights)
        prof = lambdas_from_intensity(mu, 32)
        unbounded = FactorialLimitProfile(prof.lambdas)
        back = intensity_from_lambdas(unbounded, j_max=4)
        np.testing.assert_allclose(back.weights[:4], weights[:4], atol=1e-10)

    def test_unbounded_shallow_profile_raises(self):
        profile = FactorialLimitProfile((2.0, 1.9, 1.7))
        with pytest.raises(BracketNotConverged):
            intensity_from_lambdas(profile, j_max=2)

    def test_negative_weight_rejected(self):
        profile = FactorialLimitProfile((0.5, 2.0, 0.0), bounded_j=3)
        with pytest.raises(ValueError, match="negative"):
            intensity_from_lambdas(profile)


class TestLambdasFromIntensity:
    def test_single_atom(self):
        mu = IntensityMeasure(np.array([1.0]))
        prof = lambdas_from_intensity(mu, 3)
        assert prof.lambdas == (1.0, 0.0)

    def test_inverse_of_two_atom_example(self):
        mu = IntensityMeasure(np.array([1.0, 0.5]))
        prof = lambdas_from_intensity(mu, 3)
        assert prof.lambdas[0] == pytest.approx(2.0)
        assert prof.lambdas[1] == pytest.approx(1.0)

    def test_divergence_flag_for_quadratic_tail(self):
        js = np.arange(1, 4097, dtype=np.float64)
        mu = IntensityMeasure(1.0 / js**2, tail_bound=1.0 / 4096.0)
        prof = lambdas_from_intensity(mu, 3)
        assert prof.diverging
        assert prof.lower_bounds[0]


class TestCheckHypotheses:
    def test_bernoulli_preset_consistent(self):
        model = ModelSpec(
            near_critical_rho(), bernoulli_immigration(lambda n: 1.0 / n)
        )
        report = check_hypotheses(
            model, "poisson-bernoulli", [1_000, 10_000, 100_000], targets=[1.0]
        )
        assert report.verdict("moment-ratio-1") == "consistent"
        assert report.verdict("thinning-deficit-diverges") == "consistent"
        assert report.verdict("immigration-on-01") == "consistent"
        assert report.verdict("offspring-mean-to-one") == "consistent"
        # m_{n,1}/(1 - rho_n) = 1 exactly for this preset.
        traj = report.hypotheses["moment-ratio-1"]["trajectory"]
        assert all(abs(v - 1.0) < 1e-9 for _, v in traj)

    def test_convergent_deficit_flagged(self):
        model = ModelSpec(
            near_critical_rho(gamma=2.0), bernoulli_immigration(lambda n: 1.0 / n)
        )
        report = check_hypotheses(model, "poisson-bernoulli", [100, 1_000, 10_000])
        assert report.verdict("thinning-deficit-diverges") == "inconsistent"

    def test_poisson_general_second_order(self):
        model = ModelSpec(
            near_critical_rho(), poisson_immigration(lambda n: 1.0 / n)
        )
        report = check_hypotheses(
            model, "poisson-general", [1_000, 10_000, 100_000], targets=[1.0]
        )
        assert report.verdict("moment-ratio-1") == "consistent"
        assert report.verdict("moment-ratio-2") == "consistent"

    def test_heavy_tail_moments_inconsistent(self):
        model = ModelSpec(near_critical_rho(), heavy_tail_immigration())
        report = check_hypotheses(model, "cp-unbounded", [50, 500, 5_000])
        assert report.verdict("moment-ratio-1") == "inconsistent"
        assert "infinite" in report.hypotheses["moment-ratio-1"]["note"]
        # JSON-safe serialization of the infinite entries.
        import json

        json.dumps(report.to_dict(), allow_nan=False)

    def test_unknown_check_rejected(self):
        model = ModelSpec(near_critical_rho(), bernoulli_immigration(lambda n: 0.0))
        with pytest.raises(ValueError):
            check_hypotheses(model, "nonsense", [10])


class TestCheckTriangular:
    def test_unit_point_rows(self):
        spec = TriangularSpec(lambda n: [(dirac(1), 1.0 / n)] * n)
        report = check_triangular(
            spec, "triangular-poisson", [100, 1_000, 10_000], targets=[1.0]
        )
        assert report.verdict("mean-sum") == "consistent"
        assert report.verdict("square-sum-vanishes") == "consistent"
        assert report.verdict("thinned-moment-sum-2") == "consistent"
        # Closed forms: sums are exactly 1, 1/n, 0.
        assert report.hypotheses["mean-sum"]["trajectory"][-1][1] == pytest.approx(1.0)
        assert report.hypotheses["square-sum-vanishes"]["trajectory"][0][1] == pytest.approx(
            1.0 / 100
        )
        assert report.hypotheses["thinned-moment-sum-2"]["trajectory"][-1][1] == 0.0

    def test_pair_rows_limit_profile(self):
        spec = TriangularSpec(lambda n: [(dirac(2), 1.0 / n)] * n)
        report = check_triangular(
            spec, "triangular-cp", [200, 2_000, 20_000], targets=[2.0, 0.0]
        )
        assert report.verdict("mean-sum") == "consistent"
        assert report.verdict("thinned-moment-sum-2") == "consistent"
        # sum p^2 m_2 = 2/n at each n.
        traj = dict(report.hypotheses["thinned-moment-sum-2"]["trajectory"])
        assert traj[200] == pytest.approx(2.0 / 200)

    def test_empty_rows_zero_sums(self):
        spec = TriangularSpec({4: []})
        report = check_triangular(spec, "triangular-poisson", [4], targets=[0.0])
        assert report.hypotheses["mean-sum"]["trajectory"] == [(4, 0.0)]
