import math

import numpy as np
import pytest

from inarlim import _kernels_py
from inarlim._backend import both_backends
from inarlim.immigration import (
    bernoulli_immigration,
    explicit_immigration,
    heavy_tail_immigration,
    poisson_immigration,
)
from inarlim.inar import ModelSpec, exact_law
from inarlim.laws import dirac, bernoulli
from inarlim.montecarlo import (
    ReplicateStream,
    SimConfig,
    empirical_pmf,
    sample_path,
)
from inarlim.pmf import tv_distance
from inarlim.schedules import constant_rho, near_critical_rho, explicit_rho


def thm31_model(lam=1.0):
    return ModelSpec(
        near_critical_rho(),
        bernoulli_immigration(lambda n: min(1.0, lam / n)),
        name="bernoulli-preset",
    )


class TestStream:
    def test_deterministic(self):
        a = ReplicateStream(42, 7)
        b = ReplicateStream(42, 7)
        assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]

    def test_replicates_decorrelated(self):
        xs = [ReplicateStream(1, i).uniform() for i in range(2000)]
        assert abs(np.mean(xs) - 0.5) < 0.05
        assert len(set(xs)) == len(xs)

    def test_uniform_range(self):
        s = ReplicateStream(9, 0)
        for _ in range(1000):
            u = s.uniform()
            assert 0.0 <= u < 1.0


class TestBinomialSampler:
    @pytest.mark.parametrize("n,p", [(12, 0.31), (200, 0.05), (80, 0.5), (120, 0.85)])
    def test_matches_exact_pmf(self, n, p):
        # Oracle: exact binomial pmf; TV of 40k draws should sit near the
        # sampling noise floor, far below 0.05.
        stream = ReplicateStream(1234, 0)
        draws = np.array(
            [_kernels_py.binomial_draw(n, p, stream) for _ in range(40_000)]
        )
        counts = np.bincount(draws, minlength=n + 1)
        emp = counts / counts.sum()
        exact = np.zeros(n + 1)
        for k in range(n + 1):
            exact[k] = math.comb(n, k) * p**k * (1 - p) ** (n - k)
        tv = 0.5 * np.abs(emp - exact).sum()
        assert tv < 0.05
        assert abs(draws.mean() - n * p) < 4 * math.sqrt(n * p * (1 - p) / 40_000)

    def test_btrs_branch_used(self):
        # n*min(p,1-p) > 30 exercises the rejection sampler.
        stream = ReplicateStream(77, 3)
        draws = [_kernels_py.binomial_draw(500, 0.4, stream) for _ in range(5000)]
        assert abs(np.mean(draws) - 200.0) < 4 * math.sqrt(500 * 0.4 * 0.6 / 5000)

    def test_degenerate_edges(self):
        stream = ReplicateStream(5, 0)
        assert _kernels_py.binomial_draw(0, 0.5, stream) == 0
        assert _kernels_py.binomial_draw(10, 0.0, stream) == 0
        assert _kernels_py.binomial_draw(10, 1.0, stream) == 10


class TestSamplePath:
    def test_deterministic_immigration(self):
        model = ModelSpec(constant_rho(0.0), explicit_immigration(dirac(2)))
        for rep in range(5):
            assert sample_path(model, 6, ReplicateStream(3, rep)) == 2

    def test_no_immigration_stays_zero(self):
        model = ModelSpec(
            explicit_rho(np.full(10, 1.0 - 1e-15)),
            explicit_immigration(dirac(0)),
        )
        assert sample_path(model, 10, ReplicateStream(3, 0)) == 0

    def test_empirical_mean_of_bernoulli(self):
        model = ModelSpec(constant_rho(0.0), explicit_immigration(bernoulli(0.3)))
        law, count = empirical_pmf(model, SimConfig(100_000, 3, seed=11))
        mean = sum(j * law.p(j) for j in range(len(law)))
        assert count == 100_000
        assert abs(mean - 0.3) < 0.0046  # 3 binomial standard errors


class TestEmpiricalPmf:
    def test_single_replicate_is_point_mass(self):
        model = thm31_model()
        law, _ = empirical_pmf(model, SimConfig(1, 5, seed=1))
        assert law.probs.max() == 1.0

    def test_same_seed_identical(self):
        model = thm31_model()
        a, _ = empirical_pmf(model, SimConfig(4000, 50, seed=9))
        b, _ = empirical_pmf(model, SimConfig(4000, 50, seed=9))
        assert np.array_equal(a.probs, b.probs)

    def test_worker_hint_invariance(self):
        model = thm31_model()
        laws = [
            empirical_pmf(model, SimConfig(5000, 40, seed=17, worker_hint=h))[0]
            for h in (1, 3, 4)
        ]
        for other in laws[1:]:
            assert np.array_equal(laws[0].probs, other.probs)

    def test_tv_decreases_with_replicates(self):
        model = thm31_model()
        n = 200
        exact = exact_law(model, n, 1e-10)
        tv_small = float(tv_distance(empirical_pmf(model, SimConfig(1_000, n, 5))[0], exact))
        tv_big = float(tv_distance(empirical_pmf(model, SimConfig(100_000, n, 5))[0], exact))
        assert tv_big < tv_small

    def test_heavy_tail_immigration_sampling(self):
        # Empirical frequencies of the analytic inverse sampler match the law.
        model = ModelSpec(constant_rho(0.0), heavy_tail_immigration())
        n = 4  # horizon 4: terminal draw is one immigration at generation 4
        law, _ = empirical_pmf(model, SimConfig(200_000, n, seed=2))
        fam = heavy_tail_immigration()
        want = fam.pmf(4, 1e-6)
        for j in range(4):
            se = math.sqrt(want.p(j) / 200_000)
            assert abs(law.p(j) - want.p(j)) < 5 * se + 1e-4

    def test_poisson_immigration_table_path(self):
        model = ModelSpec(
            near_critical_rho(), poisson_immigration(lambda n: 1.0 / n)
        )
        law, _ = empirical_pmf(model, SimConfig(50_000, 100, seed=4))
        exact = exact_law(model, 100, 1e-10)
        assert float(tv_distance(law, exact)) < 0.02


class TestBackendParity:
    def test_bitwise_equal_terminal_values(self):
        backends = both_backends()
        if len(backends) < 2:
            pytest.skip("compiled backend not built")
        model = ModelSpec(
            near_critical_rho(c=0.5, gamma=0.8),
            explicit_immigration(
                lambda n: dirac(120) if n % 5 == 0 else bernoulli(0.4)
            ),
        )
        from inarlim.montecarlo import _model_tables

        rho, kinds, params, offsets, table = _model_tables(model, 30)
        outs = []
        for _, impl in backends:
            out = np.zeros(800, dtype=np.int64)
            impl.mc_terminal(rho, kinds, params, offsets, table, 99, 0, 800, out)
            outs.append(out)
        assert np.array_equal(outs[0], outs[1])
        assert outs[0].max() > 50  # point-mass immigration actually fired

    def test_bitwise_equal_heavy_tail(self):
        backends = both_backends()
        if len(backends) < 2:
            pytest.skip("compiled backend not built")
        model = ModelSpec(near_critical_rho(), heavy_tail_immigration())
        from inarlim.montecarlo import _model_tables

        rho, kinds, params, offsets, table = _model_tables(model, 25)
        outs = []
        for _, impl in backends:
            out = np.zeros(1200, dtype=np.int64)
            impl.mc_terminal(rho, kinds, params, offsets, table, 123, 500, 1200, out)
            outs.append(out)
        assert np.array_equal(outs[0], outs[1])


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(0, 5, 1)
        with pytest.raises(ValueError):
            SimConfig(5, 0, 1)
        with pytest.raises(ValueError):
            SimConfig(5, 5, 1, worker_hint=0)
