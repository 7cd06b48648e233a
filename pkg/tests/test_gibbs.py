import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import random_sft, sfts
from oracles import admissible_words, admissible_words_dfs, parry_exact_golden
from shiftlab.errors import BudgetExceeded, WindowOverlap
from shiftlab.gibbs import (
    OrbitSampler,
    UniformStream,
    UniformWords,
    correlation,
    cylinder_measure,
    derive_seed,
    gibbs_ratio_bounds,
    parry_measure,
    perron,
    sample_orbit,
    seed_list,
)
from shiftlab.sft import Sft, count_words, specification_gap


@pytest.fixture(scope="module")
def mu_golden(golden):
    return parry_measure(golden)


@pytest.fixture(scope="module")
def mu_full2(full2):
    return parry_measure(full2)


class TestPerron:
    def test_full_shift(self, mu_full2):
        assert mu_full2.lam == pytest.approx(2.0, abs=1e-12)
        assert mu_full2.pi == pytest.approx([0.5, 0.5], abs=1e-12)
        assert mu_full2.theta == 0.0

    def test_golden(self, golden):
        phi, *_ = parry_exact_golden()
        data = perron(golden)
        assert data.lam == pytest.approx(phi, abs=1e-12)
        assert data.lam == pytest.approx(1.6180339887, abs=1e-10)
        assert data.theta == pytest.approx((phi - 1) / phi, abs=1e-12)
        assert data.theta == pytest.approx(0.3819660, abs=1e-7)

    @settings(max_examples=40, deadline=None)
    @given(sfts(max_m=5))
    def test_residuals(self, sft):
        d = perron(sft)
        a = sft.allowed.astype(float)
        assert np.max(np.abs(a @ d.right_vec - d.lam * d.right_vec)) <= 1e-12 * d.lam
        assert np.max(np.abs(d.left_vec @ a - d.lam * d.left_vec)) <= 1e-12 * d.lam * np.max(d.left_vec)
        assert (d.right_vec > 0).all() and (d.left_vec > 0).all()
        assert d.left_vec @ d.right_vec == pytest.approx(1.0, abs=1e-12)
        assert math.exp(d.entropy) == pytest.approx(d.lam, rel=1e-12)
        assert 0 <= d.theta < 1

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_power_matches_dense(self, seed):
        sft = random_sft(np.random.default_rng(seed), 4)
        dense, power = perron(sft, method="dense"), perron(sft, method="power")
        assert power.lam == pytest.approx(dense.lam, rel=1e-12)
        assert power.right_vec == pytest.approx(dense.right_vec, abs=1e-10)
        assert power.theta == pytest.approx(dense.theta, abs=1e-6)

    def test_entropy_from_growth(self, golden):
        # lim ||A^n 1||^(1/n) = lambda
        n = 200
        a = golden.allowed.astype(float)
        norm = np.max(np.linalg.matrix_power(a, n) @ np.ones(2))
        assert norm ** (1 / n) == pytest.approx(perron(golden).lam, rel=1e-2)


class TestParryMeasure:
    def test_golden_closed_form(self, mu_golden):
        phi, pi0, pi1, p00 = parry_exact_golden()
        assert mu_golden.pi == pytest.approx([pi0, pi1], abs=1e-12)
        assert mu_golden.trans[0, 0] == pytest.approx(p00, abs=1e-12)
        assert mu_golden.trans[1, 1] == 0.0

    def test_cylinder_examples(self, mu_golden, mu_full2):
        assert cylinder_measure(mu_golden, "0") == pytest.approx(0.7236068, abs=1e-7)
        assert cylinder_measure(mu_golden, "00") == pytest.approx(1 / math.sqrt(5), abs=1e-12)
        assert cylinder_measure(mu_golden, "11") == 0.0
        assert cylinder_measure(mu_golden, "") == 1.0
        for w in admissible_words(mu_full2.sft.allowed, 7):
            assert cylinder_measure(mu_full2, w) == pytest.approx(2.0**-7, abs=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(sfts(max_m=5))
    def test_stochastic_stationary(self, sft):
        mu = parry_measure(sft)
        assert mu.pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.abs(mu.trans.sum(axis=1) - 1).max() <= 1e-12
        assert np.abs(mu.pi @ mu.trans - mu.pi).max() <= 1e-10
        assert ((mu.trans == 0) == (sft.allowed == 0)).all()

    @pytest.mark.parametrize("which", ["golden", "random3"])
    def test_consistency_and_invariance(self, golden, which):
        sft = golden if which == "golden" else random_sft(np.random.default_rng(7), 3)
        mu = parry_measure(sft)
        for n in range(1, 9):
            for w in admissible_words_dfs(sft.allowed.tolist(), n):
                base = cylinder_measure(mu, w)
                right = sum(cylinder_measure(mu, w + (j,)) for j in range(sft.m))
                left = sum(cylinder_measure(mu, (i,) + w) for i in range(sft.m))
                assert right == pytest.approx(base, abs=1e-12)
                assert left == pytest.approx(base, abs=1e-12)

    def test_to_dict(self, mu_golden):
        d = mu_golden.to_dict()
        assert set(d) == {"pi", "trans", "lambda", "theta", "entropy"}
        assert d["trans"][1] == [1.0, 0.0]


class TestGibbs:
    def test_full_shift(self, mu_full2):
        for n in (1, 5, 12):
            lo, hi = gibbs_ratio_bounds(mu_full2, n)
            assert lo == pytest.approx(1.0, abs=1e-12) and hi == pytest.approx(1.0, abs=1e-12)

    def test_golden_examples(self, mu_golden):
        lo, hi = gibbs_ratio_bounds(mu_golden, 1)
        assert lo == pytest.approx(0.4472, abs=1e-4)
        assert hi == pytest.approx(1.1708, abs=1e-4)
        b4, b8 = gibbs_ratio_bounds(mu_golden, 4), gibbs_ratio_bounds(mu_golden, 8)
        assert b8 == pytest.approx(b4, abs=1e-9)

    def test_stabilisation_and_bounds(self, mu_golden):
        gammas = {}
        for n in range(1, 17):
            lo, hi = gibbs_ratio_bounds(mu_golden, n)
            gammas[n] = max(hi, 1 / lo)
            # every depth-n cylinder lies in the band (checked against enumeration for small n)
            if n <= 10:
                lam = mu_golden.lam
                for w in admissible_words(mu_golden.sft.allowed, n):
                    r = cylinder_measure(mu_golden, w) * lam**n
                    assert 1 / gammas[n] - 1e-12 <= r <= gammas[n] + 1e-12
        assert max(gammas.values()) <= 1.2 * gammas[4]

    def test_budget(self, mu_golden):
        with pytest.raises(BudgetExceeded):
            gibbs_ratio_bounds(mu_golden, 30, budget=1000)

    def test_norm_sandwich(self, golden):
        a = golden.allowed.astype(object)
        M = specification_gap(golden)
        p = np.identity(2, dtype=object)
        for n in range(1, 21):
            p = p.dot(a)
            top = max(sum(row) for row in p)
            lower = count_words(golden, n - M).value if n - M >= 1 else 1
            assert lower <= top <= count_words(golden, n + 1).value


class TestCorrelation:
    def test_examples(self, mu_golden, mu_full2):
        assert correlation(mu_full2, "0", "0", 1) == pytest.approx(0.0, abs=1e-15)
        assert correlation(mu_golden, "1", "1", 1) == pytest.approx(-0.0763932, abs=1e-7)
        assert correlation(mu_golden, "0", "0", 2) == pytest.approx(0.0291796, abs=1e-7)

    def test_against_enumeration(self, mu_golden):
        # direct definition: sum over bridging words of the joint cylinder
        e, f = (0, 1), (0,)
        for n in range(2, 7):
            joint = 0.0
            for w in admissible_words(mu_golden.sft.allowed, n + len(f)):
                if w[: len(e)] == e and w[n : n + len(f)] == f:
                    joint += cylinder_measure(mu_golden, w)
            expect = joint - cylinder_measure(mu_golden, e) * cylinder_measure(mu_golden, f)
            assert correlation(mu_golden, e, f, n) == pytest.approx(expect, abs=1e-14)

    def test_overlap_rejected(self, mu_golden):
        with pytest.raises(WindowOverlap):
            correlation(mu_golden, "00", "0", 1)

    def test_mixing_rate(self, mu_golden):
        ns = np.arange(2, 31)
        vals = np.array([abs(correlation(mu_golden, "0", "0", int(n))) for n in ns])
        slope = np.polyfit(ns, np.log(vals), 1)[0]
        assert abs(slope - math.log(mu_golden.theta)) < 0.02


class TestSampling:
    def test_derive_seed(self):
        assert derive_seed(42, 3) == derive_seed(42, 3)
        assert derive_seed(42, 3) != derive_seed(42, 4)
        assert seed_list(7, 5)[:3] == seed_list(7, 3)

    def test_stream_prefix_consistent(self):
        a = UniformStream(9)
        parts = np.concatenate([a.take(3), a.take(0), a.take(6), a.take(1)])
        assert (parts == UniformStream(9).take(10)).all()
        assert parts.min() >= 0 and parts.max() < 2**32

    def test_frequencies(self, mu_full2, mu_golden):
        w = sample_orbit(mu_full2, 1, 10**6)
        assert abs((w == 0).mean() - 0.5) < 0.002
        g = sample_orbit(mu_golden, 1, 10**6)
        assert not ((g[:-1] == 1) & (g[1:] == 1)).any()
        assert abs((g == 0).mean() - 0.7236) < 0.002

    def test_transition_frequencies(self, full3):
        sft = random_sft(np.random.default_rng(4), 3)
        mu = parry_measure(sft)
        w = sample_orbit(mu, 5, 10**6).astype(int)
        counts = np.zeros((3, 3))
        np.add.at(counts, (w[:-1], w[1:]), 1)
        emp = counts / counts.sum(axis=1, keepdims=True)
        assert np.abs(emp - mu.trans).max() < 0.01

    def test_deterministic_and_extendable(self, mu_golden):
        a = sample_orbit(mu_golden, 123, 5000)
        assert (a == sample_orbit(mu_golden, 123, 5000)).all()
        assert not (a == sample_orbit(mu_golden, 124, 5000)).all()
        s = OrbitSampler(mu_golden, 123)
        s.extend_to(17)
        s.extend_to(1000)
        assert (s.extend_to(5000) == a).all()

    def test_length_validation(self, mu_golden):
        with pytest.raises(ValueError):
            sample_orbit(mu_golden, 1, 0)


class TestUniformWords:
    @pytest.mark.parametrize("length", [1, 3, 6])
    def test_uniform_over_words(self, golden, length):
        mu = parry_measure(golden)
        sampler = UniformWords(mu)
        words = admissible_words(golden.allowed, length)
        index = {w: i for i, w in enumerate(words)}
        stream = UniformStream(77)
        draws = 20000
        counts = np.zeros(len(words))
        for _ in range(draws):
            counts[index[tuple(int(x) for x in sampler.sample(length, stream))]] += 1
        expect = draws / len(words)
        chi2 = ((counts - expect) ** 2 / expect).sum()
        # 99.9% chi-square quantile for df <= 20 is below 46
        assert chi2 < 46

    def test_long_words_admissible(self):
        sft = random_sft(np.random.default_rng(2), 4)
        sampler = UniformWords(parry_measure(sft))
        stream = UniformStream(3)
        for length in (1, 2, 50, 500):
            w = sampler.sample(length, stream)
            assert len(w) == length
            assert all(sft.allowed[w[i], w[i + 1]] for i in range(length - 1))
