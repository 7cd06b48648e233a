import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_sft
from oracles import admissible_words, fibonacci
from shiftlab.cantor import (
    Variant,
    build_sequences,
    choose_marker,
    construction_report,
    local_dimension,
    local_dimension_min,
    log_mass,
    sample_point,
    target_dimension,
)
from shiftlab.errors import ConstructionError, DepthExceeded, EmptyRegime
from shiftlab.hitting import TargetFunction, liminf_limsup_estimate, run_lengths
from shiftlab.sft import Sft, is_admissible

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def quarter_one(full2):
    return build_sequences("SECTION4", full2, a=QUARTER, b=1, depth_budget=10**5)


class TestSection4Sequences:
    def test_level_one_values(self, quarter_one):
        s = quarter_one
        assert s.params["k0"] == 1
        lev = s.level(1)
        assert (lev.n, lev.width, lev.blocks) == (17, 35, 1)
        assert s.n_seq[1] == 65
        assert lev.N == 66
        assert log_mass(s, 1) == pytest.approx(-29 * math.log(2), rel=1e-14)
        assert local_dimension(s, 1) == pytest.approx(29 / 66, rel=1e-14)
        assert log_mass(s, 0) == 0.0

    def test_displayed_formulas(self, quarter_one):
        # n_k = floor((b/a)^(k+k0)) + 1, m_k = floor((1+b) n_k) + 1
        k0 = quarter_one.params["k0"]
        for k, (n, m) in enumerate(zip(quarter_one.n_seq, quarter_one.width_seq), start=1):
            assert n == 4 ** (k + k0) + 1
            assert m == 2 * n + 1

    def test_sequence_facts(self, quarter_one):
        ns, ms = quarter_one.n_seq, quarter_one.width_seq
        assert all(ms[i] < ns[i + 1] for i in range(len(ns) - 1))
        assert all(ms[i + 1] - ns[i + 1] > ms[i] - ns[i] for i in range(len(ns) - 1))
        for lev in quarter_one.levels:
            gap = lev.width - lev.n
            nxt = quarter_one.n_seq[lev.k]
            # t_k is the largest t with m_k + t (m_k - n_k) < n_{k+1}
            assert lev.width + lev.blocks * gap < nxt <= lev.width + (lev.blocks + 1) * gap
        assert all(quarter_one.checks[k] for k in ("gap_increasing", "m_below_next_n", "blocks_positive"))

    def test_depth_budget(self, quarter_one):
        assert quarter_one.levels[-1].N <= 10**5
        with pytest.raises(DepthExceeded):
            quarter_one.level(quarter_one.depth + 1)

    def test_mass_decreasing(self, quarter_one):
        masses = [log_mass(quarter_one, k) for k in range(quarter_one.depth + 1)]
        assert all(b < a for a, b in zip(masses, masses[1:]))

    def test_empty_regime(self, full2):
        with pytest.raises(EmptyRegime):
            build_sequences("SECTION4", full2, a=HALF, b=0.5)
        with pytest.raises(EmptyRegime):
            build_sequences("SECTION4", full2, a=HALF, b=0.9)

    def test_boundary_rejected(self, full2):
        with pytest.raises(ConstructionError):
            build_sequences("SECTION4", full2, a=HALF, b=1)

    def test_golden_counts(self, golden):
        s = build_sequences("SECTION4", golden, a=QUARTER, b=1, depth_budget=10**5)
        M = s.gap
        assert M == 1
        total = 0.0
        for lev in s.levels:
            block = lev.width - lev.n - 2 * M - 1
            expect = lev.blocks * math.log(fibonacci(block + 2)) + math.log(fibonacci(lev.tail + 2))
            assert lev.log_count == pytest.approx(expect, rel=1e-12)
            total -= expect
            assert lev.log_mass == pytest.approx(total, rel=1e-12)
        # enumeration cross-check of the block counts used at the first level
        lev = s.level(1)
        for length in (lev.width - lev.n - 2 * M - 1, lev.tail):
            if length <= 20:
                assert math.log(len(admissible_words(golden.allowed, length))) == pytest.approx(
                    math.log(fibonacci(length + 2))
                )


class TestMassDistribution:
    @pytest.mark.parametrize(
        "a, b, kwargs, target",
        [(QUARTER, 1, {}, 1 / 3), (HALF, 2, {}, 1 / 9), (0, 1, {"k0": 10}, 1 / 2)],
    )
    def test_converges_to_formula(self, full2, a, b, kwargs, target):
        s = build_sequences("SECTION4", full2, a=a, b=b, depth_budget=10**5, **kwargs)
        assert target_dimension(s) == pytest.approx(target)
        dims = [local_dimension_min(s, k) for k in range(1, s.depth + 1)]
        assert all(y > x for x, y in zip(dims, dims[1:]))
        assert abs(dims[-1] - target) < 0.05
        # the other end of each stretch sits above
        assert all(local_dimension(s, k) >= d for k, d in enumerate(dims, start=1))

    def test_golden_formula(self, golden):
        s = build_sequences("SECTION4", golden, a=QUARTER, b=1, depth_budget=10**5)
        assert abs(local_dimension_min(s, s.depth) - target_dimension(s)) < 0.05

    def test_report(self, quarter_one):
        rep = construction_report(quarter_one)
        assert rep["variant"] == "SECTION4"
        assert rep["levels"][0]["local_dim"] == pytest.approx(29 / 66)
        assert rep["target_dim"] == pytest.approx(1 / 3)


class TestSamplePoint:
    def test_shape_and_prefix(self, quarter_one):
        w = sample_point(quarter_one, 1, 5000)
        assert w.size == 5000
        assert not w[:17].any()
        with pytest.raises(DepthExceeded):
            sample_point(quarter_one, 1, quarter_one.levels[-1].N + 1)

    def test_deterministic(self, quarter_one):
        a = sample_point(quarter_one, 5, 3000)
        assert (a == sample_point(quarter_one, 5, 3000)).all()
        assert not (a == sample_point(quarter_one, 6, 3000)).all()

    def test_golden_admissible(self, golden):
        s = build_sequences("SECTION4", golden, a=QUARTER, b=1, depth_budget=10**5)
        for seed in range(3):
            w = sample_point(s, seed, s.levels[-1].N)
            assert not ((w[:-1] == 1) & (w[1:] == 1)).any()

    @pytest.mark.parametrize("which", ["full2", "golden", "half_two"])
    def test_recovers_pair(self, full2, golden, which):
        sft = golden if which == "golden" else full2
        a, b = (HALF, 2) if which == "half_two" else (QUARTER, 1)
        s = build_sequences("SECTION4", sft, a=a, b=b, depth_budget=10**5)
        M = s.gap
        lin = TargetFunction.linear_rate(1.0)
        deep = s.levels[-2]
        for seed in range(3):
            w = sample_point(s, seed, s.levels[-1].N)
            lo, hi = liminf_limsup_estimate(w, lin, [deep.N, deep.N + 2 * M + 1])
            assert abs(lo - float(a)) < 0.05 and abs(hi - float(b)) < 0.05
            assert hi >= lo / (1 - lo) - 0.05

    def test_zero_block_lower_bounds(self, golden):
        s = build_sequences("SECTION4", golden, a=QUARTER, b=1, depth_budget=10**5)
        M = s.gap
        r = run_lengths(sample_point(s, 2, s.levels[-1].N))
        for lev in s.levels[:-1]:
            assert r.L[lev.N] >= lev.width - lev.n - 2 * M - 1

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**63))
    def test_random_sft_admissible(self, seed):
        sft = random_sft(np.random.default_rng(seed % 2**32), 3)
        s = build_sequences("SECTION4", sft, a=QUARTER, b=1, depth_budget=5000)
        w = sample_point(s, seed, s.levels[-1].N)
        assert is_admissible(sft, w)
        assert not w[: s.prefix].any()


class TestCaseConstructions:
    def test_case6_seed(self, full2):
        s = build_sequences("CASE6", full2, psi=TargetFunction.power_rate(0.5), P=3)
        assert (s.n_seq[0], s.width_seq[0]) == (625, 5)
        assert s.n_seq[1] == 641
        lev = s.level(1)
        assert (lev.blocks, lev.tail) == (2, 1)

    def test_case6_dimension(self, full2):
        psi = TargetFunction.power_rate(0.5)
        dims = []
        for P in (3, 5, 9):
            s = build_sequences("CASE6", full2, psi=psi, P=P)
            d = local_dimension(s, s.depth)
            assert d >= (1 - 2 / P) - 0.05
            assert local_dimension_min(s, s.depth) >= (1 - 2 / P) - 0.05
            dims.append(d)
        assert dims[0] < dims[1] < dims[2]

    @pytest.mark.parametrize(
        "variant, a, b",
        [("CASE2", 0.5, 1.0), ("CASE3", 0.5, math.inf), ("CASE4", 0.0, 1.0), ("CASE5", 0.0, math.inf), ("CASE6", 0, 0)],
    )
    @pytest.mark.parametrize("which", ["full2", "golden"])
    def test_variants(self, full2, golden, variant, a, b, which):
        sft = golden if which == "golden" else full2
        psi = TargetFunction.power_rate(0.5)
        s = build_sequences(variant, sft, psi=psi, a=a, b=b, P=5, depth_budget=2 * 10**5)
        M = s.gap
        assert s.depth >= 1
        assert s.checks["zero_block_positive"]
        ns, ds = s.n_seq, s.width_seq
        assert all(y > x for x, y in zip(ns, ns[1:]))
        for i, lev in enumerate(s.levels):
            d_prev = ds[i]
            assert lev.n - ns[i] == d_prev * (lev.blocks + 1) + lev.tail
            assert lev.log_count >= 0
        w = sample_point(s, 3, s.levels[-1].N)
        assert is_admissible(sft, w)
        r = run_lengths(w)
        # the level-k zero block of length d_{k-1}-1-3M lies before n_k
        for i, lev in enumerate(s.levels):
            if lev.n <= r.horizon:
                assert r.L[lev.n] >= ds[i] - 1 - 3 * M

    def test_case2_ratio(self, full2):
        psi = TargetFunction.power_rate(0.5)
        s = build_sequences("CASE2", full2, psi=psi, a=0.5, b=1.0, P=3, depth_budget=10**7)
        assert s.checks["phi_ratio_last"] == pytest.approx(2.0, rel=0.1)

    def test_case_validation(self, full2):
        psi = TargetFunction.power_rate(0.5)
        with pytest.raises(ValueError):
            build_sequences("CASE6", full2, psi=psi, P=2)
        with pytest.raises(ValueError):
            build_sequences("CASE6", full2, psi=TargetFunction.linear_rate(1.0))
        with pytest.raises(ValueError):
            build_sequences("CASE2", full2, psi=psi, a=0.0, b=1.0)
        with pytest.raises(ValueError):
            build_sequences("CASE4", full2, a=0.0, b=1.0)


def test_marker(golden, full3):
    assert choose_marker(golden) == 1
    assert choose_marker(full3) == 1
    sft = Sft(3, [[1, 1, 1], [1, 1, 0], [1, 0, 0]])
    assert choose_marker(sft) == 1
    sft = Sft(3, [[1, 1, 1], [0, 1, 1], [1, 1, 0]])
    assert choose_marker(sft) == 2
    assert Variant("CASE6") is Variant.CASE6
