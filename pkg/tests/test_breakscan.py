import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copbreak import LagMatrix, Quarter, ScanConfig, permutation_pvalue, psi_at, pseudo_obs, scan, sup_abs_psi
from copbreak.breakscan import permutation_null, weight
from oracles import count_dominated, dense_mesh_sup, pseudo

EXACT = ScanConfig(sup_mode="exact-grid")
POOLED = ScanConfig(sup_mode="pooled-points")


def split(rows, l):
    return pseudo_obs(rows[:l]), pseudo_obs(rows[l:])


def regime_rows(seed, n1=20, n2=20, rho=0.95):
    """Concordant block followed by an anticoncordant block."""
    r = np.random.default_rng(seed)
    z = r.normal(size=(n1 + n2, 2))
    a = np.column_stack([z[:n1, 0], rho * z[:n1, 0] + math.sqrt(1 - rho ** 2) * z[:n1, 1]])
    b = np.column_stack([z[n1:, 0], -rho * z[n1:, 0] + math.sqrt(1 - rho ** 2) * z[n1:, 1]])
    return np.vstack([a, b])


class TestWeight:
    def test_values(self):
        assert weight(140, 260, "as-printed") == pytest.approx(math.sqrt(140 * 120) / 260)
        assert weight(140, 260, "root-N") == pytest.approx(math.sqrt(140 * 120 / 260))

    def test_relation(self):
        for l in range(1, 60):
            assert weight(l, 60, "as-printed") == pytest.approx(weight(l, 60, "root-N") / math.sqrt(60), rel=1e-14)

    @pytest.mark.parametrize("l", [0, 10])
    def test_out_of_range(self, l):
        with pytest.raises(ValueError):
            weight(l, 10)


class TestPsi:
    def test_identical_segments(self, rng):
        block = rng.normal(size=(8, 2))
        rows = np.vstack([block, block[::-1]])
        pre, post = split(rows, 8)
        for u in rng.random((20, 2)):
            assert psi_at(pre, post, u, 8, 16) == 0.0

    def test_swap_negates(self, rng):
        rows = rng.normal(size=(20, 2))
        pre, post = split(rows, 10)
        for u in rng.random((20, 2)):
            assert psi_at(pre, post, u, 10, 20) == -psi_at(post, pre, u, 10, 20)

    def test_toy_hand_count(self):
        rows = np.array([[1.0, 3.0], [2.0, 1.0], [3.0, 2.0], [6.0, 4.0], [4.0, 6.0], [5.0, 5.0]])
        pre, post = split(rows, 3)
        # pre pseudo-obs: (.25,.75),(.5,.25),(.75,.5) -> 1 point <= (.5,.5)
        # post pseudo-obs: (.75,.25),(.25,.75),(.5,.5) -> 1 point <= (.5,.5)
        u = (0.5, 0.5)
        c_pre = count_dominated(pseudo(rows[:3]), u)
        c_post = count_dominated(pseudo(rows[3:]), u)
        assert (c_pre, c_post) == (1, 1)
        w = math.sqrt(3 * 3 / 6)
        assert psi_at(pre, post, u, 3, 6) == pytest.approx((c_pre / 3 - c_post / 3) * w)
        # only the pre point (.5,.25) is dominated by (.5,.25)
        u = (0.5, 0.25)
        assert count_dominated(pseudo(rows[:3]), u) == 1
        assert count_dominated(pseudo(rows[3:]), u) == 0
        assert psi_at(pre, post, u, 3, 6) == pytest.approx(w / 3)


class TestSup:
    def test_identical_both_modes(self, rng):
        block = rng.normal(size=(10, 2))
        rows = np.vstack([block, block])
        pre, post = split(rows, 10)
        assert sup_abs_psi(pre, post, 10, 20, EXACT) == 0.0
        assert sup_abs_psi(pre, post, 10, 20, POOLED) == 0.0

    def test_exact_matches_dense_mesh(self):
        r = np.random.default_rng(2020)
        for _ in range(20):
            rows = r.normal(size=(40, 2))
            pre, post = split(rows, 20)
            expect = dense_mesh_sup(pre.points, post.points) * weight(20, 40)
            assert sup_abs_psi(pre, post, 20, 40, EXACT) == pytest.approx(expect, abs=1e-12)

    def test_exact_with_ties(self):
        r = np.random.default_rng(5)
        for _ in range(20):
            rows = r.integers(0, 5, size=(30, 2)).astype(float)
            pre, post = split(rows, 13)
            expect = dense_mesh_sup(pre.points, post.points) * weight(13, 30)
            assert sup_abs_psi(pre, post, 13, 30, EXACT) == pytest.approx(expect, abs=1e-12)

    @given(st.integers(0, 2**31 - 1), st.integers(3, 27))
    @settings(max_examples=60)
    def test_pooled_le_exact(self, seed, l):
        rows = np.random.default_rng(seed).normal(size=(30, 2))
        pre, post = split(rows, l)
        assert sup_abs_psi(pre, post, l, 30, POOLED) <= sup_abs_psi(pre, post, l, 30, EXACT) + 1e-15

    def test_exact_rejects_high_dimension(self, rng):
        pre, post = split(rng.normal(size=(20, 3)), 10)
        with pytest.raises(ValueError, match="d=2"):
            sup_abs_psi(pre, post, 10, 20, EXACT)

    def test_pooled_any_dimension(self, rng):
        pre, post = split(rng.normal(size=(30, 5)), 12)
        v = sup_abs_psi(pre, post, 12, 30, POOLED)
        assert 0.0 <= v <= weight(12, 30)

    def test_size_mismatch(self, rng):
        pre, post = split(rng.normal(size=(20, 2)), 10)
        with pytest.raises(ValueError):
            sup_abs_psi(pre, post, 11, 20, EXACT)


class TestScan:
    def test_duplicate_blocks(self, rng):
        block = rng.normal(size=(30, 2))
        res = scan(LagMatrix(np.vstack([block, block])), ScanConfig(beta=0.2))
        assert dict(res.per_l)[30] == 0.0

    def test_range_and_argmax(self, rng):
        res = scan(LagMatrix(rng.normal(size=(50, 2))), ScanConfig(beta=0.15))
        ls = [l for l, _ in res.per_l]
        assert ls == list(range(math.floor(0.15 * 50), math.ceil(0.85 * 50) + 1))
        assert res.T_N == max(v for _, v in res.per_l)
        assert dict(res.per_l)[res.l_hat] == res.T_N
        assert all(v >= 0 for _, v in res.per_l)

    def test_tie_break_smallest(self):
        # constant rows: every split gives 0, argmax must be the first candidate
        res = scan(LagMatrix(np.ones((30, 2))), ScanConfig(beta=0.2))
        assert res.T_N == 0.0
        assert res.l_hat == res.per_l[0][0]

    def test_regime_change_located(self):
        rows = regime_rows(0, rho=0.99)
        res = scan(LagMatrix(rows), ScanConfig(beta=0.15))
        assert abs(res.l_hat - 20) <= 2
        for l, v in res.per_l:
            pre, post = split(rows, l)
            assert v == pytest.approx(dense_mesh_sup(pre.points, post.points) * weight(l, 40), abs=1e-12)

    def test_regime_change_rate(self):
        hits = [abs(scan(LagMatrix(regime_rows(s, rho=0.99))).l_hat - 20) <= 2 for s in range(100)]
        assert np.mean(hits) >= 0.9

    def test_regime_profiles_match_oracle(self):
        for seed in range(5):
            rows = regime_rows(seed)
            res = scan(LagMatrix(rows), ScanConfig(beta=0.15))
            for l, v in res.per_l:
                pre, post = split(rows, l)
                assert v == pytest.approx(dense_mesh_sup(pre.points, post.points) * weight(l, 40), abs=1e-12)

    def test_calendar_mapping(self):
        rows = regime_rows(1)
        res = scan(LagMatrix(rows, row_base_index=3), base=Quarter(1947, 1))
        assert res.shift_index == res.l_hat + 2
        assert res.date_hat == Quarter(1947, 1).shift(res.shift_index - 1)

    def test_bound(self):
        r = np.random.default_rng(3)
        for _ in range(30):
            res = scan(LagMatrix(r.normal(size=(40, 2))))
            for l, v in res.per_l:
                w = weight(l, 40)
                assert v <= w * 0.5 + 2 * w / min(l, 40 - l)

    def test_trim_too_large(self):
        with pytest.raises(Exception):
            scan(LagMatrix(np.zeros((3, 2))), ScanConfig(beta=0.1))

    def test_bad_config(self):
        with pytest.raises(ValueError):
            ScanConfig(beta=0.6)
        with pytest.raises(ValueError):
            ScanConfig(normalization="sqrt")
        with pytest.raises(ValueError):
            ScanConfig(sup_mode="grid")

    def test_workers_identical(self, rng):
        lm = LagMatrix(rng.normal(size=(60, 2)))
        a = scan(lm, workers=1).to_json()
        assert scan(lm, workers=4).to_json() == a

    def test_json_and_profile(self, rng):
        res = scan(LagMatrix(rng.normal(size=(30, 2))), base=Quarter(2000, 1))
        doc = json.loads(res.to_json())
        assert doc["T_N"] == res.T_N and doc["config"]["normalization"] == "root-N"
        lines = res.profile_csv().splitlines()
        assert lines[0] == "l,statistic" and len(lines) == len(res.per_l) + 1

    def test_reversal(self, rng):
        rows = rng.normal(size=(41, 2))
        fwd = dict(scan(LagMatrix(rows)).per_l)
        rev = dict(scan(LagMatrix(rows[::-1])).per_l)
        for l, v in rev.items():
            if 41 - l in fwd:
                assert v == pytest.approx(fwd[41 - l], abs=1e-12)


class TestPermutation:
    def test_floor(self):
        rows = LagMatrix(regime_rows(0, 25, 25, rho=0.99))
        p = permutation_pvalue(rows, n_perm=99, seed=1)
        null = permutation_null(rows, ScanConfig(), 99, 1)
        observed = scan(rows).T_N
        assert p == (1 + np.sum(null >= observed)) / 100
        assert p == 1 / 100

    def test_deterministic_across_workers(self, rng):
        rows = LagMatrix(rng.normal(size=(30, 2)))
        a = permutation_pvalue(rows, n_perm=99, seed=7, workers=1)
        assert permutation_pvalue(rows, n_perm=99, seed=7, workers=3) == a
        assert permutation_pvalue(rows, n_perm=99, seed=7) == a

    def test_min_permutations(self, rng):
        with pytest.raises(ValueError):
            permutation_pvalue(LagMatrix(rng.normal(size=(30, 2))), n_perm=50)

    @pytest.mark.slow
    def test_calibration(self):
        cfg = ScanConfig(beta=0.2)
        hits = 0
        for rep in range(200):
            rows = LagMatrix(np.random.default_rng(10_000 + rep).normal(size=(24, 2)))
            hits += permutation_pvalue(rows, cfg, n_perm=99, seed=rep) <= 0.05
        assert 0.02 <= hits / 200 <= 0.09


@given(st.integers(0, 2**31 - 1), st.booleans())
@settings(max_examples=100)
def test_fast_segment_ranks_match_pseudo_obs(seed, ties):
    from copbreak.breakscan import _segment_pseudo

    r = np.random.default_rng(seed)
    x = r.integers(0, 6, size=(15, 2)).astype(float) if ties else r.normal(size=(15, 2))
    np.testing.assert_array_equal(_segment_pseudo(x, "average").points, pseudo_obs(x).points)
