import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from reducible_anosov.blocks import Decomposition, block_diagonalize
from reducible_anosov.configs import (
    ConfigError,
    EigConfig,
    TieAmbiguityError,
    block_spectra,
    block_thetas,
    check_structured,
    gap_via_config,
    half_bound_check,
    iota,
    iota_set,
    is_admissible,
    large_config,
    nonempty_pairs,
)
from reducible_anosov.spectra import (
    NotProximalError,
    Flag,
    Subspace,
    ThetaSet,
    attracting_flag,
    is_proximal,
    log_gap,
)

from oracles import random_block_upper, threshold_config

seeds = st.integers(0, 2**32 - 1)
dims_st = st.lists(st.integers(1, 3), min_size=1, max_size=3)

D22 = Decomposition((2, 2))
D21 = Decomposition((2, 1))
B = np.diag([4.0, 1.0, 3.0, 2.0])


def cfg(dec, theta, q):
    return EigConfig(dec, ThetaSet(dec.total, theta), q)


def spread_upper(rng, dims):
    """Block upper triangular matrix whose diagonal blocks have spread-out spectra."""
    a = random_block_upper(rng, dims)
    dec = Decomposition(tuple(dims))
    for j in range(dec.m):
        s = dec.block(j)
        d = dims[j]
        p = rng.normal(size=(d, d)) + 2 * np.eye(d)
        mags = np.exp(rng.uniform(-3, 3, d))
        a[s, s] = p @ np.diag(mags * rng.choice([-1, 1], d)) @ np.linalg.inv(p)
    return a, dec


class TestIota:
    def test_examples(self):
        assert iota(4, 1) == 3
        assert all(iota(4, iota(4, k)) == k for k in (1, 2, 3))
        assert iota_set(ThetaSet(4, (1, 2))).members == (2, 3)
        with pytest.raises(ValueError):
            iota(4, 4)


class TestLargeConfig:
    def test_examples(self):
        # [DERIVED] sort-merge of magnitudes (4,3,2,1)
        assert large_config(B, D22, {2}).column(2) == (1, 1)
        assert large_config(B, D22, {1}).column(1) == (1, 0)
        with pytest.raises(NotProximalError):
            large_config(np.diag([2.0, 2.0, 1.0]), D21, {1})

    def test_tie_ambiguity(self):
        a = np.diag([3.0, 1.0, 3.0, 0.5])
        with pytest.raises(TieAmbiguityError):
            large_config(a, D22, {1})
        # a tie strictly inside the top-k is fine
        assert large_config(a, D22, {2}).column(2) == (1, 1)

    def test_same_block_tie_is_plain_nonproximal(self):
        with pytest.raises(NotProximalError) as err:
            large_config(np.diag([2.0, 2.0, 1.0]), D21, {1})
        assert not isinstance(err.value, TieAmbiguityError)

    def test_worked_example_word_a(self):
        a = np.diag([3.0, 1 / 3, 1.0])
        c = large_config(a, D21, {1, 2})
        assert c.q == ((1, 1), (0, 1))

    def test_json_roundtrip(self):
        c = large_config(B, D22, {1, 2, 3})
        assert EigConfig.from_json(c.to_json()) == c
        assert c.to_json()["q"] == {"1": {"1": 1, "2": 1, "3": 1}, "2": {"1": 0, "2": 1, "3": 2}}

    def test_table(self):
        c = large_config(np.diag([3.0, 1 / 3, 1.0]), D21, {1, 2})
        rows = c.table().splitlines()
        assert rows[1].split() == ["1", "1", "0"]
        assert rows[2].split() == ["2", "1", "1"]

    def test_shape_and_range_checked(self):
        with pytest.raises(ConfigError):
            cfg(D21, (1,), ((3,), (0,)))
        with pytest.raises(ConfigError):
            cfg(D21, (1,), ((1,),))

    @given(seeds, dims_st)
    def test_threshold_oracle_and_invariants(self, seed, dims):
        rng = np.random.default_rng(seed)
        a, dec = spread_upper(rng, dims)
        d = dec.total
        assume(d >= 2)
        th = ThetaSet.full(d)
        assume(is_proximal(a, th, tol=1e-6))
        c = large_config(a, dec, th)
        mags = [s.magnitudes for s in block_spectra(a, dec)]
        for k in th:
            assert list(c.column(k)) == threshold_config(mags, k)
        assert is_admissible(c)
        assert c == large_config(block_diagonalize(a, dec), dec, th)

    @given(seeds, dims_st)
    def test_inverse_config(self, seed, dims):
        rng = np.random.default_rng(seed)
        a, dec = spread_upper(rng, dims)
        d = dec.total
        assume(d >= 2)
        th = ThetaSet.full(d)
        assume(is_proximal(a, th, tol=1e-6))
        c = large_config(a, dec, th)
        ci = large_config(np.linalg.inv(a), dec, iota_set(th))
        for k in th:
            assert ci.column(d - k) == tuple(dj - q for dj, q in zip(dec.dims, c.column(k)))


class TestAdmissibility:
    def test_examples(self):
        assert is_admissible(cfg(D22, (2,), ((1,), (1,))))
        assert not is_admissible(cfg(D22, (2,), ((2,), (1,))))
        assert not is_admissible(cfg(D22, (1, 2), ((1, 0), (0, 2))))

    def test_pairs(self):
        c = cfg(D21, (1,), ((1,), (0,)))
        assert nonempty_pairs(c, 1) == {(0, 0), (0, 1)}

    @given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.data())
    def test_pairs_nonempty_for_admissible(self, dims, data):
        dec = Decomposition(tuple(dims))
        d = dec.total
        assume(d >= 2)
        k = data.draw(st.integers(1, d - 1))
        # split k among blocks respecting capacities
        q, left = [], k
        for dj in dims:
            take = data.draw(st.integers(0, min(dj, left)))
            q.append(take)
            left -= take
        assume(left == 0)
        c = cfg(dec, (k,), tuple((x,) for x in q))
        assert is_admissible(c)
        assert nonempty_pairs(c, k)


class TestGapViaConfig:
    def test_examples(self):
        spectra = block_spectra(B, D22)
        c2 = large_config(B, D22, {2})
        assert gap_via_config(spectra, c2, 2) == pytest.approx(math.log(3 / 2))
        c1 = large_config(B, D22, {1})
        assert gap_via_config(spectra, c1, 1) == pytest.approx(math.log(4 / 3))

    def test_single_block(self):
        dec = Decomposition((3,))
        a = np.diag([5.0, 2.0, 1.0])
        c = large_config(a, dec, {1, 2})
        for k in (1, 2):
            assert gap_via_config(block_spectra(a, dec), c, k) == pytest.approx(log_gap(a, k))

    def test_inadmissible_raises(self):
        c = cfg(D21, (1,), ((0,), (0,)))
        with pytest.raises(ConfigError):
            gap_via_config(block_spectra(np.eye(3), D21), c, 1)

    @given(seeds, dims_st)
    def test_matches_direct_gap(self, seed, dims):
        rng = np.random.default_rng(seed)
        a, dec = spread_upper(rng, dims)
        d = dec.total
        assume(d >= 2)
        th = ThetaSet.full(d)
        assume(is_proximal(a, th, tol=1e-6))
        c = large_config(a, dec, th)
        spectra = block_spectra(a, dec)
        for k in th:
            assert gap_via_config(spectra, c, k) == pytest.approx(log_gap(a, k), abs=1e-9)


class TestBlockThetasAndHalfBound:
    def test_block_thetas(self):
        c = cfg(D21, (1, 2), ((1, 1), (0, 1)))
        t = block_thetas(c)
        assert t[0].members == (1,) and t[1].members == ()
        c = cfg(D22, (2,), ((2,), (0,)))
        assert all(not x.members for x in block_thetas(c))
        d3 = Decomposition((3, 2))
        c = cfg(d3, (1, 3), ((1, 2), (0, 1)))
        assert block_thetas(c)[0].members == (1, 2)

    def test_half_bound(self):
        assert half_bound_check(cfg(D21, (1, 2), ((1, 1), (0, 1))))
        assert not half_bound_check(cfg(D22, (1,), ((2,), (0,))))
        assert half_bound_check(cfg(D22, (1,), ((1,), (0,))))
        # k = d/2 pins q to exactly half of each block
        assert not half_bound_check(cfg(D22, (2,), ((2,), (0,))))
        assert half_bound_check(cfg(D22, (2,), ((1,), (1,))))
        assert half_bound_check(cfg(D22, (), ((), ())))


class TestStructured:
    def test_block_diagonal_strong(self):
        c = large_config(B, D22, {1, 2, 3})
        rep = check_structured(attracting_flag(B, {1, 2, 3}), D22, c, "strong")
        assert rep.passed and rep.measured == c.q

    @given(seeds, st.lists(st.integers(1, 3), min_size=2, max_size=3))
    @settings(max_examples=40)
    def test_upper_triangular_weak(self, seed, dims):
        rng = np.random.default_rng(seed)
        a, dec = spread_upper(rng, dims)
        th = ThetaSet.full(dec.total)
        assume(is_proximal(a, th, tol=1e-4))
        assume(np.linalg.cond(a) < 1e6)
        c = large_config(a, dec, th)
        assert check_structured(attracting_flag(a, th), dec, c, "weak").passed

    def test_generic_flag_fails(self):
        rng = np.random.default_rng(3)
        c = large_config(B, D22, {1, 2})
        q = np.linalg.qr(rng.normal(size=(4, 4)))[0]
        flag = Flag(c.theta, {1: Subspace(q[:, :1]), 2: Subspace(q[:, :2])})
        assert not check_structured(flag, D22, c, "strong").passed

    def test_signature_mismatch(self):
        c = large_config(B, D22, {1})
        with pytest.raises(ConfigError):
            check_structured(attracting_flag(B, {2}), D22, c)
