from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import random_series
from locscan import locality
from locscan.errors import InputError
from locscan.graph_core import GraphSeries, GraphSnapshot, degree, intersect
from locscan.locality import LocalityCache, neighborhood_matrix, phi, phi_all, psi, psi_all


@st.composite
def series(draw, max_n=20, max_T=4):
    n = draw(st.integers(1, max_n))
    T = draw(st.integers(1, max_T))
    p = draw(st.floats(0, 1))
    return random_series(n, T, p, draw(st.integers(0, 2**32 - 1)))


class TestKnownValues:
    def test_path_psi(self):
        s = GraphSeries([GraphSnapshot.path(5)])
        assert psi_all(s, 0, 0).tolist() == [1, 2, 2, 2, 1]
        assert psi_all(s, 0, 1).tolist() == [1, 2, 2, 2, 1]
        assert psi_all(s, 0, 2).tolist() == [2, 3, 4, 3, 2]

    def test_complete_graph(self):
        s = GraphSeries([GraphSnapshot.complete(6)])
        assert (psi_all(s, 0, 1) == 15).all()

    def test_phi_uses_past_edges(self):
        star = GraphSnapshot.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        tri = GraphSnapshot.from_edges(4, [(1, 2), (2, 3), (1, 3)])
        s = GraphSeries([tri, star])
        # neighborhood of 0 at time 1 is everything; time-0 edges inside: 3
        assert phi(s, 1, 0, 1, 0) == 3
        assert phi_all(s, 1, 0, 0).tolist() == [0, 0, 0, 0]


class TestAgainstOracle:
    @settings(max_examples=50, deadline=None)
    @given(series(), st.integers(0, 3))
    def test_batch_psi(self, s, k):
        for t in range(len(s)):
            A = oracles.to_lists(s[t].adjacency)
            expect = [oracles.psi(A, v, k) for v in range(s.n)]
            assert psi_all(s, t, k).tolist() == expect

    @settings(max_examples=50, deadline=None)
    @given(series(max_T=3), st.integers(0, 3))
    def test_batch_phi(self, s, k):
        cache = LocalityCache(s)
        for t in range(len(s)):
            for tp in range(t + 1):
                A, B = oracles.to_lists(s[t].adjacency), oracles.to_lists(s[tp].adjacency)
                expect = [oracles.phi(A, B, v, k) for v in range(s.n)]
                assert cache.phi(t, tp, k).tolist() == expect

    @settings(max_examples=40, deadline=None)
    @given(series(max_T=2), st.integers(0, 3), st.data())
    def test_single_vertex_routes(self, s, k, data):
        v = data.draw(st.integers(0, s.n - 1))
        t = len(s) - 1
        assert psi(s, t, k, v) == psi_all(s, t, k)[v]
        assert phi(s, t, 0, k, v) == phi_all(s, t, 0, k)[v]


class TestIdentities:
    @settings(max_examples=40, deadline=None)
    @given(series(), st.integers(0, 3))
    def test_phi_same_time_is_psi(self, s, k):
        for t in range(len(s)):
            assert np.array_equal(phi_all(s, t, t, k), psi_all(s, t, k))

    @settings(max_examples=40, deadline=None)
    @given(series(max_T=2))
    def test_k0_conventions(self, s):
        t = len(s) - 1
        g, h = s[t], s[0]
        both = intersect(g, h)
        assert psi_all(s, t, 0).tolist() == [degree(g, v) for v in range(s.n)]
        assert phi_all(s, t, 0, 0).tolist() == [degree(both, v) for v in range(s.n)]

    @settings(max_examples=30, deadline=None)
    @given(series(max_T=2), st.integers(1, 3))
    def test_monotone_in_k(self, s, k):
        # N_k grows with k and contains the star of v, so counts never drop
        assert (psi_all(s, 0, k) >= psi_all(s, 0, k - 1)).all()

    @settings(max_examples=30, deadline=None)
    @given(series(max_T=1), st.integers(0, 3), st.data())
    def test_permutation_equivariant(self, s, k, data):
        perm = np.array(data.draw(st.permutations(range(s.n))))
        permuted = s.permute(perm)
        assert np.array_equal(psi_all(permuted, 0, k), psi_all(s, 0, k)[perm])


class TestNeighborhoodMatrix:
    def test_rows_are_neighborhoods(self):
        s = random_series(25, 1, 0.12, 7)
        A = oracles.to_lists(s[0].adjacency)
        for k in range(4):
            N = neighborhood_matrix(s[0], k)
            for v in range(25):
                assert set(np.flatnonzero(N[v]).tolist()) == oracles.closed_neighborhood(A, v, k)

    def test_negative_radius(self):
        with pytest.raises(InputError):
            neighborhood_matrix(GraphSnapshot.path(3), -1)
        with pytest.raises(InputError):
            psi_all(GraphSeries([GraphSnapshot.path(3)]), 0, -1)


def test_float64_path_agrees(monkeypatch):
    s = random_series(40, 2, 0.3, 11)
    want = [psi_all(s, 1, 2).copy(), phi_all(s, 1, 0, 1).copy()]
    monkeypatch.setattr(locality, "_EXACT_F32_N", 10)
    got = [psi_all(s, 1, 2), phi_all(s, 1, 0, 1)]
    assert all(np.array_equal(a, b) for a, b in zip(want, got))


class TestErrors:
    def test_future_lag(self):
        s = random_series(5, 2, 0.5, 0)
        with pytest.raises(InputError):
            phi_all(s, 0, 1, 1)
        with pytest.raises(InputError):
            phi(s, 0, 1, 1, 0)

    def test_time_out_of_range(self):
        s = random_series(5, 2, 0.5, 0)
        with pytest.raises(InputError):
            psi_all(s, 2, 0)
        with pytest.raises(InputError):
            psi(s, 0, 0, 5)


def test_cache_eviction():
    s = random_series(10, 4, 0.4, 2)
    cache = LocalityCache(s)
    for t in range(4):
        cache.psi(t, 1)
        if t:
            cache.phi(t, t - 1, 1)
    cache.evict_before(2)
    assert all(key[0] >= 2 for key in cache._psi)
    assert np.array_equal(cache.psi(0, 1), psi_all(s, 0, 1))
