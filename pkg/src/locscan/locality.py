"""Locality statistics Psi and Phi.

``psi(t, k, v)`` counts edges of ``G_t`` induced by the closed k-hop
neighborhood of ``v`` in ``G_t``. ``phi(t, t', k, v)`` keeps the time-``t``
neighborhood but counts edges of ``G_{t'}``. At ``k = 0`` both are degree
conventions: the degree of ``v`` in ``G_t`` and in ``G_t ∩ G_{t'}``.

Batch versions return the value for every vertex at once. For ``k >= 1``
the count for all vertices is ``diag(N A' N^T) / 2`` where ``N`` is the
0/1 closed-neighborhood membership matrix at time ``t`` and ``A'`` the
adjacency at ``t'``; this is evaluated as one dense matrix product. Float32
products are exact here because every partial sum is an integer below 2**24.
"""
from __future__ import annotations

import enum

import numpy as np

from locscan.errors import InputError
from locscan.graph_core import (
    GraphSeries,
    GraphSnapshot,
    degree,
    induced_edge_count,
    intersect,
    neighborhood_mask,
)

__all__ = [
    "StatKind",
    "LocalityCache",
    "psi",
    "phi",
    "psi_all",
    "phi_all",
    "neighborhood_matrix",
]

_EXACT_F32_N = 4096


class StatKind(str, enum.Enum):
    PSI = "psi"
    PHI = "phi"

    def __str__(self) -> str:
        return self.value


def _float_dtype(n: int):
    return np.float32 if n <= _EXACT_F32_N else np.float64


def neighborhood_matrix(g: GraphSnapshot, k: int) -> np.ndarray:
    """Row ``v`` is the 0/1 indicator of the closed k-hop neighborhood of ``v``."""
    if k < 0:
        raise InputError(f"hop radius must be nonnegative, got {k}")
    dtype = _float_dtype(g.n)
    step = g.adjacency.astype(dtype)
    np.fill_diagonal(step, 1)
    if k == 0:
        return np.eye(g.n, dtype=dtype)
    reach = step
    for _ in range(k - 1):
        nxt = (reach @ step > 0).astype(dtype)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return reach


def _induced_counts(nbhd: np.ndarray, adj: np.ndarray) -> np.ndarray:
    # sum_{u,w} N[v,u] A[u,w] N[v,w] counts each induced edge twice
    twice = np.einsum("ij,ij->i", nbhd @ adj, nbhd)
    return np.rint(twice).astype(np.int64) // 2


class LocalityCache:
    """Memoizes per-time matrices and statistic vectors for one series.

    The neighborhood matrices of ``G_t`` are reused by every ``phi`` lag that
    shares the same ``t``, and ``phi(t, t, k)`` is served from ``psi(t, k)``.
    """

    def __init__(self, series: GraphSeries):
        self.series = series
        self._adj: dict[int, np.ndarray] = {}
        self._nbhd: dict[tuple[int, int], np.ndarray] = {}
        self._psi: dict[tuple[int, int], np.ndarray] = {}
        self._phi: dict[tuple[int, int, int], np.ndarray] = {}

    def _adjf(self, t: int) -> np.ndarray:
        a = self._adj.get(t)
        if a is None:
            a = self.series[t].adjacency.astype(_float_dtype(self.series.n))
            self._adj[t] = a
        return a

    def nbhd(self, t: int, k: int) -> np.ndarray:
        key = (t, k)
        m = self._nbhd.get(key)
        if m is None:
            m = neighborhood_matrix(self.series[t], k)
            self._nbhd[key] = m
        return m

    def psi(self, t: int, k: int) -> np.ndarray:
        key = (t, k)
        out = self._psi.get(key)
        if out is None:
            self.series.check_time(t)
            if k == 0:
                out = np.asarray(self.series[t].degrees, dtype=np.int64).copy()
            else:
                out = _induced_counts(self.nbhd(t, k), self._adjf(t))
            out.flags.writeable = False
            self._psi[key] = out
        return out

    def phi(self, t: int, t_prime: int, k: int) -> np.ndarray:
        self.series.check_time(t)
        self.series.check_time(t_prime, "t_prime")
        if t_prime > t:
            raise InputError(f"phi needs t_prime <= t, got t_prime={t_prime} > t={t}")
        if t_prime == t:
            return self.psi(t, k)
        key = (t, t_prime, k)
        out = self._phi.get(key)
        if out is None:
            if k == 0:
                both = self.series[t].adjacency & self.series[t_prime].adjacency
                out = both.sum(axis=1, dtype=np.int64)
            else:
                out = _induced_counts(self.nbhd(t, k), self._adjf(t_prime))
            out.flags.writeable = False
            self._phi[key] = out
        return out

    def evict_before(self, t: int) -> None:
        """Drop cached entries whose times all precede ``t``."""
        for store in (self._adj,):
            for key in [key for key in store if key < t]:
                del store[key]
        for store in (self._nbhd, self._psi):
            for key in [key for key in store if key[0] < t]:
                del store[key]
        for key in [key for key in self._phi if key[0] < t]:
            del self._phi[key]


def psi_all(series: GraphSeries, t: int, k: int, cache: LocalityCache | None = None) -> np.ndarray:
    """Psi at time ``t`` for every vertex."""
    if k < 0:
        raise InputError(f"hop radius must be nonnegative, got {k}")
    return (cache or LocalityCache(series)).psi(t, k)


def phi_all(
    series: GraphSeries, t: int, t_prime: int, k: int, cache: LocalityCache | None = None
) -> np.ndarray:
    """Phi for the pair ``(t, t_prime)`` for every vertex."""
    if k < 0:
        raise InputError(f"hop radius must be nonnegative, got {k}")
    return (cache or LocalityCache(series)).phi(t, t_prime, k)


def psi(series: GraphSeries, t: int, k: int, v: int) -> int:
    series.check_time(t)
    g = series[t]
    if k == 0:
        return degree(g, v)
    return induced_edge_count(g, neighborhood_mask(g, v, k))


def phi(series: GraphSeries, t: int, t_prime: int, k: int, v: int) -> int:
    series.check_time(t)
    series.check_time(t_prime, "t_prime")
    if t_prime > t:
        raise InputError(f"phi needs t_prime <= t, got t_prime={t_prime} > t={t}")
    g, g_prime = series[t], series[t_prime]
    if k == 0:
        return degree(intersect(g, g_prime), v)
    return induced_edge_count(g_prime, neighborhood_mask(g, v, k))
