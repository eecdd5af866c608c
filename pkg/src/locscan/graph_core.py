"""Graph snapshots and the primitives locality statistics are built from.

A snapshot keeps two views of the same adjacency: a dense boolean matrix
(used by the batch kernels in :mod:`locscan.locality`) and fixed-width bit
rows packed into ``uint64`` words (used for single-vertex neighborhood
expansion and masked popcount edge counting).
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from functools import cached_property

import numpy as np

from locscan.errors import InputError

__all__ = [
    "GraphSnapshot",
    "GraphSeries",
    "neighborhood",
    "neighborhood_mask",
    "induced_edge_count",
    "intersect",
    "degree",
    "vertex_mask",
]


class GraphSnapshot:
    """Undirected simple graph on vertices ``0..n-1``. Immutable."""

    def __init__(self, adjacency: np.ndarray):
        adj = np.array(adjacency, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InputError(f"adjacency must be square, got shape {adj.shape}")
        if adj.diagonal().any():
            raise InputError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise InputError("adjacency must be symmetric")
        adj.flags.writeable = False
        self._adj = adj

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> GraphSnapshot:
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    @classmethod
    def empty(cls, n: int) -> GraphSnapshot:
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def complete(cls, n: int) -> GraphSnapshot:
        return cls(~np.eye(n, dtype=bool))

    @classmethod
    def cycle(cls, n: int) -> GraphSnapshot:
        return cls.from_edges(n, ((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def path(cls, n: int) -> GraphSnapshot:
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)))

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only boolean adjacency matrix."""
        return self._adj

    @cached_property
    def bits(self) -> np.ndarray:
        """Adjacency rows packed little-endian into ``uint64`` words, shape ``(n, words)``."""
        return _pack_rows(self._adj)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = self._adj.sum(axis=1, dtype=np.int64)
        deg.flags.writeable = False
        return deg

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, in row-major order."""
        us, vs = np.nonzero(np.triu(self._adj, 1))
        return zip(us.tolist(), vs.tolist())

    def permute(self, perm: Sequence[int]) -> GraphSnapshot:
        """Relabel so that old vertex ``perm[i]`` becomes vertex ``i``."""
        perm = np.asarray(perm)
        if perm.shape != (self.n,) or not np.array_equal(np.sort(perm), np.arange(self.n)):
            raise InputError(f"not a permutation of 0..{self.n - 1}")
        return GraphSnapshot(self._adj[np.ix_(perm, perm)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphSnapshot):
            return NotImplemented
        return self._adj.shape == other._adj.shape and np.array_equal(self._adj, other._adj)

    def __hash__(self) -> int:
        return hash((self.n, np.packbits(self._adj).tobytes()))

    def __repr__(self) -> str:
        return f"GraphSnapshot(n={self.n}, edges={self.num_edges})"


class GraphSeries(Sequence):
    """Ordered snapshots on a shared vertex set, indexed from 0."""

    def __init__(self, snapshots: Iterable[GraphSnapshot], n: int | None = None):
        snaps = tuple(snapshots)
        if n is None:
            if not snaps:
                raise InputError("an empty series needs an explicit vertex count")
            n = snaps[0].n
        for t, g in enumerate(snaps):
            if g.n != n:
                raise InputError(f"snapshot {t} has n={g.n}, expected {n}")
        self._snaps = snaps
        self._n = n

    @property
    def n(self) -> int:
        return self._n

    @property
    def snapshots(self) -> tuple[GraphSnapshot, ...]:
        return self._snaps

    def __len__(self) -> int:
        return len(self._snaps)

    def __getitem__(self, t):
        if isinstance(t, slice):
            return GraphSeries(self._snaps[t], n=self._n)
        return self._snaps[t]

    def check_time(self, t: int, what: str = "t") -> None:
        if not 0 <= t < len(self._snaps):
            raise InputError(f"{what}={t} outside series of length {len(self._snaps)}")

    def permute(self, perm: Sequence[int]) -> GraphSeries:
        return GraphSeries((g.permute(perm) for g in self._snaps), n=self._n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphSeries):
            return NotImplemented
        return self._n == other._n and self._snaps == other._snaps

    __hash__ = None

    def __repr__(self) -> str:
        return f"GraphSeries(n={self._n}, T={len(self._snaps)})"


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(rows)
    n = rows.shape[1]
    words = max(1, -(-n // 64))
    packed = np.packbits(rows, axis=1, bitorder="little")
    out = np.zeros((rows.shape[0], words * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view(np.uint64)


def _check_vertex(g: GraphSnapshot, v: int) -> None:
    if not 0 <= v < g.n:
        raise InputError(f"vertex {v} out of range for n={g.n}")


def vertex_mask(n: int, vset) -> np.ndarray:
    """Pack a vertex collection into a bit mask of width ``n``.

    ``vset`` may be an iterable of vertex ids, a boolean array of length
    ``n``, or an already packed ``uint64`` mask (returned unchanged).
    """
    words = max(1, -(-n // 64))
    if isinstance(vset, np.ndarray):
        if vset.dtype == np.uint64:
            if vset.shape != (words,):
                raise InputError(f"packed mask must have {words} words")
            return vset
        if vset.dtype == bool:
            if vset.shape != (n,):
                raise InputError(f"boolean mask must have length {n}")
            return _pack_rows(vset)[0]
    member = np.zeros(n, dtype=bool)
    for u in vset:
        u = int(u)
        if not 0 <= u < n:
            raise InputError(f"vertex {u} out of range for n={n}")
        member[u] = True
    return _pack_rows(member)[0]


def _mask_members(mask: np.ndarray, n: int) -> np.ndarray:
    flags = np.unpackbits(mask.view(np.uint8), bitorder="little")[:n]
    return np.flatnonzero(flags)


def neighborhood_mask(g: GraphSnapshot, v: int, k: int) -> np.ndarray:
    """Closed k-hop neighborhood of ``v`` as a packed bit mask.

    Breadth-first expansion over bit rows, stopping after ``k`` layers.
    """
    _check_vertex(g, v)
    if k < 0:
        raise InputError(f"hop radius must be nonnegative, got {k}")
    bits = g.bits
    reached = np.zeros(bits.shape[1], dtype=np.uint64)
    reached[v // 64] = np.uint64(1) << np.uint64(v % 64)
    frontier = reached.copy()
    for _ in range(k):
        members = _mask_members(frontier, g.n)
        if members.size == 0:
            break
        expanded = np.bitwise_or.reduce(bits[members], axis=0)
        frontier = expanded & ~reached
        if not frontier.any():
            break
        reached |= frontier
    return reached


def neighborhood(g: GraphSnapshot, v: int, k: int) -> frozenset[int]:
    """Vertices at shortest-path distance at most ``k`` from ``v``, including ``v``."""
    return frozenset(_mask_members(neighborhood_mask(g, v, k), g.n).tolist())


def induced_edge_count(g: GraphSnapshot, vset) -> int:
    """Number of edges of ``g`` with both endpoints in ``vset``."""
    mask = vertex_mask(g.n, vset)
    members = _mask_members(mask, g.n)
    if members.size < 2:
        return 0
    return int(np.bitwise_count(g.bits[members] & mask).sum()) // 2


def intersect(g: GraphSnapshot, h: GraphSnapshot) -> GraphSnapshot:
    """Graph on the same vertices keeping only edges present in both."""
    if g.n != h.n:
        raise InputError(f"vertex counts differ: {g.n} != {h.n}")
    return GraphSnapshot(g.adjacency & h.adjacency)


def degree(g: GraphSnapshot, v: int) -> int:
    _check_vertex(g, v)
    return int(g.degrees[v])
