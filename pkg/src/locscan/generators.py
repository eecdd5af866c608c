"""Random graph time series under a no-change null or a single change point.

Block memberships are fixed for the whole series and laid out contiguously:
block 0 holds vertices ``0..n_0-1``, block 1 the next ``n_1``, and so on.
Snapshot ``t`` is drawn from its own RNG stream derived from ``(seed, t)``,
so any snapshot can be regenerated alone and the result never depends on
which other snapshots were drawn.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from locscan.errors import InputError
from locscan.graph_core import GraphSeries, GraphSnapshot

__all__ = [
    "SbmSpec",
    "RdpgSpec",
    "derive_seed",
    "block_labels",
    "sample_sbm",
    "sample_series",
    "sample_snapshot",
    "sample_rdpg_series",
    "sample_rdpg_snapshot",
]

INF = math.inf


def derive_seed(seed: int, *keys: int) -> np.random.SeedSequence:
    """Independent child stream for ``seed`` identified by integer ``keys``."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def block_labels(block_sizes: Sequence[int]) -> np.ndarray:
    """Block index of every vertex under the contiguous layout."""
    return np.repeat(np.arange(len(block_sizes)), block_sizes)


def _check_prob_matrix(P, B: int, name: str) -> np.ndarray:
    P = np.array(P, dtype=float)
    if P.shape != (B, B):
        raise InputError(f"{name} must be {B}x{B}, got shape {P.shape}")
    if not np.all((P >= 0) & (P <= 1)):
        i, j = np.argwhere(~((P >= 0) & (P <= 1)))[0]
        raise InputError(f"{name}[{i},{j}]={P[i, j]} is not a probability")
    if not np.allclose(P, P.T, rtol=0, atol=0):
        raise InputError(f"{name} must be symmetric")
    P.flags.writeable = False
    return P


def _check_sizes(block_sizes) -> tuple[int, ...]:
    sizes = tuple(int(s) for s in block_sizes)
    if not sizes or any(s <= 0 for s in sizes):
        raise InputError(f"block sizes must be positive, got {sizes}")
    return sizes


def _check_change(t_star, series_len) -> tuple[float | int, int]:
    if int(series_len) != series_len or series_len < 0:
        raise InputError(f"series_len must be a nonnegative integer, got {series_len!r}")
    if t_star is None:
        t_star = INF
    if t_star != INF:
        if int(t_star) != t_star or t_star < 0:
            raise InputError(f"t_star must be a nonnegative integer or inf, got {t_star!r}")
        t_star = int(t_star)
    return t_star, int(series_len)


@dataclass(frozen=True, eq=False)
class SbmSpec:
    """Change-point hypothesis pair for a stochastic block model series.

    Snapshots before ``t_star`` use ``P0`` and snapshots from ``t_star`` on use
    ``PA``; ``t_star = inf`` keeps ``P0`` throughout.
    """

    block_sizes: tuple[int, ...]
    P0: np.ndarray
    PA: np.ndarray
    t_star: float | int = INF
    series_len: int = 2

    def __post_init__(self):
        sizes = _check_sizes(self.block_sizes)
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "P0", _check_prob_matrix(self.P0, len(sizes), "P0"))
        object.__setattr__(self, "PA", _check_prob_matrix(self.PA, len(sizes), "PA"))
        t_star, series_len = _check_change(self.t_star, self.series_len)
        object.__setattr__(self, "t_star", t_star)
        object.__setattr__(self, "series_len", series_len)

    @classmethod
    def chatter(
        cls,
        block_sizes: Sequence[int],
        p: float,
        h: float | Sequence[float] = (),
        *,
        q: float | None = None,
        delta: float | None = None,
        t_star: float | int = INF,
        series_len: int = 2,
    ) -> SbmSpec:
        """Build the chatter-anomaly form: every entry ``p`` except the middle
        diagonals ``h`` and, after the change, the last diagonal ``q = p + delta``.
        """
        B = len(block_sizes)
        hs = [h] * (B - 2) if np.isscalar(h) else list(h)
        if len(hs) != max(B - 2, 0):
            raise InputError(f"need {B - 2} middle-block values h, got {len(hs)}")
        if (q is None) == (delta is None):
            raise InputError("give exactly one of q or delta")
        q = p + delta if q is None else q
        P0 = np.full((B, B), float(p))
        for i, hi in enumerate(hs, start=1):
            P0[i, i] = hi
        PA = P0.copy()
        PA[B - 1, B - 1] = q
        return cls(tuple(block_sizes), P0, PA, t_star=t_star, series_len=series_len)

    @property
    def n(self) -> int:
        return sum(self.block_sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    def matrix_at(self, t: int) -> np.ndarray:
        return self.P0 if t < self.t_star else self.PA

    def special_form(self) -> tuple[float, tuple[float, ...], float]:
        """Return ``(p, (h_2..h_{B-1}), delta)`` for a chatter-form spec.

        Raises :class:`InputError` naming the first entry that breaks the form.
        """
        B = self.num_blocks
        p = float(self.P0[0, 0])
        for name, P in (("P0", self.P0), ("PA", self.PA)):
            for i in range(B):
                for j in range(B):
                    if i == j and (0 < i < B - 1 or (name == "PA" and i == B - 1)):
                        continue
                    if P[i, j] != p:
                        raise InputError(f"{name}[{i},{j}]={P[i, j]} differs from p={p}")
        for i in range(1, B - 1):
            if self.PA[i, i] != self.P0[i, i]:
                raise InputError(f"PA[{i},{i}]={self.PA[i, i]} differs from P0[{i},{i}]={self.P0[i, i]}")
        hs = tuple(float(self.P0[i, i]) for i in range(1, B - 1))
        delta = float(self.PA[B - 1, B - 1]) - p
        return p, hs, delta

    def with_(self, **changes) -> SbmSpec:
        fields = dict(
            block_sizes=self.block_sizes,
            P0=self.P0,
            PA=self.PA,
            t_star=self.t_star,
            series_len=self.series_len,
        )
        fields.update(changes)
        return SbmSpec(**fields)

    def __eq__(self, other):
        if not isinstance(other, SbmSpec):
            return NotImplemented
        return (
            self.block_sizes == other.block_sizes
            and np.array_equal(self.P0, other.P0)
            and np.array_equal(self.PA, other.PA)
            and self.t_star == other.t_star
            and self.series_len == other.series_len
        )

    __hash__ = None


def _sample_prob(prob: np.ndarray, rng: np.random.Generator) -> GraphSnapshot:
    n = prob.shape[0]
    draws = rng.random((n, n)) < prob
    upper = np.triu(draws, 1)
    return GraphSnapshot(upper | upper.T)


def sample_sbm(P, block_sizes: Sequence[int], seed) -> GraphSnapshot:
    """One SBM graph; each unordered pair is an independent coin flip."""
    sizes = _check_sizes(block_sizes)
    P = _check_prob_matrix(P, len(sizes), "P")
    labels = block_labels(sizes)
    return _sample_prob(P[np.ix_(labels, labels)], _rng(seed))


def sample_snapshot(spec: SbmSpec, seed: int, t: int) -> GraphSnapshot:
    """Snapshot ``t`` of the series that ``sample_series(spec, seed)`` returns."""
    return sample_sbm(spec.matrix_at(t), spec.block_sizes, derive_seed(seed, t))


def _permuted(series: GraphSeries, permutation) -> GraphSeries:
    return series if permutation is None else series.permute(permutation)


def sample_series(
    spec: SbmSpec,
    seed: int,
    times: Iterable[int] | None = None,
    permutation: Sequence[int] | None = None,
) -> GraphSeries:
    """Sample the SBM series; ``times`` restricts it to a subset (reindexed from 0).

    ``permutation`` relabels vertices (the same way at every time) so blocks
    are no longer contiguous; new vertex ``i`` is old vertex ``permutation[i]``.
    """
    times = range(spec.series_len) if times is None else list(times)
    series = GraphSeries((sample_snapshot(spec, seed, t) for t in times), n=spec.n)
    return _permuted(series, permutation)


@dataclass(frozen=True, eq=False)
class RdpgSpec:
    """Dirichlet random dot product series.

    ``locations`` is ``(n, K)`` with rows in the unit simplex (nonnegative,
    sum at most one). ``locations_alt``, when given, replaces ``locations``
    from ``t_star`` onward.
    """

    locations: np.ndarray
    concentrations: np.ndarray
    series_len: int = 2
    locations_alt: np.ndarray | None = None
    t_star: float | int = INF
    block_sizes: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        loc = _check_simplex(self.locations, "locations")
        object.__setattr__(self, "locations", loc)
        if self.locations_alt is not None:
            alt = _check_simplex(self.locations_alt, "locations_alt")
            if alt.shape != loc.shape:
                raise InputError("locations_alt must have the same shape as locations")
            object.__setattr__(self, "locations_alt", alt)
        r = np.broadcast_to(np.asarray(self.concentrations, dtype=float), (loc.shape[0],)).copy()
        if np.any(r < 0):
            raise InputError("concentrations must be nonnegative")
        r.flags.writeable = False
        object.__setattr__(self, "concentrations", r)
        t_star, series_len = _check_change(self.t_star, self.series_len)
        object.__setattr__(self, "t_star", t_star)
        object.__setattr__(self, "series_len", series_len)

    @classmethod
    def from_blocks(
        cls,
        block_sizes: Sequence[int],
        alphas,
        r: float,
        *,
        alphas_alt=None,
        t_star: float | int = INF,
        series_len: int = 2,
    ) -> RdpgSpec:
        """Vertices of a block share one location (and alternative location)."""
        sizes = _check_sizes(block_sizes)
        labels = block_labels(sizes)
        alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
        if alphas.shape[0] != len(sizes):
            raise InputError(f"need one location per block, got {alphas.shape[0]} for {len(sizes)} blocks")
        alt = None
        if alphas_alt is not None:
            alt = np.atleast_2d(np.asarray(alphas_alt, dtype=float))[labels]
        return cls(
            alphas[labels],
            np.full(len(labels), float(r)),
            series_len=series_len,
            locations_alt=alt,
            t_star=t_star,
            block_sizes=sizes,
        )

    @property
    def n(self) -> int:
        return self.locations.shape[0]

    @property
    def K(self) -> int:
        return self.locations.shape[1]

    def locations_at(self, t: int) -> np.ndarray:
        if self.locations_alt is not None and t >= self.t_star:
            return self.locations_alt
        return self.locations


def _check_simplex(x, name: str) -> np.ndarray:
    x = np.atleast_2d(np.array(x, dtype=float))
    if x.ndim != 2:
        raise InputError(f"{name} must be an (n, K) array")
    bad = (x < 0).any(axis=1) | (x.sum(axis=1) > 1 + 1e-12)
    if bad.any():
        v = int(np.flatnonzero(bad)[0])
        raise InputError(f"{name}[{v}]={x[v].tolist()} is outside the unit simplex")
    x.flags.writeable = False
    return x


def sample_latent_positions(locations: np.ndarray, r: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw ``X_v ~ Dirichlet(r_v * a_v + 1)`` embedded in the sub-unit simplex.

    Each location gets a slack coordinate ``1 - sum(a_v)`` so the Dirichlet
    lives on ``K + 1`` coordinates summing to one; the slack is dropped, so
    the returned rows sum to at most one.
    """
    slack = np.clip(1.0 - locations.sum(axis=1, keepdims=True), 0.0, None)
    shape = r[:, None] * np.hstack([locations, slack]) + 1.0
    g = rng.standard_gamma(shape)
    x = g / g.sum(axis=1, keepdims=True)
    return x[:, :-1]


def sample_rdpg_snapshot(spec: RdpgSpec, seed: int, t: int) -> GraphSnapshot:
    rng = np.random.default_rng(derive_seed(seed, t))
    x = sample_latent_positions(spec.locations_at(t), spec.concentrations, rng)
    prob = x @ x.T
    if prob.min() < -1e-12 or prob.max() > 1 + 1e-12:
        raise AssertionError("latent inner products left [0, 1]")
    return _sample_prob(np.clip(prob, 0.0, 1.0), rng)


def sample_rdpg_series(
    spec: RdpgSpec,
    seed: int,
    times: Iterable[int] | None = None,
    permutation: Sequence[int] | None = None,
) -> GraphSeries:
    """Fresh latent positions at every snapshot, then independent edges."""
    times = range(spec.series_len) if times is None else list(times)
    series = GraphSeries((sample_rdpg_snapshot(spec, seed, t) for t in times), n=spec.n)
    return _permuted(series, permutation)
