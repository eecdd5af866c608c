"""Vertex-dependent normalization, the max statistic and the scan statistic.

For a window ``tau`` each vertex's current locality value is compared with
its own last ``tau`` lagged values (raw for ``tau = 0``, centered for
``tau = 1``, studentized beyond). ``M(t)`` is the maximum over vertices.
The scan statistic applies the same three-way rule to ``M`` over a window
of ``ell`` previous times.

Standard deviations use the ``1/(w - 1)`` divisor and are floored at
``ScanConfig.sigma_floor`` before dividing, so a flat history never
produces a division by zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from locscan.errors import InputError
from locscan.graph_core import GraphSeries
from locscan.locality import LocalityCache, StatKind

__all__ = [
    "ScanConfig",
    "ScanValue",
    "Scanner",
    "vertex_normalized",
    "vertex_normalized_all",
    "m_stat",
    "scan_stat",
    "scan_series",
]


@dataclass(frozen=True)
class ScanConfig:
    tau: int
    ell: int
    k: int
    stat: StatKind = StatKind.PSI
    sigma_floor: float = 1.0

    def __post_init__(self):
        for name in ("tau", "ell", "k"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise InputError(f"{name} must be a nonnegative integer, got {value!r}")
        object.__setattr__(self, "stat", StatKind(self.stat))
        if not self.sigma_floor > 0:
            raise InputError("sigma_floor must be positive")

    @property
    def history(self) -> int:
        """Number of earlier snapshots ``scan_stat`` needs."""
        return self.tau + self.ell


@dataclass(frozen=True)
class ScanValue:
    t: int
    value: float
    argmax_vertex: int


def _standardize(current, lags: np.ndarray, window: int, floor: float):
    if window == 0:
        return current
    mean = lags.mean(axis=0)
    if window == 1:
        return current - mean
    sd = lags.std(axis=0, ddof=1)
    return (current - mean) / np.maximum(sd, floor)


class Scanner:
    """Evaluates normalized statistics for one series and config, with caching.

    ``M`` values are memoized per time, so evaluating the scan statistic at
    consecutive times costs one ``M`` evaluation per new time.
    """

    def __init__(self, series: GraphSeries, cfg: ScanConfig, cache: LocalityCache | None = None):
        self.series = series
        self.cfg = cfg
        self.cache = cache or LocalityCache(series)
        self._m: dict[int, tuple[float, int]] = {}

    def _lagged(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        cfg, cache = self.cfg, self.cache
        current = cache.psi(t, cfg.k)
        if cfg.tau == 0:
            return current, np.empty((0, self.series.n))
        if cfg.stat is StatKind.PSI:
            lags = [cache.psi(t - s, cfg.k) for s in range(1, cfg.tau + 1)]
        else:
            lags = [cache.phi(t, t - s, cfg.k) for s in range(1, cfg.tau + 1)]
        return current, np.stack(lags)

    def vertex_normalized(self, t: int) -> np.ndarray:
        self.series.check_time(t)
        if t < self.cfg.tau:
            raise InputError(f"t={t} has fewer than tau={self.cfg.tau} earlier snapshots")
        current, lags = self._lagged(t)
        out = _standardize(current.astype(np.float64), lags.astype(np.float64), self.cfg.tau, self.cfg.sigma_floor)
        return np.asarray(out, dtype=np.float64)

    def m_stat(self, t: int) -> tuple[float, int]:
        hit = self._m.get(t)
        if hit is None:
            values = self.vertex_normalized(t)
            v = int(np.argmax(values))  # first maximum, i.e. smallest vertex id on ties
            hit = (float(values[v]), v)
            self._m[t] = hit
        return hit

    def scan_stat(self, t: int) -> ScanValue:
        cfg = self.cfg
        self.series.check_time(t)
        if t < cfg.history:
            raise InputError(f"t={t} needs tau+ell={cfg.history} earlier snapshots")
        m_now, v = self.m_stat(t)
        past = np.array([self.m_stat(t - s)[0] for s in range(1, cfg.ell + 1)])
        value = _standardize(m_now, past, cfg.ell, cfg.sigma_floor)
        return ScanValue(t=t, value=float(value), argmax_vertex=v)

    def scan_series(self) -> list[ScanValue]:
        cfg = self.cfg
        if len(self.series) <= cfg.history:
            raise InputError(
                f"series of length {len(self.series)} is too short for tau+ell={cfg.history}"
            )
        out = []
        for t in range(cfg.history, len(self.series)):
            out.append(self.scan_stat(t))
            # keep only what the next time step can reuse
            oldest = t + 1 - cfg.history
            self.cache.evict_before(oldest)
            for key in [key for key in self._m if key < oldest]:
                del self._m[key]
        return out


def vertex_normalized_all(series: GraphSeries, t: int, cfg: ScanConfig) -> np.ndarray:
    return Scanner(series, cfg).vertex_normalized(t)


def vertex_normalized(series: GraphSeries, t: int, cfg: ScanConfig, v: int) -> float:
    if not 0 <= v < series.n:
        raise InputError(f"vertex {v} out of range for n={series.n}")
    return float(vertex_normalized_all(series, t, cfg)[v])


def m_stat(series: GraphSeries, t: int, cfg: ScanConfig) -> tuple[float, int]:
    """Maximum normalized locality value at ``t`` and the vertex attaining it."""
    return Scanner(series, cfg).m_stat(t)


def scan_stat(series: GraphSeries, t: int, cfg: ScanConfig) -> ScanValue:
    return Scanner(series, cfg).scan_stat(t)


def scan_series(series: GraphSeries, cfg: ScanConfig) -> list[ScanValue]:
    """Scan statistic at every time with enough history, in time order."""
    return Scanner(series, cfg).scan_series()
