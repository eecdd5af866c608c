"""Monte Carlo power of scan-statistic change-point tests.

Each replicate samples one series with the change at ``t_star`` and evaluates
the scan statistic at ``t_star - 1`` (no change yet: a null draw) and at
``t_star`` (an alternative draw). The critical value is the type-7 empirical
``1 - alpha`` quantile of the null draws; power is the fraction of
alternative draws strictly above it.

Only the snapshots the statistics touch are sampled. Snapshot ``t`` always
comes from the stream derived from ``(replicate seed, t)``, so this is the
same as sampling the full series and discarding the unused part.
"""
from __future__ import annotations

import math
import os
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from locscan.errors import InputError, ScopeError
from locscan.generators import (
    RdpgSpec,
    SbmSpec,
    derive_seed,
    sample_rdpg_series,
    sample_series,
)
from locscan.limit_theory import limit_model, power_large_sample
from locscan.locality import LocalityCache, StatKind
from locscan.normalize import ScanConfig, Scanner

__all__ = [
    "PowerEstimate",
    "SweepResult",
    "TheoryComparison",
    "simulate_scan_pairs",
    "power_from_draws",
    "estimate_power",
    "estimate_powers",
    "sweep_tau_ell",
    "compare_theory_mc",
]

MIN_REPLICATES = 100


@dataclass(frozen=True)
class PowerEstimate:
    beta: float
    replicates: int
    std_error: float
    critical_value: float
    alpha: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "replicates": self.replicates,
            "std_error": self.std_error,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class SweepResult:
    taus: tuple[int, ...]
    ells: tuple[int, ...]
    estimates: dict[tuple[int, int], PowerEstimate]
    best_tau_ell: tuple[int, int]
    best_beta: float

    def beta_grid(self) -> np.ndarray:
        return np.array([[self.estimates[(t, l)].beta for l in self.ells] for t in self.taus])

    def rows(self):
        for (tau, ell), est in sorted(self.estimates.items()):
            yield {"tau": tau, "ell": ell, "beta": est.beta, "std_error": est.std_error}


@dataclass(frozen=True)
class TheoryComparison:
    beta_mc: float
    beta_theory: float
    gap: float
    estimate: PowerEstimate


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")


def _check_history(spec, cfgs: Sequence[ScanConfig]) -> int:
    """Return the earliest snapshot any config needs."""
    if spec.t_star == math.inf:
        raise InputError("power estimation needs a finite change time t_star")
    need = max(cfg.history for cfg in cfgs)
    if spec.t_star < need + 1:
        raise InputError(f"t_star={spec.t_star} leaves no room for tau+ell={need} history before the change")
    if spec.series_len < spec.t_star + 1:
        raise InputError(f"series_len={spec.series_len} must exceed t_star={spec.t_star}")
    return spec.t_star - 1 - need


def _replicate(spec, cfgs: tuple[ScanConfig, ...], seed: int, rep: int) -> np.ndarray:
    start = _check_history(spec, cfgs)
    rep_seed = int(derive_seed(seed, rep).generate_state(1, np.uint64)[0])
    times = range(start, spec.t_star + 1)
    if isinstance(spec, RdpgSpec):
        series = sample_rdpg_series(spec, rep_seed, times)
    else:
        series = sample_series(spec, rep_seed, times)
    t_alt = spec.t_star - start
    cache = LocalityCache(series)  # shared across configs
    out = np.empty((len(cfgs), 2))
    for j, cfg in enumerate(cfgs):
        scanner = Scanner(series, cfg, cache)
        out[j, 0] = scanner.scan_stat(t_alt - 1).value
        out[j, 1] = scanner.scan_stat(t_alt).value
    return out


def _run_chunk(args) -> np.ndarray:
    spec, cfgs, seed, reps = args
    return np.stack([_replicate(spec, cfgs, seed, r) for r in reps])


def simulate_scan_pairs(
    spec: SbmSpec | RdpgSpec,
    cfgs: Sequence[ScanConfig],
    replicates: int,
    seed: int,
    workers: int | None = 1,
) -> np.ndarray:
    """Scan statistic draws, shape ``(replicates, len(cfgs), 2)``.

    ``[..., 0]`` is the value at ``t_star - 1`` and ``[..., 1]`` at
    ``t_star``. All configs in one replicate see the same sampled series.
    Replicate ``r`` uses the stream derived from ``(seed, r)``, so results do
    not depend on ``workers``.
    """
    cfgs = tuple(cfgs)
    if not cfgs:
        raise InputError("need at least one scan config")
    _check_history(spec, cfgs)
    if replicates < 1:
        raise InputError("replicates must be positive")
    workers = (os.cpu_count() or 1) if workers is None else max(1, int(workers))
    if workers == 1 or replicates < 2:
        return _run_chunk((spec, cfgs, seed, range(replicates)))
    chunks = [(spec, cfgs, seed, range(i, replicates, workers)) for i in range(workers)]
    out = np.empty((replicates, len(cfgs), 2))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for (_, _, _, reps), block in zip(chunks, pool.map(_run_chunk, chunks)):
            out[list(reps)] = block
    return out


def power_from_draws(null: np.ndarray, alt: np.ndarray, alpha: float) -> PowerEstimate:
    _check_alpha(alpha)
    null = np.asarray(null, dtype=float)
    alt = np.asarray(alt, dtype=float)
    crit = float(np.quantile(null, 1 - alpha, method="linear"))
    beta = float(np.mean(alt > crit))
    return PowerEstimate(
        beta=beta,
        replicates=int(alt.size),
        std_error=math.sqrt(beta * (1 - beta) / alt.size),
        critical_value=crit,
        alpha=alpha,
    )


def _check_replicates(replicates: int) -> None:
    if replicates < MIN_REPLICATES:
        raise InputError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")


def estimate_powers(
    spec: SbmSpec | RdpgSpec,
    cfgs: Sequence[ScanConfig],
    alpha: float = 0.05,
    replicates: int = 1000,
    seed: int = 0,
    workers: int | None = 1,
) -> list[PowerEstimate]:
    """Power of several configs from one shared set of sampled series."""
    _check_alpha(alpha)
    _check_replicates(replicates)
    draws = simulate_scan_pairs(spec, cfgs, replicates, seed, workers)
    return [power_from_draws(draws[:, j, 0], draws[:, j, 1], alpha) for j in range(draws.shape[1])]


def estimate_power(
    spec: SbmSpec | RdpgSpec,
    cfg: ScanConfig,
    alpha: float = 0.05,
    replicates: int = 1000,
    seed: int = 0,
    workers: int | None = 1,
) -> PowerEstimate:
    return estimate_powers(spec, [cfg], alpha, replicates, seed, workers)[0]


def sweep_tau_ell(
    spec: SbmSpec | RdpgSpec,
    k: int,
    stat: StatKind | str,
    tau_range: Sequence[int],
    ell_range: Sequence[int],
    alpha: float = 0.05,
    replicates: int = 1000,
    seed: int = 0,
    workers: int | None = 1,
) -> SweepResult:
    """Power over a ``(tau, ell)`` grid; ties go to the smallest ``(tau, ell)``."""
    taus, ells = tuple(sorted(set(tau_range))), tuple(sorted(set(ell_range)))
    if not taus or not ells:
        raise InputError("tau and ell ranges must be nonempty")
    grid = [(tau, ell) for tau in taus for ell in ells]
    cfgs = [ScanConfig(tau, ell, k, stat) for tau, ell in grid]
    estimates = dict(zip(grid, estimate_powers(spec, cfgs, alpha, replicates, seed, workers)))
    best = min(grid, key=lambda key: (-estimates[key].beta, key))
    return SweepResult(taus, ells, estimates, best, estimates[best].beta)


def compare_theory_mc(
    spec: SbmSpec,
    cfg: ScanConfig,
    alpha: float = 0.05,
    replicates: int = 1000,
    seed: int = 0,
    workers: int | None = 1,
) -> TheoryComparison:
    """Monte Carlo power next to the large-sample Gumbel power (tau=1, ell=0 only)."""
    if (cfg.tau, cfg.ell) != (1, 0) or cfg.k not in (0, 1):
        raise ScopeError(f"theory covers tau=1, ell=0, k in {{0, 1}}; got {cfg}")
    beta_theory = power_large_sample(limit_model(spec, cfg.stat, cfg.k), alpha)
    est = estimate_power(spec, cfg, alpha, replicates, seed, workers)
    return TheoryComparison(est.beta, beta_theory, abs(est.beta - beta_theory), est)
