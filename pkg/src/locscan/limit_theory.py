"""Large-sample Gumbel approximations for S_{1,0,k} with k in {0, 1}.

Under the chatter-form block model each block's maximum of the
(tau=1)-normalized statistic is approximately Gumbel with a block-specific
location and scale. The scan statistic is the maximum over blocks, whose CDF
is the product of the block CDFs (blocks treated as independent). Power at
level ``alpha`` follows from the null ``1 - alpha`` quantile of that product.

Normalizing constants for a maximum of ``m`` standard normals::

    a_m = sqrt(2 log m) * (1 - (log log m + log 4 pi) / (4 log m))
    b_m = 1 / sqrt(2 log m)

are always evaluated at the block size, never at the total ``n``.

The variance factor ``C`` is evaluated at the finite block sizes, per block,
from the binomial decompositions of the per-vertex statistic. By default
(``alt_scale="null"``) the alternative keeps the null scale and only the
location moves by the change-induced shift. With ``alt_scale="own"`` the
alternative uses its own ``C`` (current snapshot drawn from ``PA``) for both
location and scale.
"""
from __future__ import annotations

import csv
import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from locscan.errors import InputError, ScopeError
from locscan.generators import SbmSpec
from locscan.locality import StatKind

__all__ = [
    "ALT_SCALES",
    "GumbelParams",
    "BlockLimit",
    "LimitModel",
    "Hypothesis",
    "gumbel_norm_constants",
    "variance_factor_k0",
    "variance_factor_k1_phi",
    "limit_model",
    "limit_model_k0",
    "limit_model_k1",
    "max_gumbel_cdf",
    "max_gumbel_quantile",
    "power_large_sample",
    "Heatmap",
    "heatmap_beta_diff",
    "chatter_block_sizes",
    "Relation",
    "RegimeVerdict",
    "Order",
    "classify_regime",
    "classify_regime_k0",
    "classify_regime_k1",
]

GUMBEL_MEDIAN = -math.log(math.log(2.0))
ALT_SCALES = ("null", "own")


class Hypothesis(str, enum.Enum):
    NULL = "null"
    ALT = "alt"


@dataclass(frozen=True)
class GumbelParams:
    mu: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise InputError(f"Gumbel scale must be positive, got {self.gamma}")

    def cdf(self, x: float) -> float:
        return math.exp(-math.exp(-(x - self.mu) / self.gamma))

    @property
    def median(self) -> float:
        return self.mu + self.gamma * GUMBEL_MEDIAN


@dataclass(frozen=True)
class BlockLimit:
    block: int
    null_params: GumbelParams
    alt_params: GumbelParams
    null_C: float
    alt_C: float

    def params(self, hypothesis: Hypothesis | str) -> GumbelParams:
        return self.null_params if Hypothesis(hypothesis) is Hypothesis.NULL else self.alt_params


@dataclass(frozen=True)
class LimitModel:
    stat: StatKind
    k: int
    blocks: tuple[BlockLimit, ...]

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ScopeError(f"limit theory exists only for k in {{0, 1}}, got k={self.k}")
        if not self.blocks:
            raise InputError("a limit model needs at least one block")


def gumbel_norm_constants(m: int) -> tuple[float, float]:
    """Return ``(a_m, b_m)``."""
    if m < 2:
        raise InputError(f"normalizing constants need m >= 2, got {m}")
    log_m = math.log(m)
    a = math.sqrt(2 * log_m) * (1 - (math.log(log_m) + math.log(4 * math.pi)) / (4 * log_m))
    b = 1 / math.sqrt(2 * log_m)
    return a, b


def _var(x: float) -> float:
    return x * (1 - x)


def _diag(spec: SbmSpec, i: int, hypothesis: Hypothesis) -> tuple[float, float]:
    """(current, previous) diagonal probabilities of block ``i`` at the tested time."""
    before = float(spec.P0[i, i])
    now = float(spec.PA[i, i]) if hypothesis is Hypothesis.ALT else before
    return now, before


def variance_factor_k0(spec: SbmSpec, i: int, stat: StatKind, hypothesis: Hypothesis | str) -> float:
    """``C`` for block ``i`` at k = 0, relative to ``n p(1-p)`` (Psi) or ``n kappa(p)`` (Phi).

    Psi: degree difference of two independent snapshots, four binomial pieces.
    Phi: count of edges present now and absent before, two binomial pieces.
    """
    hypothesis = Hypothesis(hypothesis)
    p, _, _ = spec.special_form()
    n, ni = spec.n, spec.block_sizes[i]
    now, before = _diag(spec, i, hypothesis)
    outside = (n - ni) / n
    if StatKind(stat) is StatKind.PSI:
        scale = n * _var(p)
        return 2 * outside + (ni - 1) * (_var(now) + _var(before)) / scale
    kappa = _var(p) * (1 - _var(p))
    fresh = now * (1 - before)
    return outside + (ni - 1) * fresh * (1 - fresh) / (n * kappa)


def variance_factor_k1_phi(spec: SbmSpec, i: int, hypothesis: Hypothesis | str) -> float:
    """Leading ``C`` for Phi at k = 1, relative to ``n^2 p^3 (1-p)``.

    The dominant term is the difference between the current and previous
    edge counts among the neighbors of ``v`` (neighborhood fixed at the current
    time). Given ``x_j`` expected neighbors in block ``j``, each neighbor pair
    contributes ``var_now + var_before`` of its block pair.
    """
    hypothesis = Hypothesis(hypothesis)
    p, _, _ = spec.special_form()
    n = spec.n
    P_now = spec.PA if hypothesis is Hypothesis.ALT else spec.P0
    pair_var = _var(P_now) + _var(spec.P0)
    m = np.array(spec.block_sizes, dtype=float)
    m[i] -= 1
    x = m * P_now[i]
    # E[#neighbor pairs]: m_j (m_j - 1) pi_j^2 / 2 within a block, x_j x_k across
    pairs = np.outer(x, x)
    np.fill_diagonal(pairs, m * (m - 1) * P_now[i] ** 2 / 2)
    total = float(np.triu(pairs * pair_var).sum())
    return total / (n**2 * p**3 * (1 - p))


def _zeta(spec: SbmSpec, i: int) -> float:
    p, _, delta = spec.special_form()
    B = spec.num_blocks
    nB = spec.block_sizes[B - 1]
    pB = p + delta if i == B - 1 else p
    return delta / 2 * (nB**2 * pB**2 + nB * _var(pB))


def _scale_hypothesis(hypothesis: Hypothesis, alt_scale: str) -> Hypothesis:
    if alt_scale not in ALT_SCALES:
        raise InputError(f"alt_scale must be one of {ALT_SCALES}, got {alt_scale!r}")
    return Hypothesis.NULL if alt_scale == "null" else hypothesis


def _block_k0(spec: SbmSpec, i: int, stat: StatKind, hypothesis: Hypothesis, alt_scale: str) -> GumbelParams:
    p, hs, delta = spec.special_form()
    B, n = spec.num_blocks, spec.n
    ni = spec.block_sizes[i]
    a, b = gumbel_norm_constants(ni)
    C = variance_factor_k0(spec, i, stat, _scale_hypothesis(hypothesis, alt_scale))
    shifted = hypothesis is Hypothesis.ALT and i == B - 1
    nB = spec.block_sizes[B - 1]
    if stat is StatKind.PSI:
        sd = math.sqrt(C * n * _var(p))
        mu = a * sd + (nB * delta if shifted else 0.0)
        return GumbelParams(mu, b * sd)
    kappa = _var(p) * (1 - _var(p))
    sd = math.sqrt(C * n * kappa)
    xi = ni * (_var(hs[i - 1]) - _var(p)) if 0 < i < B - 1 else 0.0
    mu = a * sd + n * _var(p) + xi + (nB * delta * (1 - p) if shifted else 0.0)
    return GumbelParams(mu, b * sd)


def _build(spec: SbmSpec, stat: StatKind, k: int, block_fn) -> LimitModel:
    blocks = []
    for i in range(spec.num_blocks):
        null = block_fn(i, Hypothesis.NULL)
        alt = block_fn(i, Hypothesis.ALT)
        blocks.append(BlockLimit(i, null[0], alt[0], null[1], alt[1]))
    return LimitModel(stat=stat, k=k, blocks=tuple(blocks))


def _check_sizes(spec: SbmSpec) -> None:
    for i, ni in enumerate(spec.block_sizes):
        if ni < 2:
            raise InputError(f"block {i} has size {ni}; the Gumbel constants need size >= 2")


def limit_model_k0(spec: SbmSpec, stat: StatKind | str, alt_scale: str = "null") -> LimitModel:
    """Per-block Gumbel parameters of S_{1,0,0} under null and alternative."""
    stat = StatKind(stat)
    spec.special_form()
    _check_sizes(spec)

    def block(i, hyp):
        C = variance_factor_k0(spec, i, stat, _scale_hypothesis(hyp, alt_scale))
        return _block_k0(spec, i, stat, hyp, alt_scale), C

    return _build(spec, stat, 0, block)


def limit_model_k1(spec: SbmSpec, stat: StatKind | str, alt_scale: str = "null") -> LimitModel:
    """Per-block Gumbel parameters of S_{1,0,1} under null and alternative.

    Psi is available only for three blocks; Phi for any ``B >= 3``.
    """
    stat = StatKind(stat)
    p, hs, delta = spec.special_form()
    B, n = spec.num_blocks, spec.n
    if stat is StatKind.PSI and B != 3:
        raise ScopeError(f"the k=1 Psi limit is available only for 3 blocks, got B={B}")
    if B < 3:
        raise ScopeError(f"the k=1 limits need at least 3 blocks, got B={B}")
    _check_sizes(spec)

    if stat is StatKind.PSI:
        n2, h = spec.block_sizes[1], hs[0]
        n3 = spec.block_sizes[2]

        def block(i, hyp):
            base = _block_k0(spec, i, StatKind.PSI, hyp, alt_scale)
            kappa = n * p**2 + 1 + (n2 * p * (h - p) if i == 1 else 0.0)
            C = variance_factor_k0(spec, i, StatKind.PSI, _scale_hypothesis(hyp, alt_scale))
            if hyp is Hypothesis.NULL:
                return GumbelParams(base.mu * kappa, base.gamma * kappa), C
            mult = kappa + (n3 * p * delta / 2 if i == 2 else 0.0)
            return GumbelParams(base.mu * mult + _zeta(spec, i), base.gamma * mult), C

        return _build(spec, stat, 1, block)

    eta = p**3 * (1 - p)
    nB = spec.block_sizes[B - 1]

    def block(i, hyp):
        ni = spec.block_sizes[i]
        a, b = gumbel_norm_constants(ni)
        C = variance_factor_k1_phi(spec, i, _scale_hypothesis(hyp, alt_scale))
        sd = math.sqrt(C * n**2 * eta)
        xi = ni * (_var(hs[i - 1]) - _var(p)) if 0 < i < B - 1 else 0.0
        mu = a * sd + n * _var(p) + xi
        if hyp is Hypothesis.ALT:
            mu += (nB * delta * (1 - p) if i == B - 1 else 0.0) + _zeta(spec, i)
        return GumbelParams(mu, b * sd), C

    return _build(spec, stat, 1, block)


def limit_model(spec: SbmSpec, stat: StatKind | str, k: int, alt_scale: str = "null") -> LimitModel:
    if k == 0:
        return limit_model_k0(spec, stat, alt_scale)
    if k == 1:
        return limit_model_k1(spec, stat, alt_scale)
    raise ScopeError(f"no limit theory for k={k}")


def _log_cdf(model: LimitModel, hypothesis: Hypothesis, x: float) -> float:
    total = 0.0
    for block in model.blocks:
        g = block.params(hypothesis)
        z = -(x - g.mu) / g.gamma
        if z > 700:
            return -math.inf
        total -= math.exp(z)
    return total


def max_gumbel_cdf(model: LimitModel, hypothesis: Hypothesis | str, x: float) -> float:
    """CDF of the maximum of independent block Gumbels at ``x``."""
    return math.exp(_log_cdf(model, Hypothesis(hypothesis), x))


def max_gumbel_quantile(
    model: LimitModel, hypothesis: Hypothesis | str, prob: float, tol: float = 1e-12
) -> float:
    """Solve ``max_gumbel_cdf(x) = prob`` by bisection."""
    hypothesis = Hypothesis(hypothesis)
    if not 0 < prob < 1:
        raise InputError(f"probability must lie in (0, 1), got {prob}")
    params = [b.params(hypothesis) for b in model.blocks]
    width = max(g.gamma for g in params)
    lo = min(g.mu for g in params) - width
    hi = max(g.mu for g in params) + width
    while max_gumbel_cdf(model, hypothesis, lo) > prob:
        lo -= 2 * (hi - lo)
    while max_gumbel_cdf(model, hypothesis, hi) < prob:
        hi += 2 * (hi - lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        f = max_gumbel_cdf(model, hypothesis, mid)
        if abs(f - prob) < tol:
            return mid
        if f < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(abs(mid) + 1.0):
            break
    return 0.5 * (lo + hi)


def power_large_sample(model: LimitModel, alpha: float) -> float:
    """Probability the alternative maximum exceeds the null ``1 - alpha`` quantile."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    crit = max_gumbel_quantile(model, Hypothesis.NULL, 1 - alpha)
    beta = 1 - max_gumbel_cdf(model, Hypothesis.ALT, crit)
    return min(1.0, max(0.0, beta))


def chatter_block_sizes(n: int, sizing_constant: float) -> tuple[int, int, int]:
    """``n_2 = n_3 = round(c * sqrt(n log n))`` and ``n_1`` the remainder."""
    m = int(round(sizing_constant * math.sqrt(n * math.log(n))))
    if m < 2 or n - 2 * m < 2:
        raise InputError(f"sizing constant {sizing_constant} gives unusable blocks for n={n}")
    return n - 2 * m, m, m


@dataclass(frozen=True)
class Heatmap:
    h: np.ndarray
    q: np.ndarray
    beta_psi: np.ndarray
    beta_phi: np.ndarray

    @property
    def diff(self) -> np.ndarray:
        return self.beta_psi - self.beta_phi

    def cell(self, h: float, q: float) -> float:
        i = int(np.argmin(np.abs(self.h - h)))
        j = int(np.argmin(np.abs(self.q - q)))
        if not (math.isclose(self.h[i], h) and math.isclose(self.q[j], q)):
            raise KeyError((h, q))
        return float(self.diff[i, j])

    def rows(self):
        diff = self.diff
        for i, h in enumerate(self.h):
            for j, q in enumerate(self.q):
                yield {
                    "h": float(h),
                    "q": float(q),
                    "beta_psi": float(self.beta_psi[i, j]),
                    "beta_phi": float(self.beta_phi[i, j]),
                    "diff": float(diff[i, j]),
                }

    def write_csv(self, stream) -> None:
        writer = csv.DictWriter(stream, fieldnames=["h", "q", "beta_psi", "beta_phi", "diff"], lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({key: repr(value) for key, value in row.items()})


def heatmap_beta_diff(
    p: float,
    h_grid: Sequence[float],
    q_grid: Sequence[float],
    n: int,
    alpha: float = 0.05,
    sizing_constant: float = 1.0,
    alt_scale: str = "null",
) -> Heatmap:
    """Theoretical ``beta_Psi - beta_Phi`` of S_{1,0,0} over an ``(h, q)`` grid."""
    h_grid = np.asarray(h_grid, dtype=float)
    q_grid = np.asarray(q_grid, dtype=float)
    for name, grid in (("h", h_grid), ("q", q_grid)):
        if grid.size == 0 or np.any(grid <= p) or np.any(grid >= 1):
            raise InputError(f"every {name} value must lie in (p, 1) = ({p}, 1)")
    sizes = chatter_block_sizes(n, sizing_constant)
    beta_psi = np.empty((h_grid.size, q_grid.size))
    beta_phi = np.empty_like(beta_psi)
    for i, h in enumerate(h_grid):
        for j, q in enumerate(q_grid):
            spec = SbmSpec.chatter(sizes, p, h, q=q)
            beta_psi[i, j] = power_large_sample(limit_model_k0(spec, StatKind.PSI, alt_scale), alpha)
            beta_phi[i, j] = power_large_sample(limit_model_k0(spec, StatKind.PHI, alt_scale), alpha)
    return Heatmap(h_grid, q_grid, beta_psi, beta_phi)


# ---------------------------------------------------------------------------
# Asymptotic regime classification


class Order(str, enum.Enum):
    """Asymptotic order of one size relative to another."""

    LITTLE_O = "o"
    THETA = "Theta"
    LITTLE_OMEGA = "omega"

    @property
    def is_big_omega(self) -> bool:
        return self is not Order.LITTLE_O


@dataclass(frozen=True)
class Relation:
    """How a power compares with alpha.

    ``kind`` is ``"equals_alpha"``, ``"exceeds_alpha"`` or ``"conditional"``.
    A conditional relation holds ``if_true`` when ``condition`` holds and
    ``if_false`` otherwise.
    """

    kind: str
    condition: str | None = None
    if_true: str | None = None
    if_false: str | None = None

    def resolve(self, holds: bool) -> Relation:
        if self.kind != "conditional":
            return self
        return Relation(self.if_true if holds else self.if_false)


EQUALS = Relation("equals_alpha")
EXCEEDS = Relation("exceeds_alpha")


@dataclass(frozen=True)
class RegimeVerdict:
    psi: Relation | None
    phi: Relation | None
    cases: tuple[int, ...]
    phi_dominates: bool = False
    psi_inadmissible: bool = False


def _order(x) -> Order:
    try:
        return Order(x)
    except ValueError:
        raise InputError(f"unknown order {x!r}; use one of {[o.value for o in Order]}") from None


def classify_regime_k0(
    n3_vs_sqrt_n,
    n3_vs_n2=None,
    *,
    h: float | None = None,
    p: float | None = None,
    ratio_limit: float | None = None,
) -> RegimeVerdict:
    """Power of S_{1,0,0}(Psi) and S_{1,0,0}(Phi) relative to alpha for three blocks.

    ``n3_vs_sqrt_n`` orders the changing block against ``sqrt(n)``;
    ``n3_vs_n2`` orders it against the chatty block and is needed only for
    Phi. The Phi verdict is conditional on ``lim n2 (h(1-h) - p(1-p)) /
    (n3 delta (1-p))`` when ``n3 = omega(sqrt n) = Theta(n2)``, and on
    ``h + p`` when ``n3 = Omega(sqrt n) = o(n2)``; pass ``ratio_limit`` or
    ``h`` and ``p`` to resolve those.
    """
    sq = _order(n3_vs_sqrt_n)
    if sq is Order.LITTLE_O:
        return RegimeVerdict(psi=EQUALS, phi=EQUALS, cases=(1,))
    psi = EXCEEDS
    if n3_vs_n2 is None:
        return RegimeVerdict(psi=psi, phi=None, cases=(2,))
    n2o = _order(n3_vs_n2)
    if n2o is Order.THETA and sq is Order.THETA:
        return RegimeVerdict(psi=psi, phi=EXCEEDS, cases=(2, 3))
    if n2o is Order.THETA:
        phi = Relation(
            "conditional",
            condition="lim n2*(h*(1-h) - p*(1-p)) / (n3*delta*(1-p)) > 1",
            if_true="equals_alpha",
            if_false="exceeds_alpha",
        )
        if ratio_limit is not None:
            phi = phi.resolve(ratio_limit > 1)
        return RegimeVerdict(psi=psi, phi=phi, cases=(2, 4))
    if n2o is Order.LITTLE_OMEGA:
        return RegimeVerdict(psi=psi, phi=EXCEEDS, cases=(2, 5))
    phi = Relation("conditional", condition="h + p < 1", if_true="equals_alpha", if_false="exceeds_alpha")
    if h is not None and p is not None:
        phi = phi.resolve(h + p < 1)
    return RegimeVerdict(psi=psi, phi=phi, cases=(2, 6))


def classify_regime_k1(n3_vs_sqrt_n, block_orders: Sequence[str] | None = None) -> RegimeVerdict:
    """Power of S_{1,0,1}(Psi) and S_{1,0,1}(Phi) relative to alpha.

    ``phi_dominates`` reports ``beta'_Phi >= beta'_Psi``. When
    ``block_orders`` says the first block is ``Theta(n)`` and all others
    ``o(n)``, Psi is flagged inadmissible.
    """
    sq = _order(n3_vs_sqrt_n)
    inadmissible = False
    if block_orders is not None:
        orders = [_order(o) for o in block_orders]
        if len(orders) < 3:
            raise InputError("block_orders needs one entry per block, at least three")
        inadmissible = orders[0] is Order.THETA and all(o is Order.LITTLE_O for o in orders[1:])
    if sq is Order.LITTLE_O:
        return RegimeVerdict(psi=EQUALS, phi=EQUALS, cases=(1,), phi_dominates=True, psi_inadmissible=inadmissible)
    return RegimeVerdict(psi=EXCEEDS, phi=EXCEEDS, cases=(2,), phi_dominates=True, psi_inadmissible=inadmissible)


def classify_regime(k: int, *args, **kwargs) -> RegimeVerdict:
    """Dispatch to :func:`classify_regime_k0` or :func:`classify_regime_k1`."""
    if k == 0:
        return classify_regime_k0(*args, **kwargs)
    if k == 1:
        return classify_regime_k1(*args, **kwargs)
    raise ScopeError(f"regime results exist only for k in {{0, 1}}, got k={k}")
