from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from locscan.errors import InputError, ScopeError
from locscan.generators import SbmSpec
from locscan.limit_theory import (
    EXCEEDS,
    EQUALS,
    BlockLimit,
    GumbelParams,
    Hypothesis,
    LimitModel,
    chatter_block_sizes,
    classify_regime,
    gumbel_norm_constants,
    heatmap_beta_diff,
    limit_model,
    limit_model_k0,
    limit_model_k1,
    max_gumbel_cdf,
    max_gumbel_quantile,
    power_large_sample,
    variance_factor_k0,
)
from locscan.locality import StatKind

DESIGN = SbmSpec.chatter((870, 65, 65), 0.43, 0.95, q=0.98)


def chatter(sizes=(870, 65, 65), p=0.43, h=0.95, q=0.98):
    return SbmSpec.chatter(sizes, p, h, q=q)


def one_block_model(mu=0.0, gamma=1.0, copies=1, shift=0.0):
    blocks = tuple(
        BlockLimit(i, GumbelParams(mu, gamma), GumbelParams(mu + shift, gamma), 1.0, 1.0) for i in range(copies)
    )
    return LimitModel(StatKind.PSI, 0, blocks)


class TestNormConstants:
    def test_m15(self):
        a, b = gumbel_norm_constants(15)
        log_m = math.log(15)
        assert math.isclose(math.log(log_m), 0.996, abs_tol=1e-3)
        assert math.isclose(b, 0.4296, abs_tol=1e-4)
        assert math.isfinite(a) and a > 0

    def test_monotone_scale(self):
        assert gumbel_norm_constants(100)[1] > gumbel_norm_constants(1000)[1]

    def test_bracket_at_1000(self):
        # hand value: 1 - (1.93264 + 2.53102) / (4 * 6.90776) = 0.83846
        a, _ = gumbel_norm_constants(1000)
        ratio = a / math.sqrt(2 * math.log(1000))
        assert abs(ratio - 0.83846) < 1e-5
        assert abs(ratio - 1) < 0.17

    def test_small_m(self):
        with pytest.raises(InputError):
            gumbel_norm_constants(1)

    def test_against_normal_maxima(self):
        # (max of m standard normals - a_m) / b_m is roughly standard Gumbel
        rng = np.random.default_rng(0)
        m = 2000
        a, b = gumbel_norm_constants(m)
        z = (rng.standard_normal((4000, m)).max(axis=1) - a) / b
        assert abs(np.median(z) - (-math.log(math.log(2)))) < 0.25


class TestK0Model:
    @pytest.mark.parametrize("stat", ["psi", "phi"])
    def test_null_equals_alt_without_change(self, stat):
        model = limit_model_k0(chatter(q=0.43), stat)
        assert all(b.null_params == b.alt_params for b in model.blocks)

    def test_psi_shift_only_in_last_block(self):
        spec = chatter()
        model = limit_model_k0(spec, "psi", alt_scale="own")
        p, delta = 0.43, 0.98 - 0.43
        for b in model.blocks[:2]:
            assert b.null_params == b.alt_params
        last = model.blocks[2]
        a, _ = gumbel_norm_constants(65)
        spread = a * math.sqrt(last.alt_C * spec.n * p * (1 - p))
        assert math.isclose(last.alt_params.mu - spread, 65 * delta, rel_tol=1e-12)

    def test_phi_shift_and_offset(self):
        spec = chatter()
        model = limit_model_k0(spec, "phi", alt_scale="own")
        p, delta, n = 0.43, 0.55, spec.n
        kappa = p * (1 - p) * (1 - p * (1 - p))
        a, _ = gumbel_norm_constants(65)
        last = model.blocks[2]
        base = a * math.sqrt(last.alt_C * n * kappa) + n * p * (1 - p)
        assert math.isclose(last.alt_params.mu - base, 65 * delta * (1 - p), rel_tol=1e-12)

    @pytest.mark.parametrize("stat", ["psi", "phi"])
    @pytest.mark.parametrize("k", [0, 1])
    def test_default_alt_keeps_null_scale(self, stat, k):
        shifts = {0: {"psi": 65 * 0.55, "phi": 65 * 0.55 * 0.57}}
        model = limit_model(DESIGN, stat, k)
        n, p, n3, delta = 1000, 0.43, 65, 0.55
        kappa = n * p**2 + 1
        for b in model.blocks:
            ratio = 1.0
            if (k, stat, b.block) == (1, "psi", 2):
                # the k=1 Psi alternative multiplies the last block's scale
                ratio = (kappa + n3 * p * delta / 2) / kappa
            assert b.alt_params.gamma == pytest.approx(ratio * b.null_params.gamma, rel=1e-12)
            assert b.alt_C == b.null_C
        if k == 0:
            last = model.blocks[2]
            assert last.alt_params.mu - last.null_params.mu == pytest.approx(shifts[0][stat], rel=1e-12)

    def test_own_alt_scale(self):
        own = limit_model_k0(DESIGN, "psi", alt_scale="own").blocks[2]
        assert own.alt_C < own.null_C and own.alt_params.gamma < own.null_params.gamma
        with pytest.raises(InputError):
            limit_model_k0(DESIGN, "psi", alt_scale="mixed")

    def test_phi_middle_offset_positive_when_h_plus_p_below_one(self):
        spec = SbmSpec.chatter((800, 100, 100), 0.2, 0.5, q=0.6)
        model = limit_model_k0(spec, "phi")
        kappa = 0.2 * 0.8 * (1 - 0.16)
        a, _ = gumbel_norm_constants(100)
        mid = model.blocks[1]
        xi = mid.null_params.mu - a * math.sqrt(mid.null_C * 1000 * kappa) - 1000 * 0.16
        assert xi > 0
        assert math.isclose(xi, 100 * ((0.5 - 0.2) * (1 - 0.5 - 0.2)), rel_tol=1e-9)

    def test_variance_factor_psi_null_homogeneous(self):
        # one block with p everywhere: C = 2(n - n_i)/n + 2(n_i - 1)/n
        spec = SbmSpec.chatter((50, 30, 20), 0.3, 0.3, q=0.3)
        for i, ni in enumerate(spec.block_sizes):
            want = 2 * (100 - ni) / 100 + 2 * (ni - 1) / 100
            assert math.isclose(variance_factor_k0(spec, i, StatKind.PSI, "null"), want)

    def test_variance_factor_matches_simulation(self):
        # variance of deg_t(v) - deg_{t-1}(v) for a block-B vertex under the alternative
        spec = SbmSpec.chatter((300, 40, 60), 0.3, 0.8, q=0.9)
        rng = np.random.default_rng(4)
        n, nB, p, q = 400, 60, 0.3, 0.9
        reps = 20000
        now = rng.binomial(n - nB, p, reps) + rng.binomial(nB - 1, q, reps)
        before = rng.binomial(n - nB, p, reps) + rng.binomial(nB - 1, p, reps)
        emp = np.var(now - before) / (n * p * (1 - p))
        want = variance_factor_k0(spec, 2, StatKind.PSI, "alt")
        assert abs(emp / want - 1) < 0.05

    def test_not_special_form(self):
        P = np.array([[0.2, 0.3], [0.3, 0.2]])
        with pytest.raises(InputError):
            limit_model_k0(SbmSpec((10, 10), P, P), "psi")

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(0.05, 0.6),
        st.floats(0.0, 0.35),
        st.floats(0.0, 0.35),
        st.integers(10, 200),
        st.integers(10, 200),
        st.sampled_from(["psi", "phi"]),
    )
    def test_scales_positive(self, p, dh, dq, n2, n3, stat):
        spec = SbmSpec.chatter((500, n2, n3), p, p + dh, q=p + dq)
        for b in limit_model_k0(spec, stat).blocks:
            assert b.null_params.gamma > 0 and b.alt_params.gamma > 0


class TestK1Model:
    def test_scope(self):
        with pytest.raises(ScopeError):
            limit_model_k1(SbmSpec.chatter((50, 10, 10, 10), 0.3, 0.5, q=0.6), "psi")
        with pytest.raises(ScopeError):
            limit_model_k1(SbmSpec.chatter((50, 10), 0.3, q=0.6), "phi")
        with pytest.raises(ScopeError):
            limit_model(DESIGN, "phi", 2)
        assert len(limit_model_k1(SbmSpec.chatter((60, 10, 10, 10), 0.3, 0.5, q=0.6), "phi").blocks) == 4

    @pytest.mark.parametrize("stat", ["psi", "phi"])
    def test_null_equals_alt_without_change(self, stat):
        model = limit_model_k1(chatter(q=0.43), stat)
        assert all(b.null_params == b.alt_params for b in model.blocks)

    def test_psi_first_block_multiplier(self):
        spec = chatter()
        base = limit_model_k0(spec, "psi").blocks[0].null_params
        primed = limit_model_k1(spec, "psi").blocks[0].null_params
        kappa = spec.n * 0.43**2 + 1
        assert math.isclose(primed.mu / base.mu, kappa)
        assert math.isclose(primed.gamma / base.gamma, kappa)

    def test_zeta_outside_changed_block(self):
        # for Psi, block 1 has identical null and alt k=0 parameters, so the
        # whole alt - null gap at k=1 is zeta
        spec = chatter()
        block = limit_model_k1(spec, "psi").blocks[0]
        p, d, n3 = 0.43, 0.55, 65
        zeta = d / 2 * (n3**2 * p**2 + n3 * p * (1 - p))
        assert math.isclose(block.alt_params.mu - block.null_params.mu, zeta, rel_tol=1e-12)

    def test_phi_general_blocks_positive(self):
        spec = SbmSpec.chatter((700, 100, 100, 100), 0.3, (0.6, 0.7), q=0.5)
        for b in limit_model_k1(spec, "phi").blocks:
            assert b.null_params.gamma > 0 and b.alt_C > 0


class TestMaxCdfAndPower:
    def test_cdf_limits(self):
        model = limit_model_k0(DESIGN, "phi")
        assert max_gumbel_cdf(model, "null", -1e6) == 0.0
        assert max_gumbel_cdf(model, "alt", 1e9) == 1.0

    def test_single_and_double_block(self):
        assert math.isclose(max_gumbel_cdf(one_block_model(3.0, 2.0), "null", 3.0), math.exp(-1))
        assert math.isclose(max_gumbel_cdf(one_block_model(3.0, 2.0, copies=2), "null", 3.0), math.exp(-2))

    def test_cdf_matches_product_oracle(self):
        model = limit_model_k0(DESIGN, "psi")
        for x in (40.0, 70.0, 95.0):
            want = math.prod(oracles.gumbel_cdf(x, b.alt_params.mu, b.alt_params.gamma) for b in model.blocks)
            assert math.isclose(max_gumbel_cdf(model, Hypothesis.ALT, x), want, rel_tol=1e-12)

    def test_quantile_inverts_cdf(self):
        model = limit_model_k0(DESIGN, "psi")
        for prob in (0.01, 0.5, 0.95, 0.999):
            x = max_gumbel_quantile(model, "null", prob)
            assert abs(max_gumbel_cdf(model, "null", x) - prob) < 1e-12
        with pytest.raises(InputError):
            max_gumbel_quantile(model, "null", 1.0)

    def test_no_change_gives_alpha(self):
        for stat in ("psi", "phi"):
            for k in (0, 1):
                assert abs(power_large_sample(limit_model(chatter(q=0.43), stat, k), 0.05) - 0.05) < 1e-9

    def test_large_shift_full_power(self):
        assert power_large_sample(one_block_model(0.0, 1.0, copies=3, shift=10.0), 0.05) > 0.999

    def test_bad_alpha(self):
        with pytest.raises(InputError):
            power_large_sample(one_block_model(), 0.0)

    @pytest.mark.parametrize("stat,k", [("psi", 0), ("phi", 0), ("psi", 1), ("phi", 1)])
    def test_monotone_in_delta(self, stat, k):
        betas = [power_large_sample(limit_model(chatter(q=q), stat, k), 0.05) for q in np.linspace(0.43, 0.7, 12)]
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(betas, betas[1:]))


class TestHeatmap:
    def test_sizing(self):
        assert chatter_block_sizes(1000, 1.0) == (834, 83, 83)
        with pytest.raises(InputError):
            chatter_block_sizes(1000, 20.0)

    def test_grid_bounds(self):
        with pytest.raises(InputError):
            heatmap_beta_diff(0.43, [0.4], [0.9], 1000)
        with pytest.raises(InputError):
            heatmap_beta_diff(0.43, [0.9], [1.0], 1000)

    def test_near_diagonal_small(self):
        hm = heatmap_beta_diff(0.43, [0.44, 0.6, 0.9], [0.44], 1000)
        assert np.all(np.abs(hm.diff) < 0.01)
        assert np.all(hm.beta_psi < 0.1) and np.all(hm.beta_phi < 0.1)

    def test_csv(self):
        hm = heatmap_beta_diff(0.43, [0.6, 0.9], [0.7, 0.95], 500)
        buf = io.StringIO()
        hm.write_csv(buf)
        rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
        assert list(rows[0]) == ["h", "q", "beta_psi", "beta_phi", "diff"] and len(rows) == 4
        for row in rows:
            assert math.isclose(float(row["diff"]), float(row["beta_psi"]) - float(row["beta_phi"]))
        assert hm.cell(0.9, 0.95) == pytest.approx(hm.diff[1, 1])
        with pytest.raises(KeyError):
            hm.cell(0.5, 0.95)


class TestRegimes:
    """Golden table of the three-block asymptotic power relations."""

    def test_k0_case1(self):
        v = classify_regime(0, "o", "Theta")
        assert (v.psi, v.phi, v.cases) == (EQUALS, EQUALS, (1,))

    def test_k0_case2(self):
        v = classify_regime(0, "omega")
        assert v.psi == EXCEEDS and v.phi is None and v.cases == (2,)

    def test_k0_case3(self):
        v = classify_regime(0, "Theta", "Theta")
        assert (v.psi, v.phi, v.cases) == (EXCEEDS, EXCEEDS, (2, 3))

    def test_k0_case4(self):
        v = classify_regime(0, "omega", "Theta")
        assert v.cases == (2, 4) and v.psi == EXCEEDS
        assert v.phi.kind == "conditional"
        assert v.phi.condition == "lim n2*(h*(1-h) - p*(1-p)) / (n3*delta*(1-p)) > 1"
        assert (v.phi.if_true, v.phi.if_false) == ("equals_alpha", "exceeds_alpha")
        assert classify_regime(0, "omega", "Theta", ratio_limit=2.0).phi == EQUALS
        assert classify_regime(0, "omega", "Theta", ratio_limit=1.0).phi == EXCEEDS

    @pytest.mark.parametrize("sq", ["Theta", "omega"])
    def test_k0_case5(self, sq):
        v = classify_regime(0, sq, "omega")
        assert (v.psi, v.phi, v.cases) == (EXCEEDS, EXCEEDS, (2, 5))

    @pytest.mark.parametrize("sq", ["Theta", "omega"])
    def test_k0_case6(self, sq):
        v = classify_regime(0, sq, "o")
        assert v.cases == (2, 6) and v.phi.condition == "h + p < 1"
        assert classify_regime(0, sq, "o", h=0.5, p=0.3).phi == EQUALS
        assert classify_regime(0, sq, "o", h=0.95, p=0.43).phi == EXCEEDS
        assert classify_regime(0, sq, "o", h=0.57, p=0.43).phi == EXCEEDS

    def test_k1_case1(self):
        v = classify_regime(1, "o")
        assert (v.psi, v.phi, v.cases, v.phi_dominates) == (EQUALS, EQUALS, (1,), True)

    def test_k1_case2(self):
        v = classify_regime(1, "Theta")
        assert (v.psi, v.phi, v.cases, v.phi_dominates) == (EXCEEDS, EXCEEDS, (2,), True)

    def test_k1_inadmissible(self):
        assert classify_regime(1, "omega", ["Theta", "o", "o", "o"]).psi_inadmissible
        assert not classify_regime(1, "omega", ["Theta", "Theta", "o"]).psi_inadmissible

    def test_errors(self):
        with pytest.raises(InputError):
            classify_regime(0, "big")
        with pytest.raises(ScopeError):
            classify_regime(2, "o")
        with pytest.raises(InputError):
            classify_regime(1, "o", ["Theta", "o"])
