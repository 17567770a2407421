import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from wilddistort.errors import ParameterError
from wilddistort.fusion import (
    IntsigScores,
    PrismInputs,
    RapidScores,
    TtaBundle,
    aggregate_tta,
    average_probs,
    clamp_probability,
    flattened_intsig_weights,
    intsig_fuse,
    logit,
    prism_predict,
    prism_weights,
    rapid_cascade,
    sigmoid,
    weighted_expert_average,
)

mpmath.mp.dps = 50


def mp_logit(p):
    p = mpmath.mpf(p)
    return mpmath.log(p / (1 - p))


def mp_sigmoid(x):
    return 1 / (1 + mpmath.exp(-mpmath.mpf(x)))


def rapid_oracle(g4, s, r, e, ef, g4v2) -> float:
    """Independent four-stage evaluation in 50-digit arithmetic."""
    s1a = mp_sigmoid(mpmath.mpf("0.50") * mp_logit(g4)
                     + mpmath.mpf("0.35") * mp_logit(s)
                     + mpmath.mpf("0.15") * mp_logit(r))
    b = mp_sigmoid(mpmath.mpf("0.80") * mp_logit(s1a) + mpmath.mpf("0.20") * mp_logit(e))
    s2 = mp_sigmoid(mpmath.mpf("0.85") * mp_logit(b) + mpmath.mpf("0.15") * mp_logit(ef))
    f = mp_sigmoid(mpmath.mpf("0.89") * mp_logit(s2) + mpmath.mpf("0.11") * mp_logit(g4v2))
    return float(f)


def test_logit_symmetry_and_roundtrip():
    assert logit(0.5) == 0.0
    for p in (0.01, 0.2, 0.5, 0.9, 0.999):
        assert sigmoid(logit(p)) == pytest.approx(p, abs=1e-12)


def test_logit_high_precision_oracle():
    expected = float(mpmath.log(mpmath.mpf("0.73") / mpmath.mpf("0.27")))
    assert logit(0.73) == pytest.approx(expected, abs=1e-15)


def test_logit_finite_after_clamping():
    assert math.isfinite(logit(0.0))
    assert math.isfinite(logit(1.0))
    assert clamp_probability(-5.0) == 1e-7
    assert clamp_probability(5.0) == 1.0 - 1e-7


def test_rapid_all_half_fixed_point():
    result = rapid_cascade(RapidScores(0.5, 0.5, 0.5, 0.5, 0.5, 0.5))
    for stage in (result.s1a, result.b, result.s2, result.f):
        assert stage == pytest.approx(0.5, abs=1e-12)


def test_rapid_stage_weights_sum_to_one():
    from wilddistort.fusion import (
        RAPID_STAGE1, RAPID_STAGE2, RAPID_STAGE3, RAPID_STAGE4,
    )
    assert sum(RAPID_STAGE1) == pytest.approx(1.0, abs=1e-12)
    assert sum(RAPID_STAGE2) == pytest.approx(1.0, abs=1e-12)
    assert sum(RAPID_STAGE3) == pytest.approx(1.0, abs=1e-12)
    assert sum(RAPID_STAGE4) == pytest.approx(1.0, abs=1e-12)
    assert RAPID_STAGE1 == (0.50, 0.35, 0.15)


def test_rapid_matches_high_precision_oracle():
    inputs = (0.9, 0.8, 0.7, 0.6, 0.55, 0.65)
    assert rapid_cascade(RapidScores(*inputs)).f == pytest.approx(
        rapid_oracle(*inputs), abs=1e-12)
    rng = np.random.default_rng(5)
    for _ in range(200):
        probs = rng.uniform(0.01, 0.99, 6)
        assert rapid_cascade(RapidScores(*probs)).f == pytest.approx(
            rapid_oracle(*probs), abs=1e-10)


def test_rapid_monotone_in_each_branch():
    rng = np.random.default_rng(8)
    for _ in range(50):
        base = rng.uniform(0.05, 0.95, 6)
        f0 = rapid_cascade(RapidScores(*base)).f
        for i in range(6):
            bumped = base.copy()
            bumped[i] = min(0.999, bumped[i] + 0.02)
            assert rapid_cascade(RapidScores(*bumped)).f >= f0 - 1e-12


def test_rapid_all_equal_fixed_point():
    rng = np.random.default_rng(11)
    for _ in range(100):
        v = float(rng.uniform(0.01, 0.99))
        assert rapid_cascade(RapidScores(v, v, v, v, v, v)).f == pytest.approx(
            v, abs=1e-9)


def test_intsig_flattened_weights_match_published_table():
    weights = flattened_intsig_weights()
    published = (0.3675, 0.0735, 0.0490, 0.2100, 0.3000)
    for got, want in zip(weights, published):
        assert got == pytest.approx(want, abs=1e-6)
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)
    assert 0.7 * 0.7 * 0.75 == pytest.approx(0.3675, abs=1e-12)


def test_intsig_identical_inputs_fixed_point():
    rng = np.random.default_rng(2)
    for _ in range(100):
        l0, l1 = rng.normal(size=2)
        same = (float(l0), float(l1))
        result = intsig_fuse(IntsigScores(same, same, same, same, same))
        assert result.logit0 == pytest.approx(l0, abs=1e-12)
        assert result.logit1 == pytest.approx(l1, abs=1e-12)
        assert not result.gate1_fired and not result.gate2_fired


def test_intsig_linear_without_gates():
    rng = np.random.default_rng(3)
    for _ in range(50):
        s1 = rng.normal(size=(5, 2))
        s2 = rng.normal(size=(5, 2))
        a, b = rng.normal(size=2)
        mix = a * s1 + b * s2
        fused1 = intsig_fuse(IntsigScores(*map(tuple, s1)), gates_enabled=False)
        fused2 = intsig_fuse(IntsigScores(*map(tuple, s2)), gates_enabled=False)
        fused_mix = intsig_fuse(IntsigScores(*map(tuple, mix)), gates_enabled=False)
        assert fused_mix.logit0 == pytest.approx(a * fused1.logit0 + b * fused2.logit0,
                                                 abs=1e-9)
        assert fused_mix.logit1 == pytest.approx(a * fused1.logit1 + b * fused2.logit1,
                                                 abs=1e-9)


def _scores_from_diffs(d1, d2, d3, d4, d5):
    return IntsigScores(*[(0.0, float(d)) for d in (d1, d2, d3, d4, d5)])


def test_gate1_fires_with_published_shift():
    # M4/M5 strongly agree (+9, +3.5) while the fused diff is -0.4:
    # Gate-1 shifts the diff by +2.5 to 2.1. d3 is chosen positive so that
    # only two committee members oppose M4 and Gate-2 stays quiet.
    w = flattened_intsig_weights()
    d1, d2, d4, d5 = -10.0, -5.0, 9.0, 3.5
    d3 = (-0.4 - (w[0] * d1 + w[1] * d2 + w[3] * d4 + w[4] * d5)) / w[2]
    assert d3 > 0
    scores = _scores_from_diffs(d1, d2, d3, d4, d5)
    unfused = intsig_fuse(scores, gates_enabled=False)
    assert unfused.diff == pytest.approx(-0.4, abs=1e-9)
    result = intsig_fuse(scores)
    assert result.gate1_fired and not result.gate2_fired
    assert result.diff == pytest.approx(-0.4 + 2.5, abs=1e-9)
    assert result.diff == pytest.approx(2.1, abs=1e-9)


def test_gate1_direction_follows_m4_sign():
    w = flattened_intsig_weights()
    d1, d2, d4, d5 = 10.0, 5.0, -9.0, -3.5
    d3 = (0.4 - (w[0] * d1 + w[1] * d2 + w[3] * d4 + w[4] * d5)) / w[2]
    result = intsig_fuse(_scores_from_diffs(d1, d2, d3, d4, d5))
    assert result.gate1_fired and not result.gate2_fired
    assert result.diff == pytest.approx(0.4 - 2.5, abs=1e-9)


def test_gate2_fires_and_renormalizes_bracket():
    # Committee {M1,M2,M3,M5} all agree (+2) while M4 says -5 but is not
    # strong enough for Gate-1: M4 is dropped and its bracket mass returns
    # to the inner committee, leaving diff = 0.7*2 + 0.3*2 = 2.
    scores = _scores_from_diffs(2.0, 2.0, 2.0, -5.0, 2.0)
    without = intsig_fuse(scores, gates_enabled=False)
    assert without.diff == pytest.approx(0.49 * 2 + 0.21 * -5 + 0.3 * 2, abs=1e-12)
    result = intsig_fuse(scores)
    assert result.gate2_fired and not result.gate1_fired
    assert result.diff == pytest.approx(2.0, abs=1e-12)


def test_both_gates_fire_in_order():
    # Gate-2 drops M4 (three committee members oppose it), then Gate-1
    # still finds M4/M5 strongly agreeing against the recomputed diff.
    d = -6.8163265306122449
    scores = _scores_from_diffs(d, d, d, 9.0, 3.5)
    result = intsig_fuse(scores)
    assert result.gate2_fired and result.gate1_fired
    recomputed = 0.7 * d + 0.3 * 3.5
    assert result.diff == pytest.approx(recomputed + 2.5, abs=1e-9)


def test_gates_silent_when_all_agree():
    result = intsig_fuse(_scores_from_diffs(4.0, 3.0, 5.0, 9.0, 3.5))
    assert not result.gate1_fired and not result.gate2_fired


def test_gate1_never_fires_when_fused_matches_m4():
    rng = np.random.default_rng(10)
    for _ in range(300):
        scores = IntsigScores(*map(tuple, rng.normal(scale=4.0, size=(5, 2))))
        result = intsig_fuse(scores)
        if result.gate1_fired:
            pre = intsig_fuse(scores, gates_enabled=False)
            d4 = scores.diff(4)
            base = pre.diff if not result.gate2_fired else result.diff - math.copysign(
                2.5, d4)
            assert base * d4 < 0


def test_gates_change_output_only_when_predicates_hold():
    rng = np.random.default_rng(12)
    changed = 0
    for _ in range(300):
        scores = IntsigScores(*map(tuple, rng.normal(scale=3.0, size=(5, 2))))
        on = intsig_fuse(scores, gates_enabled=True)
        off = intsig_fuse(scores, gates_enabled=False)
        fired = on.gate1_fired or on.gate2_fired
        differs = abs(on.diff - off.diff) > 1e-12 or abs(on.logit0 - off.logit0) > 1e-12
        assert fired == differs
        changed += int(differs)
    assert changed > 0  # the sample actually exercises the gates


def test_prism_weights_normalization():
    assert prism_weights([0.5, 0.5, 0.5, 0.5]) == pytest.approx([0.25] * 4, abs=1e-15)
    weights = prism_weights([0.9, 0.8, 0.7])
    oracle = [Fraction(9, 24), Fraction(8, 24), Fraction(7, 24)]
    for got, want in zip(weights, oracle):
        assert got == pytest.approx(float(want), abs=1e-12)
    assert weights[0] == pytest.approx(0.375, abs=1e-12)
    assert weights[1] == pytest.approx(1 / 3, abs=1e-12)
    assert weights[2] == pytest.approx(0.2916666666666667, abs=1e-12)
    assert math.fsum(weights) == pytest.approx(1.0, abs=1e-12)


def test_prism_weights_scale_invariance():
    rng = np.random.default_rng(4)
    aucs = rng.uniform(0.5, 1.0, 7)
    base = prism_weights(aucs)
    for c in (0.1, 2.0, 37.5):
        scaled = prism_weights(c * aucs)
        assert scaled == pytest.approx(base, abs=1e-12)


def test_prism_weight_errors():
    with pytest.raises(ParameterError):
        prism_weights([])
    with pytest.raises(ParameterError):
        prism_weights([0.9, 0.0])


def test_prism_flip_tta_fixed_point():
    inp = PrismInputs(probs=(0.6, 0.6, 0.6), flip_probs=(0.6, 0.6, 0.6),
                      robust_aucs=(0.9, 0.7, 0.8))
    assert prism_predict(inp) == pytest.approx(0.6, abs=1e-12)


def test_prism_predict_formula():
    inp = PrismInputs(probs=(1.0, 0.0), flip_probs=(0.0, 1.0),
                      robust_aucs=(0.75, 0.25))
    # 0.5*[(0.75*1 + 0.25*0) + (0.75*0 + 0.25*1)] = 0.5
    assert prism_predict(inp) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ParameterError):
        PrismInputs(probs=(0.5,), flip_probs=(), robust_aucs=(0.9,))


def test_average_probs():
    assert average_probs([0.2, 0.8]) == 0.5
    assert average_probs([0.123]) == 0.123
    assert average_probs([0.1, 0.2, 0.7]) == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(ParameterError):
        average_probs([])


def test_aggregate_tta_rules():
    same = TtaBundle(views=(0.7, 0.7, 0.7), head_type="sigmoid-head")
    assert aggregate_tta(same) == pytest.approx(0.7, abs=1e-12)
    same_soft = TtaBundle(views=(0.7, 0.7, 0.7), head_type="softmax-head")
    assert aggregate_tta(same_soft) == pytest.approx(0.7, abs=1e-12)
    # antisymmetric logits cancel under the sigmoid-head rule
    anti = TtaBundle(views=(0.9, 0.1), head_type="sigmoid-head")
    assert aggregate_tta(anti) == pytest.approx(0.5, abs=1e-12)
    soft = TtaBundle(views=(0.9, 0.1), head_type="softmax-head")
    assert aggregate_tta(soft) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ParameterError):
        TtaBundle(views=(), head_type="sigmoid-head")
    with pytest.raises(ParameterError):
        TtaBundle(views=(0.5,), head_type="argmax-head")


def test_weighted_expert_average():
    assert weighted_expert_average([0.9, 0.3], [2, 1]) == pytest.approx(0.7, abs=1e-12)
    assert weighted_expert_average([0.4], [5.0]) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(ParameterError):
        weighted_expert_average([0.5, 0.5], [0.0, 0.0])
    with pytest.raises(ParameterError):
        weighted_expert_average([0.5], [-1.0])
    with pytest.raises(ParameterError):
        weighted_expert_average([0.5, 0.4], [1.0])


def test_all_equal_inputs_are_fixed_points_everywhere():
    rng = np.random.default_rng(21)
    for _ in range(100):
        v = float(rng.uniform(0.02, 0.98))
        assert rapid_cascade(RapidScores(*([v] * 6))).f == pytest.approx(v, abs=1e-9)
        assert average_probs([v] * 5) == pytest.approx(v, abs=1e-12)
        assert weighted_expert_average([v] * 3, [1, 2, 3]) == pytest.approx(v, abs=1e-12)
        assert prism_predict(PrismInputs((v, v), (v, v), (0.8, 0.9))) == pytest.approx(
            v, abs=1e-12)
        for head in ("sigmoid-head", "softmax-head"):
            assert aggregate_tta(TtaBundle((v, v, v), head)) == pytest.approx(
                v, abs=1e-9)
