"""Ensemble score fusion: logit-space cascade, weighted hierarchical fusion
with dual gating, robust-AUC-weighted flip-TTA averaging, probability
averaging, and TTA aggregation rules.

Two conventions coexist and are never mixed silently: cascade fusion works
in logit space (weighted sums of log-odds, then sigmoid), while the
flip-TTA ensemble and plain averaging work directly on probabilities.
Probabilities are clamped to [1e-7, 1 - 1e-7] before any logit transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

PROB_EPS = 1e-7

# Cascade stage coefficients: (semantic, high-res, residual), then each
# later stage blends the running fusion with one more branch.
RAPID_STAGE1 = (0.50, 0.35, 0.15)
RAPID_STAGE2 = (0.80, 0.20)
RAPID_STAGE3 = (0.85, 0.15)
RAPID_STAGE4 = (0.89, 0.11)

# Hierarchical weights: inner committee, middle bracket, outer bracket.
INTSIG_INNER = (0.75, 0.15, 0.10)
INTSIG_MID = (0.7, 0.3)
INTSIG_OUTER = (0.7, 0.3)
INTSIG_GATE1_M4_THRESHOLD = 8.0
INTSIG_GATE1_M5_THRESHOLD = 3.0
INTSIG_GATE1_SHIFT = 2.5
INTSIG_GATE2_MIN_AGREEING = 3

__all__ = [
    "clamp_probability",
    "logit",
    "sigmoid",
    "RapidScores",
    "RapidCascadeResult",
    "rapid_cascade",
    "IntsigScores",
    "IntsigFusionResult",
    "intsig_fuse",
    "flattened_intsig_weights",
    "PrismInputs",
    "prism_weights",
    "prism_predict",
    "average_probs",
    "TtaBundle",
    "aggregate_tta",
    "weighted_expert_average",
]


def clamp_probability(p: float) -> float:
    """Clamp into [eps, 1 - eps] so the logit is always finite."""
    return min(max(float(p), PROB_EPS), 1.0 - PROB_EPS)


def logit(p: float) -> float:
    """log(p / (1 - p)) after clamping."""
    p = clamp_probability(p)
    return math.log(p / (1.0 - p))


def sigmoid(x: float) -> float:
    x = float(x)
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


# RAPID: four-stage logit-space cascade ----------------------------------------

@dataclass(frozen=True)
class RapidScores:
    """Branch probabilities: semantic CLIP (g4), SigLIP, SRM residual CNN,
    the two EVA-02 checkpoints, and the continued-training g4 variant."""

    g4: float
    siglip: float
    srm: float
    eva02: float
    eva02_fixed: float
    g4v2: float


@dataclass(frozen=True)
class RapidCascadeResult:
    s1a: float
    b: float
    s2: float
    f: float


def rapid_cascade(scores: RapidScores) -> RapidCascadeResult:
    """Staged logit blend; each stage re-enters logit space for the next."""
    w1, w2, w3, w4 = RAPID_STAGE1, RAPID_STAGE2, RAPID_STAGE3, RAPID_STAGE4
    s1a = sigmoid(
        w1[0] * logit(scores.g4) + w1[1] * logit(scores.siglip) + w1[2] * logit(scores.srm)
    )
    b = sigmoid(w2[0] * logit(s1a) + w2[1] * logit(scores.eva02))
    s2 = sigmoid(w3[0] * logit(b) + w3[1] * logit(scores.eva02_fixed))
    f = sigmoid(w4[0] * logit(s2) + w4[1] * logit(scores.g4v2))
    return RapidCascadeResult(s1a=s1a, b=b, s2=s2, f=f)


# INTSIG: weighted hierarchical fusion with dual gating --------------------------

@dataclass(frozen=True)
class IntsigScores:
    """Two-class logits (logit0, logit1) for models M1..M5."""

    m1: tuple[float, float]
    m2: tuple[float, float]
    m3: tuple[float, float]
    m4: tuple[float, float]
    m5: tuple[float, float]

    def diff(self, k: int) -> float:
        """Directional confidence logit1 - logit0 of model k (1-based)."""
        l0, l1 = (self.m1, self.m2, self.m3, self.m4, self.m5)[k - 1]
        return l1 - l0


@dataclass(frozen=True)
class IntsigFusionResult:
    logit0: float
    logit1: float
    gate1_fired: bool
    gate2_fired: bool

    @property
    def diff(self) -> float:
        return self.logit1 - self.logit0


def flattened_intsig_weights() -> tuple[float, float, float, float, float]:
    """Per-model weights implied by the hierarchy (sum to 1)."""
    a, b, c = INTSIG_INNER
    mid_inner, mid_m4 = INTSIG_MID
    outer_mid, outer_m5 = INTSIG_OUTER
    return (
        outer_mid * mid_inner * a,
        outer_mid * mid_inner * b,
        outer_mid * mid_inner * c,
        outer_mid * mid_m4,
        outer_m5,
    )


def _hierarchical(scores: IntsigScores, drop_m4: bool) -> tuple[float, float]:
    a, b, c = INTSIG_INNER
    mid_inner, mid_m4 = INTSIG_MID
    outer_mid, outer_m5 = INTSIG_OUTER
    out = []
    for comp in (0, 1):
        inner = (a * scores.m1[comp] + b * scores.m2[comp] + c * scores.m3[comp])
        if drop_m4:
            # M4's middle-bracket mass goes back to the inner committee.
            mid = inner
        else:
            mid = mid_inner * inner + mid_m4 * scores.m4[comp]
        out.append(outer_mid * mid + outer_m5 * scores.m5[comp])
    return out[0], out[1]


def intsig_fuse(scores: IntsigScores, gates_enabled: bool = True) -> IntsigFusionResult:
    """Hierarchical weighted sum over (logit0, logit1), then the two gates.

    Gate-2 (anomaly suppression) is evaluated first: when at least three of
    {M1, M2, M3, M5} share a diff sign and M4's sign strictly opposes it,
    M4 is dropped and its weight mass is renormalized within its bracket.
    Gate-1 (strong consensus correction) then inspects the fused result:
    when |diff(M4)| >= 8, |diff(M5)| >= 3, both signs match, and the fused
    diff is strictly opposite, logit1 shifts by 2.5 toward the M4/M5
    direction. Zero diffs neither agree nor disagree.
    """
    gate2 = False
    gate1 = False
    if gates_enabled:
        committee = [scores.diff(k) for k in (1, 2, 3, 5)]
        d4 = scores.diff(4)
        for sign in (1.0, -1.0):
            agreeing = sum(1 for d in committee if d * sign > 0)
            if agreeing >= INTSIG_GATE2_MIN_AGREEING and d4 * sign < 0:
                gate2 = True
                break
    logit0, logit1 = _hierarchical(scores, drop_m4=gate2)
    if gates_enabled:
        d4, d5 = scores.diff(4), scores.diff(5)
        fused_diff = logit1 - logit0
        if (
            abs(d4) >= INTSIG_GATE1_M4_THRESHOLD
            and abs(d5) >= INTSIG_GATE1_M5_THRESHOLD
            and d4 * d5 > 0
            and fused_diff * d4 < 0
        ):
            gate1 = True
            logit1 += INTSIG_GATE1_SHIFT * math.copysign(1.0, d4)
    return IntsigFusionResult(logit0=logit0, logit1=logit1,
                              gate1_fired=gate1, gate2_fired=gate2)


# PRISM: robust-AUC-weighted probability averaging with flip TTA -----------------

@dataclass(frozen=True)
class PrismInputs:
    """Per-model probabilities on x and on the horizontal flip F(x), plus
    each model's robust validation AUC."""

    probs: tuple[float, ...]
    flip_probs: tuple[float, ...]
    robust_aucs: tuple[float, ...]

    def __post_init__(self):
        k = len(self.robust_aucs)
        if k == 0:
            raise ParameterError("PRISM needs at least one model")
        if len(self.probs) != k or len(self.flip_probs) != k:
            raise ParameterError("probs, flip_probs, robust_aucs lengths differ")


def prism_weights(robust_aucs) -> list[float]:
    """w_k = A_k / sum_j A_j; requires positive AUCs."""
    aucs = [float(a) for a in robust_aucs]
    if not aucs:
        raise ParameterError("empty model list")
    if any(a <= 0 for a in aucs):
        raise ParameterError("robust AUCs must be positive")
    total = math.fsum(aucs)
    return [a / total for a in aucs]


def prism_predict(inp: PrismInputs) -> float:
    """0.5 * [sum w_k p_k(x) + sum w_k p_k(F(x))]; no logit transform."""
    w = prism_weights(inp.robust_aucs)
    straight = math.fsum(wk * pk for wk, pk in zip(w, inp.probs))
    flipped = math.fsum(wk * pk for wk, pk in zip(w, inp.flip_probs))
    return 0.5 * (straight + flipped)


# Probability averaging and TTA ---------------------------------------------------

def average_probs(probs) -> float:
    """Arithmetic mean of output probabilities."""
    probs = [float(p) for p in probs]
    if not probs:
        raise ParameterError("cannot average an empty probability list")
    return math.fsum(probs) / len(probs)


@dataclass(frozen=True)
class TtaBundle:
    """Per-view probabilities for one image plus the head convention."""

    views: tuple[float, ...]
    head_type: str = "sigmoid-head"

    def __post_init__(self):
        if not self.views:
            raise ParameterError("TTA bundle needs at least one view")
        if self.head_type not in ("sigmoid-head", "softmax-head"):
            raise ParameterError(f"unknown head_type {self.head_type!r}")


def aggregate_tta(bundle: TtaBundle) -> float:
    """sigmoid-head: sigmoid(mean of view logits); softmax-head: mean of
    view probabilities."""
    if bundle.head_type == "sigmoid-head":
        return sigmoid(math.fsum(logit(v) for v in bundle.views) / len(bundle.views))
    return average_probs(bundle.views)


def weighted_expert_average(expert_scores, weights) -> float:
    """sum(w_i * s_i) / sum(w_i); weights non-negative, not all zero."""
    scores = [float(s) for s in expert_scores]
    w = [float(x) for x in weights]
    if len(scores) != len(w) or not scores:
        raise ParameterError("scores and weights must be equal-length and non-empty")
    if any(x < 0 for x in w):
        raise ParameterError("weights must be non-negative")
    total = math.fsum(w)
    if total == 0:
        raise ParameterError("weight mass must be positive")
    return math.fsum(wi * si for wi, si in zip(w, scores)) / total
