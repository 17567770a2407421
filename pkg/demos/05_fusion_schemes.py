"""Tour of the ensemble fusion schemes.

Shows the four-stage logit-space cascade with its intermediates, the
hierarchical five-model fusion with both correction gates firing, the
robust-AUC-weighted flip-TTA ensemble, and the TTA aggregation rules.
"""

from wilddistort import (
    IntsigScores,
    PrismInputs,
    RapidScores,
    TtaBundle,
    aggregate_tta,
    average_probs,
    flattened_intsig_weights,
    intsig_fuse,
    prism_predict,
    prism_weights,
    rapid_cascade,
    weighted_expert_average,
)


def main():
    print("== logit-space cascade ==")
    scores = RapidScores(g4=0.9, siglip=0.8, srm=0.7, eva02=0.6,
                         eva02_fixed=0.55, g4v2=0.65)
    result = rapid_cascade(scores)
    print(f"stage 1 (0.50/0.35/0.15): {result.s1a:.6f}")
    print(f"stage 2 (0.80/0.20):      {result.b:.6f}")
    print(f"stage 3 (0.85/0.15):      {result.s2:.6f}")
    print(f"final   (0.89/0.11):      {result.f:.6f}")

    print("\n== hierarchical fusion with dual gating ==")
    print("flattened weights:", [round(w, 4) for w in flattened_intsig_weights()])
    quiet = IntsigScores((0, 4), (0, 3), (0, 5), (0, 9), (0, 3.5))
    print("all agree       -> diff", round(intsig_fuse(quiet).diff, 3), "(no gates)")
    gate1 = IntsigScores((0, -10.0), (0, -5.0), (0, 14.336734693877551),
                         (0, 9.0), (0, 3.5))
    fused = intsig_fuse(gate1)
    print(f"gate-1 fires    -> diff {intsig_fuse(gate1, gates_enabled=False).diff:+.3f}"
          f" shifts to {fused.diff:+.3f}")
    gate2 = IntsigScores((0, 2.0), (0, 2.0), (0, 2.0), (0, -5.0), (0, 2.0))
    fused = intsig_fuse(gate2)
    print(f"gate-2 fires    -> outlier branch dropped, diff {fused.diff:+.3f}")

    print("\n== robust-AUC-weighted flip-TTA ensemble ==")
    aucs = (0.9, 0.8, 0.7)
    print("weights for robust AUCs", aucs, "->",
          [round(w, 5) for w in prism_weights(aucs)])
    inp = PrismInputs(probs=(0.92, 0.85, 0.60), flip_probs=(0.88, 0.80, 0.72),
                      robust_aucs=aucs)
    print(f"flip-averaged weighted prediction: {prism_predict(inp):.5f}")

    print("\n== probability averaging and TTA rules ==")
    print("two-stream average of (0.81, 0.67):",
          average_probs([0.81, 0.67]))
    print("four-expert average:", average_probs([0.9, 0.85, 0.7, 0.95]))
    views = (0.93, 0.88, 0.97, 0.90, 0.85, 0.91, 0.89, 0.94)
    print("8-view TTA, sigmoid head (mean logit):",
          round(aggregate_tta(TtaBundle(views, "sigmoid-head")), 5))
    print("8-view TTA, softmax head (mean prob): ",
          round(aggregate_tta(TtaBundle(views, "softmax-head")), 5))
    print("weighted expert blend (weights 2:1):",
          weighted_expert_average([0.9, 0.3], [2, 1]))


if __name__ == "__main__":
    main()
