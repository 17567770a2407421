"""Clean/robust ROC AUC, the combined 0.7/0.3 score, loss components, PSNR.

ROC AUC follows the Mann-Whitney definition exactly: the fraction of
(positive, negative) pairs won by the positive, with half credit for ties.
The implementation uses midranks, which is algebraically identical to the
pairwise count.  Scores may be arbitrary reals; labels are 0 (real) and
1 (fake).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ManifestError, ParameterError, UndefinedMetricError

COMBINED_ROBUST_WEIGHT = 0.7
COMBINED_CLEAN_WEIGHT = 0.3

__all__ = [
    "roc_auc",
    "EvalReport",
    "evaluate",
    "combined_score",
    "read_predictions_csv",
    "cross_entropy",
    "kl_divergence",
    "mean_squared_error",
    "lpt_loss",
    "psnr",
]


def read_predictions_csv(path) -> dict:
    """Predictions file: CSV with header image_id,score; duplicate ids error."""
    predictions = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
            "image_id", "score",
        ]:
            raise ManifestError(
                f"predictions {path}: header must be exactly 'image_id,score', "
                f"got {reader.fieldnames}"
            )
        for lineno, row in enumerate(reader, start=2):
            image_id = row["image_id"].strip()
            if image_id in predictions:
                raise ManifestError(
                    f"predictions line {lineno}: duplicate id {image_id!r}"
                )
            try:
                predictions[image_id] = float(row["score"])
            except (TypeError, ValueError):
                raise ManifestError(
                    f"predictions line {lineno}: bad score {row['score']!r}"
                ) from None
    if not predictions:
        raise ManifestError(f"predictions {path}: no data rows")
    return predictions


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties averaged (midranks)."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: (wins + 0.5 * ties) / (n1 * n0) over all pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ParameterError("scores and labels must be 1-D and the same length")
    if not np.all((labels == 0) | (labels == 1)):
        raise ParameterError("labels must be 0 or 1")
    n1 = int(np.sum(labels == 1))
    n0 = int(np.sum(labels == 0))
    if n1 == 0 or n0 == 0:
        raise UndefinedMetricError(
            f"ROC AUC undefined: {n1} positive(s), {n0} negative(s)"
        )
    ranks = _midranks(scores)
    r1 = float(ranks[labels == 1].sum())
    return (r1 - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def combined_score(robust_auc: float, clean_auc: float) -> float:
    """0.7 * robust + 0.3 * clean."""
    return COMBINED_ROBUST_WEIGHT * robust_auc + COMBINED_CLEAN_WEIGHT * clean_auc


@dataclass
class EvalReport:
    """Per-track AUCs and the combined score; None marks undefined metrics."""

    clean_auc: float | None
    robust_auc: float | None
    combined: float | None
    n_clean: int
    n_robust: int
    clean_positives: int
    clean_negatives: int
    robust_positives: int
    robust_negatives: int

    def to_dict(self) -> dict:
        return {
            "clean_auc": self.clean_auc,
            "robust_auc": self.robust_auc,
            "combined": self.combined,
            "n_clean": self.n_clean,
            "n_robust": self.n_robust,
            "clean_positives": self.clean_positives,
            "clean_negatives": self.clean_negatives,
            "robust_positives": self.robust_positives,
            "robust_negatives": self.robust_negatives,
        }

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["metric,value"]
        for key, value in self.to_dict().items():
            lines.append(f"{key},{'' if value is None else value}")
        return "\n".join(lines) + "\n"


def _track_auc(scores, labels):
    try:
        return roc_auc(np.asarray(scores), np.asarray(labels))
    except UndefinedMetricError:
        return None


def evaluate(records, predictions: dict) -> EvalReport:
    """Split manifest records by track and score the predictions.

    `records` are ManifestRecords (error records are skipped); `predictions`
    maps image_id -> score and must cover every usable record exactly once.
    """
    usable = [r for r in records if not getattr(r, "error", None)]
    ids = [r.image_id for r in usable]
    missing = sorted(set(ids) - set(predictions))
    extra = sorted(set(predictions) - set(ids))
    if missing or extra:
        raise ManifestError(
            f"prediction ids misaligned: missing={missing[:10]} extra={extra[:10]}"
        )
    by_track = {"clean": ([], []), "robust": ([], [])}
    for rec in usable:
        scores, labels = by_track[rec.track]
        scores.append(float(predictions[rec.image_id]))
        labels.append(int(rec.label))
    clean_scores, clean_labels = by_track["clean"]
    robust_scores, robust_labels = by_track["robust"]
    clean_auc = _track_auc(clean_scores, clean_labels) if clean_scores else None
    robust_auc = _track_auc(robust_scores, robust_labels) if robust_scores else None
    combined = (
        combined_score(robust_auc, clean_auc)
        if clean_auc is not None and robust_auc is not None
        else None
    )
    return EvalReport(
        clean_auc=clean_auc,
        robust_auc=robust_auc,
        combined=combined,
        n_clean=len(clean_scores),
        n_robust=len(robust_scores),
        clean_positives=sum(clean_labels),
        clean_negatives=len(clean_labels) - sum(clean_labels),
        robust_positives=sum(robust_labels),
        robust_negatives=len(robust_labels) - sum(robust_labels),
    )


# Loss components --------------------------------------------------------------

def _check_distribution(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError(f"{name} must be a non-empty 1-D distribution")
    if np.any(p < 0) or not math.isclose(float(p.sum()), 1.0, abs_tol=1e-9):
        raise ParameterError(f"{name} must be non-negative and sum to 1")
    return p


def cross_entropy(pred_probs, label: int) -> float:
    """-log p[label] for a predicted class distribution."""
    p = _check_distribution(pred_probs, "pred_probs")
    if not 0 <= int(label) < p.size:
        raise ParameterError(f"label {label} out of range for {p.size} classes")
    if p[label] <= 0:
        raise ParameterError("predicted probability of the true class must be > 0")
    return float(-np.log(p[label]))


def kl_divergence(p, q) -> float:
    """sum p * log(p / q); requires q > 0 wherever p > 0."""
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.shape != q.shape:
        raise ParameterError("p and q must have the same length")
    support = p > 0
    if np.any(q[support] <= 0):
        raise ParameterError("q must be positive wherever p is positive")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def mean_squared_error(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"vector shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def lpt_loss(ce: float, kl: float, mse: float,
             alpha: float = 0.5, beta: float = 0.25) -> float:
    """ce + alpha * kl + beta * mse (defaults alpha=0.5, beta=0.25)."""
    if alpha < 0 or beta < 0:
        raise ParameterError("alpha and beta must be non-negative")
    return ce + alpha * kl + beta * mse


# PSNR --------------------------------------------------------------------------

def psnr(a, b) -> float:
    """10 * log10(255^2 / MSE) over all samples; inf marks identical images."""
    pa = a.pixels if hasattr(a, "pixels") else np.asarray(a)
    pb = b.pixels if hasattr(b, "pixels") else np.asarray(b)
    if pa.shape != pb.shape:
        raise ParameterError(f"image dimensions differ: {pa.shape} vs {pb.shape}")
    mse = float(np.mean((pa.astype(np.float64) - pb.astype(np.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)
