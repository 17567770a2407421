"""Batch fusion over CSV score tables driven by a JSON scheme config.

Scores file: CSV with header ``image_id,<model columns...>``.  The config
names the scheme and maps each required input role to a column::

    {"scheme": "rapid",
     "columns": {"g4": "clip", "siglip": "sig", "srm": "srm",
                 "eva02": "e1", "eva02_fixed": "e2", "g4v2": "clip2"}}

    {"scheme": "intsig", "gates": true,
     "columns": {"m1_logit0": "a0", "m1_logit1": "a1", ..., "m5_logit1": "e1"}}

    {"scheme": "prism",
     "models": [{"prob": "p1", "flip_prob": "p1f", "robust_auc": 0.93}, ...]}

    {"scheme": "average", "columns": ["p1", "p2"]}

    {"scheme": "weighted_average", "columns": ["p1", "p2"], "weights": [2, 1]}

Output is an ``image_id,score`` CSV directly consumable by the evaluator.
For the intsig scheme the emitted score is the fused diff (logit1 - logit0).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import ManifestError, ParameterError
from .fusion import (
    IntsigScores,
    PrismInputs,
    RapidScores,
    average_probs,
    intsig_fuse,
    prism_predict,
    rapid_cascade,
    weighted_expert_average,
)

__all__ = [
    "load_fusion_config",
    "read_scores_csv",
    "fuse_rows",
    "write_scores_csv",
    "fuse_scores_file",
]

_RAPID_ROLES = ("g4", "siglip", "srm", "eva02", "eva02_fixed", "g4v2")
_INTSIG_ROLES = tuple(
    f"m{k}_logit{c}" for k in range(1, 6) for c in (0, 1)
)
_SCHEMES = ("rapid", "intsig", "prism", "average", "weighted_average")


def load_fusion_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot load fusion config {path}: {exc}") from exc
    validate_fusion_config(cfg)
    return cfg


def validate_fusion_config(cfg: dict) -> None:
    if not isinstance(cfg, dict) or "scheme" not in cfg:
        raise ParameterError("fusion config must be an object with a 'scheme' key")
    scheme = cfg["scheme"]
    if scheme not in _SCHEMES:
        raise ParameterError(f"unknown fusion scheme {scheme!r}; known: {_SCHEMES}")
    if scheme == "rapid":
        _require_roles(cfg, _RAPID_ROLES)
    elif scheme == "intsig":
        _require_roles(cfg, _INTSIG_ROLES)
    elif scheme == "prism":
        models = cfg.get("models")
        if not isinstance(models, list) or not models:
            raise ParameterError("prism config needs a non-empty 'models' list")
        for m in models:
            for key in ("prob", "flip_prob", "robust_auc"):
                if key not in m:
                    raise ParameterError(f"prism model entry missing {key!r}")
    else:
        cols = cfg.get("columns")
        if not isinstance(cols, list) or not cols:
            raise ParameterError(f"{scheme} config needs a non-empty 'columns' list")
        if scheme == "weighted_average":
            weights = cfg.get("weights")
            if not isinstance(weights, list) or len(weights) != len(cols):
                raise ParameterError("weighted_average needs one weight per column")


def _require_roles(cfg: dict, roles) -> None:
    cols = cfg.get("columns")
    if not isinstance(cols, dict):
        raise ParameterError("config needs a 'columns' role-to-column mapping")
    missing = [r for r in roles if r not in cols]
    if missing:
        raise ParameterError(f"fusion config missing roles: {missing}")


def read_scores_csv(path) -> list[dict]:
    """Rows of the scores table; all cells except image_id parsed as floats."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or reader.fieldnames[0] != "image_id":
            raise ManifestError(
                f"scores file {path}: first header column must be image_id"
            )
        for lineno, row in enumerate(reader, start=2):
            parsed = {"image_id": row["image_id"]}
            for key, value in row.items():
                if key == "image_id":
                    continue
                try:
                    parsed[key] = float(value)
                except (TypeError, ValueError):
                    raise ManifestError(
                        f"scores file line {lineno}: bad value {value!r} in {key!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ManifestError(f"scores file {path}: no data rows")
    return rows


def _cell(row: dict, column: str) -> float:
    if column not in row:
        raise ParameterError(f"scores file is missing column {column!r}")
    return row[column]


def fuse_rows(rows: list[dict], cfg: dict) -> list[tuple[str, float]]:
    """One fused score per row; deterministic, order-preserving."""
    validate_fusion_config(cfg)
    scheme = cfg["scheme"]
    out = []
    for row in rows:
        if scheme == "rapid":
            cols = cfg["columns"]
            score = rapid_cascade(RapidScores(
                **{role: _cell(row, cols[role]) for role in _RAPID_ROLES}
            )).f
        elif scheme == "intsig":
            cols = cfg["columns"]
            models = tuple(
                (_cell(row, cols[f"m{k}_logit0"]), _cell(row, cols[f"m{k}_logit1"]))
                for k in range(1, 6)
            )
            result = intsig_fuse(IntsigScores(*models),
                                 gates_enabled=bool(cfg.get("gates", True)))
            score = result.diff
        elif scheme == "prism":
            models = cfg["models"]
            score = prism_predict(PrismInputs(
                probs=tuple(_cell(row, m["prob"]) for m in models),
                flip_probs=tuple(_cell(row, m["flip_prob"]) for m in models),
                robust_aucs=tuple(float(m["robust_auc"]) for m in models),
            ))
        elif scheme == "average":
            score = average_probs([_cell(row, c) for c in cfg["columns"]])
        else:
            score = weighted_expert_average(
                [_cell(row, c) for c in cfg["columns"]], cfg["weights"]
            )
        out.append((row["image_id"], score))
    return out


def write_scores_csv(scored: list[tuple[str, float]], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "score"])
        for image_id, score in scored:
            writer.writerow([image_id, repr(float(score))])


def fuse_scores_file(scores_csv, config_path, output_csv) -> int:
    """CSV in, fused CSV out; returns the number of rows written."""
    cfg = load_fusion_config(config_path)
    scored = fuse_rows(read_scores_csv(scores_csv), cfg)
    write_scores_csv(scored, output_csv)
    return len(scored)
