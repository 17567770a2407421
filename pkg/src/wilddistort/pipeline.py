"""Stochastic composition of distortions into per-image plans, the parallel
batch runner, and replayable manifests.

Reproducibility contract: every random draw derives from
``(global_seed, image_id)`` through named child streams --

* ``plan/<image_id>``      plan sampling (count, kinds, levels),
* ``apply/<image_id>/<i>`` the i-th distortion application.

Work scheduling therefore cannot influence results: the same listing and
seed produce byte-identical outputs and manifests at any parallelism.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import json
import math
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .distortions import DistortionSpec, apply
from .errors import ManifestError, ParameterError
from .image import ImageBuffer, load_image, save_png
from .rng import SeededRng
from .severity import (
    DistortionKind,
    SeverityTable,
    group_of,
)

MANIFEST_VERSION = 1

__all__ = [
    "LevelScheme",
    "BUILTIN_SCHEMES",
    "get_scheme",
    "DistortionPlan",
    "ManifestRecord",
    "BatchResult",
    "sample_plan",
    "apply_plan",
    "assign_tracks",
    "run_batch",
    "replay",
    "read_manifest",
    "write_manifest",
]

# All kinds participate in random sampling except the fixed-resize utility.
DEFAULT_KIND_POOL: tuple[DistortionKind, ...] = tuple(
    k for k in DistortionKind if k is not DistortionKind.SQUISH_RESIZE
)


@dataclass(frozen=True)
class LevelScheme:
    """How many distortions to stack and how to draw their severity levels.

    ``severity_mean/std`` of None means levels are drawn uniformly from
    1..num_levels; otherwise levels are round(N(mean, std)) clamped into
    [1, num_levels].  ``distortion_prob`` is the chance an image is
    distorted at all (all built-in schemes use 1.0).
    """

    name: str
    count_min: int
    count_max: int
    num_levels: int = 5
    severity_mean: float | None = None
    severity_std: float | None = None
    distinct_groups: bool = False
    distortion_prob: float = 1.0
    kinds: tuple[DistortionKind, ...] = DEFAULT_KIND_POOL


BUILTIN_SCHEMES: dict[str, LevelScheme] = {
    s.name: s
    for s in (
        LevelScheme("challenge", 1, 5, num_levels=5, distinct_groups=True),
        LevelScheme("ant_mild", 1, 3, num_levels=5,
                    severity_mean=0.0, severity_std=2.5),
        LevelScheme("ant_moderate", 3, 6, num_levels=5,
                    severity_mean=2.5, severity_std=2.0),
        LevelScheme("ant_heavy", 6, 6, num_levels=5,
                    severity_mean=3.5, severity_std=1.0),
        LevelScheme("teleai", 1, 5, num_levels=5, distinct_groups=True,
                    severity_mean=3.0, severity_std=2.0),
        LevelScheme("intsig_light", 1, 3, num_levels=3, distinct_groups=True),
        LevelScheme("vincentlc", 1, 3, num_levels=5, distinct_groups=True,
                    distortion_prob=1.0),
    )
}


def get_scheme(name: str) -> LevelScheme:
    try:
        return BUILTIN_SCHEMES[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_SCHEMES))
        raise ParameterError(f"unknown scheme {name!r}; built-ins: {known}") from None


@dataclass
class DistortionPlan:
    """Ordered distortion sequence for one image, plus its provenance."""

    image_id: str
    seed: int
    scheme: str
    specs: list[DistortionSpec] = field(default_factory=list)

    def to_list(self) -> list[dict]:
        return [s.to_dict() for s in self.specs]

    @classmethod
    def from_list(cls, image_id, seed, scheme, items) -> "DistortionPlan":
        return cls(image_id=image_id, seed=seed, scheme=scheme,
                   specs=[DistortionSpec.from_dict(d) for d in items])


@functools.lru_cache(maxsize=None)
def _pool_groups(kinds: tuple) -> tuple:
    return tuple(group_of(k) for k in kinds)


def _draw_level(scheme: LevelScheme, rng: SeededRng) -> int:
    if scheme.severity_mean is None:
        return int(rng.integers(1, scheme.num_levels + 1))
    draw = float(rng.normal(scheme.severity_mean, scheme.severity_std))
    return int(min(max(math.floor(draw + 0.5), 1), scheme.num_levels))


def sample_plan(
    image_id: str,
    scheme: LevelScheme,
    rng: SeededRng,
    table: SeverityTable | None = None,
) -> DistortionPlan:
    """Draw count, kinds, and levels from `rng` under the scheme's rules.

    Group distinctness is enforced by rejecting kinds whose group was
    already used.  `rng` should be the per-image stream derived from
    ``(global_seed, image_id)``.
    """
    if table is None:
        table = SeverityTable.default()
    if scheme.num_levels > table.num_levels:
        raise ParameterError(
            f"scheme {scheme.name!r} wants {scheme.num_levels} levels but the "
            f"severity table defines {table.num_levels}"
        )
    groups = _pool_groups(scheme.kinds)
    if scheme.distinct_groups and scheme.count_max > len(set(groups)):
        raise ParameterError(
            f"scheme {scheme.name!r} may request {scheme.count_max} distinct "
            f"groups but only {len(set(groups))} exist in its kind pool"
        )
    plan = DistortionPlan(image_id=image_id, seed=rng.seed, scheme=scheme.name)
    if scheme.distortion_prob < 1.0 and rng.random() >= scheme.distortion_prob:
        return plan
    if scheme.count_min == scheme.count_max:
        count = scheme.count_min
    else:
        count = int(rng.integers(scheme.count_min, scheme.count_max + 1))
    used_groups = set()
    for _ in range(count):
        for _attempt in range(10_000):
            idx = int(rng.integers(0, len(scheme.kinds)))
            if not scheme.distinct_groups or groups[idx] not in used_groups:
                break
        else:  # pragma: no cover - unreachable with a sane pool
            raise ParameterError(f"scheme {scheme.name!r}: cannot find unused group")
        used_groups.add(groups[idx])
        level = _draw_level(scheme, rng)
        plan.specs.append(DistortionSpec.from_table(scheme.kinds[idx], level, table))
    return plan


def apply_plan(img: ImageBuffer, plan: DistortionPlan, global_seed: int) -> ImageBuffer:
    """Execute a plan with the per-step derived streams; records resolved draws."""
    root = SeededRng(global_seed)
    out = img
    for i, spec in enumerate(plan.specs):
        step_rng = root.derive(f"apply/{plan.image_id}/{i}")
        out = apply(out, spec, step_rng)
    return out


# Manifest records -----------------------------------------------------------

@dataclass
class ManifestRecord:
    """One JSON line of the manifest; track == "clean" iff the plan is empty."""

    image_id: str
    source_path: str
    output_path: str | None
    label: int
    track: str
    global_seed: int
    scheme: str | None = None
    plan: list[dict] = field(default_factory=list)
    error: str | None = None

    def to_json_line(self) -> str:
        payload = {
            "manifest_v": MANIFEST_VERSION,
            "image_id": self.image_id,
            "source_path": self.source_path,
            "output_path": self.output_path,
            "label": self.label,
            "track": self.track,
            "global_seed": self.global_seed,
            "scheme": self.scheme,
            "plan": self.plan,
            "error": self.error,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "ManifestRecord":
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"bad manifest line: {exc}") from exc
        if d.get("manifest_v") != MANIFEST_VERSION:
            raise ManifestError(f"unsupported manifest_v: {d.get('manifest_v')!r}")
        rec = cls(
            image_id=d["image_id"],
            source_path=d["source_path"],
            output_path=d.get("output_path"),
            label=int(d["label"]),
            track=d["track"],
            global_seed=int(d["global_seed"]),
            scheme=d.get("scheme"),
            plan=d.get("plan") or [],
            error=d.get("error"),
        )
        if rec.track not in ("clean", "robust"):
            raise ManifestError(f"unknown track {rec.track!r}")
        if rec.error is None and (rec.track == "clean") != (not rec.plan):
            raise ManifestError(
                f"{rec.image_id}: track={rec.track} inconsistent with plan length "
                f"{len(rec.plan)}"
            )
        return rec


def write_manifest(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for rec in records:
            fh.write(rec.to_json_line() + "\n")


def read_manifest(path) -> list[ManifestRecord]:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ManifestRecord.from_json_line(line))
    return records


# Track assignment and the batch runner ---------------------------------------

def assign_tracks(image_ids, robust_fraction: float, global_seed: int) -> dict:
    """Deterministic clean/robust split keyed by image_id, not position.

    Images are ranked by SHA-256("track" / seed / id); the first
    round(robust_fraction * N) become the robust track.  Reordering the
    listing cannot change the assignment.
    """
    if not 0.0 <= robust_fraction <= 1.0:
        raise ParameterError(f"robust_fraction must be in [0, 1], got {robust_fraction}")
    ids = list(image_ids)
    ranked = sorted(
        ids,
        key=lambda i: hashlib.sha256(
            f"track\x1f{global_seed}\x1f{i}".encode()
        ).hexdigest(),
    )
    n_robust = int(math.floor(robust_fraction * len(ids) + 0.5))
    robust = set(ranked[:n_robust])
    return {i: ("robust" if i in robust else "clean") for i in ids}


def read_listing(path) -> list[dict]:
    """Input dataset listing: CSV with header image_id,path,label."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
            "image_id", "path", "label",
        ]:
            raise ManifestError(
                f"listing {path}: header must be exactly 'image_id,path,label', "
                f"got {reader.fieldnames}"
            )
        for lineno, row in enumerate(reader, start=2):
            label = row["label"].strip()
            if label not in ("0", "1"):
                raise ManifestError(f"listing line {lineno}: label must be 0 or 1")
            rows.append({"image_id": row["image_id"].strip(),
                         "path": row["path"].strip(), "label": int(label)})
    if not rows:
        raise ManifestError(f"listing {path}: no data rows")
    counts = Counter(r["image_id"] for r in rows)
    dupes = sorted(i for i, c in counts.items() if c > 1)
    if dupes:
        raise ManifestError(f"listing {path}: duplicate image_ids: {dupes[:10]}")
    return rows


_SAFE_ID = re.compile(r"[^A-Za-z0-9._-]")


def _output_name(image_id: str) -> str:
    return _SAFE_ID.sub("_", image_id) + ".png"


def _run_one(task: dict) -> dict:
    """Process one listing row; returns a plain dict (picklable) for the manifest."""
    image_id = task["image_id"]
    out = {
        "image_id": image_id,
        "source_path": task["path"],
        "output_path": task["output_path"],
        "label": task["label"],
        "track": task["track"],
        "global_seed": task["global_seed"],
        "scheme": task["scheme"].name if task["track"] == "robust" else None,
        "plan": [],
        "error": None,
    }
    try:
        img = load_image(task["path"])
        if task["track"] == "robust":
            rng = SeededRng(task["global_seed"]).derive(f"plan/{image_id}")
            plan = sample_plan(image_id, task["scheme"], rng, task["table"])
            img = apply_plan(img, plan, task["global_seed"])
            out["plan"] = plan.to_list()
        save_png(img, task["output_path"])
    except Exception as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
        out["output_path"] = None
    return out


@dataclass
class BatchResult:
    manifest_path: str
    n_total: int
    n_clean: int
    n_robust: int
    failures: list
    kind_counts: dict

    @property
    def n_failed(self) -> int:
        return len(self.failures)


def run_batch(
    listing_path,
    output_dir,
    scheme: LevelScheme | str = "challenge",
    robust_fraction: float = 0.5,
    global_seed: int = 0,
    parallelism: int = 1,
    table: SeverityTable | None = None,
) -> BatchResult:
    """Distort the robust half of a dataset listing and write a replayable manifest.

    Unreadable/undecodable images become per-record error entries; the run
    continues.  The result is independent of `parallelism`.
    """
    if isinstance(scheme, str):
        scheme = get_scheme(scheme)
    if table is None:
        table = SeverityTable.default()
    if parallelism < 1:
        raise ParameterError(f"parallelism must be >= 1, got {parallelism}")
    rows = read_listing(listing_path)
    tracks = assign_tracks([r["image_id"] for r in rows], robust_fraction, global_seed)
    output_dir = Path(output_dir)
    (output_dir / "images").mkdir(parents=True, exist_ok=True)

    names = {r["image_id"]: _output_name(r["image_id"]) for r in rows}
    if len(set(names.values())) != len(names):
        raise ManifestError("image_ids collide after filename sanitization")

    tasks = [
        {
            **row,
            "track": tracks[row["image_id"]],
            "output_path": str(output_dir / "images" / names[row["image_id"]]),
            "global_seed": global_seed,
            "scheme": scheme,
            "table": table,
        }
        for row in rows
    ]
    if parallelism == 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=8))

    results.sort(key=lambda r: r["image_id"])
    records = [ManifestRecord(**r) for r in results]
    manifest_path = output_dir / "manifest.jsonl"
    write_manifest(records, manifest_path)

    kind_counts = Counter(
        spec["kind"] for rec in records for spec in rec.plan
    )
    failures = [(r.image_id, r.error) for r in records if r.error]
    n_clean = sum(1 for r in records if r.track == "clean" and not r.error)
    n_robust = sum(1 for r in records if r.track == "robust" and not r.error)
    return BatchResult(
        manifest_path=str(manifest_path),
        n_total=len(records),
        n_clean=n_clean,
        n_robust=n_robust,
        failures=failures,
        kind_counts=dict(sorted(kind_counts.items())),
    )


# Replay ----------------------------------------------------------------------

def validate_plan_items(items, table: SeverityTable) -> list[DistortionSpec]:
    """Structural validation of manifest plan entries; raises ParameterError."""
    specs = []
    for item in items:
        try:
            spec = DistortionSpec.from_dict(item)
        except (KeyError, ValueError) as exc:
            raise ParameterError(f"malformed plan entry {item!r}: {exc}") from exc
        if spec.group != group_of(spec.kind):
            raise ParameterError(
                f"plan entry {spec.kind}: group {spec.group} does not match catalogue"
            )
        if not isinstance(spec.level, int) or not 1 <= spec.level <= table.num_levels:
            raise ParameterError(
                f"plan entry {spec.kind}: level {spec.level!r} outside "
                f"1..{table.num_levels}"
            )
        required = set(table.params_for(spec.kind, spec.level))
        missing = required - set(spec.params)
        if missing:
            raise ParameterError(
                f"plan entry {spec.kind}: missing params {sorted(missing)}"
            )
        specs.append(spec)
    return specs


def replay(record: ManifestRecord, table: SeverityTable | None = None) -> ImageBuffer:
    """Re-run a manifest record's plan; byte-identical to the original output."""
    if record.error:
        raise ManifestError(f"{record.image_id}: cannot replay an error record")
    if table is None:
        table = SeverityTable.default()
    img = load_image(record.source_path)
    if record.track == "clean":
        return img
    specs = validate_plan_items(record.plan, table)
    plan = DistortionPlan(image_id=record.image_id, seed=record.global_seed,
                          scheme=record.scheme or "", specs=specs)
    return apply_plan(img, plan, record.global_seed)
