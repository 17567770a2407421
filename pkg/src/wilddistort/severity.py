"""Distortion catalogue: kinds, groups, and per-level severity parameters.

The default tables below are implementation defaults chosen as monotone
perceptual ramps; they can be overridden per kind from a JSON config file
(see :func:`load_severity_config`).  Level indices are 1-based.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ParameterError

__all__ = [
    "DistortionKind",
    "DistortionGroup",
    "SeverityTable",
    "DEFAULT_NUM_LEVELS",
    "group_of",
    "severity_params",
    "load_severity_config",
]

DEFAULT_NUM_LEVELS = 5


class DistortionKind(str, Enum):
    GAUSSIAN_BLUR = "gaussian_blur"
    LENS_BLUR = "lens_blur"
    MOTION_BLUR = "motion_blur"
    GLASS_BLUR = "glass_blur"
    PIXELATE = "pixelate"
    WHITE_NOISE = "white_noise"
    IMPULSE_NOISE = "impulse_noise"
    MULTIPLICATIVE_NOISE = "multiplicative_noise"
    SHOT_NOISE = "shot_noise"
    ISO_NOISE = "iso_noise"
    COLOR_SHIFT = "color_shift"
    COLOR_SATURATION = "color_saturation"
    COLOR_JITTER = "color_jitter"
    COLOR_QUANTIZATION = "color_quantization"
    RGB_CHANNEL_SHIFT = "rgb_channel_shift"
    COLOR_CAST = "color_cast"
    BRIGHTNESS_INCREASE = "brightness_increase"
    BRIGHTNESS_DECREASE = "brightness_decrease"
    LINEAR_CONTRAST_CHANGE = "linear_contrast_change"
    RANDOM_TONE_CURVE = "random_tone_curve"
    CLAHE = "clahe"
    JPEG_COMPRESSION = "jpeg_compression"
    MULTIPLE_JPEG_COMPRESSIONS = "multiple_jpeg_compressions"
    RANDOM_CROP = "random_crop"
    RANDOM_ASPECT_CROP = "random_aspect_crop"
    DOWNSCALE = "downscale"
    PERSPECTIVE_TRANSFORM = "perspective_transform"
    SQUISH_RESIZE = "squish_resize"

    def __str__(self) -> str:
        return self.value


class DistortionGroup(str, Enum):
    BLUR = "blur"
    NOISE = "noise"
    COLOR = "color"
    TONE = "tone"
    COMPRESSION = "compression"
    GEOMETRIC = "geometric"

    def __str__(self) -> str:
        return self.value


# Total, fixed group assignment.  The six-group taxonomy itself is a
# documented decision; every kind belongs to exactly one group.
GROUP_BY_KIND: dict[DistortionKind, DistortionGroup] = {
    DistortionKind.GAUSSIAN_BLUR: DistortionGroup.BLUR,
    DistortionKind.LENS_BLUR: DistortionGroup.BLUR,
    DistortionKind.MOTION_BLUR: DistortionGroup.BLUR,
    DistortionKind.GLASS_BLUR: DistortionGroup.BLUR,
    DistortionKind.WHITE_NOISE: DistortionGroup.NOISE,
    DistortionKind.IMPULSE_NOISE: DistortionGroup.NOISE,
    DistortionKind.MULTIPLICATIVE_NOISE: DistortionGroup.NOISE,
    DistortionKind.SHOT_NOISE: DistortionGroup.NOISE,
    DistortionKind.ISO_NOISE: DistortionGroup.NOISE,
    DistortionKind.COLOR_SHIFT: DistortionGroup.COLOR,
    DistortionKind.COLOR_SATURATION: DistortionGroup.COLOR,
    DistortionKind.COLOR_JITTER: DistortionGroup.COLOR,
    DistortionKind.COLOR_QUANTIZATION: DistortionGroup.COLOR,
    DistortionKind.RGB_CHANNEL_SHIFT: DistortionGroup.COLOR,
    DistortionKind.COLOR_CAST: DistortionGroup.COLOR,
    DistortionKind.BRIGHTNESS_INCREASE: DistortionGroup.TONE,
    DistortionKind.BRIGHTNESS_DECREASE: DistortionGroup.TONE,
    DistortionKind.LINEAR_CONTRAST_CHANGE: DistortionGroup.TONE,
    DistortionKind.RANDOM_TONE_CURVE: DistortionGroup.TONE,
    DistortionKind.CLAHE: DistortionGroup.TONE,
    DistortionKind.JPEG_COMPRESSION: DistortionGroup.COMPRESSION,
    DistortionKind.MULTIPLE_JPEG_COMPRESSIONS: DistortionGroup.COMPRESSION,
    DistortionKind.PIXELATE: DistortionGroup.COMPRESSION,
    DistortionKind.RANDOM_CROP: DistortionGroup.GEOMETRIC,
    DistortionKind.RANDOM_ASPECT_CROP: DistortionGroup.GEOMETRIC,
    DistortionKind.DOWNSCALE: DistortionGroup.GEOMETRIC,
    DistortionKind.PERSPECTIVE_TRANSFORM: DistortionGroup.GEOMETRIC,
    DistortionKind.SQUISH_RESIZE: DistortionGroup.GEOMETRIC,
}


def group_of(kind: DistortionKind | str) -> DistortionGroup:
    return GROUP_BY_KIND[DistortionKind(kind)]


# Default per-level parameters (level 1 mildest).  Values marked "pinned"
# come straight from the repo-default ramps documented in the README.
_DEFAULT_PARAMS: dict[DistortionKind, tuple[dict, ...]] = {
    DistortionKind.GAUSSIAN_BLUR: tuple({"sigma": s} for s in (0.8, 1.6, 2.4, 3.6, 5.0)),
    DistortionKind.LENS_BLUR: tuple({"radius": r} for r in (1, 2, 3, 5, 8)),
    DistortionKind.MOTION_BLUR: tuple({"length": n} for n in (3, 5, 9, 13, 19)),
    DistortionKind.GLASS_BLUR: (
        {"sigma": 0.7, "max_delta": 1, "iterations": 1},
        {"sigma": 0.8, "max_delta": 2, "iterations": 1},
        {"sigma": 0.9, "max_delta": 2, "iterations": 2},
        {"sigma": 1.0, "max_delta": 3, "iterations": 2},
        {"sigma": 1.1, "max_delta": 4, "iterations": 3},
    ),
    DistortionKind.PIXELATE: tuple({"scale": s} for s in (0.6, 0.45, 0.3, 0.2, 0.12)),
    DistortionKind.WHITE_NOISE: tuple({"sigma": s} for s in (8, 14, 22, 34, 50)),
    DistortionKind.IMPULSE_NOISE: tuple(
        {"density": d} for d in (0.01, 0.03, 0.07, 0.12, 0.2)
    ),
    DistortionKind.MULTIPLICATIVE_NOISE: tuple(
        {"sigma": s} for s in (0.05, 0.1, 0.16, 0.24, 0.35)
    ),
    DistortionKind.SHOT_NOISE: tuple({"photons": p} for p in (60, 25, 12, 5, 3)),
    DistortionKind.ISO_NOISE: tuple({"sigma": s} for s in (5, 9, 15, 24, 36)),
    DistortionKind.COLOR_SHIFT: tuple({"degrees": d} for d in (5, 10, 17, 26, 38)),
    DistortionKind.COLOR_SATURATION: tuple(
        {"factor": f} for f in (0.8, 0.62, 0.45, 0.3, 0.15)
    ),
    DistortionKind.COLOR_JITTER: (
        {"strength": 0.08, "hue": 0.02},
        {"strength": 0.16, "hue": 0.04},
        {"strength": 0.26, "hue": 0.07},
        {"strength": 0.38, "hue": 0.10},
        {"strength": 0.52, "hue": 0.14},
    ),
    DistortionKind.COLOR_QUANTIZATION: tuple({"levels": k} for k in (32, 16, 8, 4, 2)),
    DistortionKind.RGB_CHANNEL_SHIFT: tuple({"max_shift": m} for m in (1, 2, 3, 5, 8)),
    DistortionKind.COLOR_CAST: tuple({"magnitude": m} for m in (6, 11, 18, 28, 42)),
    DistortionKind.BRIGHTNESS_INCREASE: tuple({"delta": d} for d in (10, 20, 35, 55, 80)),
    DistortionKind.BRIGHTNESS_DECREASE: tuple({"delta": d} for d in (10, 20, 35, 55, 80)),
    DistortionKind.LINEAR_CONTRAST_CHANGE: tuple(
        {"factor": f} for f in (0.85, 0.7, 0.55, 0.4, 0.25)
    ),
    DistortionKind.RANDOM_TONE_CURVE: tuple(
        {"scale": s} for s in (0.06, 0.12, 0.2, 0.3, 0.42)
    ),
    DistortionKind.CLAHE: tuple(
        {"clip_limit": c, "tiles": 8} for c in (1.6, 2.5, 4.0, 6.5, 10.0)
    ),
    # pinned: JPEG quality ramp 80/55/35/18/8
    DistortionKind.JPEG_COMPRESSION: tuple({"quality": q} for q in (80, 55, 35, 18, 8)),
    DistortionKind.MULTIPLE_JPEG_COMPRESSIONS: (
        {"qualities": [90, 85]},
        {"qualities": [70, 55]},
        {"qualities": [50, 38, 30]},
        {"qualities": [35, 24, 18]},
        {"qualities": [22, 14, 9]},
    ),
    DistortionKind.RANDOM_CROP: tuple(
        {"fraction": f} for f in (0.93, 0.85, 0.77, 0.68, 0.6)
    ),
    DistortionKind.RANDOM_ASPECT_CROP: (
        {"area": 0.9, "aspect": 0.15},
        {"area": 0.8, "aspect": 0.25},
        {"area": 0.7, "aspect": 0.35},
        {"area": 0.6, "aspect": 0.5},
        {"area": 0.5, "aspect": 0.65},
    ),
    DistortionKind.DOWNSCALE: tuple({"scale": s} for s in (0.8, 0.65, 0.5, 0.38, 0.28)),
    DistortionKind.PERSPECTIVE_TRANSFORM: tuple(
        {"strength": s} for s in (0.025, 0.05, 0.085, 0.13, 0.19)
    ),
    DistortionKind.SQUISH_RESIZE: tuple({"width": 384, "height": 384} for _ in range(5)),
}

# Required parameter keys and the key whose ramp must be monotone across
# levels ("+" strictly increasing, "-" strictly decreasing, None exempt).
_SCHEMA: dict[DistortionKind, tuple[tuple[str, ...], str | None, str]] = {
    DistortionKind.GAUSSIAN_BLUR: (("sigma",), "sigma", "+"),
    DistortionKind.LENS_BLUR: (("radius",), "radius", "+"),
    DistortionKind.MOTION_BLUR: (("length",), "length", "+"),
    DistortionKind.GLASS_BLUR: (("sigma", "max_delta", "iterations"), "sigma", "+"),
    DistortionKind.PIXELATE: (("scale",), "scale", "-"),
    DistortionKind.WHITE_NOISE: (("sigma",), "sigma", "+"),
    DistortionKind.IMPULSE_NOISE: (("density",), "density", "+"),
    DistortionKind.MULTIPLICATIVE_NOISE: (("sigma",), "sigma", "+"),
    DistortionKind.SHOT_NOISE: (("photons",), "photons", "-"),
    DistortionKind.ISO_NOISE: (("sigma",), "sigma", "+"),
    DistortionKind.COLOR_SHIFT: (("degrees",), "degrees", "+"),
    DistortionKind.COLOR_SATURATION: (("factor",), "factor", "-"),
    DistortionKind.COLOR_JITTER: (("strength", "hue"), "strength", "+"),
    DistortionKind.COLOR_QUANTIZATION: (("levels",), "levels", "-"),
    DistortionKind.RGB_CHANNEL_SHIFT: (("max_shift",), "max_shift", "+"),
    DistortionKind.COLOR_CAST: (("magnitude",), "magnitude", "+"),
    DistortionKind.BRIGHTNESS_INCREASE: (("delta",), "delta", "+"),
    DistortionKind.BRIGHTNESS_DECREASE: (("delta",), "delta", "+"),
    DistortionKind.LINEAR_CONTRAST_CHANGE: (("factor",), "factor", "-"),
    DistortionKind.RANDOM_TONE_CURVE: (("scale",), "scale", "+"),
    DistortionKind.CLAHE: (("clip_limit", "tiles"), "clip_limit", "+"),
    DistortionKind.JPEG_COMPRESSION: (("quality",), "quality", "-"),
    DistortionKind.MULTIPLE_JPEG_COMPRESSIONS: (("qualities",), None, "+"),
    DistortionKind.RANDOM_CROP: (("fraction",), "fraction", "-"),
    DistortionKind.RANDOM_ASPECT_CROP: (("area", "aspect"), "area", "-"),
    DistortionKind.DOWNSCALE: (("scale",), "scale", "-"),
    DistortionKind.PERSPECTIVE_TRANSFORM: (("strength",), "strength", "+"),
    DistortionKind.SQUISH_RESIZE: (("width", "height"), None, "+"),
}


@dataclass
class SeverityTable:
    """Per-kind ordered parameter settings for levels 1..num_levels."""

    num_levels: int = DEFAULT_NUM_LEVELS
    params: dict[DistortionKind, tuple[dict, ...]] = field(default_factory=dict)

    @classmethod
    def default(cls, num_levels: int = DEFAULT_NUM_LEVELS) -> "SeverityTable":
        if num_levels not in (3, 5):
            raise ParameterError(f"num_levels must be 3 or 5, got {num_levels}")
        params = {
            kind: tuple(copy.deepcopy(entry) for entry in entries[:num_levels])
            for kind, entries in _DEFAULT_PARAMS.items()
        }
        table = cls(num_levels=num_levels, params=params)
        table.validate()
        return table

    def params_for(self, kind: DistortionKind | str, level: int) -> dict:
        """Exact table entry for (kind, level); pure lookup, returns a copy."""
        try:
            kind = DistortionKind(kind)
        except ValueError:
            raise ParameterError(f"unknown distortion kind: {kind!r}") from None
        if kind not in self.params:
            raise ParameterError(f"severity table has no entries for {kind}")
        if not isinstance(level, int) or not 1 <= level <= self.num_levels:
            raise ParameterError(
                f"level must be an integer in 1..{self.num_levels}, got {level!r}"
            )
        entry = self.params[kind][level - 1]
        # Entries are flat dicts of scalars (plus the odd list); a structured
        # copy is much cheaper than deepcopy on the plan-sampling hot path.
        return {k: (list(v) if isinstance(v, list) else v) for k, v in entry.items()}

    def override(self, kinds: dict) -> "SeverityTable":
        """New table with only the listed kinds replaced (merge semantics)."""
        merged = {k: tuple(copy.deepcopy(e) for e in v) for k, v in self.params.items()}
        for name, entries in kinds.items():
            kind = DistortionKind(name)
            merged[kind] = tuple(copy.deepcopy(dict(e)) for e in entries)
        table = SeverityTable(num_levels=self.num_levels, params=merged)
        table.validate()
        return table

    def validate(self) -> None:
        """Schema check: entry counts, required keys, value ranges, monotone ramps."""
        for kind, entries in self.params.items():
            required, mono_key, direction = _SCHEMA[kind]
            if len(entries) != self.num_levels:
                raise ParameterError(
                    f"{kind}: expected {self.num_levels} level entries, got {len(entries)}"
                )
            for i, entry in enumerate(entries, start=1):
                if not isinstance(entry, dict):
                    raise ParameterError(f"{kind} level {i}: entry must be a mapping")
                for key in required:
                    if key not in entry:
                        raise ParameterError(f"{kind} level {i}: missing parameter {key!r}")
                _check_ranges(kind, i, entry)
            if mono_key is not None:
                ramp = [entry[mono_key] for entry in entries]
                ok = all(
                    (a < b) if direction == "+" else (a > b)
                    for a, b in zip(ramp, ramp[1:])
                )
                if not ok:
                    word = "increasing" if direction == "+" else "decreasing"
                    raise ParameterError(f"{kind}: {mono_key} ramp must be strictly {word}")
            elif kind is DistortionKind.MULTIPLE_JPEG_COMPRESSIONS:
                mins = [min(entry["qualities"]) for entry in entries]
                if not all(a > b for a, b in zip(mins, mins[1:])):
                    raise ParameterError(
                        f"{kind}: min(qualities) must be strictly decreasing"
                    )

    def to_dict(self) -> dict:
        return {
            "num_levels": self.num_levels,
            "kinds": {
                str(kind): [copy.deepcopy(e) for e in entries]
                for kind, entries in self.params.items()
            },
        }


def _check_ranges(kind: DistortionKind, level: int, entry: dict) -> None:
    def bad(msg):
        raise ParameterError(f"{kind} level {level}: {msg}")

    for key, value in entry.items():
        if key == "qualities":
            if not isinstance(value, (list, tuple)) or len(value) < 1:
                bad("qualities must be a non-empty list")
            if not all(isinstance(q, int) and 1 <= q <= 100 for q in value):
                bad("each quality must be an integer in 1..100")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            bad(f"{key} must be numeric, got {value!r}")
    if "quality" in entry and not 1 <= entry["quality"] <= 100:
        bad("quality must be in 1..100")
    if "density" in entry and not 0.0 <= entry["density"] <= 1.0:
        bad("density must be in [0, 1]")
    for key in ("fraction", "area", "scale"):
        if key in entry and kind is not DistortionKind.RANDOM_TONE_CURVE:
            if not 0.0 < entry[key] <= 1.0:
                bad(f"{key} must be in (0, 1]")
    if "levels" in entry and (entry["levels"] < 2 or entry["levels"] > 256):
        bad("levels must be in 2..256")
    for key in ("sigma", "radius", "length", "max_delta", "iterations", "max_shift",
                "magnitude", "delta", "degrees", "strength", "hue", "clip_limit"):
        if key in entry and entry[key] < 0:
            bad(f"{key} must be non-negative")
    if "tiles" in entry and entry["tiles"] < 1:
        bad("tiles must be >= 1")
    if "photons" in entry and entry["photons"] < 0:
        bad("photons must be non-negative")
    for key in ("width", "height"):
        if key in entry and entry[key] < 1:
            bad(f"{key} must be >= 1")


def severity_params(kind, level: int, table: SeverityTable | None = None) -> dict:
    """Table lookup for (kind, level); defaults to the in-repo table."""
    if table is None:
        table = SeverityTable.default()
    return table.params_for(kind, level)


def load_severity_config(path) -> SeverityTable:
    """Load a JSON severity config, overriding only the kinds it lists.

    Document shape::

        {"num_levels": 5, "kinds": {"gaussian_blur": [{"sigma": 1.0}, ...]}}

    Unlisted kinds keep their in-repo defaults.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot load severity config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParameterError("severity config must be a JSON object")
    num_levels = raw.get("num_levels", DEFAULT_NUM_LEVELS)
    if num_levels not in (3, 5):
        raise ParameterError(f"num_levels must be 3 or 5, got {num_levels!r}")
    kinds = raw.get("kinds", {})
    if not isinstance(kinds, dict):
        raise ParameterError("severity config 'kinds' must be a mapping")
    base = SeverityTable.default(num_levels=num_levels)
    try:
        return base.override(kinds)
    except ValueError as exc:
        raise ParameterError(f"severity config: {exc}") from exc
