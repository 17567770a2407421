"""The degradation catalogue: every supported transform, level-parameterized.

Each operation takes a uint8 (H, W, 3) array plus a resolved parameter
record and draws any per-application randomness (noise fields, crop
offsets, angles, tone-curve control points) from the supplied
:class:`~wilddistort.rng.SeededRng` only.  Values that were drawn are
recorded back into the spec's params so a manifest replays exactly.

Shared conventions:

* reflect-101 padding for every convolution ("mirror" mode),
* gaussian kernels truncated at radius ceil(3*sigma) and renormalized,
* one rounding rule everywhere a float meets 8 bits (half-away-from-zero),
* geometric kinds may change dimensions; all other kinds preserve them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import ParameterError, SizingError
from .image import (
    ImageBuffer,
    decode_jpeg,
    encode_jpeg,
    hsv_to_rgb,
    quantize_u8,
    rgb_to_hsv,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)
from .rng import SeededRng
from .severity import (
    DistortionGroup,
    DistortionKind,
    SeverityTable,
    group_of,
    severity_params,
)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

__all__ = [
    "DistortionSpec",
    "apply",
    "jpeg_roundtrip",
    "gaussian_kernel1d",
    "disk_kernel",
    "motion_kernel",
]


@dataclass
class DistortionSpec:
    """One transform instance: kind, severity level, resolved parameters."""

    kind: DistortionKind
    level: int
    params: dict
    group: DistortionGroup = None

    def __post_init__(self):
        self.kind = DistortionKind(self.kind)
        if self.group is None:
            self.group = group_of(self.kind)
        else:
            self.group = DistortionGroup(self.group)

    @classmethod
    def from_table(cls, kind, level: int, table: SeverityTable | None = None):
        kind = DistortionKind(kind)
        return cls(kind=kind, level=level, params=severity_params(kind, level, table))

    def to_dict(self) -> dict:
        return {
            "kind": str(self.kind),
            "level": self.level,
            "group": str(self.group),
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DistortionSpec":
        return cls(kind=d["kind"], level=d["level"], params=dict(d["params"]),
                   group=d.get("group"))


# Kernel constructions ------------------------------------------------------

def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Truncated gaussian, radius ceil(3*sigma), renormalized; [1] for sigma=0."""
    if sigma < 0:
        raise ParameterError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return np.array([1.0])
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def disk_kernel(radius: float) -> np.ndarray:
    """Uniform disk: 1 inside x^2 + y^2 <= r^2, normalized; single pixel for r=0."""
    if radius < 0:
        raise ParameterError(f"radius must be non-negative, got {radius}")
    r = int(math.ceil(radius))
    y, x = np.mgrid[-r:r + 1, -r:r + 1]
    mask = (x * x + y * y) <= radius * radius + 1e-9
    k = mask.astype(np.float64)
    return k / k.sum()


def motion_kernel(length: int, angle: float) -> np.ndarray:
    """Length-`length` line at `angle` radians, bilinearly splatted, normalized."""
    length = int(length)
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    if length == 1:
        return np.array([[1.0]])
    size = length
    k = np.zeros((size, size), dtype=np.float64)
    c = (size - 1) / 2.0
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    for t in np.arange(length, dtype=np.float64) - (length - 1) / 2.0:
        x = c + t * cos_a
        y = c + t * sin_a
        x0, y0 = int(math.floor(x)), int(math.floor(y))
        fx, fy = x - x0, y - y0
        for dy, wy in ((0, 1 - fy), (1, fy)):
            for dx, wx in ((0, 1 - fx), (1, fx)):
                yy, xx = y0 + dy, x0 + dx
                if 0 <= yy < size and 0 <= xx < size:
                    k[yy, xx] += wy * wx
    return k / k.sum()


def _require_min_size(px: np.ndarray, kind: DistortionKind, min_side: int = 2) -> None:
    h, w = px.shape[:2]
    if min(h, w) < min_side:
        raise SizingError(
            f"{kind}: image {w}x{h} is below the {min_side}px minimum side"
        )


def _convolve_sep(px: np.ndarray, k1d: np.ndarray) -> np.ndarray:
    f = px.astype(np.float64)
    for axis in (0, 1):
        f = ndimage.convolve1d(f, k1d, axis=axis, mode="mirror")
    return f


def _convolve2d(px: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    f = px.astype(np.float64)
    out = np.empty_like(f)
    for c in range(3):
        out[:, :, c] = ndimage.convolve(f[:, :, c], kernel, mode="mirror")
    return out


# Blur group -----------------------------------------------------------------

def _op_gaussian_blur(px, params, rng):
    _require_min_size(px, DistortionKind.GAUSSIAN_BLUR)
    return quantize_u8(_convolve_sep(px, gaussian_kernel1d(params["sigma"]))), {}


def _op_lens_blur(px, params, rng):
    _require_min_size(px, DistortionKind.LENS_BLUR)
    return quantize_u8(_convolve2d(px, disk_kernel(params["radius"]))), {}


def _op_motion_blur(px, params, rng):
    _require_min_size(px, DistortionKind.MOTION_BLUR)
    angle = params.get("angle")
    extras = {}
    if angle is None:
        angle = float(rng.uniform(0.0, math.pi))
        extras["angle"] = angle
    return quantize_u8(_convolve2d(px, motion_kernel(params["length"], angle))), extras


if _HAVE_NUMBA:

    @njit(cache=True)
    def _swap_pixels(px, dy, dx):  # pragma: no cover - exercised via glass_blur
        iters, h, w = dy.shape
        for k in range(iters):
            for y in range(h):
                for x in range(w):
                    y2 = y + dy[k, y, x]
                    if y2 < 0:
                        y2 = 0
                    elif y2 >= h:
                        y2 = h - 1
                    x2 = x + dx[k, y, x]
                    if x2 < 0:
                        x2 = 0
                    elif x2 >= w:
                        x2 = w - 1
                    for c in range(3):
                        tmp = px[y, x, c]
                        px[y, x, c] = px[y2, x2, c]
                        px[y2, x2, c] = tmp

else:  # pragma: no cover - fallback used only without numba

    def _swap_pixels(px, dy, dx):
        iters, h, w = dy.shape
        for k in range(iters):
            for y in range(h):
                for x in range(w):
                    y2 = min(max(y + dy[k, y, x], 0), h - 1)
                    x2 = min(max(x + dx[k, y, x], 0), w - 1)
                    tmp = px[y, x].copy()
                    px[y, x] = px[y2, x2]
                    px[y2, x2] = tmp


def _op_glass_blur(px, params, rng):
    """Iterated raster-order local pixel swaps within max_delta, then gaussian blur."""
    _require_min_size(px, DistortionKind.GLASS_BLUR)
    delta = int(params["max_delta"])
    iters = int(params["iterations"])
    h, w = px.shape[:2]
    out = px.copy()
    if delta > 0 and iters > 0:
        dy = rng.integers(-delta, delta + 1, size=(iters, h, w))
        dx = rng.integers(-delta, delta + 1, size=(iters, h, w))
        _swap_pixels(out, dy, dx)
    return quantize_u8(_convolve_sep(out, gaussian_kernel1d(params["sigma"]))), {}


# Noise group ----------------------------------------------------------------

def _op_white_noise(px, params, rng):
    noise = rng.normal(0.0, params["sigma"], size=px.shape)
    return quantize_u8(px.astype(np.float64) + noise), {}


def _op_impulse_noise(px, params, rng):
    h, w = px.shape[:2]
    hit = rng.random((h, w)) < params["density"]
    salt = rng.random((h, w)) < 0.5
    out = px.copy()
    out[hit & salt] = 255
    out[hit & ~salt] = 0
    return out, {}


def _op_multiplicative_noise(px, params, rng):
    noise = rng.normal(0.0, params["sigma"], size=px.shape)
    return quantize_u8(px.astype(np.float64) * (1.0 + noise)), {}


def _op_shot_noise(px, params, rng):
    photons = params["photons"]
    if photons <= 0:
        return px.copy(), {}
    lam = px.astype(np.float64) / 255.0 * photons
    return quantize_u8(rng.poisson(lam).astype(np.float64) / photons * 255.0), {}


def _op_iso_noise(px, params, rng):
    """Gaussian luma noise at sigma plus chroma noise at sigma/2, in YCbCr."""
    sigma = params["sigma"]
    h, w = px.shape[:2]
    ycc = rgb_to_ycbcr(px.astype(np.float64))
    ycc[:, :, 0] += rng.normal(0.0, sigma, size=(h, w))
    ycc[:, :, 1] += rng.normal(0.0, sigma / 2.0, size=(h, w))
    ycc[:, :, 2] += rng.normal(0.0, sigma / 2.0, size=(h, w))
    return quantize_u8(ycbcr_to_rgb(ycc)), {}


# Color group ----------------------------------------------------------------

def _op_color_shift(px, params, rng):
    direction = params.get("direction")
    extras = {}
    if direction is None:
        direction = 1 if rng.random() < 0.5 else -1
        extras["direction"] = direction
    hsv = rgb_to_hsv(px.astype(np.float64) / 255.0)
    hsv[:, :, 0] = (hsv[:, :, 0] + direction * params["degrees"] / 360.0) % 1.0
    return quantize_u8(hsv_to_rgb(hsv) * 255.0), extras


def _op_color_saturation(px, params, rng):
    hsv = rgb_to_hsv(px.astype(np.float64) / 255.0)
    hsv[:, :, 1] = np.clip(hsv[:, :, 1] * params["factor"], 0.0, 1.0)
    return quantize_u8(hsv_to_rgb(hsv) * 255.0), {}


def _op_color_jitter(px, params, rng):
    """Brightness, contrast, saturation, hue jitter applied in that fixed order."""
    m, hue_span = params["strength"], params["hue"]
    extras = {}
    if "brightness_factor" in params:
        b, c, s = (params["brightness_factor"], params["contrast_factor"],
                   params["saturation_factor"])
        hue = params["hue_shift"]
    else:
        b = float(rng.uniform(1.0 - m, 1.0 + m))
        c = float(rng.uniform(1.0 - m, 1.0 + m))
        s = float(rng.uniform(1.0 - m, 1.0 + m))
        hue = float(rng.uniform(-hue_span, hue_span))
        extras = {"brightness_factor": b, "contrast_factor": c,
                  "saturation_factor": s, "hue_shift": hue}
    f = px.astype(np.float64) * b
    luma = 0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2]
    f = (f - luma.mean()) * c + luma.mean()
    luma = (0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2])[:, :, None]
    f = luma + (f - luma) * s
    hsv = rgb_to_hsv(np.clip(f, 0.0, 255.0) / 255.0)
    hsv[:, :, 0] = (hsv[:, :, 0] + hue) % 1.0
    return quantize_u8(hsv_to_rgb(hsv) * 255.0), extras


def _op_color_quantization(px, params, rng):
    """Uniform per-channel requantization to `levels` evenly spaced bins."""
    k = int(params["levels"])
    i = np.arange(256, dtype=np.float64)
    lut = quantize_u8(np.floor(i * (k - 1) / 255.0 + 0.5) * (255.0 / (k - 1)))
    return lut[px], {}


def _op_rgb_channel_shift(px, params, rng):
    m = int(params["max_shift"])
    h, w = px.shape[:2]
    if m > min(h, w) - 1:
        raise SizingError(
            f"{DistortionKind.RGB_CHANNEL_SHIFT}: shift {m} exceeds image {w}x{h}"
        )
    offsets = params.get("offsets")
    extras = {}
    if offsets is None:
        offsets = [[int(v) for v in rng.integers(-m, m + 1, size=2)] for _ in range(3)]
        extras["offsets"] = offsets
    out = np.empty_like(px)
    for c, (dy, dx) in enumerate(offsets):
        padded = np.pad(px[:, :, c], ((m, m), (m, m)), mode="reflect")
        out[:, :, c] = padded[m - dy:m - dy + h, m - dx:m - dx + w]
    return out, extras


def _op_color_cast(px, params, rng):
    """Additive per-channel tint along a random unit direction, scaled by magnitude."""
    tint = params.get("tint")
    extras = {}
    if tint is None:
        v = rng.normal(size=3)
        while float(np.linalg.norm(v)) < 1e-12:
            v = rng.normal(size=3)
        tint = [float(x) for x in v / np.linalg.norm(v) * params["magnitude"]]
        extras["tint"] = tint
    return quantize_u8(px.astype(np.float64) + np.asarray(tint)), extras


# Tone group -----------------------------------------------------------------

def _op_brightness_increase(px, params, rng):
    return quantize_u8(px.astype(np.float64) + params["delta"]), {}


def _op_brightness_decrease(px, params, rng):
    return quantize_u8(px.astype(np.float64) - params["delta"]), {}


def _op_linear_contrast_change(px, params, rng):
    f = (px.astype(np.float64) - 127.5) * params["factor"] + 127.5
    return quantize_u8(f), {}


def _op_random_tone_curve(px, params, rng):
    """Cubic Bezier tone curve through control points drawn around (1/3, 2/3).

    With x-control points at 1/3 and 2/3 the curve parameter equals x, so
    scale=0 yields the exact identity LUT.
    """
    s = params["scale"]
    extras = {}
    if "low_y" in params:
        low, high = params["low_y"], params["high_y"]
    else:
        low = float(np.clip(rng.normal(1.0 / 3.0, s), 0.0, 1.0))
        high = float(np.clip(rng.normal(2.0 / 3.0, s), 0.0, 1.0))
        extras = {"low_y": low, "high_y": high}
    t = np.arange(256, dtype=np.float64) / 255.0
    curve = 3 * (1 - t) ** 2 * t * low + 3 * (1 - t) * t ** 2 * high + t ** 3
    lut = quantize_u8(curve * 255.0)
    return lut[px], extras


def _clahe_histograms(tiles: np.ndarray, clip_limit: float):
    """Clipped per-tile histograms (before redistribution) and the bin limit.

    tiles has shape (ty, tx, th, tw) uint8.  The limit follows the
    clip_limit * tile_pixels / 256 convention, floored at 1.
    """
    ty, tx, th, tw = tiles.shape
    limit = max(1.0, clip_limit * th * tw / 256.0)
    hists = np.empty((ty, tx, 256), dtype=np.float64)
    for i in range(ty):
        for j in range(tx):
            hists[i, j] = np.bincount(tiles[i, j].ravel(), minlength=256)
    return np.minimum(hists, limit), limit


def _op_clahe(px, params, rng):
    """Contrast-limited adaptive histogram equalization on the luma channel.

    The image is reflect-padded to a whole tile grid; per-tile mappings are
    round(cdf * 255) of the clipped-and-redistributed histogram, and each
    pixel blends the four neighboring tile mappings bilinearly.
    """
    clip_limit = float(params["clip_limit"])
    tiles = int(params["tiles"])
    h, w = px.shape[:2]
    ty, tx = min(tiles, h), min(tiles, w)
    th, tw = math.ceil(h / ty), math.ceil(w / tx)
    pad_y, pad_x = ty * th - h, tx * tw - w

    ycc = rgb_to_ycbcr(px.astype(np.float64))
    y8 = quantize_u8(ycc[:, :, 0])
    yp = np.pad(y8, ((0, pad_y), (0, pad_x)), mode="reflect")
    grid = yp.reshape(ty, th, tx, tw).transpose(0, 2, 1, 3)

    hists, _ = _clahe_histograms(grid, clip_limit)
    excess = grid.shape[2] * grid.shape[3] - hists.sum(axis=2)
    hists += excess[:, :, None] / 256.0
    cdf = np.cumsum(hists, axis=2) / (th * tw)
    luts = quantize_u8(cdf * 255.0).astype(np.float64)  # (ty, tx, 256)

    yy = np.arange(yp.shape[0], dtype=np.float64)[:, None]
    xx = np.arange(yp.shape[1], dtype=np.float64)[None, :]
    gy = (yy - (th - 1) / 2.0) / th
    gx = (xx - (tw - 1) / 2.0) / tw
    i0 = np.clip(np.floor(gy).astype(np.int64), 0, ty - 1)
    j0 = np.clip(np.floor(gx).astype(np.int64), 0, tx - 1)
    i1 = np.minimum(i0 + 1, ty - 1)
    j1 = np.minimum(j0 + 1, tx - 1)
    fy = np.clip(gy - np.floor(gy), 0.0, 1.0)
    fx = np.clip(gx - np.floor(gx), 0.0, 1.0)
    i0b, i1b = np.broadcast_to(i0, yp.shape), np.broadcast_to(i1, yp.shape)
    j0b, j1b = np.broadcast_to(j0, yp.shape), np.broadcast_to(j1, yp.shape)
    v = yp.astype(np.int64)
    out = (
        luts[i0b, j0b, v] * (1 - fy) * (1 - fx)
        + luts[i0b, j1b, v] * (1 - fy) * fx
        + luts[i1b, j0b, v] * fy * (1 - fx)
        + luts[i1b, j1b, v] * fy * fx
    )[:h, :w]

    ycc[:, :, 0] = out
    return quantize_u8(ycbcr_to_rgb(ycc)), {}


# Compression group ----------------------------------------------------------

def jpeg_roundtrip(img: ImageBuffer, quality: int) -> ImageBuffer:
    """Encode as pinned baseline JPEG at `quality` and decode back."""
    return decode_jpeg(encode_jpeg(img, quality))


def _op_jpeg_compression(px, params, rng):
    return jpeg_roundtrip(ImageBuffer(px), int(params["quality"])).pixels, {}


def _op_multiple_jpeg_compressions(px, params, rng):
    out = ImageBuffer(px)
    for q in params["qualities"]:
        out = jpeg_roundtrip(out, int(q))
    return out.pixels, {}


def _op_pixelate(px, params, rng):
    scale = params["scale"]
    h, w = px.shape[:2]
    sw = max(1, int(math.floor(w * scale + 0.5)))
    sh = max(1, int(math.floor(h * scale + 0.5)))
    im = Image.fromarray(px, mode="RGB")
    small = im.resize((sw, sh), Image.Resampling.BOX)
    return np.asarray(small.resize((w, h), Image.Resampling.NEAREST)), {}


# Geometric group ------------------------------------------------------------

def _crop_window(px, kind, cw, ch):
    h, w = px.shape[:2]
    if cw < 1 or ch < 1 or cw > w or ch > h:
        raise SizingError(f"{kind}: crop window {cw}x{ch} does not fit image {w}x{h}")


def _op_random_crop(px, params, rng):
    """Output size round(side * fraction) per side; offset drawn uniformly."""
    fraction = params["fraction"]
    h, w = px.shape[:2]
    cw = int(math.floor(w * fraction + 0.5))
    ch = int(math.floor(h * fraction + 0.5))
    _crop_window(px, DistortionKind.RANDOM_CROP, cw, ch)
    extras = {}
    if "x0" in params:
        x0, y0 = params["x0"], params["y0"]
    else:
        x0 = int(rng.integers(0, w - cw + 1))
        y0 = int(rng.integers(0, h - ch + 1))
        extras = {"x0": x0, "y0": y0, "crop_width": cw, "crop_height": ch}
    return px[y0:y0 + ch, x0:x0 + cw].copy(), extras


def _op_random_aspect_crop(px, params, rng):
    """Crop of `area` fraction at an aspect ratio drawn log-uniformly in
    [1/(1+aspect), 1+aspect], clamped to the image."""
    h, w = px.shape[:2]
    extras = {}
    if "crop_width" in params:
        cw, ch = params["crop_width"], params["crop_height"]
        x0, y0 = params["x0"], params["y0"]
    else:
        span = math.log(1.0 + params["aspect"])
        ratio = math.exp(float(rng.uniform(-span, span)))
        target = params["area"] * w * h
        cw = min(w, max(1, int(math.floor(math.sqrt(target * ratio) + 0.5))))
        ch = min(h, max(1, int(math.floor(math.sqrt(target / ratio) + 0.5))))
        x0 = int(rng.integers(0, w - cw + 1))
        y0 = int(rng.integers(0, h - ch + 1))
        extras = {"ratio": ratio, "crop_width": cw, "crop_height": ch,
                  "x0": x0, "y0": y0}
    _crop_window(px, DistortionKind.RANDOM_ASPECT_CROP, cw, ch)
    return px[y0:y0 + ch, x0:x0 + cw].copy(), extras


def _op_downscale(px, params, rng):
    """Output size round(side * scale) per side (floored at 1), bilinear."""
    scale = params["scale"]
    h, w = px.shape[:2]
    sw = max(1, int(math.floor(w * scale + 0.5)))
    sh = max(1, int(math.floor(h * scale + 0.5)))
    im = Image.fromarray(px, mode="RGB")
    return np.asarray(im.resize((sw, sh), Image.Resampling.BILINEAR)), {}


def _op_squish_resize(px, params, rng):
    """Direct resize to the fixed target, ignoring aspect ratio, bilinear."""
    im = Image.fromarray(px, mode="RGB")
    target = (int(params["width"]), int(params["height"]))
    return np.asarray(im.resize(target, Image.Resampling.BILINEAR)), {}


def _perspective_coeffs(src_quad, dst_quad) -> list[float]:
    """PIL PERSPECTIVE coefficients mapping output coords to source coords."""
    a = []
    b = []
    for (u, v), (x, y) in zip(dst_quad, src_quad):
        a.append([u, v, 1, 0, 0, 0, -u * x, -v * x])
        a.append([0, 0, 0, u, v, 1, -u * y, -v * y])
        b.extend([x, y])
    return list(np.linalg.solve(np.asarray(a, dtype=np.float64),
                                np.asarray(b, dtype=np.float64)))


def _op_perspective_transform(px, params, rng):
    """Jitter the four corners by up to strength * side and warp back onto
    the original canvas (bilinear, black fill)."""
    strength = params["strength"]
    h, w = px.shape[:2]
    extras = {}
    if "corner_offsets" in params:
        offsets = params["corner_offsets"]
    else:
        offsets = [
            [float(rng.uniform(-strength * w, strength * w)),
             float(rng.uniform(-strength * h, strength * h))]
            for _ in range(4)
        ]
        extras["corner_offsets"] = offsets
    dst = [(0.0, 0.0), (float(w), 0.0), (float(w), float(h)), (0.0, float(h))]
    src = [(cx + dx, cy + dy) for (cx, cy), (dx, dy) in zip(dst, offsets)]
    coeffs = _perspective_coeffs(src, dst)
    im = Image.fromarray(px, mode="RGB")
    warped = im.transform((w, h), Image.Transform.PERSPECTIVE, coeffs,
                          resample=Image.Resampling.BILINEAR, fillcolor=(0, 0, 0))
    return np.asarray(warped), extras


_OPS = {
    DistortionKind.GAUSSIAN_BLUR: _op_gaussian_blur,
    DistortionKind.LENS_BLUR: _op_lens_blur,
    DistortionKind.MOTION_BLUR: _op_motion_blur,
    DistortionKind.GLASS_BLUR: _op_glass_blur,
    DistortionKind.PIXELATE: _op_pixelate,
    DistortionKind.WHITE_NOISE: _op_white_noise,
    DistortionKind.IMPULSE_NOISE: _op_impulse_noise,
    DistortionKind.MULTIPLICATIVE_NOISE: _op_multiplicative_noise,
    DistortionKind.SHOT_NOISE: _op_shot_noise,
    DistortionKind.ISO_NOISE: _op_iso_noise,
    DistortionKind.COLOR_SHIFT: _op_color_shift,
    DistortionKind.COLOR_SATURATION: _op_color_saturation,
    DistortionKind.COLOR_JITTER: _op_color_jitter,
    DistortionKind.COLOR_QUANTIZATION: _op_color_quantization,
    DistortionKind.RGB_CHANNEL_SHIFT: _op_rgb_channel_shift,
    DistortionKind.COLOR_CAST: _op_color_cast,
    DistortionKind.BRIGHTNESS_INCREASE: _op_brightness_increase,
    DistortionKind.BRIGHTNESS_DECREASE: _op_brightness_decrease,
    DistortionKind.LINEAR_CONTRAST_CHANGE: _op_linear_contrast_change,
    DistortionKind.RANDOM_TONE_CURVE: _op_random_tone_curve,
    DistortionKind.CLAHE: _op_clahe,
    DistortionKind.JPEG_COMPRESSION: _op_jpeg_compression,
    DistortionKind.MULTIPLE_JPEG_COMPRESSIONS: _op_multiple_jpeg_compressions,
    DistortionKind.RANDOM_CROP: _op_random_crop,
    DistortionKind.RANDOM_ASPECT_CROP: _op_random_aspect_crop,
    DistortionKind.DOWNSCALE: _op_downscale,
    DistortionKind.SQUISH_RESIZE: _op_squish_resize,
    DistortionKind.PERSPECTIVE_TRANSFORM: _op_perspective_transform,
}


def apply(img: ImageBuffer, spec: DistortionSpec, rng: SeededRng) -> ImageBuffer:
    """Apply one distortion; all randomness comes from `rng`.

    Values drawn per application (angles, offsets, tint vectors, curve
    control points) are recorded into ``spec.params`` so the spec, once
    serialized into a manifest, fully describes what happened.
    """
    kind = DistortionKind(spec.kind)
    op = _OPS.get(kind)
    if op is None:
        raise ParameterError(f"unknown distortion kind: {spec.kind!r}")
    out, extras = op(img.pixels, spec.params, rng)
    if extras:
        spec.params.update(extras)
    return ImageBuffer(np.ascontiguousarray(out))
