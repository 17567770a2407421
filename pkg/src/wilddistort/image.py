"""8-bit RGB pixel buffers, float-plane conversion, and color-space helpers.

Conventions pinned here and relied on everywhere else:

* Working format is 8-bit RGB, shape (height, width, 3), dtype uint8.
* Grayscale inputs are replicated to three channels; alpha is composited
  over white on ingest.
* Wherever a float value meets 8 bits it is clamped and rounded
  half-away-from-zero (see :func:`quantize_u8`).
* Distorted and clean outputs are written as PNG (lossless); baseline JPEG
  encoding is pinned in :func:`encode_jpeg`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParameterError

__all__ = [
    "ImageBuffer",
    "quantize_u8",
    "to_float",
    "from_float",
    "rgb_to_hsv",
    "hsv_to_rgb",
    "rgb_hsv_roundtrip",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "load_image",
    "png_bytes",
    "save_png",
    "encode_jpeg",
    "decode_jpeg",
]


@dataclass(frozen=True)
class ImageBuffer:
    """Owned 8-bit RGB raster: pixels has shape (height, width, 3), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.dtype != np.uint8:
            raise ParameterError("ImageBuffer requires a uint8 numpy array")
        if px.ndim != 3 or px.shape[2] != 3:
            raise ParameterError(f"ImageBuffer requires shape (H, W, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ParameterError("ImageBuffer requires width >= 1 and height >= 1")
        object.__setattr__(self, "pixels", np.ascontiguousarray(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 3

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the samples, length width*height*3."""
        return self.pixels.reshape(-1)

    @classmethod
    def full(cls, width: int, height: int, color=(0, 0, 0)) -> "ImageBuffer":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = np.asarray(color, dtype=np.uint8)
        return cls(px)

    def to_pil(self) -> Image.Image:
        return Image.fromarray(self.pixels, mode="RGB")

    def __eq__(self, other) -> bool:
        return isinstance(other, ImageBuffer) and np.array_equal(self.pixels, other.pixels)


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half-away-from-zero to uint8.

    After clamping all values are non-negative, so half-away-from-zero
    reduces to floor(x + 0.5).
    """
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 255.0)
    return np.floor(v + 0.5).astype(np.uint8)


def to_float(img: ImageBuffer) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split into R, G, B float64 planes with values sample/255 exactly."""
    f = img.pixels.astype(np.float64) / 255.0
    return f[:, :, 0], f[:, :, 1], f[:, :, 2]


def from_float(r: np.ndarray, g: np.ndarray, b: np.ndarray) -> ImageBuffer:
    """Rebuild an 8-bit image from [0, 1] planes; round(clamp(v)*255) half-away-from-zero."""
    r, g, b = (np.asarray(p, dtype=np.float64) for p in (r, g, b))
    if not (r.shape == g.shape == b.shape) or r.ndim != 2:
        raise ParameterError(f"plane dimension mismatch: {r.shape}, {g.shape}, {b.shape}")
    stacked = np.stack([r, g, b], axis=2)
    return ImageBuffer(quantize_u8(np.clip(stacked, 0.0, 1.0) * 255.0))


# HSV with h, s, v all in [0, 1) / [0, 1]; matches colorsys conventions.

def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """(H, W, 3) float64 rgb in [0,1] -> hsv with hue in [0, 1)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    v = rgb.max(axis=2)
    c = v - rgb.min(axis=2)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    safe_c = np.where(c > 0, c, 1.0)
    h = np.where(
        v == r, (g - b) / safe_c,
        np.where(v == g, 2.0 + (b - r) / safe_c, 4.0 + (r - g) / safe_c),
    )
    h = np.where(c > 0, (h / 6.0) % 1.0, 0.0)
    return np.stack([h, s, v], axis=2)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[:, :, 0] % 1.0, hsv[:, :, 1], hsv[:, :, 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=2)


def rgb_hsv_roundtrip(img: ImageBuffer) -> ImageBuffer:
    """RGB -> HSV -> RGB with no modification; reproduces input within +-1."""
    f = img.pixels.astype(np.float64) / 255.0
    back = hsv_to_rgb(rgb_to_hsv(f))
    return ImageBuffer(quantize_u8(back * 255.0))


# Full-range BT.601 YCbCr (the JPEG convention), float64 in/out on [0, 255].

def rgb_to_ycbcr(px: np.ndarray) -> np.ndarray:
    px = np.asarray(px, dtype=np.float64)
    r, g, b = px[:, :, 0], px[:, :, 1], px[:, :, 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168735892 * r - 0.331264108 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418687589 * g - 0.081312411 * b
    return np.stack([y, cb, cr], axis=2)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    ycc = np.asarray(ycc, dtype=np.float64)
    y, cb, cr = ycc[:, :, 0], ycc[:, :, 1] - 128.0, ycc[:, :, 2] - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136286 * cb - 0.714136286 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=2)


# Codecs.  PNG and baseline JPEG are decoded on ingest; output is PNG unless
# a compression distortion produced the pixels (those are still stored as
# PNG of the decoded result, which is lossless).

def load_image(path) -> ImageBuffer:
    """Decode PNG/JPEG; replicate grayscale, composite alpha over white."""
    with Image.open(path) as im:
        im.load()
        if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
            rgba = im.convert("RGBA")
            background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
            im = Image.alpha_composite(background, rgba)
        rgb = im.convert("RGB")
    return ImageBuffer(np.asarray(rgb, dtype=np.uint8))


def png_bytes(img: ImageBuffer) -> bytes:
    """PNG encoding with the package-pinned (default) encoder settings."""
    buf = io.BytesIO()
    img.to_pil().save(buf, format="PNG")
    return buf.getvalue()


def save_png(img: ImageBuffer, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(png_bytes(img))


def encode_jpeg(img: ImageBuffer, quality: int) -> bytes:
    """Baseline JPEG with pinned settings.

    4:2:0 chroma subsampling below quality 90, 4:4:4 at 90 and above;
    standard Annex-K quantization tables scaled by the libjpeg quality
    convention (Pillow's default), no progressive scan.
    """
    if not 1 <= int(quality) <= 100:
        raise ParameterError(f"JPEG quality must be in 1..100, got {quality}")
    buf = io.BytesIO()
    subsampling = 0 if quality >= 90 else 2
    img.to_pil().save(buf, format="JPEG", quality=int(quality), subsampling=subsampling)
    return buf.getvalue()


def decode_jpeg(data: bytes) -> ImageBuffer:
    with Image.open(io.BytesIO(data)) as im:
        rgb = im.convert("RGB")
    return ImageBuffer(np.asarray(rgb, dtype=np.uint8))
