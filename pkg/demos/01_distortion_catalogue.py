"""Walk the full distortion catalogue: every kind at severity levels 1..5.

Builds a synthetic test image, applies each transform at each level with a
fixed seed, and pastes the results into one contact sheet per group under
demos/output/.  Geometric kinds change dimensions, so each cell is letterboxed
onto a fixed canvas.
"""

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from wilddistort import DistortionKind, DistortionSpec, ImageBuffer, SeededRng, apply
from wilddistort.severity import SeverityTable, group_of

OUT_DIR = Path(__file__).parent / "output"
CELL = 148
LABEL_H = 14


def synth_image(seed: int, size: int = 144) -> ImageBuffer:
    g = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.zeros((size, size, 3))
    for c in range(3):
        acc = np.zeros((size, size))
        for _ in range(4):
            fx, fy = g.uniform(0.5, 4.0, 2)
            ph = g.uniform(0.0, 2.0 * np.pi, 2)
            acc += g.uniform(0.3, 1.0) * np.sin(2 * np.pi * fx * xx / size + ph[0]) \
                * np.sin(2 * np.pi * fy * yy / size + ph[1])
        acc = (acc - acc.min()) / (acc.max() - acc.min())
        img[:, :, c] = acc * 255
    return ImageBuffer(np.floor(img + 0.5).astype(np.uint8))


def letterbox(img: ImageBuffer) -> Image.Image:
    cell = Image.new("RGB", (CELL, CELL), (30, 30, 30))
    pil = img.to_pil()
    pil.thumbnail((CELL, CELL))
    cell.paste(pil, ((CELL - pil.width) // 2, (CELL - pil.height) // 2))
    return cell


def main():
    OUT_DIR.mkdir(exist_ok=True)
    base = synth_image(7)
    table = SeverityTable.default()
    root = SeededRng(2026)

    by_group = {}
    for kind in DistortionKind:
        by_group.setdefault(str(group_of(kind)), []).append(kind)

    for group, kinds in sorted(by_group.items()):
        rows = len(kinds)
        sheet = Image.new("RGB", (CELL * 6, (CELL + LABEL_H) * rows), (15, 15, 15))
        draw = ImageDraw.Draw(sheet)
        for r, kind in enumerate(kinds):
            y0 = r * (CELL + LABEL_H)
            draw.text((4, y0 + CELL + 1), str(kind), fill=(220, 220, 220))
            sheet.paste(letterbox(base), (0, y0))
            for level in range(1, 6):
                spec = DistortionSpec.from_table(kind, level, table)
                out = apply(base, spec, root.derive(f"{kind}/{level}"))
                sheet.paste(letterbox(out), (level * CELL, y0))
        path = OUT_DIR / f"catalogue_{group}.png"
        sheet.save(path)
        print(f"{group:12s} {len(kinds)} kinds -> {path}")

    print("\ncolumns: original, then severity levels 1..5")


if __name__ == "__main__":
    main()
