"""Grid writers shared by the aliasing, transform and dynamics stages."""

from __future__ import annotations

import io
import json

import numpy as np


def format_float(x):
    # repr round-trips float64 exactly
    return repr(float(x))


def grid_to_csv(grid):
    grid = np.asarray(grid)
    buf = io.StringIO()
    for row in grid:
        buf.write(",".join(format_float(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def csv_to_grid(text):
    rows = [line for line in text.splitlines() if line.strip()]
    return np.array([[float(v) for v in line.split(",")] for line in rows])


def image_to_pgm(image, comment=None):
    """Plain (P2) PGM with maxval 255, 17 samples per line."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    if image.size and (image.min() < 0 or image.max() > 255):
        raise ValueError("pixel values must lie in 0..255")
    rows, cols = image.shape
    lines = ["P2"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{cols} {rows}")
    lines.append("255")
    for row in image.astype(int):
        for start in range(0, cols, 17):
            lines.append(" ".join(str(v) for v in row[start:start + 17]))
    return "\n".join(lines) + "\n"


def read_pgm(text):
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=int)
    if data.size != rows * cols:
        raise ValueError("PGM pixel count does not match header")
    return data.reshape(rows, cols), maxval


def heatmap(grid):
    """Linear map of a real grid onto 0..255 (min -> 0, max -> 255)."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = grid.min(), grid.max()
    if hi == lo:
        return np.zeros(grid.shape, dtype=np.uint8)
    return np.rint((grid - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
