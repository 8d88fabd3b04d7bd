"""Directional existence-probability grid over the image."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from .geometry import BBox, ImageDims, ScoredBox


class Direction(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3

    @property
    def step(self) -> tuple[int, int]:
        """(row, col) offset of one grid step."""
        return _STEPS[self]


_STEPS = {
    Direction.UP: (-1, 0),
    Direction.DOWN: (1, 0),
    Direction.LEFT: (0, -1),
    Direction.RIGHT: (0, 1),
}


@dataclass(frozen=True)
class Canvas:
    interval: float
    rows: int
    cols: int
    probs: np.ndarray  # (rows, cols, 4), indexed by Direction
    image: ImageDims

    def point(self, row: int, col: int) -> tuple[float, float]:
        """Pixel location of a grid coordinate, clamped to the image."""
        return coord_to_pixel(row, col, self.interval, self.image)

    def in_grid(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def nearest(self, x: float, y: float) -> tuple[int, int]:
        row = min(max(int(math.floor(y / self.interval + 0.5)), 0), self.rows - 1)
        col = min(max(int(math.floor(x / self.interval + 0.5)), 0), self.cols - 1)
        return row, col


def grid_shape(interval: float, image: ImageDims) -> tuple[int, int]:
    rows = math.ceil(image.height / interval) + 1
    cols = math.ceil(image.width / interval) + 1
    return rows, cols


def coord_to_pixel(row: int, col: int, interval: float, image: ImageDims) -> tuple[float, float]:
    return min(col * interval, float(image.width)), min(row * interval, float(image.height))


def directional_box(
    point: tuple[float, float], direction: Direction, interval: float, image: ImageDims
) -> Optional[BBox]:
    """The interval-sized square next to ``point`` on side ``direction``.

    The square shares the midpoint of one edge with the point, so a Right box
    spans ``(x, y - d/2, x + d, y + d/2)``. It is clipped to the image and is
    None when nothing remains.
    """
    x, y = point
    half = interval / 2.0
    if direction is Direction.RIGHT:
        raw = (x, y - half, x + interval, y + half)
    elif direction is Direction.LEFT:
        raw = (x - interval, y - half, x, y + half)
    elif direction is Direction.UP:
        raw = (x - half, y - interval, x + half, y)
    else:
        raw = (x - half, y, x + half, y + interval)
    x1, y1 = max(raw[0], 0.0), max(raw[1], 0.0)
    x2, y2 = min(raw[2], float(image.width)), min(raw[3], float(image.height))
    if not (x1 < x2 and y1 < y2):
        return None
    return BBox(x1, y1, x2, y2)


def _directional_arrays(interval: float, image: ImageDims):
    rows, cols = grid_shape(interval, image)
    r_idx, c_idx = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    px = np.minimum(c_idx * float(interval), float(image.width))
    py = np.minimum(r_idx * float(interval), float(image.height))
    half = interval / 2.0
    lo_x = np.stack([px - half, px - half, px - interval, px], axis=-1)
    hi_x = np.stack([px + half, px + half, px, px + interval], axis=-1)
    lo_y = np.stack([py - interval, py, py - half, py - half], axis=-1)
    hi_y = np.stack([py, py + interval, py + half, py + half], axis=-1)
    x1 = np.maximum(lo_x, 0.0)
    y1 = np.maximum(lo_y, 0.0)
    x2 = np.minimum(hi_x, float(image.width))
    y2 = np.minimum(hi_y, float(image.height))
    valid = (x1 < x2) & (y1 < y2)
    return rows, cols, x1, y1, x2, y2, valid


def build_canvas(reduced: Sequence[ScoredBox], interval: float, image: ImageDims) -> Canvas:
    """Per coordinate and direction, mean over ``reduced`` of objectness x IoU.

    The IoU is taken against the clipped directional box. Sums use
    ``math.fsum`` so the result does not depend on the order of ``reduced``.
    """
    if interval <= 0:
        raise ValueError("canvas interval must be positive")
    rows, cols, x1, y1, x2, y2, valid = _directional_arrays(interval, image)
    probs = np.zeros((rows, cols, 4))
    if not reduced:
        return Canvas(float(interval), rows, cols, probs, image)

    d_area = (x2 - x1) * (y2 - y1)
    terms = []
    for sb in reduced:
        b = sb.box
        w = np.maximum(0.0, np.minimum(x2, b.x2) - np.maximum(x1, b.x1))
        h = np.maximum(0.0, np.minimum(y2, b.y2) - np.maximum(y1, b.y1))
        inter = w * h
        with np.errstate(divide="ignore", invalid="ignore"):
            # union ordered as iou(box, dirbox) computes it
            union = b.area + d_area - inter
            terms.append(sb.objectness * (inter / union))
    stacked = np.stack(terms, axis=-1)
    n = len(reduced)
    flat = stacked.reshape(-1, n)
    sums = np.fromiter((math.fsum(row) for row in flat), dtype=float, count=flat.shape[0])
    probs = sums.reshape(rows, cols, 4) / n
    probs[~valid] = 0.0
    return Canvas(float(interval), rows, cols, probs, image)
