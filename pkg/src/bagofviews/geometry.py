"""Axis-aligned box algebra.

Boxes are closed real-valued rectangles in image pixel coordinates
(origin top-left), stored as ``(x1, y1, x2, y2)`` with ``area = w * h``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True, order=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite box coordinates: {coords}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate box: {coords}")

    @classmethod
    def from_seq(cls, seq: Sequence[float]) -> "BBox":
        x1, y1, x2, y2 = (float(v) for v in seq)
        return cls(x1, y1, x2, y2)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    def contains(self, other: "BBox") -> bool:
        return (
            self.x1 <= other.x1
            and self.y1 <= other.y1
            and self.x2 >= other.x2
            and self.y2 >= other.y2
        )

    def contains_point(self, x: float, y: float) -> bool:
        """Closed containment."""
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def strictly_contains_point(self, x: float, y: float) -> bool:
        return self.x1 < x < self.x2 and self.y1 < y < self.y2


@dataclass(frozen=True)
class ScoredBox:
    box: BBox
    objectness: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "objectness", float(self.objectness))
        if not (0.0 <= self.objectness <= 1.0):
            raise ValueError(f"objectness outside [0, 1]: {self.objectness}")


@dataclass(frozen=True)
class ImageDims:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dims must be positive: {self.width}x{self.height}")

    @property
    def diag(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def box(self) -> BBox:
        return BBox(0.0, 0.0, float(self.width), float(self.height))


def intersection_area(a: BBox, b: BBox) -> float:
    w = max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))
    h = max(0.0, min(a.y2, b.y2) - max(a.y1, b.y1))
    return w * h


def overlaps(a: BBox, b: BBox) -> bool:
    """True when the interiors of ``a`` and ``b`` intersect."""
    return min(a.x2, b.x2) > max(a.x1, b.x1) and min(a.y2, b.y2) > max(a.y1, b.y1)


def intersection(a: BBox, b: BBox) -> Optional[BBox]:
    if not overlaps(a, b):
        return None
    return BBox(max(a.x1, b.x1), max(a.y1, b.y1), min(a.x2, b.x2), min(a.y2, b.y2))


def iou(a: BBox, b: BBox) -> float:
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union


def merge(a: BBox, b: BBox) -> BBox:
    """Smallest box containing both ``a`` and ``b``."""
    return BBox(min(a.x1, b.x1), min(a.y1, b.y1), max(a.x2, b.x2), max(a.y2, b.y2))


def hull(boxes: Iterable[BBox]) -> BBox:
    it = iter(boxes)
    try:
        out = next(it)
    except StopIteration:
        raise ValueError("hull of an empty box collection") from None
    for b in it:
        out = merge(out, b)
    return out


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU, in [-1, 1]."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    enclosing = merge(a, b).area
    return inter / union - (enclosing - union) / enclosing


def center_distance(a: BBox, b: BBox) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


def aspect_score(b: BBox) -> float:
    """Short side over long side; 1.0 for squares."""
    return min(b.width, b.height) / max(b.width, b.height)


def clip(box: BBox, image: ImageDims) -> Optional[BBox]:
    """Clip to the image frame, or None when nothing with positive area remains."""
    x1, y1 = max(box.x1, 0.0), max(box.y1, 0.0)
    x2, y2 = min(box.x2, float(image.width)), min(box.y2, float(image.height))
    if x1 < x2 and y1 < y2:
        return BBox(x1, y1, x2, y2)
    return None


def trim(window: BBox, owner: BBox, obstacles: Sequence[BBox]) -> Optional[BBox]:
    """Shrink ``window`` so its interior avoids every obstacle while keeping ``owner``.

    Each side of the result either stays on the window boundary or is pulled
    in to the near edge of an obstacle lying entirely beyond the owner on that
    side. All such side combinations are enumerated and the largest valid box
    wins; ties prefer keeping the right and bottom sides, i.e. shrinking the
    left/top first.

    Returns None when an obstacle overlaps the owner's interior, since no box
    containing the owner can then avoid it.
    """
    if not window.contains(owner):
        raise ValueError("trim requires the owner to lie inside the window")
    blocking = [o for o in obstacles if overlaps(o, window)]
    if not blocking:
        return window
    if any(overlaps(o, owner) for o in blocking):
        return None

    lefts = sorted({window.x1} | {o.x2 for o in blocking if window.x1 < o.x2 <= owner.x1})
    rights = sorted({window.x2} | {o.x1 for o in blocking if owner.x2 <= o.x1 < window.x2})
    tops = sorted({window.y1} | {o.y2 for o in blocking if window.y1 < o.y2 <= owner.y1})
    bottoms = sorted({window.y2} | {o.y1 for o in blocking if owner.y2 <= o.y1 < window.y2})

    best: Optional[BBox] = None
    best_key: Optional[tuple] = None
    for x1, x2, y1, y2 in itertools.product(lefts, rights, tops, bottoms):
        cand = BBox(x1, y1, x2, y2)
        if any(overlaps(o, cand) for o in blocking):
            continue
        key = (cand.area, x2, y2, -x1, -y1)
        if best_key is None or key > best_key:
            best, best_key = cand, key
    # the owner itself is always a valid candidate, so best is set
    return best
