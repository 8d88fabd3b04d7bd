"""Seeded synthetic scenes: clustered RPN boxes around planted objects."""

from __future__ import annotations

import numpy as np

from .geometry import BBox, ImageDims, ScoredBox, overlaps
from .scene import SceneInput


def _box_around(cx: float, cy: float, w: float, h: float, image: ImageDims) -> BBox | None:
    x1, y1 = max(cx - w / 2, 0.0), max(cy - h / 2, 0.0)
    x2, y2 = min(cx + w / 2, float(image.width)), min(cy + h / 2, float(image.height))
    if x2 - x1 < 2 or y2 - y1 < 2:
        return None
    return BBox(x1, y1, x2, y2)


def synthetic_scene(
    seed: int,
    image: ImageDims = ImageDims(800, 600),
    n_proposals: int = 4,
    n_objects: int = 8,
    boxes_per_object: int = 12,
    n_background: int = 40,
    proposal_size: tuple[float, float] = (40.0, 90.0),
    similarity_grid: tuple[int, int] = (30, 40),
) -> SceneInput:
    """A scene with pairwise non-overlapping proposals and object-clustered RPN boxes.

    Objects get dense high-objectness RPN boxes; the background gets sparse
    low-objectness ones. The similarity field is low over objects and
    proposals and higher elsewhere, with a few planted hot spots.
    """
    rng = np.random.default_rng(seed)
    proposals: list[ScoredBox] = []
    tries = 0
    while len(proposals) < n_proposals:
        tries += 1
        if tries > 10_000:
            raise RuntimeError("could not place non-overlapping proposals")
        w, h = rng.uniform(*proposal_size, 2)
        cx = rng.uniform(w / 2, image.width - w / 2)
        cy = rng.uniform(h / 2, image.height - h / 2)
        b = _box_around(cx, cy, w, h, image)
        if b is None or any(overlaps(b, p.box) for p in proposals):
            continue
        proposals.append(ScoredBox(b, float(rng.uniform(0.85, 1.0))))

    rpn: list[ScoredBox] = []
    objects = []
    for _ in range(n_objects):
        cx, cy = rng.uniform(0, image.width), rng.uniform(0, image.height)
        w, h = rng.uniform(30, 160, 2)
        objects.append((cx, cy, w, h))
        base = float(rng.uniform(0.5, 0.95))
        for _ in range(boxes_per_object):
            jx, jy = rng.normal(0, 0.15, 2)
            sw, sh = rng.uniform(0.7, 1.3, 2)
            b = _box_around(cx + jx * w, cy + jy * h, w * sw, h * sh, image)
            if b is not None:
                rpn.append(ScoredBox(b, float(np.clip(base + rng.normal(0, 0.05), 0.0, 1.0))))
    for _ in range(n_background):
        cx, cy = rng.uniform(0, image.width), rng.uniform(0, image.height)
        w, h = rng.uniform(20, 200, 2)
        b = _box_around(cx, cy, w, h, image)
        if b is not None:
            rpn.append(ScoredBox(b, float(rng.uniform(0.0, 0.3))))

    rows, cols = similarity_grid
    ys = (np.arange(rows) + 0.5) * image.height / rows
    xs = (np.arange(cols) + 0.5) * image.width / cols
    gx, gy = np.meshgrid(xs, ys)
    sim = 0.25 + 0.05 * rng.standard_normal((rows, cols))
    for cx, cy, w, h in objects:
        inside = (np.abs(gx - cx) <= w / 2) & (np.abs(gy - cy) <= h / 2)
        sim[inside] -= 0.2
    hot = rng.integers(0, rows * cols, size=max(1, rows * cols // 60))
    sim.flat[hot] = rng.uniform(0.7, 0.95, size=hot.size)
    sim = np.round(np.clip(sim, -1.0, 1.0), 6)

    return SceneInput(
        image=image,
        proposals=proposals,
        rpn=[ScoredBox(BBox(*np.round(s.box.as_list(), 3).tolist()), round(s.objectness, 6)) for s in rpn],
        similarity=sim,
    )
