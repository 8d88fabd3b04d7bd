"""Seeded monotone walks on the canvas between pairs of proposals."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .canvas import Canvas, Direction
from .geometry import BBox, ScoredBox

Coord = tuple[int, int]


class Termination(str, Enum):
    REACHED = "reached"
    DEAD_END = "dead_end"
    LEFT_IMAGE = "left_image"
    BUDGET = "budget"


@dataclass(frozen=True)
class EdgeConfig:
    edges_per_pair: int = 2
    max_steps: Optional[int] = None  # None -> rows + cols
    seed: int = 0

    def __post_init__(self) -> None:
        if self.edges_per_pair < 1:
            raise ValueError("edges_per_pair must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class EdgePath:
    start: int
    end: int
    steps: tuple[Coord, ...]
    hit_concepts: frozenset[int]
    terminated: Termination


def pair_rng(seed: int, pair: tuple[int, int]) -> np.random.Generator:
    """Independent stream per (seed, pair); evaluation order does not matter."""
    return np.random.default_rng(np.random.SeedSequence([seed, pair[0], pair[1]]))


def l1(a: Coord, b: Coord) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def blocked(canvas: Canvas, coord: Coord, others: Sequence[BBox]) -> bool:
    x, y = canvas.point(*coord)
    return any(o.strictly_contains_point(x, y) for o in others)


def hits(canvas: Canvas, steps: Sequence[Coord], reduced: Sequence[ScoredBox]) -> frozenset[int]:
    """Reduced boxes touched by a step point, with a one-interval margin."""
    pad = canvas.interval
    points = [canvas.point(*c) for c in steps]
    out = set()
    for idx, sb in enumerate(reduced):
        b = sb.box
        if any(
            b.x1 - pad <= x <= b.x2 + pad and b.y1 - pad <= y <= b.y2 + pad for x, y in points
        ):
            out.add(idx)
    return frozenset(out)


def _walk(
    canvas: Canvas,
    source: Coord,
    target: Coord,
    others: Sequence[BBox],
    max_steps: int,
    rng: np.random.Generator,
) -> tuple[list[Coord], Termination]:
    steps = [source]
    cur = source
    while True:
        if cur == target:
            return steps, Termination.REACHED
        if len(steps) - 1 >= max_steps:
            return steps, Termination.BUDGET
        here = l1(cur, target)
        admissible: list[Direction] = []
        for d in Direction:
            dr, dc = d.step
            nxt = (cur[0] + dr, cur[1] + dc)
            if not canvas.in_grid(*nxt):
                continue
            if l1(nxt, target) >= here:
                continue
            if blocked(canvas, nxt, others):
                continue
            admissible.append(d)
        if not admissible:
            return steps, Termination.DEAD_END
        weights = np.array([canvas.probs[cur[0], cur[1], d] for d in admissible])
        total = weights.sum()
        u = rng.random()
        if total > 0:
            cdf = np.cumsum(weights) / total
        else:
            cdf = np.arange(1, len(admissible) + 1) / len(admissible)
        choice = admissible[min(int(np.searchsorted(cdf, u, side="right")), len(admissible) - 1)]
        dr, dc = choice.step
        cur = (cur[0] + dr, cur[1] + dc)
        steps.append(cur)


def generate_edges(
    canvas: Canvas,
    start: BBox,
    end: BBox,
    others: Sequence[BBox],
    cfg: EdgeConfig,
    pair_id: tuple[int, int],
    reduced: Sequence[ScoredBox] = (),
) -> list[EdgePath]:
    """Walk ``cfg.edges_per_pair`` times from ``start`` toward ``end``.

    Each step moves one grid coordinate in a cardinal direction, sampled in
    proportion to the canvas probabilities at the current coordinate.
    Directions that do not strictly shrink the L1 grid distance to the
    destination, that land strictly inside a box in ``others``, or that leave
    the grid are zeroed. If every admissible direction has zero probability
    the choice is uniform among them.

    ``reduced`` is only used to fill ``hit_concepts``.
    """
    source = canvas.nearest(*start.center)
    target = canvas.nearest(*end.center)
    max_steps = cfg.max_steps if cfg.max_steps is not None else canvas.rows + canvas.cols
    rng = pair_rng(cfg.seed, pair_id)
    paths = []
    for _ in range(cfg.edges_per_pair):
        steps, why = _walk(canvas, source, target, others, max_steps, rng)
        paths.append(
            EdgePath(
                start=pair_id[0],
                end=pair_id[1],
                steps=tuple(steps),
                hit_concepts=hits(canvas, steps, reduced),
                terminated=why,
            )
        )
    return paths


def extract_pair_concepts(paths: Sequence[EdgePath]) -> frozenset[int]:
    """Concepts hit by every Reached path of one pair; empty if none reached."""
    reached = [p.hit_concepts for p in paths if p.terminated is Termination.REACHED]
    if not reached:
        return frozenset()
    return frozenset.intersection(*reached)


def collect_visual_concepts(
    canvas: Canvas,
    added: Sequence[ScoredBox],
    reduced: Sequence[ScoredBox],
    cfg: EdgeConfig,
) -> tuple[list[int], list[EdgePath]]:
    """Union of per-pair concepts over every unordered pair of ``added``.

    Returns sorted indices into ``reduced`` and all generated paths. A pair's
    own endpoint boxes never count as its concepts.
    """
    concepts: set[int] = set()
    all_paths: list[EdgePath] = []
    boxes = [a.box for a in added]
    for i, j in itertools.combinations(range(len(added)), 2):
        others = [b for k, b in enumerate(boxes) if k not in (i, j)]
        paths = generate_edges(canvas, boxes[i], boxes[j], others, cfg, (i, j), reduced)
        all_paths.extend(paths)
        endpoints = {k for k, r in enumerate(reduced) if r.box in (boxes[i], boxes[j])}
        concepts |= extract_pair_concepts(paths) - endpoints
    return sorted(concepts), all_paths
