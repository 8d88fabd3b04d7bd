"""Baseline region-sampling strategies and the unnecessary-neighbor analyzer."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import baron
from .config import PipelineConfig
from .flops import FlopsReport, VitSpec, crops_report
from .geometry import BBox, ImageDims, giou, hull, iou
from .pipeline import run_pipeline
from .scene import SceneInput


class Strategy(str, Enum):
    GRID = "grid"
    RANDOM = "random"
    RANDOM_TIGHT = "random_tight"
    RANDOM_NEIGHBOR = "random_neighbor"
    BARON_REDUCED = "baron_reduced"
    BARON = "baron"
    SBV = "sbv"


@dataclass(frozen=True)
class BenchConfig:
    n_bags: int = 3
    neighbors_per_bag: int = 2
    grid_side: int = 6
    random_regions: int = 36
    baron_reduced_proposals: int = 12
    seed: int = 0
    neighbor_retries: int = 1000

    def __post_init__(self) -> None:
        for name in ("n_bags", "neighbors_per_bag", "grid_side", "random_regions",
                     "baron_reduced_proposals", "neighbor_retries"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def bag_size(self) -> int:
        return self.neighbors_per_bag + 1


@dataclass(frozen=True)
class RegionGroup:
    """Regions encoded together, and the crop they are encoded from."""

    regions: tuple[BBox, ...]
    crop: BBox


@dataclass(frozen=True)
class AnalyzerThresholds:
    iou_min: float = 0.85
    cos_max: float = 0.8

    def __post_init__(self) -> None:
        if not (0 < self.iou_min < 1 and 0 < self.cos_max < 1):
            raise ValueError("analyzer thresholds must lie in (0, 1)")


class StrategyError(RuntimeError):
    pass


def _rng(seed: int, strategy: Strategy) -> np.random.Generator:
    stream = list(Strategy).index(strategy)
    return np.random.default_rng(np.random.SeedSequence([seed, 0x57, stream]))


def grid_regions(image: ImageDims, side: int) -> list[BBox]:
    xs = np.linspace(0.0, image.width, side + 1)
    ys = np.linspace(0.0, image.height, side + 1)
    return [BBox(float(xs[c]), float(ys[r]), float(xs[c + 1]), float(ys[r + 1]))
            for r in range(side) for c in range(side)]


def random_box(image: ImageDims, rng: np.random.Generator, min_side: float = 1.0) -> BBox:
    while True:
        x = np.sort(rng.uniform(0.0, image.width, 2))
        y = np.sort(rng.uniform(0.0, image.height, 2))
        if x[1] - x[0] >= min_side and y[1] - y[0] >= min_side:
            return BBox(float(x[0]), float(y[0]), float(x[1]), float(y[1]))


def _chunks(boxes: Sequence[BBox], size: int) -> list[list[BBox]]:
    return [list(boxes[i:i + size]) for i in range(0, len(boxes), size)]


def _jittered_neighbor(center: BBox, image: ImageDims, rng: np.random.Generator) -> Optional[BBox]:
    cx, cy = center.center
    w = center.width * rng.uniform(0.8, 1.25)
    h = center.height * rng.uniform(0.8, 1.25)
    cx += rng.uniform(-0.25, 0.25) * center.width
    cy += rng.uniform(-0.25, 0.25) * center.height
    x1, y1 = max(cx - w / 2, 0.0), max(cy - h / 2, 0.0)
    x2, y2 = min(cx + w / 2, float(image.width)), min(cy + h / 2, float(image.height))
    if x1 < x2 and y1 < y2:
        return BBox(x1, y1, x2, y2)
    return None


def random_neighbor_groups(
    image: ImageDims, n_centers: int, per_center: int, rng: np.random.Generator, retries: int
) -> list[RegionGroup]:
    """Random centers, each with ``per_center`` partners at GIoU > 0.5."""
    groups = []
    for _ in range(n_centers):
        center = random_box(image, rng, min_side=0.05 * min(image.width, image.height))
        partners: list[BBox] = []
        for _ in range(retries):
            cand = _jittered_neighbor(center, image, rng)
            if cand is not None and cand != center and giou(cand, center) > 0.5:
                partners.append(cand)
                if len(partners) == per_center:
                    break
        else:
            raise StrategyError(f"no GIoU > 0.5 partners for {center.as_list()} after {retries} tries")
        regions = (center, *partners)
        groups.append(RegionGroup(regions, hull(regions)))
    return groups


def sample_strategy(
    strategy: Strategy,
    scene: SceneInput,
    cfg: BenchConfig,
    pipeline_cfg: Optional[PipelineConfig] = None,
) -> list[RegionGroup]:
    image = scene.image
    full = image.box
    strategy = Strategy(strategy)
    if strategy is Strategy.GRID:
        return [RegionGroup(tuple(grid_regions(image, cfg.grid_side)), full)]
    if strategy in (Strategy.RANDOM, Strategy.RANDOM_TIGHT):
        # both draw from the RANDOM stream so they share boxes
        rng = _rng(cfg.seed, Strategy.RANDOM)
        boxes = [random_box(image, rng) for _ in range(cfg.random_regions)]
        groups = _chunks(boxes, cfg.bag_size)
        if strategy is Strategy.RANDOM:
            return [RegionGroup(tuple(g), full) for g in groups]
        return [RegionGroup(tuple(g), hull(g)) for g in groups]
    if strategy is Strategy.RANDOM_NEIGHBOR:
        rng = _rng(cfg.seed, strategy)
        n_centers = cfg.random_regions // cfg.bag_size
        return random_neighbor_groups(image, n_centers, cfg.neighbors_per_bag, rng, cfg.neighbor_retries)
    if strategy in (Strategy.BARON, Strategy.BARON_REDUCED):
        order = sorted(range(len(scene.proposals)), key=lambda i: (-scene.proposals[i].objectness, i))
        if strategy is Strategy.BARON_REDUCED:
            order = order[: cfg.baron_reduced_proposals]
            n_bags = 1
        else:
            n_bags = cfg.n_bags
        boxes = [scene.proposals[i].box for i in order]
        bags = baron.baron_regions(boxes, image, n_bags, cfg.neighbors_per_bag, cfg.seed)
        return [RegionGroup(tuple(b), hull(b)) for b in bags]
    # SBV: the full pipeline, one group per bag
    out = run_pipeline(scene, pipeline_cfg or PipelineConfig(seed=cfg.seed))
    groups = []
    for bag in out.bags:
        regions = tuple(c.box for c in out.crops if c.bag_id == bag.proposal_id)
        groups.append(RegionGroup(regions, hull(regions)))
    return groups


def region_count(groups: Sequence[RegionGroup]) -> int:
    return sum(len(g.regions) for g in groups)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def unnecessary_ratio(
    neighbors: Sequence[BBox],
    gt: Sequence[BBox],
    neighbor_embeddings: Optional[Sequence[Sequence[float]]],
    chi: Optional[Sequence[float]],
    th: AnalyzerThresholds = AnalyzerThresholds(),
) -> float:
    """Share of neighbors that miss every GT box or look like background.

    A neighbor is unnecessary when its best IoU with the GT boxes is below
    ``th.iou_min`` or, when embeddings are given, its cosine similarity to
    the noise embedding exceeds ``th.cos_max``.
    """
    if not neighbors:
        return 0.0
    use_embeddings = neighbor_embeddings is not None and chi is not None
    if use_embeddings and len(neighbor_embeddings) != len(neighbors):
        raise ValueError(
            f"{len(neighbor_embeddings)} embeddings for {len(neighbors)} neighbors"
        )
    chi_v = np.asarray(chi, dtype=float) if use_embeddings else None
    bad = 0
    for i, n in enumerate(neighbors):
        best = max((iou(n, g) for g in gt), default=0.0)
        noisy = use_embeddings and cosine(np.asarray(neighbor_embeddings[i], dtype=float), chi_v) > th.cos_max
        if best < th.iou_min or noisy:
            bad += 1
    return bad / len(neighbors)


@dataclass(frozen=True)
class BenchRow:
    strategy: Strategy
    groups: int
    regions: int
    flops: FlopsReport

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "groups": self.groups,
            "regions": self.regions,
            "flops": self.flops.to_dict(),
            "pflops": self.flops.pflops,
        }


def bench(
    scene: SceneInput,
    strategies: Sequence[Strategy],
    cfg: BenchConfig,
    pipeline_cfg: Optional[PipelineConfig] = None,
) -> list[BenchRow]:
    """Region counts and encoder FLOPs per strategy.

    Baselines encode every region densely; SBV uses the pipeline's masked
    per-crop accounting.
    """
    pipeline_cfg = pipeline_cfg or PipelineConfig(seed=cfg.seed)
    vit: VitSpec = pipeline_cfg.vit()
    rows = []
    for s in strategies:
        s = Strategy(s)
        if s is Strategy.SBV:
            out = run_pipeline(scene, pipeline_cfg)
            rows.append(BenchRow(s, len(out.bags), out.region_count, out.flops))
            continue
        groups = sample_strategy(s, scene, cfg, pipeline_cfg)
        n = region_count(groups)
        rows.append(BenchRow(s, len(groups), n, crops_report([vit.tokens] * n, vit)))
    return rows


def format_table(rows: Sequence[BenchRow]) -> str:
    header = f"{'strategy':<16} {'groups':>6} {'regions':>8} {'FLOPs':>16} {'PFLOPs':>10}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.strategy.value:<16} {r.groups:>6} {r.regions:>8} {r.flops.total:>16} {r.flops.pflops:>10.3g}"
        )
    return "\n".join(lines) + "\n"
