"""Representative concepts per surrounding direction and trimmed concept windows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import baron
from .geometry import BBox, ImageDims, ScoredBox, aspect_score, center_distance, merge, overlaps, trim
from .proposal_prep import normalized_distance

# counter-clockwise from +x, with image y pointing down
SECTORS_8 = ("right", "up_right", "up", "up_left", "left", "down_left", "down", "down_right")
SECTORS_4 = ("right", "up", "left", "down")


@dataclass(frozen=True)
class ConceptConfig:
    lam: float = 0.5
    alpha: float = 0.5
    eta: float = 0.4
    directions_per_proposal: int = 8
    n_bags: int = 3
    neighbors_per_bag: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lam < 0 or self.alpha < 0:
            raise ValueError("lam and alpha must be non-negative")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.directions_per_proposal not in (4, 8):
            raise ValueError("directions_per_proposal must be 4 or 8")

    @property
    def sectors(self) -> tuple[str, ...]:
        return SECTORS_8 if self.directions_per_proposal == 8 else SECTORS_4


@dataclass(frozen=True)
class ConceptWindow:
    direction: str
    concept_id: int
    concept: ScoredBox
    window: BBox


@dataclass
class ConceptBag:
    proposal_id: int
    proposal: BBox
    windows: list[ConceptWindow] = field(default_factory=list)
    fallback: bool = False
    fallback_groups: list[list[BBox]] = field(default_factory=list)

    @property
    def retained_directions(self) -> list[str]:
        return [w.direction for w in self.windows]

    @property
    def regions(self) -> list[BBox]:
        """Every box this bag sends to the encoder."""
        if self.fallback:
            return [b for g in self.fallback_groups for b in g]
        return [self.proposal] + [w.window for w in self.windows]


def sector_of(proposal: BBox, point: tuple[float, float], n_sectors: int) -> Optional[int]:
    """Sector index of ``point`` around the proposal center; None at the center."""
    cx, cy = proposal.center
    dx, dy = point[0] - cx, cy - point[1]
    if dx == 0 and dy == 0:
        return None
    width = 2 * math.pi / n_sectors
    theta = math.atan2(dy, dx) % (2 * math.pi)
    return int(math.floor((theta + width / 2) / width)) % n_sectors


def candidate_concepts(
    proposal: BBox,
    direction: str,
    concepts: Mapping[int, ScoredBox],
    cfg: ConceptConfig,
    image: ImageDims,
) -> dict[int, ScoredBox]:
    """Concepts in ``direction``'s sector and within ``eta * diag`` of the proposal."""
    sectors = cfg.sectors
    target = sectors.index(direction)
    limit = cfg.eta * image.diag
    out = {}
    for cid in sorted(concepts):
        c = concepts[cid]
        if sector_of(proposal, c.box.center, len(sectors)) != target:
            continue
        if center_distance(c.box, proposal) <= limit:
            out[cid] = c
    return out


def concept_score(concept: ScoredBox, proposal: BBox, cfg: ConceptConfig, image: ImageDims) -> float:
    d = normalized_distance(center_distance(concept.box, proposal), cfg.eta, image)
    return cfg.lam * d + cfg.alpha * aspect_score(merge(concept.box, proposal))


def select_representative(
    candidates: Mapping[int, ScoredBox], proposal: BBox, cfg: ConceptConfig, image: ImageDims
) -> Optional[int]:
    if not candidates:
        return None
    return max(
        sorted(candidates),
        key=lambda cid: (
            concept_score(candidates[cid], proposal, cfg, image),
            candidates[cid].objectness,
            -cid,
        ),
    )


def form_bags(
    proposals: Sequence[BBox],
    concepts: Mapping[int, ScoredBox],
    cfg: ConceptConfig,
    image: ImageDims,
) -> list[ConceptBag]:
    """One bag per proposal: trimmed hulls of the proposal and its representatives.

    Windows are trimmed against all other proposals, except ones that already
    overlap the owning proposal. A proposal left with no windows falls back to
    ``cfg.n_bags`` fixed-window neighbor bags.
    """
    bags = []
    for i, prop in enumerate(proposals):
        obstacles = [p for k, p in enumerate(proposals) if k != i and not overlaps(p, prop)]
        bag = ConceptBag(proposal_id=i, proposal=prop)
        for direction in cfg.sectors:
            cands = candidate_concepts(prop, direction, concepts, cfg, image)
            rep = select_representative(cands, prop, cfg, image)
            if rep is None:
                continue
            window = trim(merge(cands[rep].box, prop), prop, obstacles)
            if window is None:
                continue
            bag.windows.append(ConceptWindow(direction, rep, cands[rep], window))
        if not bag.windows:
            bag.fallback = True
            rng = baron.proposal_rng(cfg.seed, i, stream=1)
            bag.fallback_groups = baron.sample_bags(prop, image, cfg.n_bags, cfg.neighbors_per_bag, rng)
        bags.append(bag)
    return bags
