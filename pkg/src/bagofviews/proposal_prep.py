"""Proposal preprocessing: sparse RPN reduction and farthest extra proposals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import BBox, ImageDims, ScoredBox, center_distance, iou


@dataclass(frozen=True)
class PrepConfig:
    k: int = 300
    n_extra: int = 3
    lam: float = 0.5
    eta: float = 0.4
    overlap_threshold: float = 0.0
    # None -> (0.01 * image diagonal) ** 2
    min_area: Optional[float] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_extra < 0:
            raise ValueError("n_extra must be >= 0")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    def resolve_min_area(self, image: Optional[ImageDims]) -> float:
        if self.min_area is not None:
            return self.min_area
        if image is None:
            return 0.0
        return (0.01 * image.diag) ** 2


@dataclass
class ProposalSets:
    proposals: list[ScoredBox]
    topk: list[ScoredBox]
    reduced: list[ScoredBox]
    added: list[ScoredBox] = field(default_factory=list)

    @property
    def extras(self) -> list[ScoredBox]:
        return self.added[len(self.proposals):]


def objectness_order(boxes: Sequence[ScoredBox]) -> list[int]:
    """Indices sorted by objectness descending, stable on original index."""
    return sorted(range(len(boxes)), key=lambda i: (-boxes[i].objectness, i))


def select_topk(boxes: Sequence[ScoredBox], k: int) -> list[ScoredBox]:
    return [boxes[i] for i in objectness_order(boxes)[:k]]


def reduce_nonoverlapping(
    topk: Sequence[ScoredBox],
    proposals: Sequence[ScoredBox],
    cfg: PrepConfig,
    image: Optional[ImageDims] = None,
) -> list[ScoredBox]:
    """Greedy scan keeping boxes that overlap neither proposals nor earlier keeps.

    A box survives when its IoU with every proposal and every previously kept
    box is at most ``cfg.overlap_threshold`` and its area reaches the minimum.
    """
    min_area = cfg.resolve_min_area(image)
    thr = cfg.overlap_threshold
    kept: list[ScoredBox] = []
    for i in objectness_order(topk):
        cand = topk[i]
        if cand.box.area < min_area:
            continue
        if any(iou(cand.box, p.box) > thr for p in proposals):
            continue
        if any(iou(cand.box, k.box) > thr for k in kept):
            continue
        kept.append(cand)
    return kept


def normalized_distance(d: float, eta: float, image: ImageDims) -> float:
    """Distance in units of ``eta * diag``, capped at 1."""
    return min(d / (eta * image.diag), 1.0)


def farthest_score(
    r: ScoredBox, others: Sequence[BBox], cfg: PrepConfig, image: ImageDims
) -> float:
    if not others:
        raise ValueError("farthest_score needs at least one reference box")
    mean_d = math.fsum(center_distance(r.box, o) for o in others) / len(others)
    return cfg.lam * normalized_distance(mean_d, cfg.eta, image) + (1.0 - cfg.lam) * r.objectness


def select_extra(
    reduced: Sequence[ScoredBox],
    proposals: Sequence[ScoredBox],
    cfg: PrepConfig,
    image: ImageDims,
) -> list[ScoredBox]:
    """Greedily pick ``cfg.n_extra`` reduced boxes farthest from the proposal set.

    Each pick maximizes ``farthest_score`` against the proposals plus the
    boxes picked so far. Ties go to higher objectness, then lower index.
    With no reference boxes at all the distance term is dropped.
    """
    reference = [p.box for p in proposals]
    remaining = list(range(len(reduced)))
    picked: list[ScoredBox] = []
    for _ in range(cfg.n_extra):
        if not remaining:
            break

        def key(i: int) -> tuple:
            r = reduced[i]
            if reference:
                s = farthest_score(r, reference, cfg, image)
            else:
                s = (1.0 - cfg.lam) * r.objectness
            return (s, r.objectness, -i)

        best = max(remaining, key=key)
        remaining.remove(best)
        picked.append(reduced[best])
        reference.append(reduced[best].box)
    return picked


def prepare(
    proposals: Sequence[ScoredBox],
    rpn_boxes: Sequence[ScoredBox],
    cfg: PrepConfig,
    image: ImageDims,
) -> ProposalSets:
    topk = select_topk(rpn_boxes, cfg.k)
    reduced = reduce_nonoverlapping(topk, proposals, cfg, image)
    extras = select_extra(reduced, proposals, cfg, image)
    return ProposalSets(
        proposals=list(proposals),
        topk=topk,
        reduced=reduced,
        added=list(proposals) + extras,
    )
