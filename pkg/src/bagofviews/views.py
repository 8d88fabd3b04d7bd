"""Global / middle / local views and greedy representation switching."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .concepts import ConceptBag
from .geometry import BBox, ImageDims, ScoredBox, hull, intersection_area


class ViewLevel(str, Enum):
    GLOBAL = "global"
    MIDDLE = "middle"
    LOCAL = "local"

    @property
    def depth(self) -> int:
        return {"global": 0, "middle": 1, "local": 2}[self.value]


@dataclass(frozen=True)
class ViewWeights:
    global_: float = 0.0
    middle: float = 0.8
    local: float = 1.0

    def __post_init__(self) -> None:
        for v in (self.global_, self.middle, self.local):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"view weight outside [0, 1]: {v}")

    def of(self, level: ViewLevel) -> float:
        return {ViewLevel.GLOBAL: self.global_, ViewLevel.MIDDLE: self.middle, ViewLevel.LOCAL: self.local}[level]


@dataclass(frozen=True)
class Views:
    global_: BBox
    middle: BBox
    locals: tuple[BBox, ...]

    def box(self, level: ViewLevel, local_idx: int) -> BBox:
        if level is ViewLevel.GLOBAL:
            return self.global_
        if level is ViewLevel.MIDDLE:
            return self.middle
        return self.locals[local_idx]


@dataclass(frozen=True)
class Comparison:
    parent: ViewLevel
    r: float
    L: int
    P: int
    tau: float
    switched: bool


@dataclass(frozen=True)
class SwitchDecision:
    concept_id: int
    chosen: ViewLevel
    trail: tuple[Comparison, ...] = field(default_factory=tuple)

    # evidence of the last comparison made; zeros when none was possible
    @property
    def r(self) -> float:
        return self.trail[-1].r if self.trail else 0.0

    @property
    def L(self) -> int:
        return self.trail[-1].L if self.trail else 0

    @property
    def P(self) -> int:
        return self.trail[-1].P if self.trail else 0

    @property
    def tau(self) -> float:
        return self.trail[-1].tau if self.trail else 0.0


def hierarchical_views(bag: ConceptBag, image: ImageDims) -> Views:
    if bag.windows:
        locals_ = tuple(w.window for w in bag.windows)
    else:
        locals_ = tuple(bag.regions)
    if not locals_:
        raise ValueError(f"bag {bag.proposal_id} has no windows and no fallback regions")
    return Views(global_=image.box, middle=hull(locals_), locals=locals_)


def count_concepts(view: BBox, concepts: Sequence[ScoredBox], coverage: float) -> int:
    """Concepts with at least ``coverage`` of their area inside ``view``."""
    if not 0.0 < coverage <= 1.0:
        raise ValueError("coverage must lie in (0, 1]")
    return sum(1 for c in concepts if intersection_area(c.box, view) >= coverage * c.box.area)


def switch_threshold(r: float, L: int, P: int) -> float:
    if P == 0:
        raise ValueError("parent view holds no concepts; switching is undefined")
    return r * abs(L - P) / P


def select_view(
    local_idx: int,
    views: Views,
    concepts: Sequence[ScoredBox],
    weights: ViewWeights,
    tau_switch: float,
    coverage: float,
    concept_id: int = -1,
) -> SwitchDecision:
    """Promote a local view toward middle, then global, while the score exceeds ``tau_switch``.

    Levels with zero weight are skipped as promotion targets. A comparison
    against a parent containing no concepts stops the climb.
    """
    current = ViewLevel.LOCAL
    trail = []
    for parent in (ViewLevel.MIDDLE, ViewLevel.GLOBAL):
        if weights.of(parent) == 0.0:
            continue
        child_box = views.box(current, local_idx)
        parent_box = views.box(parent, local_idx)
        P = count_concepts(parent_box, concepts, coverage)
        if P == 0:
            break
        L = count_concepts(child_box, concepts, coverage)
        r = child_box.area / parent_box.area
        tau = switch_threshold(r, L, P)
        switched = tau > tau_switch
        trail.append(Comparison(parent, r, L, P, tau, switched))
        if not switched:
            break
        current = parent
    return SwitchDecision(concept_id=concept_id, chosen=current, trail=tuple(trail))
