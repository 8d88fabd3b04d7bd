"""Fixed-window neighbor bags around a proposal (the bag-of-regions baseline)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import BBox, ImageDims, clip

# (dx, dy) offsets in units of the proposal's width/height, clockwise from left
NEIGHBOR_OFFSETS = (
    (-1, 0), (-1, -1), (0, -1), (1, -1),
    (1, 0), (1, 1), (0, 1), (-1, 1),
)


def surrounding_windows(proposal: BBox, image: ImageDims) -> list[BBox]:
    """Equal-size boxes adjacent to ``proposal`` in 8 directions, clipped to the image.

    Windows clipped to less than half their nominal area are dropped.
    """
    w, h = proposal.width, proposal.height
    out = []
    for dx, dy in NEIGHBOR_OFFSETS:
        raw = BBox(proposal.x1 + dx * w, proposal.y1 + dy * h, proposal.x2 + dx * w, proposal.y2 + dy * h)
        c = clip(raw, image)
        if c is not None and c.area >= 0.5 * raw.area:
            out.append(c)
    return out


def sample_bags(
    proposal: BBox,
    image: ImageDims,
    n_bags: int,
    neighbors_per_bag: int,
    rng: np.random.Generator,
) -> list[list[BBox]]:
    """``n_bags`` groups, each the proposal plus distinct sampled neighbors."""
    windows = surrounding_windows(proposal, image)
    take = min(neighbors_per_bag, len(windows))
    bags = []
    for _ in range(n_bags):
        picks = sorted(rng.choice(len(windows), size=take, replace=False).tolist()) if take else []
        bags.append([proposal] + [windows[i] for i in picks])
    return bags


def proposal_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 0xBA, stream, index]))


def baron_regions(
    proposals: Sequence[BBox],
    image: ImageDims,
    n_bags: int,
    neighbors_per_bag: int,
    seed: int,
) -> list[list[BBox]]:
    bags: list[list[BBox]] = []
    for i, p in enumerate(proposals):
        bags.extend(sample_bags(p, image, n_bags, neighbors_per_bag, proposal_rng(seed, i)))
    return bags
