import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bagofviews.baron import baron_regions, sample_bags, surrounding_windows
from bagofviews.concepts import (
    SECTORS_8,
    ConceptConfig,
    candidate_concepts,
    concept_score,
    form_bags,
    sector_of,
    select_representative,
)
from bagofviews.geometry import BBox, ImageDims, ScoredBox, overlaps

from conftest import disjoint_boxes, random_scored
from oracles import area, bag_windows_oracle, sector_by_cosine

IMAGE = ImageDims(1000, 1000)
CFG = ConceptConfig()


def sb(x1, y1, x2, y2, o=0.5):
    return ScoredBox(BBox(x1, y1, x2, y2), o)


class TestSectors:
    P = BBox(450, 450, 550, 550)

    @pytest.mark.parametrize(
        "point, name",
        [
            ((700, 500), "right"),
            ((700, 300), "up_right"),
            ((500, 100), "up"),
            ((300, 300), "up_left"),
            ((100, 500), "left"),
            ((300, 700), "down_left"),
            ((500, 900), "down"),
            ((700, 700), "down_right"),
        ],
    )
    def test_named_directions(self, point, name):
        assert SECTORS_8[sector_of(self.P, point, 8)] == name

    def test_center_has_no_sector(self):
        assert sector_of(self.P, (500, 500), 8) is None

    def test_four_sectors(self):
        assert sector_of(self.P, (700, 450), 4) == 0
        assert sector_of(self.P, (520, 100), 4) == 1

    def test_matches_cosine_oracle(self, rng):
        for _ in range(2000):
            pt = tuple(rng.uniform(0, 1000, 2))
            for n in (4, 8):
                assert sector_of(self.P, pt, n) == sector_by_cosine(self.P, pt, n)


class TestRepresentative:
    def test_score_example(self):
        prop = BBox(0, 0, 100, 100)
        # center distance 150 against a limit of 0.4 * sqrt(2) * 1000
        c = sb(150, 0, 250, 100)
        limit = 0.4 * math.hypot(1000, 1000)
        want = 0.5 * 150 / limit + 0.5 * (100 / 250)
        assert concept_score(c, prop, CFG, IMAGE) == pytest.approx(want)

    def test_out_of_range_concepts_ignored(self):
        prop = BBox(0, 450, 100, 550)
        far = {0: sb(900, 450, 1000, 550)}  # 900 px away, limit ~566
        assert candidate_concepts(prop, "right", far, CFG, IMAGE) == {}

    def test_tie_breaks_by_objectness_then_id(self):
        prop = BBox(450, 450, 550, 550)
        # mirror images above and below the right axis score the same
        cands = {3: sb(700, 400, 760, 460, 0.4), 5: sb(700, 540, 760, 600, 0.9)}
        assert select_representative(cands, prop, CFG, IMAGE) == 5
        cands = {3: sb(700, 400, 760, 460, 0.9), 5: sb(700, 540, 760, 600, 0.9)}
        assert select_representative(cands, prop, CFG, IMAGE) == 3


class TestFormBags:
    def test_window_is_trimmed_hull(self):
        props = [BBox(100, 100, 200, 200), BBox(320, 80, 380, 140)]
        concepts = {0: sb(400, 120, 480, 200, 0.8)}
        bags = form_bags(props, concepts, CFG, IMAGE)
        (w,) = bags[0].windows
        assert w.direction == "right" and w.concept_id == 0
        # the hull (100,100,480,200) is cut at the second proposal's left edge
        assert w.window == BBox(100, 100, 320, 200)
        assert bags[0].regions == [props[0], w.window]

    def test_fallback_without_concepts(self):
        props = [BBox(400, 400, 500, 500)]
        (bag,) = form_bags(props, {}, CFG, IMAGE)
        assert bag.fallback and bag.windows == []
        assert len(bag.fallback_groups) == CFG.n_bags
        assert all(g[0] == props[0] and len(g) == 3 for g in bag.fallback_groups)

    def test_overlapping_proposals_do_not_block(self):
        props = [BBox(100, 100, 200, 200), BBox(150, 150, 260, 260)]
        concepts = {0: sb(300, 120, 360, 180)}
        bags = form_bags(props, concepts, CFG, IMAGE)
        assert bags[0].windows[0].window == BBox(100, 100, 360, 200)

    @pytest.mark.parametrize("n_dirs", [4, 8])
    def test_matches_oracle(self, rng, n_dirs):
        cfg = ConceptConfig(directions_per_proposal=n_dirs, lam=0.6, alpha=0.4, eta=0.3)
        for _ in range(40):
            props = disjoint_boxes(rng, IMAGE, int(rng.integers(1, 6)), lo=30, hi=120)
            concepts = dict(enumerate(random_scored(rng, IMAGE, int(rng.integers(0, 20)), 20, 150)))
            bags = form_bags(props, concepts, cfg, IMAGE)
            want = bag_windows_oracle(props, concepts, cfg.lam, cfg.alpha, cfg.eta, IMAGE, n_dirs)
            for bag, expected in zip(bags, want):
                assert [(w.direction, w.concept_id) for w in bag.windows] == [(d, c) for d, c, _ in expected]
                for w, (_, _, box) in zip(bag.windows, expected):
                    assert w.window.area == pytest.approx(area(box), rel=1e-12)
                assert bag.fallback == (not expected)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_windows_contain_proposal_and_avoid_others(seed):
    r = np.random.default_rng(seed)
    props = disjoint_boxes(r, IMAGE, 5, lo=30, hi=100)
    concepts = dict(enumerate(random_scored(r, IMAGE, 15, 20, 150)))
    bags = form_bags(props, concepts, CFG, IMAGE)
    for bag in bags:
        dirs = bag.retained_directions
        assert len(dirs) == len(set(dirs)) <= 8
        for w in bag.windows:
            assert w.window.contains(bag.proposal)
            assert all(not overlaps(w.window, p) for k, p in enumerate(props) if k != bag.proposal_id)


class TestBaron:
    def test_interior_proposal_has_eight_neighbors(self):
        ws = surrounding_windows(BBox(400, 400, 500, 500), IMAGE)
        assert len(ws) == 8
        assert BBox(300, 400, 400, 500) in ws

    def test_corner_proposal_drops_clipped(self):
        ws = surrounding_windows(BBox(0, 0, 100, 100), IMAGE)
        assert len(ws) == 3

    def test_bags_are_distinct_neighbors(self, rng):
        prop = BBox(400, 400, 500, 500)
        for bag in sample_bags(prop, IMAGE, 5, 2, rng):
            assert bag[0] == prop and len(bag) == 3 and bag[1] != bag[2]

    def test_seeded(self):
        props = [BBox(400, 400, 500, 500), BBox(10, 10, 60, 60)]
        assert baron_regions(props, IMAGE, 3, 2, 4) == baron_regions(props, IMAGE, 3, 2, 4)
