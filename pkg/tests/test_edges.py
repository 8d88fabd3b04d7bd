import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bagofviews.canvas import build_canvas
from bagofviews.edges import (
    EdgeConfig,
    EdgePath,
    Termination,
    collect_visual_concepts,
    extract_pair_concepts,
    generate_edges,
)
from bagofviews.geometry import BBox, ImageDims, ScoredBox

from conftest import disjoint_boxes, random_scored
from oracles import concepts_oracle, replay_violations


def edge_fixture(seed: int):
    """Random canvas plus a start/end pair and obstacles."""
    r = np.random.default_rng(seed)
    img = ImageDims(int(r.integers(200, 700)), int(r.integers(200, 700)))
    interval = float(r.choice([40.0, 50.0, 100.0]))
    reduced = random_scored(r, img, int(r.integers(0, 20)))
    canvas = build_canvas(reduced, interval, img)
    placed = disjoint_boxes(r, img, int(r.integers(2, 7)), lo=15, hi=90)
    return canvas, placed[0], placed[1], placed[2:], reduced


def run_edges(seed: int, n: int = 2):
    canvas, start, end, others, reduced = edge_fixture(seed)
    cfg = EdgeConfig(edges_per_pair=n, seed=seed)
    return canvas, start, end, others, generate_edges(canvas, start, end, others, cfg, (0, 1), reduced)


def test_straight_walk_reaches():
    img = ImageDims(500, 100)
    canvas = build_canvas([], 100, img)
    paths = generate_edges(canvas, BBox(0, 40, 20, 60), BBox(380, 40, 420, 60), [], EdgeConfig(edges_per_pair=3), (0, 1))
    for p in paths:
        assert p.terminated is Termination.REACHED
        assert p.steps == ((1, 0), (1, 1), (1, 2), (1, 3), (1, 4))


def test_wall_forces_dead_end():
    img = ImageDims(500, 100)
    canvas = build_canvas([], 100, img)
    wall = BBox(150, 50, 250, 150)  # strictly contains grid point (1, 2)
    paths = generate_edges(canvas, BBox(0, 40, 20, 60), BBox(380, 40, 420, 60), [wall], EdgeConfig(), (0, 1))
    for p in paths:
        assert p.terminated is Termination.DEAD_END
        assert p.steps[-1] == (1, 1)


def test_budget_termination():
    canvas = build_canvas([], 100, ImageDims(500, 100))
    cfg = EdgeConfig(edges_per_pair=1, max_steps=2)
    (p,) = generate_edges(canvas, BBox(0, 40, 20, 60), BBox(380, 40, 420, 60), [], cfg, (0, 1))
    assert p.terminated is Termination.BUDGET
    assert len(p.steps) == 3


def test_pair_concepts_use_reached_paths_only():
    def path(hits, kind):
        return EdgePath(0, 1, ((0, 0),), frozenset(hits), kind)

    paths = [
        path({1, 2, 3}, Termination.REACHED),
        path({2, 3}, Termination.REACHED),
        path({9}, Termination.DEAD_END),
    ]
    assert extract_pair_concepts(paths) == {2, 3}
    assert extract_pair_concepts([path({1}, Termination.BUDGET)]) == frozenset()


@pytest.mark.parametrize("seed", range(100))
def test_constraints_hold(seed):
    canvas, start, end, others, paths = run_edges(seed)
    shape = (canvas.interval, canvas.image, canvas.rows, canvas.cols)
    budget = canvas.rows + canvas.cols
    for p in paths:
        assert replay_violations(p, shape, start, end, others, budget) == []


def test_same_seed_same_bytes():
    a = pickle.dumps(run_edges(11)[-1])
    b = pickle.dumps(run_edges(11)[-1])
    assert a == b


def test_evaluation_order_does_not_matter():
    canvas, start, end, others, reduced = edge_fixture(3)
    cfg = EdgeConfig(edges_per_pair=2, seed=5)
    first = generate_edges(canvas, start, end, others, cfg, (2, 4), reduced)
    generate_edges(canvas, end, start, others, cfg, (0, 1), reduced)
    again = generate_edges(canvas, start, end, others, cfg, (2, 4), reduced)
    assert first == again


@pytest.mark.parametrize("seed", range(25))
def test_concepts_match_independent_traversal(seed):
    r = np.random.default_rng(1000 + seed)
    img = ImageDims(int(r.integers(300, 700)), int(r.integers(300, 700)))
    interval = float(r.choice([50.0, 100.0]))
    reduced = random_scored(r, img, int(r.integers(3, 25)))
    added = [ScoredBox(b, 0.9) for b in disjoint_boxes(r, img, int(r.integers(2, 6)), lo=15, hi=80)]
    added += reduced[: int(r.integers(0, 3))]
    canvas = build_canvas(reduced, interval, img)
    cfg = EdgeConfig(edges_per_pair=int(r.integers(1, 5)), seed=seed)
    got, paths = collect_visual_concepts(canvas, added, reduced, cfg)
    assert got == concepts_oracle(canvas, added, reduced, cfg.edges_per_pair, cfg.seed)
    n = len(added)
    assert len(paths) == cfg.edges_per_pair * n * (n - 1) // 2


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_paths_are_short(seed):
    canvas, start, end, others, paths = run_edges(seed, n=3)
    src, tgt = canvas.nearest(*start.center), canvas.nearest(*end.center)
    dist = abs(src[0] - tgt[0]) + abs(src[1] - tgt[1])
    for p in paths:
        assert len(p.steps) - 1 <= dist
        if p.terminated is Termination.REACHED:
            assert len(p.steps) - 1 == dist
        assert p.terminated is not Termination.LEFT_IMAGE
