from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from bagofviews.geometry import BBox, ImageDims, ScoredBox
from bagofviews.scene import SceneInput

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[int, tuple[str, str]] = {}


def load_scene(name: str) -> SceneInput:
    return SceneInput.from_dict(json.loads((FIXTURES / name).read_text()))


def random_box(rng: np.random.Generator, image: ImageDims, lo: float = 5.0, hi: float = 200.0) -> BBox:
    w, h = rng.uniform(lo, hi, 2)
    w, h = min(w, image.width), min(h, image.height)
    x1 = rng.uniform(0, image.width - w)
    y1 = rng.uniform(0, image.height - h)
    return BBox(x1, y1, x1 + w, y1 + h)


def random_scored(rng, image, n, lo=5.0, hi=200.0) -> list[ScoredBox]:
    return [ScoredBox(random_box(rng, image, lo, hi), float(rng.uniform())) for _ in range(n)]


def disjoint_boxes(rng, image, n, lo=20.0, hi=80.0, tries=5000) -> list[BBox]:
    out: list[BBox] = []
    for _ in range(tries):
        if len(out) == n:
            break
        b = random_box(rng, image, lo, hi)
        if all(not (b.x1 < o.x2 and o.x1 < b.x2 and b.y1 < o.y2 and o.y1 < b.y2) for o in out):
            out.append(b)
    return out


@st.composite
def boxes(draw, limit: float = 1000.0):
    x1 = draw(st.floats(0, limit - 1, allow_nan=False))
    y1 = draw(st.floats(0, limit - 1, allow_nan=False))
    w = draw(st.floats(0.5, limit, allow_nan=False))
    h = draw(st.floats(0.5, limit, allow_nan=False))
    return BBox(x1, y1, x1 + w, y1 + h)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, label = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _criteria.get(number)
        status = "PASS" if rep.passed else "FAIL"
        if prev is not None and prev[0] == "FAIL":
            status = "FAIL"
        _criteria[number] = (status, label)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, label = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2} {status}: {label}")
