"""Regenerate the checked-in fixtures.

Run from the repository root:  python3 tests/fixtures/make_fixtures.py

The golden output is only rewritten with ``--golden``; it is meant to stay
frozen, and any change to it should be a deliberate decision.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from bagofviews import ImageDims, profile, run_pipeline
from bagofviews.pipeline import dumps
from bagofviews.synth import synthetic_scene

HERE = Path(__file__).parent

# golden end-to-end run
GOLDEN_SCENE = dict(seed=7)
GOLDEN_SEED = 7

# region-count table: baseline strategies on a 24-proposal scene
# (24 proposals x 3 bags x 3 regions = 216; top 12 x 1 bag x 3 = 36)
BASELINE_SCENE = dict(seed=0, n_proposals=24, image=ImageDims(1000, 800), proposal_size=(30.0, 70.0))

# SBV on a 9-proposal scene with the default coco profile: 9 proposal crops
# plus 47 concept windows, no fallback bags
SBV_SCENE = dict(seed=1, n_proposals=9)
SBV_SEED = 7


def write(name: str, obj) -> None:
    (HERE / name).write_text(dumps(obj))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--golden", action="store_true", help="also rewrite the golden output")
    args = ap.parse_args()
    golden = synthetic_scene(**GOLDEN_SCENE)
    write("golden_scene.json", golden.to_dict())
    write("regions_baseline_scene.json", synthetic_scene(**BASELINE_SCENE).to_dict())
    write("regions_sbv_scene.json", synthetic_scene(**SBV_SCENE).to_dict())
    if args.golden:
        out = run_pipeline(golden, profile("coco", seed=GOLDEN_SEED))
        write("golden_output.json", out.to_dict())


if __name__ == "__main__":
    main()
