"""Command-line entry point: sample, canvas, audit, bench, render."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .canvas import build_canvas
from .config import PROFILES, PipelineConfig, profile
from .flops import AttnParams, CnnParams, FlopsReport, MlpParams, VitSpec, crops_report, pipeline_report, reduction_percent
from .pipeline import PipelineError, SampleOutput, canvas_dump, dumps, run_pipeline
from .proposal_prep import prepare
from .render import LAYERS, render_svg
from .scene import SceneError, SceneInput
from .strategies import BenchConfig, Strategy, bench, format_table

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3

log = logging.getLogger("bagofviews")


class InputError(ValueError):
    pass


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise InputError(f"no such file: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from e


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def load_config(path: Optional[str], profile_name: str, seed: Optional[int]) -> PipelineConfig:
    overrides = _read_json(path) if path else {}
    if not isinstance(overrides, dict):
        raise InputError("config file must hold a JSON object")
    if seed is not None:
        overrides["seed"] = seed
    return profile(profile_name, **overrides)


def load_scene(path: str) -> SceneInput:
    return SceneInput.from_dict(_read_json(path))


def _side_report(side: dict) -> FlopsReport:
    if "layers" in side:
        kinds = {"cnn": CnnParams, "attention": AttnParams, "mlp": MlpParams}
        layers = []
        for spec in side["layers"]:
            spec = dict(spec)
            kind = spec.pop("kind", None)
            if kind not in kinds:
                raise InputError(f"layer kind must be one of {sorted(kinds)}, got {kind!r}")
            layers.append(kinds[kind](**spec))
        return pipeline_report(layers, int(side.get("crops", 1)))
    vit = VitSpec(**side.get("vit", {}))
    if "unmasked_per_crop" in side:
        return crops_report([int(n) for n in side["unmasked_per_crop"]], vit)
    crops = int(side.get("crops", 1))
    return crops_report([int(side.get("unmasked", vit.tokens))] * crops, vit)


def audit(description: dict) -> dict:
    """Baseline vs ours FLOPs from a description with ``baseline`` and ``ours`` sides."""
    try:
        base = _side_report(description["baseline"])
        ours = _side_report(description["ours"])
    except KeyError as e:
        raise InputError(f"audit description is missing {e}") from e
    except TypeError as e:
        raise InputError(f"bad layer parameters: {e}") from e
    return {
        "schema": 1,
        "baseline": base.to_dict(),
        "ours": ours.to_dict(),
        "diff": {
            "cnn": base.cnn - ours.cnn,
            "attention": base.attention - ours.attention,
            "mlp": base.mlp - ours.mlp,
            "total": base.total - ours.total,
        },
        "pflops": {"baseline": base.pflops, "ours": ours.pflops},
        "reduction_percent": reduction_percent(base, ours) if base.total else None,
    }


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.profile, args.seed)
    out = run_pipeline(load_scene(args.scene), cfg)
    _write(args.out, dumps(out.to_dict()))
    return EXIT_OK


def cmd_canvas(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.profile, args.seed)
    scene = load_scene(args.scene)
    prep = prepare(scene.proposals, scene.rpn, cfg.prep(), scene.image)
    _write(args.out, dumps(canvas_dump(build_canvas(prep.reduced, cfg.interval, scene.image))))
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    desc = _read_json(args.description)
    if not isinstance(desc, dict):
        raise InputError("audit description must be a JSON object")
    _write(args.out, dumps(audit(desc)))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.profile, args.seed)
    bcfg = BenchConfig(n_bags=cfg.n_bags, neighbors_per_bag=cfg.neighbors_per_bag, seed=cfg.seed)
    strategies = [Strategy(s) for s in args.strategies] if args.strategies else list(Strategy)
    rows = bench(load_scene(args.scene), strategies, bcfg, cfg)
    _write(args.out, dumps({"schema": 1, "rows": [r.to_dict() for r in rows]}))
    if args.out not in (None, "-"):
        sys.stdout.write(format_table(rows))
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    output = SampleOutput.from_dict(_read_json(args.output))
    canvas = None
    if "canvas" in args.layers:
        if not args.scene:
            raise InputError("the canvas layer needs --scene")
        scene = load_scene(args.scene)
        cfg = output.config
        prep = prepare(scene.proposals, scene.rpn, cfg.prep(), scene.image)
        canvas = build_canvas(prep.reduced, cfg.interval, scene.image)
    _write(args.out, render_svg(output, args.layers, canvas))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bagofviews", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scene_cmd(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("scene")
        p.add_argument("--config", help="JSON object of config overrides")
        p.add_argument("--profile", default="coco", choices=sorted(PROFILES))
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output file (default stdout)")
        return p

    scene_cmd("sample", "run the full sampling pipeline").set_defaults(func=cmd_sample)
    scene_cmd("canvas", "dump the canvas probability tensor").set_defaults(func=cmd_canvas)
    p = scene_cmd("bench", "compare sampling strategies")
    p.add_argument("--strategies", nargs="+", choices=[s.value for s in Strategy])
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("audit", help="FLOPs report and baseline diff")
    p.add_argument("description")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("render", help="render a sample output as SVG")
    p.add_argument("output", help="JSON written by `sample`")
    p.add_argument("--scene", help="scene file, needed for the canvas layer")
    p.add_argument("--layers", nargs="+", default=list(LAYERS), choices=LAYERS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, SceneError) as e:
        log.error("%s", e)
        return EXIT_INPUT
    except PipelineError as e:
        log.error("%s", e)
        return EXIT_INTERNAL
    except (AssertionError, RuntimeError) as e:
        log.error("internal error: %s", e)
        return EXIT_INTERNAL
    except (ValueError, TypeError) as e:
        log.error("invalid input: %s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
