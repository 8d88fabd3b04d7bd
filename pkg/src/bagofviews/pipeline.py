"""End-to-end sampling: proposals -> canvas -> edges -> concept bags -> views -> masks -> FLOPs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import baron
from .canvas import Canvas, build_canvas
from .concepts import ConceptBag, ConceptWindow, form_bags
from .config import PipelineConfig
from .edges import EdgePath, Termination, collect_visual_concepts
from .flops import FlopsReport, crops_report, reduction_percent
from .geometry import BBox, ImageDims, ScoredBox
from .masks import (
    assign_view_levels,
    noise_mask,
    noise_threshold,
    unmasked_key_count,
    view_mask,
)
from .proposal_prep import prepare
from .scene import SCHEMA_VERSION, SceneInput, box_from_json, box_to_json, scored_from_json, scored_to_json
from .views import Comparison, SwitchDecision, ViewLevel, hierarchical_views, select_view


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class CropRecord:
    """One encoder input: a proposal crop (``local_idx == -1``) or a concept view."""

    bag_id: int
    local_idx: int
    box: BBox
    level: ViewLevel
    decision: Optional[SwitchDecision]
    noise_threshold: Optional[float]
    masked: int
    unmasked: int
    view_mask: tuple[float, ...]


@dataclass
class SampleOutput:
    config: PipelineConfig
    image: ImageDims
    reduced: list[ScoredBox] = field(default_factory=list)
    added: list[ScoredBox] = field(default_factory=list)
    n_proposals: int = 0
    concepts: list[int] = field(default_factory=list)
    paths: list[EdgePath] = field(default_factory=list)
    bags: list[ConceptBag] = field(default_factory=list)
    crops: list[CropRecord] = field(default_factory=list)
    flops: FlopsReport = field(default_factory=FlopsReport)
    flops_dense: FlopsReport = field(default_factory=FlopsReport)
    flops_baron: FlopsReport = field(default_factory=FlopsReport)

    @property
    def decisions(self) -> list[SwitchDecision]:
        return [c.decision for c in self.crops if c.decision is not None]

    @property
    def region_count(self) -> int:
        return len(self.crops)

    def to_dict(self) -> dict[str, Any]:
        reduction = None
        if self.flops_baron.total:
            reduction = reduction_percent(self.flops_baron, self.flops)
        return {
            "schema": SCHEMA_VERSION,
            "header": {"seed": self.config.seed, "config": self.config.to_dict()},
            "image": {"width": self.image.width, "height": self.image.height},
            "n_proposals": self.n_proposals,
            "reduced": [scored_to_json(s) for s in self.reduced],
            "added": [scored_to_json(s) for s in self.added],
            "concepts": list(self.concepts),
            "paths": [_path_to_json(p) for p in self.paths],
            "bags": [_bag_to_json(b) for b in self.bags],
            "crops": [_crop_to_json(c) for c in self.crops],
            "flops": {
                "ours": self.flops.to_dict(),
                "dense": self.flops_dense.to_dict(),
                "baron": self.flops_baron.to_dict(),
                "reduction_vs_baron_percent": reduction,
            },
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SampleOutput":
        if d.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported output schema {d.get('schema')!r}")
        return cls(
            config=PipelineConfig.from_dict(d["header"]["config"]),
            image=ImageDims(d["image"]["width"], d["image"]["height"]),
            n_proposals=d["n_proposals"],
            reduced=[scored_from_json(s) for s in d["reduced"]],
            added=[scored_from_json(s) for s in d["added"]],
            concepts=list(d["concepts"]),
            paths=[_path_from_json(p) for p in d["paths"]],
            bags=[_bag_from_json(b) for b in d["bags"]],
            crops=[_crop_from_json(c) for c in d["crops"]],
            flops=FlopsReport.from_dict(d["flops"]["ours"]),
            flops_dense=FlopsReport.from_dict(d["flops"]["dense"]),
            flops_baron=FlopsReport.from_dict(d["flops"]["baron"]),
        )


def dumps(obj: Any) -> str:
    """Canonical JSON text: 2-space indent, key order as built, trailing newline."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _path_to_json(p: EdgePath) -> dict:
    return {
        "pair": [p.start, p.end],
        "terminated": p.terminated.value,
        "hits": sorted(p.hit_concepts),
        "steps": [list(s) for s in p.steps],
    }


def _path_from_json(d: dict) -> EdgePath:
    return EdgePath(
        start=d["pair"][0],
        end=d["pair"][1],
        steps=tuple((int(r), int(c)) for r, c in d["steps"]),
        hit_concepts=frozenset(d["hits"]),
        terminated=Termination(d["terminated"]),
    )


def _bag_to_json(b: ConceptBag) -> dict:
    return {
        "proposal_id": b.proposal_id,
        "proposal": box_to_json(b.proposal),
        "fallback": b.fallback,
        "windows": [
            {
                "direction": w.direction,
                "concept_id": w.concept_id,
                "concept": scored_to_json(w.concept),
                "window": box_to_json(w.window),
            }
            for w in b.windows
        ],
        "fallback_groups": [[box_to_json(x) for x in g] for g in b.fallback_groups],
    }


def _bag_from_json(d: dict) -> ConceptBag:
    return ConceptBag(
        proposal_id=d["proposal_id"],
        proposal=box_from_json(d["proposal"]),
        fallback=d["fallback"],
        windows=[
            ConceptWindow(w["direction"], w["concept_id"], scored_from_json(w["concept"]), box_from_json(w["window"]))
            for w in d["windows"]
        ],
        fallback_groups=[[box_from_json(x) for x in g] for g in d["fallback_groups"]],
    )


def _decision_to_json(s: Optional[SwitchDecision]) -> Optional[dict]:
    if s is None:
        return None
    return {
        "concept_id": s.concept_id,
        "chosen": s.chosen.value,
        "trail": [
            {"parent": c.parent.value, "r": c.r, "L": c.L, "P": c.P, "tau": c.tau, "switched": c.switched}
            for c in s.trail
        ],
    }


def _decision_from_json(d: Optional[dict]) -> Optional[SwitchDecision]:
    if d is None:
        return None
    trail = tuple(
        Comparison(ViewLevel(c["parent"]), c["r"], c["L"], c["P"], c["tau"], c["switched"]) for c in d["trail"]
    )
    return SwitchDecision(d["concept_id"], ViewLevel(d["chosen"]), trail)


def _crop_to_json(c: CropRecord) -> dict:
    return {
        "bag_id": c.bag_id,
        "local_idx": c.local_idx,
        "box": box_to_json(c.box),
        "level": c.level.value,
        "decision": _decision_to_json(c.decision),
        "noise_threshold": c.noise_threshold,
        "masked": c.masked,
        "unmasked": c.unmasked,
        "view_mask": list(c.view_mask),
    }


def _crop_from_json(d: dict) -> CropRecord:
    return CropRecord(
        bag_id=d["bag_id"],
        local_idx=d["local_idx"],
        box=box_from_json(d["box"]),
        level=ViewLevel(d["level"]),
        decision=_decision_from_json(d["decision"]),
        noise_threshold=d["noise_threshold"],
        masked=d["masked"],
        unmasked=d["unmasked"],
        view_mask=tuple(d["view_mask"]),
    )


def _crop_masks(scene: SceneInput, cfg: PipelineConfig, frame: BBox, views) -> tuple:
    grid = cfg.patch_grid()
    levels = assign_view_levels(grid, frame, views)
    vmask = tuple(float(v) for v in view_mask(levels, cfg.weights(), grid.has_class_token))
    if scene.similarity is None:
        return None, 0, grid.tokens, vmask
    sim = scene.similarity_at(grid.centers(frame))
    nmask = noise_mask(sim, cfg.noise(), grid.has_class_token)
    unmasked = unmasked_key_count(nmask)
    return float(noise_threshold(sim, cfg.noise())), grid.tokens - unmasked, unmasked, vmask


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as e:  # noqa: BLE001 - re-raised with the stage name
        raise PipelineError(name, e) from e


def run_pipeline(scene: SceneInput, cfg: PipelineConfig) -> SampleOutput:
    """Run every stage in order; deterministic for a fixed ``cfg.seed``."""
    image = scene.image
    out = SampleOutput(config=cfg, image=image, n_proposals=len(scene.proposals))

    prep = _stage("prep", prepare, scene.proposals, scene.rpn, cfg.prep(), image)
    out.reduced, out.added = prep.reduced, prep.added

    canvas: Canvas = _stage("canvas", build_canvas, prep.reduced, cfg.interval, image)
    out.concepts, out.paths = _stage(
        "edges", collect_visual_concepts, canvas, prep.added, prep.reduced, cfg.edges()
    )

    concept_map = {cid: prep.reduced[cid] for cid in out.concepts}
    proposal_boxes = [p.box for p in scene.proposals]
    out.bags = _stage("concepts", form_bags, proposal_boxes, concept_map, cfg.concepts(), image)

    concept_boxes = [concept_map[cid] for cid in out.concepts]

    def views_and_masks() -> list[CropRecord]:
        records = []
        for bag in out.bags:
            views = hierarchical_views(bag, image)
            if not bag.fallback:
                t, m, u, vm = _crop_masks(scene, cfg, bag.proposal, views)
                records.append(CropRecord(bag.proposal_id, -1, bag.proposal, ViewLevel.LOCAL, None, t, m, u, vm))
            for idx in range(len(views.locals)):
                cid = bag.windows[idx].concept_id if not bag.fallback else -1
                decision = select_view(
                    idx, views, concept_boxes, cfg.weights(), cfg.tau_switch, cfg.coverage, concept_id=cid
                )
                frame = views.box(decision.chosen, idx)
                t, m, u, vm = _crop_masks(scene, cfg, frame, views)
                records.append(CropRecord(bag.proposal_id, idx, frame, decision.chosen, decision, t, m, u, vm))
        return records

    out.crops = _stage("views", views_and_masks)

    def flops() -> tuple[FlopsReport, FlopsReport, FlopsReport]:
        vit = cfg.vit()
        ours = crops_report([c.unmasked for c in out.crops], vit)
        dense = crops_report([vit.tokens] * len(out.crops), vit)
        n_baron = sum(
            len(g)
            for g in baron.baron_regions(proposal_boxes, image, cfg.n_bags, cfg.neighbors_per_bag, cfg.seed)
        )
        return ours, dense, crops_report([vit.tokens] * n_baron, vit)

    out.flops, out.flops_dense, out.flops_baron = _stage("flops", flops)
    return out


def canvas_dump(canvas: Canvas) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "interval": canvas.interval,
        "rows": canvas.rows,
        "cols": canvas.cols,
        "directions": ["up", "down", "left", "right"],
        "probs": np.asarray(canvas.probs).tolist(),
    }
