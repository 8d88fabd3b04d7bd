"""Scene input schema: image size, proposals, RPN boxes and optional side data."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .geometry import BBox, ImageDims, ScoredBox, clip

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class SceneError(ValueError):
    """Malformed scene input."""


def box_to_json(b: BBox) -> list[float]:
    return b.as_list()


def box_from_json(v: Any) -> BBox:
    if not isinstance(v, (list, tuple)) or len(v) != 4:
        raise SceneError(f"box must be a list of 4 numbers, got {v!r}")
    return BBox.from_seq(v)


def scored_to_json(s: ScoredBox) -> dict:
    return {"box": box_to_json(s.box), "objectness": s.objectness}


def scored_from_json(v: Any) -> ScoredBox:
    try:
        return ScoredBox(box_from_json(v["box"]), float(v.get("objectness", 1.0)))
    except (KeyError, TypeError) as e:
        raise SceneError(f"bad scored box {v!r}") from e


@dataclass
class SceneInput:
    image: ImageDims
    proposals: list[ScoredBox]
    rpn: list[ScoredBox]
    gt: list[BBox] = field(default_factory=list)
    # noise similarity over the image, any resolution, row-major (y, x)
    similarity: Optional[np.ndarray] = None
    noise_embedding: Optional[np.ndarray] = None
    neighbor_embeddings: Optional[np.ndarray] = None

    def similarity_at(self, points: np.ndarray) -> np.ndarray:
        """Nearest-cell lookup of the similarity field at pixel ``points`` (n, 2)."""
        if self.similarity is None:
            raise ValueError("scene carries no similarity field")
        h, w = self.similarity.shape
        cols = np.clip((points[:, 0] / self.image.width * w).astype(int), 0, w - 1)
        rows = np.clip((points[:, 1] / self.image.height * h).astype(int), 0, h - 1)
        return self.similarity[rows, cols]

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "image": {"width": self.image.width, "height": self.image.height},
            "proposals": [scored_to_json(p) for p in self.proposals],
            "rpn": [scored_to_json(r) for r in self.rpn],
        }
        if self.gt:
            d["gt"] = [box_to_json(b) for b in self.gt]
        if self.similarity is not None:
            d["similarity"] = self.similarity.tolist()
        if self.noise_embedding is not None:
            d["noise_embedding"] = self.noise_embedding.tolist()
        if self.neighbor_embeddings is not None:
            d["neighbor_embeddings"] = self.neighbor_embeddings.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneInput":
        if d.get("schema") != SCHEMA_VERSION:
            raise SceneError(f"unsupported scene schema {d.get('schema')!r}")
        try:
            image = ImageDims(int(d["image"]["width"]), int(d["image"]["height"]))
        except (KeyError, TypeError, ValueError) as e:
            raise SceneError(f"bad image dims: {e}") from e

        def clamp_scored(items: list, what: str) -> list[ScoredBox]:
            out = []
            for i, item in enumerate(items):
                sb = scored_from_json(item)
                c = clip(sb.box, image)
                if c is None:
                    raise SceneError(f"{what}[{i}] lies outside the image")
                if c != sb.box:
                    log.warning("clamped %s[%d] from %s to %s", what, i, sb.box.as_list(), c.as_list())
                out.append(ScoredBox(c, sb.objectness))
            return out

        try:
            proposals = clamp_scored(d.get("proposals", []), "proposals")
            rpn = clamp_scored(d.get("rpn", []), "rpn")
            gt = [box_from_json(b) for b in d.get("gt", [])]
        except ValueError as e:
            raise SceneError(str(e)) from e

        sim = d.get("similarity")
        if sim is not None:
            sim = np.asarray(sim, dtype=float)
            if sim.ndim != 2 or sim.size < 2:
                raise SceneError("similarity must be a 2-D array with at least two cells")
            if np.any(np.abs(sim) > 1.0):
                raise SceneError("similarity values must lie in [-1, 1]")
        chi = d.get("noise_embedding")
        if chi is not None:
            chi = np.asarray(chi, dtype=float)
        nbr = d.get("neighbor_embeddings")
        if nbr is not None:
            nbr = np.asarray(nbr, dtype=float)
        return cls(image, proposals, rpn, gt, sim, chi, nbr)
