"""Pipeline hyperparameters and their per-module views."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .concepts import ConceptConfig
from .edges import EdgeConfig
from .flops import VitSpec
from .masks import NoiseMaskConfig, PatchGrid
from .proposal_prep import PrepConfig
from .views import ViewWeights


@dataclass(frozen=True)
class PipelineConfig:
    """Defaults reproduce the OV-COCO profile.

    The global view weight is unused in that profile ("-"); it is stored as
    0.0, which also disables promotion to the global view.
    """

    interval: float = 100.0
    edges_per_pair: int = 2
    n_extra: int = 3
    k: int = 300
    n_bags: int = 3
    lam: float = 0.5
    alpha: float = 0.5
    eta: float = 0.4
    s: float = 4.0
    delta_global: float = 0.0
    delta_middle: float = 0.8
    delta_local: float = 1.0
    tau_switch: float = 0.5
    coverage: float = 0.9
    seed: int = 0
    overlap_threshold: float = 0.0
    directions_per_proposal: int = 8
    neighbors_per_bag: int = 2
    min_area: Optional[float] = None
    max_steps: Optional[int] = None
    patch_rows: int = 14
    patch_cols: int = 14
    class_token: bool = True

    def __post_init__(self) -> None:
        if not (self.interval > 0 and math.isfinite(self.interval)):
            raise ValueError("interval must be positive")
        if self.tau_switch < 0:
            raise ValueError("tau_switch must be non-negative")
        # each module validates its own slice
        self.prep()
        self.edges()
        self.concepts()
        self.weights()
        self.noise()
        self.patch_grid()
        if not 0.0 < self.coverage <= 1.0:
            raise ValueError("coverage must lie in (0, 1]")

    def prep(self) -> PrepConfig:
        return PrepConfig(
            k=self.k,
            n_extra=self.n_extra,
            lam=self.lam,
            eta=self.eta,
            overlap_threshold=self.overlap_threshold,
            min_area=self.min_area,
        )

    def edges(self) -> EdgeConfig:
        return EdgeConfig(edges_per_pair=self.edges_per_pair, max_steps=self.max_steps, seed=self.seed)

    def concepts(self) -> ConceptConfig:
        return ConceptConfig(
            lam=self.lam,
            alpha=self.alpha,
            eta=self.eta,
            directions_per_proposal=self.directions_per_proposal,
            n_bags=self.n_bags,
            neighbors_per_bag=self.neighbors_per_bag,
            seed=self.seed,
        )

    def weights(self) -> ViewWeights:
        return ViewWeights(self.delta_global, self.delta_middle, self.delta_local)

    def noise(self) -> NoiseMaskConfig:
        return NoiseMaskConfig(self.s)

    def patch_grid(self) -> PatchGrid:
        return PatchGrid(self.patch_rows, self.patch_cols, self.class_token)

    def vit(self) -> VitSpec:
        if self.patch_rows != self.patch_cols:
            raise ValueError("FLOPs model assumes a square patch grid")
        return VitSpec(image_size=16 * self.patch_rows, class_token=self.class_token)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - set(known))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for key, value in d.items():
            default = known[key].default
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise ValueError(f"config key {key!r} must be a boolean")
            elif isinstance(default, int) and not isinstance(default, bool):
                if isinstance(value, bool) or int(value) != value:
                    raise ValueError(f"config key {key!r} must be an integer")
                value = int(value)
            elif isinstance(default, float):
                value = float(value)
            kwargs[key] = value
        return cls(**kwargs)


PROFILES: dict[str, dict[str, Any]] = {
    "coco": {},
    "lvis": {"k": 500, "n_bags": 4, "edges_per_pair": 4, "n_extra": 5},
}


def profile(name: str, **overrides: Any) -> PipelineConfig:
    try:
        base = PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    return PipelineConfig.from_dict({**base, **overrides})
