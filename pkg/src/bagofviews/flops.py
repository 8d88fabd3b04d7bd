"""FLOPs accounting for the CLIP image encoder: patch CNN, masked attention, MLP."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence, Union


def _positive(name: str, **vals: int) -> None:
    for k, v in vals.items():
        if int(v) != v or v < 1:
            raise ValueError(f"{name}.{k} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class CnnParams:
    kernel: int
    c_in: int
    c_out: int
    h_in: int
    w_in: int
    stride_h: int
    stride_w: int

    def __post_init__(self) -> None:
        _positive("CnnParams", **asdict(self))
        if self.h_in % self.stride_h or self.w_in % self.stride_w:
            raise ValueError(
                f"output dims not integral: {self.h_in}/{self.stride_h}, {self.w_in}/{self.stride_w}"
            )

    @property
    def h_out(self) -> int:
        return self.h_in // self.stride_h

    @property
    def w_out(self) -> int:
        return self.w_in // self.stride_w


@dataclass(frozen=True)
class AttnParams:
    batch: int
    heads: int
    head_dim: int
    window: int
    unmasked: int

    def __post_init__(self) -> None:
        _positive("AttnParams", **asdict(self))
        if self.unmasked > self.window:
            raise ValueError("unmasked key count cannot exceed the window")


@dataclass(frozen=True)
class MlpParams:
    batch: int
    window: int
    d_fc: int
    d_proj: int

    def __post_init__(self) -> None:
        _positive("MlpParams", **asdict(self))


Layer = Union[CnnParams, AttnParams, MlpParams]


@dataclass(frozen=True)
class FlopsReport:
    cnn: int = 0
    attention: int = 0
    mlp: int = 0
    crops: int = 0

    @property
    def total(self) -> int:
        return self.cnn + self.attention + self.mlp

    @property
    def pflops(self) -> float:
        return float(f"{self.total / 1e15:.3g}")

    def __add__(self, other: "FlopsReport") -> "FlopsReport":
        return FlopsReport(
            self.cnn + other.cnn,
            self.attention + other.attention,
            self.mlp + other.mlp,
            self.crops + other.crops,
        )

    def to_dict(self) -> dict:
        return {
            "cnn": self.cnn,
            "attention": self.attention,
            "mlp": self.mlp,
            "total": self.total,
            "crops": self.crops,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlopsReport":
        rep = cls(int(d["cnn"]), int(d["attention"]), int(d["mlp"]), int(d["crops"]))
        if "total" in d and int(d["total"]) != rep.total:
            raise ValueError("FlopsReport total does not equal the stage sum")
        return rep


def flops_cnn(p: CnnParams) -> int:
    return (p.kernel**2 * p.c_in * p.c_out) * (p.h_out * p.w_out)


def flops_attention(p: AttnParams) -> int:
    # the unmasked count is how many keys each token attends to
    return 2 * p.batch * p.heads * p.head_dim * p.window * p.unmasked


def flops_mlp(p: MlpParams) -> int:
    # two fully connected sub-layers as printed; no input-dimension factor
    return 2 * p.batch * p.window * p.d_fc + p.batch * p.window * p.d_proj


def layer_flops(layer: Layer) -> tuple[int, int, int]:
    if isinstance(layer, CnnParams):
        return flops_cnn(layer), 0, 0
    if isinstance(layer, AttnParams):
        return 0, flops_attention(layer), 0
    if isinstance(layer, MlpParams):
        return 0, 0, flops_mlp(layer)
    raise TypeError(f"unknown layer type: {type(layer).__name__}")


def pipeline_report(layers: Sequence[Layer], crops: int) -> FlopsReport:
    if crops < 0:
        raise ValueError("crop count must be non-negative")
    cnn = attn = mlp = 0
    for layer in layers:
        c, a, m = layer_flops(layer)
        cnn, attn, mlp = cnn + c, attn + a, mlp + m
    return FlopsReport(cnn * crops, attn * crops, mlp * crops, crops)


@dataclass(frozen=True)
class VitSpec:
    """Encoder geometry; defaults are ViT-B/16 at 224 px."""

    image_size: int = 224
    patch: int = 16
    channels: int = 3
    width: int = 768
    heads: int = 12
    layers: int = 12
    mlp_dim: int = 3072
    class_token: bool = True

    @property
    def tokens(self) -> int:
        side = self.image_size // self.patch
        return side * side + int(self.class_token)

    @property
    def head_dim(self) -> int:
        return self.width // self.heads

    def layers_for(self, unmasked: int | None = None, batch: int = 1) -> list[Layer]:
        """Patch embedding plus ``layers`` attention/MLP blocks."""
        n = self.tokens if unmasked is None else unmasked
        out: list[Layer] = [
            CnnParams(self.patch, self.channels, self.width, self.image_size, self.image_size, self.patch, self.patch)
        ]
        for _ in range(self.layers):
            out.append(AttnParams(batch, self.heads, self.head_dim, self.tokens, n))
            out.append(MlpParams(batch, self.tokens, self.mlp_dim, self.width))
        return out


def crops_report(unmasked_per_crop: Sequence[int], vit: VitSpec = VitSpec()) -> FlopsReport:
    """Sum of per-crop reports, each with its own unmasked key count."""
    total = FlopsReport()
    for n in unmasked_per_crop:
        total = total + pipeline_report(vit.layers_for(n), 1)
    return total


def reduction_percent(baseline: Union[FlopsReport, float, int], ours: Union[FlopsReport, float, int]) -> float:
    b = baseline.total if isinstance(baseline, FlopsReport) else baseline
    o = ours.total if isinstance(ours, FlopsReport) else ours
    if b == 0:
        raise ValueError("baseline cost is zero")
    return 100.0 * (b - o) / b
