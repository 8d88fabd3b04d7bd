"""Noise and view masks, and the masked multi-head attention kernel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import BBox
from .views import ViewLevel, Views, ViewWeights

# stands in for -inf before the softmax
MASK_OUT = -1e9


@dataclass(frozen=True)
class PatchGrid:
    rows: int = 14
    cols: int = 14
    has_class_token: bool = True

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("patch grid needs at least one row and column")

    @property
    def tokens(self) -> int:
        return self.rows * self.cols + int(self.has_class_token)

    def centers(self, frame: BBox) -> np.ndarray:
        """(rows * cols, 2) patch centers tiling ``frame``, row-major."""
        xs = frame.x1 + (np.arange(self.cols) + 0.5) * (frame.width / self.cols)
        ys = frame.y1 + (np.arange(self.rows) + 0.5) * (frame.height / self.rows)
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx.ravel(), gy.ravel()], axis=-1)


@dataclass(frozen=True)
class NoiseMaskConfig:
    s: float = 4.0

    def __post_init__(self) -> None:
        if self.s <= 0:
            raise ValueError("sigma scale must be positive")


def unit_embedding(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero-length embedding")
    return v / n


def cosine_similarity_map(patch_embeddings: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """Cosine similarity of each (rows, cols, d) patch embedding to ``chi``."""
    e = np.asarray(patch_embeddings, dtype=float)
    norms = np.linalg.norm(e, axis=-1)
    return np.clip((e @ unit_embedding(chi)) / norms, -1.0, 1.0)


def similarity_stats(sim: np.ndarray) -> tuple[float, float]:
    """Mean and sample standard deviation over all patches."""
    flat = np.asarray(sim, dtype=float).ravel()
    if flat.size < 2:
        raise ValueError("similarity statistics need at least two patches")
    return float(flat.mean()), float(flat.std(ddof=1))


def noise_threshold(sim: np.ndarray, cfg: NoiseMaskConfig) -> float:
    mu, sigma = similarity_stats(sim)
    return mu + cfg.s * sigma


def noise_mask(sim: np.ndarray, cfg: NoiseMaskConfig, has_class_token: bool = True) -> np.ndarray:
    """Additive per-key mask: MASK_OUT where similarity exceeds mu + s * sigma, else 0.

    Patches are flattened row-major; the class token, when present, comes
    first and is never masked.
    """
    flat = np.asarray(sim, dtype=float).ravel()
    tau = noise_threshold(flat, cfg)
    mask = np.where(flat > tau, MASK_OUT, 0.0)
    if has_class_token:
        mask = np.concatenate([[0.0], mask])
    return mask


def unmasked_key_count(mask: np.ndarray) -> int:
    return int(np.count_nonzero(np.asarray(mask) == 0.0))


def assign_view_levels(grid: PatchGrid, frame: BBox, views: Views) -> list[Optional[ViewLevel]]:
    """Deepest view containing each patch center when the patches tile ``frame``."""
    out: list[Optional[ViewLevel]] = []
    for x, y in grid.centers(frame):
        if any(b.contains_point(x, y) for b in views.locals):
            out.append(ViewLevel.LOCAL)
        elif views.middle.contains_point(x, y):
            out.append(ViewLevel.MIDDLE)
        elif views.global_.contains_point(x, y):
            out.append(ViewLevel.GLOBAL)
        else:
            out.append(None)
    return out


def view_mask(
    levels: Sequence[Optional[ViewLevel]], weights: ViewWeights, has_class_token: bool = True
) -> np.ndarray:
    """Multiplicative per-key weights; patches outside every view get 0."""
    vals = [weights.of(lv) if lv is not None else 0.0 for lv in levels]
    if has_class_token:
        vals = [1.0] + vals
    return np.asarray(vals, dtype=float)


def _softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def attention_weights(q: np.ndarray, k: np.ndarray, noise: Optional[np.ndarray] = None) -> np.ndarray:
    """softmax(QK^T / sqrt(d) + noise) for (..., tokens, d) inputs."""
    d = q.shape[-1]
    logits = q @ np.swapaxes(k, -1, -2) / np.sqrt(d)
    if noise is not None:
        logits = logits + noise
    return _softmax(logits)


def masked_attention(
    q: np.ndarray,
    k: np.ndarray,
    v: np.ndarray,
    noise: Optional[np.ndarray] = None,
    view: Optional[np.ndarray] = None,
) -> np.ndarray:
    """(softmax(QK^T / sqrt(d) + noise) * view) @ V, per head.

    Accepts (tokens, d) or (heads, tokens, d) arrays. Both masks are per key
    and broadcast over query rows. The view-weighted rows are not
    renormalized.
    """
    q, k, v = (np.asarray(a, dtype=float) for a in (q, k, v))
    if q.ndim not in (2, 3) or not (q.ndim == k.ndim == v.ndim):
        raise ValueError("Q, K, V must all be (tokens, d) or (heads, tokens, d)")
    if q.shape[-1] != k.shape[-1]:
        raise ValueError(f"query/key dims differ: {q.shape[-1]} vs {k.shape[-1]}")
    if k.shape[-2] != v.shape[-2] or q.shape[:-2] != k.shape[:-2] or k.shape[:-2] != v.shape[:-2]:
        raise ValueError("Q, K, V token or head counts do not line up")
    n_keys = k.shape[-2]
    for name, m in (("noise", noise), ("view", view)):
        if m is not None and np.asarray(m).shape != (n_keys,):
            raise ValueError(f"{name} mask has length {np.asarray(m).shape}, expected ({n_keys},)")
    w = attention_weights(q, k, None if noise is None else np.asarray(noise, dtype=float))
    if view is not None:
        w = w * np.asarray(view, dtype=float)
    return w @ v
