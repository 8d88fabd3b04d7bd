import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bagofviews.geometry import BBox
from bagofviews.masks import (
    MASK_OUT,
    NoiseMaskConfig,
    PatchGrid,
    assign_view_levels,
    attention_weights,
    cosine_similarity_map,
    masked_attention,
    noise_mask,
    noise_threshold,
    similarity_stats,
    unmasked_key_count,
    view_mask,
)
from bagofviews.views import ViewLevel, Views, ViewWeights


def reference_attention(q, k, v):
    """Per-row scaled dot-product attention with explicit loops."""
    n, d = q.shape
    out = np.zeros((n, v.shape[1]))
    for i in range(n):
        logits = [float(q[i] @ k[j]) / np.sqrt(d) for j in range(k.shape[0])]
        m = max(logits)
        e = [np.exp(x - m) for x in logits]
        s = sum(e)
        for j in range(k.shape[0]):
            out[i] += (e[j] / s) * v[j]
    return out


class TestHandExample:
    Q = np.zeros((3, 1))
    K = np.zeros((3, 1))
    V = np.array([[3.0], [6.0], [9.0]])

    def test_uniform_weights(self):
        assert masked_attention(self.Q, self.K, self.V) == pytest.approx(np.full((3, 1), 6.0))

    def test_noise_mask_drops_key(self):
        out = masked_attention(self.Q, self.K, self.V, noise=np.array([0.0, 0.0, MASK_OUT]))
        assert out == pytest.approx(np.full((3, 1), 4.5))

    def test_view_mask_is_not_renormalized(self):
        out = masked_attention(self.Q, self.K, self.V, view=np.array([1.0, 0.8, 1.0]))
        assert out == pytest.approx(np.full((3, 1), (3 + 4.8 + 9) / 3))


def test_matches_reference(rng):
    for _ in range(30):
        n, d = int(rng.integers(1, 33)), int(rng.integers(1, 65))
        q, k, v = (rng.standard_normal((n, d)) for _ in range(3))
        got = masked_attention(q, k, v, noise=np.zeros(n), view=np.ones(n))
        assert np.allclose(got, reference_attention(q, k, v), atol=1e-9, rtol=0)


def test_multi_head_matches_per_head(rng):
    q, k, v = (rng.standard_normal((4, 10, 8)) for _ in range(3))
    noise = np.where(rng.uniform(size=10) < 0.3, MASK_OUT, 0.0)
    full = masked_attention(q, k, v, noise=noise)
    for h in range(4):
        assert np.allclose(full[h], masked_attention(q[h], k[h], v[h], noise=noise))


def test_shape_errors():
    a = np.zeros((3, 4))
    with pytest.raises(ValueError):
        masked_attention(a, np.zeros((3, 5)), a)
    with pytest.raises(ValueError):
        masked_attention(a, a, np.zeros((2, 4)))
    with pytest.raises(ValueError):
        masked_attention(a, a, a, noise=np.zeros(2))


class TestNoiseMask:
    def test_single_outlier_thresholds(self):
        sim = np.zeros((7, 7))
        sim[3, 3] = 1.0
        mu, sigma = similarity_stats(sim)
        assert mu == pytest.approx(1 / 49)
        assert sigma == pytest.approx(1 / 7)
        for s, masked in ((2, True), (4, True), (8, False)):
            m = noise_mask(sim, NoiseMaskConfig(s=s))
            assert bool(m[1 + 24] == MASK_OUT) is masked
            assert m[0] == 0.0

    def test_class_token_never_masked(self):
        sim = np.array([[0.0, 0.0], [0.0, 1.0]])
        m = noise_mask(sim, NoiseMaskConfig(s=0.1))
        assert m[0] == 0.0 and m[-1] == MASK_OUT
        assert noise_mask(sim, NoiseMaskConfig(s=0.1), has_class_token=False).shape == (4,)

    def test_needs_two_patches(self):
        with pytest.raises(ValueError):
            similarity_stats(np.array([0.3]))

    def test_rejects_non_positive_scale(self):
        with pytest.raises(ValueError):
            NoiseMaskConfig(s=0)

    def test_cosine_map(self):
        emb = np.array([[[1.0, 0.0], [0.0, 2.0]], [[-3.0, 0.0], [1.0, 1.0]]])
        got = cosine_similarity_map(emb, np.array([2.0, 0.0]))
        assert got == pytest.approx(np.array([[1.0, 0.0], [-1.0, np.sqrt(0.5)]]))

    def test_unmasked_count(self):
        assert unmasked_key_count(np.array([0.0, MASK_OUT, 0.0])) == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_masks_nest_as_scale_grows(seed):
    r = np.random.default_rng(seed)
    sim = np.clip(r.normal(0.2, 0.15, (14, 14)), -1, 1)
    masked = [set(np.flatnonzero(noise_mask(sim, NoiseMaskConfig(s=s)) == MASK_OUT)) for s in (1, 2, 4, 8)]
    assert masked[3] <= masked[2] <= masked[1] <= masked[0]
    assert noise_threshold(sim, NoiseMaskConfig(s=2)) < noise_threshold(sim, NoiseMaskConfig(s=4))


class TestViewMask:
    def test_levels_and_weights(self):
        frame = BBox(0, 0, 40, 40)
        views = Views(global_=BBox(0, 0, 40, 40), middle=BBox(0, 0, 20, 40), locals=(BBox(0, 0, 10, 10),))
        levels = assign_view_levels(PatchGrid(4, 4), frame, views)
        # patch centers at 5, 15, 25, 35
        assert levels[0] is ViewLevel.LOCAL
        assert levels[1] is ViewLevel.MIDDLE
        assert levels[2] is ViewLevel.GLOBAL
        m = view_mask(levels, ViewWeights())
        assert m[0] == 1.0 and m[1] == 1.0 and m[2] == 0.8 and m[3] == 0.0

    def test_patch_outside_views(self):
        m = view_mask([None, ViewLevel.LOCAL], ViewWeights(), has_class_token=False)
        assert m.tolist() == [0.0, 1.0]

    def test_centers_tile_frame(self):
        c = PatchGrid(2, 3, False).centers(BBox(0, 0, 30, 20))
        assert c.tolist() == [[5, 5], [15, 5], [25, 5], [5, 15], [15, 15], [25, 15]]
        assert PatchGrid().tokens == 197


def test_masked_keys_get_no_weight(rng):
    q, k = rng.standard_normal((8, 16)), rng.standard_normal((8, 16))
    noise = np.zeros(8)
    noise[[2, 5]] = MASK_OUT
    w = attention_weights(q, k, noise)
    assert w[:, [2, 5]].max() <= 1e-12
    assert np.allclose(w.sum(axis=1), 1.0)
