import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statswap import (
    DimensionError,
    EngineError,
    FeatureMap,
    TssatConfig,
    channel_stats,
    extract_patches,
    gsa,
    lss,
    match_patches,
    swap_patch_stats,
    tssat,
)
from statswap.oracle import naive_match
from conftest import random_map


def vgg_like(rng, channels=16, height=32, width=32):
    base = rng.standard_normal((channels, height, width)).astype(np.float32)
    offsets = rng.uniform(0.5, 2.5, size=(channels, 1, 1)).astype(np.float32)
    return FeatureMap(base + offsets)


class TestConfig:
    def test_defaults(self):
        cfg = TssatConfig()
        assert cfg.patch_size == 5
        assert cfg.content_stride == 5
        assert cfg.style_stride == 1
        assert cfg.epsilon == 1e-5
        assert cfg.matcher == "gemm"

    def test_content_stride_follows_patch_size(self):
        assert TssatConfig(patch_size=3).content_stride == 3

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"patch_size": 0},
            {"style_stride": 0},
            {"content_stride": -1},
            {"epsilon": -1e-3},
            {"matcher": "fft"},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(EngineError):
            TssatConfig(**kwargs)


class TestGsa:
    def test_forced_two_point(self):
        fc = FeatureMap(np.array([0.0, 2.0]).reshape(1, 1, 2))
        fs = FeatureMap(np.array([2.0, 8.0]).reshape(1, 1, 2))  # mean 5, std 3
        out = gsa(fc, fs, 0.0)
        assert np.allclose(out.data.reshape(-1), [2.0, 8.0], atol=1e-6)

    def test_identity(self, rng):
        fm = random_map(rng, 5, 7, 6, scale=2.0, offset=1.0)
        out = gsa(fm, fm)
        assert np.abs(out.data - fm.data).max() < 1e-5

    def test_transfers_stats(self, rng):
        fc = random_map(rng, 8, 16, 16, scale=1.5, offset=-1.0)
        fs = random_map(rng, 8, 16, 16, scale=0.5, offset=2.0)
        so = channel_stats(gsa(fc, fs), 0.0)
        ss = channel_stats(fs, 0.0)
        assert np.abs(so.mean - ss.mean).max() < 1e-4
        assert np.abs(so.std - ss.std).max() < 1e-4

    def test_spatial_sizes_may_differ(self, rng):
        out = gsa(random_map(rng, 3, 8, 8), random_map(rng, 3, 5, 11))
        assert out.shape == (3, 8, 8)

    def test_channel_mismatch(self, rng):
        with pytest.raises(DimensionError):
            gsa(random_map(rng, 3, 4, 4), random_map(rng, 4, 4, 4))


class TestSwapPatchStats:
    def test_self_swap_is_identity(self, rng):
        p = rng.standard_normal((4, 3, 3)).astype(np.float32)
        assert np.abs(swap_patch_stats(p, p) - p).max() < 1e-5

    def test_forced_values(self):
        content = np.array([0.0, 2.0, 0.0, 2.0], dtype=np.float32).reshape(1, 2, 2)
        style = np.array([8.0, 12.0, 8.0, 12.0], dtype=np.float32).reshape(1, 2, 2)
        out = swap_patch_stats(content, style, 0.0)
        assert np.allclose(out.reshape(-1), [8.0, 12.0, 8.0, 12.0], atol=1e-6)

    def test_transfers_window_stats(self, rng):
        from statswap.core import _stats_2d

        cp = rng.standard_normal((6, 4, 4)).astype(np.float32)
        sp = rng.standard_normal((6, 4, 4)).astype(np.float32) * 2.0 + 1.0
        out = swap_patch_stats(cp, sp)
        om, osd = _stats_2d(out.reshape(6, -1), 0.0)
        sm, ssd = _stats_2d(sp.reshape(6, -1), 0.0)
        assert np.abs(om - sm).max() < 1e-4
        assert np.abs(osd - ssd).max() < 1e-4

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            swap_patch_stats(np.zeros((1, 2, 2), np.float32), np.zeros((1, 3, 3), np.float32))


class TestMatchPatches:
    def test_orthogonal_alternatives(self):
        content = extract_patches(FeatureMap(np.array([1.0, 0.0]).reshape(2, 1, 1)), 1, 1)
        style_map = np.zeros((2, 1, 2), dtype=np.float32)
        style_map[:, 0, 0] = [2.0, 0.0]
        style_map[:, 0, 1] = [0.0, 3.0]
        style = extract_patches(FeatureMap(style_map), 1, 1)
        match = match_patches(content, style)
        assert match.assignment.tolist() == [0]
        assert match.score[0] == pytest.approx(1.0)

    def test_self_match_is_identity(self, rng):
        fm = random_map(rng, 3, 6, 6)
        ps = extract_patches(fm, 2, 2)
        match = match_patches(ps, ps)
        assert match.assignment.tolist() == list(range(len(ps)))
        assert np.all(match.score > 0.999999)

    @pytest.mark.parametrize("matcher", ["naive", "gemm"])
    def test_duplicate_styles_take_first_index(self, rng, matcher):
        fm = random_map(rng, 2, 4, 4)
        # style map made of the same patch tiled everywhere
        tile = rng.standard_normal((2, 2, 2)).astype(np.float32)
        style_map = np.tile(tile, (1, 3, 3))
        style = extract_patches(FeatureMap(style_map), 2, 2)
        match = match_patches(extract_patches(fm, 2, 2), style, matcher)
        assert np.all(match.assignment == 0)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_matchers_and_oracle_agree(self, rng, k):
        for _ in range(20):
            c, hs, ws = rng.integers(1, 5), rng.integers(k, 8), rng.integers(k, 8)
            content = extract_patches(random_map(rng, c, k * 2, k * 2), k, k)
            style = extract_patches(random_map(rng, c, int(hs), int(ws)), k, 1)
            a_gemm = match_patches(content, style, "gemm")
            a_naive = match_patches(content, style, "naive")
            a_oracle = naive_match(content, style)
            assert np.array_equal(a_gemm.assignment, a_naive.assignment)
            assert np.array_equal(a_gemm.assignment, a_oracle.assignment)
            assert np.allclose(a_gemm.score, a_oracle.score, atol=1e-9)

    def test_zero_norm_style_patch_never_wins(self, rng):
        style_map = np.zeros((1, 1, 3), dtype=np.float32)
        style_map[0, 0, 1] = 1.0  # patches: [0], [1], [0]
        style = extract_patches(FeatureMap(style_map), 1, 1)
        content = extract_patches(FeatureMap(np.array([5.0]).reshape(1, 1, 1)), 1, 1)
        for matcher in ("naive", "gemm"):
            match = match_patches(content, style, matcher)
            assert match.assignment.tolist() == [1]

    def test_zero_norm_content_takes_first_style(self, rng):
        content = extract_patches(FeatureMap(np.zeros((1, 1, 1), np.float32)), 1, 1)
        style = extract_patches(random_map(rng, 1, 1, 4), 1, 1)
        for matcher in ("naive", "gemm"):
            match = match_patches(content, style, matcher)
            assert match.assignment.tolist() == [0]
            assert match.score[0] == 0.0

    def test_empty_style_rejected(self, rng):
        content = extract_patches(random_map(rng, 1, 2, 2), 1, 1)

        class Empty:
            patch_size = 1
            channels = 1

            def __len__(self):
                return 0

        with pytest.raises(EngineError):
            match_patches(content, Empty())

    def test_k_mismatch_rejected(self, rng):
        fm = random_map(rng, 1, 6, 6)
        with pytest.raises(DimensionError):
            match_patches(extract_patches(fm, 2, 2), extract_patches(fm, 3, 3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-3, 1e3), k=st.integers(1, 3))
def test_match_is_scale_invariant(seed, scale, k):
    rng = np.random.default_rng(seed)
    content = extract_patches(
        FeatureMap(rng.standard_normal((2, 6, 6)).astype(np.float32)), k, k
    )
    style_data = rng.standard_normal((2, 6, 6)).astype(np.float32)
    before = match_patches(content, extract_patches(FeatureMap(style_data), k, 1))
    after = match_patches(
        content, extract_patches(FeatureMap(style_data * np.float32(scale)), k, 1)
    )
    assert np.array_equal(before.assignment, after.assignment)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 3))
def test_match_is_per_patch_scale_invariant(seed, k):
    # different positive scalar per style patch, via explicit patch sets
    rng = np.random.default_rng(seed)
    content = extract_patches(
        FeatureMap(rng.standard_normal((2, 6, 6)).astype(np.float32)), k, k
    )
    style = extract_patches(
        FeatureMap(rng.standard_normal((2, 6, 6)).astype(np.float32)), k, 1
    )
    plain = style.with_patches(style.patches)
    factors = rng.uniform(0.1, 10.0, size=(len(style), 1, 1, 1)).astype(np.float32)
    scaled = style.with_patches(style.patches * factors)
    for matcher in ("naive", "gemm"):
        a = match_patches(content, plain, matcher)
        b = match_patches(content, scaled, matcher)
        assert np.array_equal(a.assignment, b.assignment)


class TestLss:
    def test_single_patch_equals_gsa(self, rng):
        fg = random_map(rng, 3, 4, 4)
        fs = random_map(rng, 3, 4, 4)
        cfg = TssatConfig(patch_size=4, epsilon=1e-5)
        out = lss(fg, fs, cfg)
        assert np.array_equal(out.data, gsa(fg, fs, cfg.epsilon).data)

    def test_self_style_is_identity(self, rng):
        fm = random_map(rng, 4, 8, 8)
        out = lss(fm, fm, TssatConfig(patch_size=2))
        assert np.abs(out.data - fm.data).max() < 1e-4

    def test_tiles_equal_swapped_patches_bitwise(self, rng):
        from statswap.transform import _lss

        fg = random_map(rng, 3, 9, 9)
        fs = random_map(rng, 3, 7, 7)
        cfg = TssatConfig(patch_size=3)
        out, match = _lss(fg, fs, cfg)
        content = extract_patches(fg, 3, 3)
        style = extract_patches(fs, 3, 1)
        for i in range(len(content)):
            r, c = content.origin(i)
            expected = swap_patch_stats(
                content.patch(i), style.patch(int(match.assignment[i])), cfg.epsilon
            )
            assert np.array_equal(out.data[:, r : r + 3, c : c + 3], expected)

    def test_uncovered_positions_keep_input(self, rng):
        fg = random_map(rng, 2, 5, 5)
        fs = random_map(rng, 2, 5, 5)
        out = lss(fg, fs, TssatConfig(patch_size=2))
        assert np.array_equal(out.data[:, 4, :], fg.data[:, 4, :])
        assert np.array_equal(out.data[:, :, 4], fg.data[:, :, 4])

    def test_channel_mismatch(self, rng):
        with pytest.raises(DimensionError):
            lss(random_map(rng, 2, 4, 4), random_map(rng, 3, 4, 4), TssatConfig(patch_size=2))


class TestTssat:
    def test_identity(self, rng):
        fm = random_map(rng, 4, 10, 10)
        out, _ = tssat(fm, fm, TssatConfig(patch_size=5))
        assert np.abs(out.data - fm.data).max() < 1e-4

    def test_degenerates_to_gsa(self, rng):
        fc = random_map(rng, 3, 4, 4)
        fs = random_map(rng, 3, 4, 4)
        cfg = TssatConfig(patch_size=4)
        out, match = tssat(fc, fs, cfg)
        assert match.style_patch_count == 1
        assert np.abs(out.data - gsa(fc, fs, cfg.epsilon).data).max() < 1e-4

    def test_returns_assignment_used(self, rng):
        fc = random_map(rng, 3, 8, 8)
        fs = random_map(rng, 3, 8, 8)
        out, match = tssat(fc, fs, TssatConfig(patch_size=4))
        assert match.content_patch_count == 4
        assert match.style_patch_count == 25
        assert out.shape == fc.shape

    def test_deterministic(self, rng):
        fc = random_map(rng, 4, 12, 12)
        fs = random_map(rng, 4, 12, 12)
        cfg = TssatConfig(patch_size=3)
        out1, m1 = tssat(fc, fs, cfg)
        out2, m2 = tssat(fc, fs, cfg)
        assert np.array_equal(out1.data, out2.data)
        assert np.array_equal(m1.assignment, m2.assignment)

    def test_global_stats_regression(self):
        # swap stage perturbs the aligned global statistics only mildly;
        # worst observed vector-relative deviation over these seeds is 0.10,
        # frozen with headroom as a regression threshold
        worst = 0.0
        for seed in range(12):
            rng = np.random.default_rng(seed)
            fc, fs = vgg_like(rng), vgg_like(rng)
            out, _ = tssat(fc, fs, TssatConfig(patch_size=5))
            so = channel_stats(out, 0.0)
            ss = channel_stats(fs, 0.0)
            worst = max(
                worst,
                np.linalg.norm(so.mean - ss.mean) / np.linalg.norm(ss.mean),
                np.linalg.norm(so.std - ss.std) / np.linalg.norm(ss.std),
            )
        assert worst < 0.15
