"""Tests for the synthetic clip generator, domain shift, dataset splits and clip export"""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from totmnet.core.heart_rate import bin_spacing_bpm, estimate_hr_fft
from totmnet.models.config_models import Domain, Split, SynthConfig
from totmnet.tools.synth_tools import (
    clip_rngs,
    domain_config,
    export_clip,
    face_region,
    frames_digest,
    generate_bvp,
    load_clip,
    make_clip,
    make_dataset,
    render_frames,
    stack_clips,
)


@pytest.fixture
def cfg():
    return SynthConfig(T=180, H=12, W=12, seed=7)


def test_clips_are_reproducible(cfg):
    a = make_clip(cfg, Split.train, Domain.A, 3)
    b = make_clip(cfg, Split.train, Domain.A, 3)
    assert frames_digest(a) == frames_digest(b)
    np.testing.assert_array_equal(a.bvp, b.bvp)
    assert a.hr_bpm == b.hr_bpm


def test_index_split_and_seed_change_the_clip(cfg):
    base = frames_digest(make_clip(cfg, Split.train, Domain.A, 0))
    assert frames_digest(make_clip(cfg, Split.train, Domain.A, 1)) != base
    assert frames_digest(make_clip(cfg, Split.test, Domain.A, 0)) != base
    reseeded = cfg.model_copy(update={"seed": 8})
    assert frames_digest(make_clip(reseeded, Split.train, Domain.A, 0)) != base


def test_domains_share_content_but_not_nuisance(cfg):
    a = make_clip(cfg, Split.test, Domain.A, 2)
    b = make_clip(cfg, Split.test, Domain.B, 2)
    np.testing.assert_array_equal(a.bvp, b.bvp)
    assert a.hr_bpm == b.hr_bpm
    assert frames_digest(a) != frames_digest(b)

    content_a, _ = clip_rngs(cfg.seed, Split.test, Domain.A, 2)
    content_b, _ = clip_rngs(cfg.seed, Split.test, Domain.B, 2)
    assert content_a.random() == content_b.random()


def test_domain_b_is_harsher(cfg):
    shifted = domain_config(cfg, Domain.B)
    assert shifted.noise_sigma == 2 * cfg.noise_sigma
    assert shifted.illum_drift_amp == 2 * cfg.illum_drift_amp
    assert shifted.motion_jitter >= 1
    assert domain_config(cfg, Domain.A) is cfg


def test_domain_b_frames_vary_more_at_matched_indices():
    cfg = SynthConfig()
    for index in range(20):
        a = make_clip(cfg, Split.test, Domain.A, index)
        b = make_clip(cfg, Split.test, Domain.B, index)
        assert b.frames.var() > a.frames.var()


def test_splits_never_share_a_clip(cfg):
    digests = {
        split: {frames_digest(make_clip(cfg, split, Domain.A, index)) for index in range(8)}
        for split in Split
    }
    assert all(len(found) == 8 for found in digests.values())
    assert not digests[Split.train] & digests[Split.val]
    assert not digests[Split.train] & digests[Split.test]
    assert not digests[Split.val] & digests[Split.test]


def test_bvp_is_standardized_and_matches_hr():
    cfg = SynthConfig()
    rng = np.random.default_rng(0)
    for _ in range(1000):
        bvp, hr = generate_bvp(cfg, rng)
        assert bvp.shape == (cfg.T,)
        assert bvp.mean() == pytest.approx(0.0, abs=1e-12)
        assert bvp.std() == pytest.approx(1.0)
        assert 45.0 <= hr <= 150.0
        assert abs(estimate_hr_fft(bvp, cfg.fs) - hr) <= 1.5


def test_drift_free_hr_is_recovered_within_one_bin():
    cfg = SynthConfig(hr_drift=0.0)
    resolution = bin_spacing_bpm(cfg.T, cfg.fs)
    rng = np.random.default_rng(1)
    errors = []
    for _ in range(1000):
        bvp, hr = generate_bvp(cfg, rng)
        errors.append(abs(estimate_hr_fft(bvp, cfg.fs) - hr))
    assert max(errors) <= resolution


def test_fixed_hr_without_drift():
    cfg = SynthConfig(hr_drift=0.0)
    _, hr = generate_bvp(cfg, np.random.default_rng(1), hr_bpm=84.0)
    assert hr == pytest.approx(84.0)


def test_clean_render_carries_the_pulse_in_green():
    cfg = SynthConfig(noise_sigma=0.0, illum_drift_amp=0.0, motion_jitter=0)
    rng = np.random.default_rng(2)
    bvp, _ = generate_bvp(cfg, rng)
    frames = render_frames(bvp, cfg, rng)
    assert frames.shape == (cfg.T, 3, cfg.H, cfg.W)
    rows, cols = face_region(cfg)
    green = frames[:, 1, rows, cols].mean(axis=(1, 2))
    red = frames[:, 0, rows, cols].mean(axis=(1, 2))
    np.testing.assert_allclose(green - green.mean(), cfg.modulation_amp * bvp, atol=1e-12)
    np.testing.assert_allclose(red - red.mean(), 0.25 * cfg.modulation_amp * bvp, atol=1e-12)
    # background is static
    assert np.ptp(frames[:, :, 0, 0], axis=0).max() == 0.0


def test_jitter_moves_the_region():
    cfg = SynthConfig(noise_sigma=0.0, illum_drift_amp=0.0, motion_jitter=2)
    rng = np.random.default_rng(3)
    bvp, _ = generate_bvp(cfg, rng)
    frames = render_frames(bvp, cfg, rng)
    corners = frames[:, 1, 2, 2]
    assert np.unique(corners).size > 1


def test_invalid_synth_settings():
    with pytest.raises(ValidationError):
        SynthConfig(T=60)
    with pytest.raises(ValidationError):
        SynthConfig(hr_range=(40.0, 100.0))
    with pytest.raises(ValidationError):
        SynthConfig(unknown_field=1)


def test_make_dataset_and_stack(cfg):
    clips = make_dataset(cfg, 3, "val", "B")
    assert [clip.index for clip in clips] == [0, 1, 2]
    assert all(clip.split == Split.val and clip.domain == Domain.B for clip in clips)
    X, Y = stack_clips(clips)
    assert X.shape == (3, cfg.T, 3, cfg.H, cfg.W)
    assert Y.shape == (3, cfg.T)
    with pytest.raises(ValueError):
        make_dataset(cfg, 0)
    with pytest.raises(ValueError):
        make_dataset(cfg, 1, domain="C")


def test_export_and_reload(cfg, tmp_path):
    clip = make_clip(cfg, Split.test, Domain.B, 4)
    manifest_path = export_clip(clip, tmp_path, cfg.fs)
    assert manifest_path.name == "clip_test_B_00004.json"
    manifest = json.loads(manifest_path.read_text())
    assert manifest["frames_shape"] == [cfg.T, 3, cfg.H, cfg.W]
    assert manifest["hr_bpm"] == clip.hr_bpm

    loaded = load_clip(manifest_path)
    np.testing.assert_array_equal(loaded.frames, clip.frames)
    np.testing.assert_array_equal(loaded.bvp, clip.bvp)
    assert (loaded.split, loaded.domain, loaded.index) == (Split.test, Domain.B, 4)

    binary = tmp_path / manifest["binary_file"]
    payload = bytearray(binary.read_bytes())
    payload[0] ^= 0xFF
    binary.write_bytes(bytes(payload))
    with pytest.raises(ValueError):
        load_clip(manifest_path)
