"""Seeded synthetic rPPG clips: pulse waveform, rendered frames, split materialization, export"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..models.config_models import Domain, Split, SynthConfig
from ..models.storage_models import ClipManifest

logger = logging.getLogger(__name__)

SPLIT_CODES = {Split.train: 0, Split.val: 1, Split.test: 2}
DOMAIN_CODES = {Domain.A: 0, Domain.B: 1}

# plausible skin tones (RGB in [0, 1]); background is a darker copy
SKIN_LOW = np.array([0.45, 0.30, 0.25])
SKIN_HIGH = np.array([0.75, 0.55, 0.45])
BACKGROUND_SCALE = 0.5
RED_COUPLING = 0.25
ILLUM_FREQ_HZ = (0.05, 0.2)


@dataclass
class SynthClip:
    """One clip: frames T x 3 x H x W, standardized ground-truth BVP, mean HR"""
    frames: np.ndarray
    bvp: np.ndarray
    hr_bpm: float
    index: int = 0
    split: Split = Split.train
    domain: Domain = Domain.A
    seed: int = 0


def _seed_words(*words: int) -> List[int]:
    return [int(w) & 0xFFFFFFFFFFFFFFFF for w in words]


def clip_rngs(
    seed: int, split: Split, domain: Domain, index: int
) -> Tuple[np.random.Generator, np.random.Generator]:
    """
    (content, nuisance) generators for one clip.

    Content (HR, waveform, skin tone) depends on (seed, split, index), so the
    two domains share it at matched indices; nuisance draws also depend on domain.
    """
    content = np.random.SeedSequence(_seed_words(seed, SPLIT_CODES[split], index))
    nuisance = np.random.SeedSequence(
        _seed_words(seed, SPLIT_CODES[split], DOMAIN_CODES[domain], index, 1)
    )
    return np.random.default_rng(content), np.random.default_rng(nuisance)


def domain_config(cfg: SynthConfig, domain: Domain) -> SynthConfig:
    """Domain B doubles noise and illumination drift and forces nonzero jitter."""
    if domain == Domain.A:
        return cfg
    return cfg.model_copy(
        update={
            "noise_sigma": 2.0 * cfg.noise_sigma,
            "illum_drift_amp": 2.0 * cfg.illum_drift_amp,
            "motion_jitter": max(1, 2 * cfg.motion_jitter),
        }
    )


def generate_bvp(
    cfg: SynthConfig,
    rng: np.random.Generator,
    hr_bpm: Optional[float] = None,
) -> Tuple[np.ndarray, float]:
    """
    Quasi-periodic pulse waveform with a bounded linear HR drift.

    f(t) = HR(t) / 60, phase = 2 pi cumsum(f) / fs, and
    wave = sum_h harmonic_amp^(h-1) sin(h * phase + phi_h), standardized.

    Args:
        cfg: generator settings
        rng: random stream
        hr_bpm: fixed centre HR instead of a draw from hr_range

    Returns:
        (bvp of length T, clip mean HR in bpm)
    """
    lo, hi = cfg.hr_range
    duration = cfg.T / cfg.fs
    margin = min(cfg.hr_drift * duration / 2.0, (hi - lo) / 2.0)
    centre = rng.uniform(lo + margin, hi - margin) if hr_bpm is None else float(hr_bpm)
    slope = rng.uniform(-1.0, 1.0) * margin / (duration / 2.0) if margin > 0.0 else 0.0
    t = np.arange(cfg.T) / cfg.fs
    hr_track = centre + slope * (t - duration / 2.0)
    freq = hr_track / 60.0
    phase = 2.0 * np.pi * np.cumsum(freq) / cfg.fs
    offsets = rng.uniform(0.0, 2.0 * np.pi, size=cfg.harmonics)

    wave = np.zeros(cfg.T)
    for h in range(1, cfg.harmonics + 1):
        wave += cfg.harmonic_amp ** (h - 1) * np.sin(h * phase + offsets[h - 1])
    wave = (wave - wave.mean()) / wave.std()
    return wave, float(60.0 * freq.mean())


def face_region(cfg: SynthConfig) -> Tuple[slice, slice]:
    """Central box covering the middle half of the frame in each direction."""
    top, left = cfg.H // 4, cfg.W // 4
    return slice(top, cfg.H - top), slice(left, cfg.W - left)


def render_frames(
    bvp: np.ndarray,
    cfg: SynthConfig,
    rng: np.random.Generator,
    nuisance_rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Render T x 3 x H x W frames for a waveform.

    A skin-toned central region sits on a darker background; its green channel
    carries modulation_amp * bvp[t] (red a quarter of that). All channels get a
    slow sinusoidal illumination drift, then i.i.d. Gaussian noise. With
    motion_jitter > 0 the region shifts by a per-frame integer offset.
    """
    if nuisance_rng is None:
        nuisance_rng = rng
    T, H, W = cfg.T, cfg.H, cfg.W
    skin = rng.uniform(SKIN_LOW, SKIN_HIGH)
    frames = np.broadcast_to((BACKGROUND_SCALE * skin)[None, :, None, None], (T, 3, H, W)).copy()

    rows, cols = face_region(cfg)
    height, width = rows.stop - rows.start, cols.stop - cols.start
    jitter = cfg.motion_jitter
    if jitter:
        shifts = nuisance_rng.integers(-jitter, jitter + 1, size=(T, 2))
    else:
        shifts = np.zeros((T, 2), dtype=np.int64)

    pulse = cfg.modulation_amp * np.asarray(bvp, dtype=np.float64)
    tint = skin[:, None, None]
    for t in range(T):
        top = int(np.clip(rows.start + shifts[t, 0], 0, H - height))
        left = int(np.clip(cols.start + shifts[t, 1], 0, W - width))
        patch = frames[t, :, top: top + height, left: left + width]
        patch[:] = tint
        patch[1] += pulse[t]
        patch[0] += RED_COUPLING * pulse[t]

    if cfg.illum_drift_amp > 0.0:
        f_illum = nuisance_rng.uniform(*ILLUM_FREQ_HZ)
        phi = nuisance_rng.uniform(0.0, 2.0 * np.pi)
        drift = cfg.illum_drift_amp * np.sin(2.0 * np.pi * f_illum * np.arange(T) / cfg.fs + phi)
        frames += drift[:, None, None, None]
    if cfg.noise_sigma > 0.0:
        frames += nuisance_rng.normal(0.0, cfg.noise_sigma, size=frames.shape)
    return frames


def make_clip(cfg: SynthConfig, split: Split, domain: Domain, index: int) -> SynthClip:
    content_rng, nuisance_rng = clip_rngs(cfg.seed, split, domain, index)
    dcfg = domain_config(cfg, domain)
    bvp, hr = generate_bvp(dcfg, content_rng)
    frames = render_frames(bvp, dcfg, content_rng, nuisance_rng)
    return SynthClip(frames=frames, bvp=bvp, hr_bpm=hr, index=index, split=split, domain=domain, seed=cfg.seed)


def make_dataset(
    cfg: SynthConfig,
    n_clips: int,
    split: Union[Split, str] = Split.train,
    domain: Union[Domain, str] = Domain.A,
) -> List[SynthClip]:
    """
    Materialize ``n_clips`` clips; each is fully determined by (seed, split, domain, index).

    Raises:
        ValueError: if n_clips < 1 or split/domain is unknown
    """
    if n_clips < 1:
        raise ValueError(f"n_clips must be >= 1, got {n_clips}")
    split, domain = Split(split), Domain(domain)
    logger.debug(f"Generating {n_clips} {split.value}/{domain.value} clips (seed={cfg.seed})")
    return [make_clip(cfg, split, domain, index) for index in range(n_clips)]


def stack_clips(clips: List[SynthClip]) -> Tuple[np.ndarray, np.ndarray]:
    """(X, Y) batch arrays: B x T x 3 x H x W frames and B x T waveforms."""
    return np.stack([clip.frames for clip in clips]), np.stack([clip.bvp for clip in clips])


def frames_digest(clip: SynthClip) -> str:
    return hashlib.sha256(np.ascontiguousarray(clip.frames).tobytes()).hexdigest()


# -------------
# Export
# -------------

def clip_stem(clip: SynthClip) -> str:
    return f"clip_{clip.split.value}_{clip.domain.value}_{clip.index:05d}"


def export_clip(clip: SynthClip, out_dir: Union[str, Path], fs: float) -> Path:
    """
    Write ``<stem>.bin`` (frames then bvp, little-endian float64) and its
    ``<stem>.json`` manifest.

    Returns:
        path of the manifest
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = clip_stem(clip)
    payload = clip.frames.astype("<f8").tobytes() + clip.bvp.astype("<f8").tobytes()
    binary_path = out_dir / f"{stem}.bin"
    binary_path.write_bytes(payload)
    manifest = ClipManifest(
        index=clip.index,
        split=clip.split.value,
        domain=clip.domain.value,
        seed=clip.seed,
        fs=fs,
        hr_bpm=clip.hr_bpm,
        frames_shape=tuple(clip.frames.shape),
        bvp_shape=tuple(clip.bvp.shape),
        binary_file=binary_path.name,
        sha256=hashlib.sha256(payload).hexdigest(),
    )
    manifest_path = out_dir / f"{stem}.json"
    manifest_path.write_text(manifest.model_dump_json(indent=2))
    return manifest_path


def load_clip(manifest_path: Union[str, Path]) -> SynthClip:
    """
    Read a clip written by ``export_clip``.

    Raises:
        ValueError: if the binary size or checksum disagrees with the manifest
    """
    manifest_path = Path(manifest_path)
    manifest = ClipManifest.model_validate_json(manifest_path.read_text())
    payload = (manifest_path.parent / manifest.binary_file).read_bytes()
    if manifest.sha256 and hashlib.sha256(payload).hexdigest() != manifest.sha256:
        raise ValueError(f"checksum mismatch for {manifest.binary_file}")
    values = np.frombuffer(payload, dtype=manifest.dtype).astype(np.float64)
    n_frames = int(np.prod(manifest.frames_shape))
    if values.size != n_frames + manifest.bvp_shape[0]:
        raise ValueError(f"{manifest.binary_file} holds {values.size} values, manifest expects {n_frames + manifest.bvp_shape[0]}")
    return SynthClip(
        frames=values[:n_frames].reshape(manifest.frames_shape),
        bvp=values[n_frames:].copy(),
        hr_bpm=manifest.hr_bpm,
        index=manifest.index,
        split=Split(manifest.split),
        domain=Domain(manifest.domain),
        seed=manifest.seed,
    )

