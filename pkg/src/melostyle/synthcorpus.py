"""Deterministic style-archetype clip generator.

Real vocal recordings cannot ship with this package, so tests and demos
run on synthetic clips whose melodic statistics are steered to each style's
signature: long on-grid steady notes near the tonic (Hindustani), dense
5-7 Hz oscillations in a higher register (Carnatic), and moderate ornaments
with off-grid scale degrees plus energy tremolo in the top register
(Turkish). Every stochastic choice flows from one seed, so identical
arguments give bit-identical files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .audio import synthesize_stimulus, write_wav
from .dataio import (
    STYLES,
    STYLE_CODES,
    ClipRecord,
    EnergyContour,
    PitchTrack,
    normalize_style,
    to_cents,
    write_energy_contour,
    write_manifest,
    write_pitch_track,
)
from .errors import ValidationError

FRAME_RATE = 100  # frames per second


@dataclass(frozen=True)
class StyleArchetype:
    """Generation parameters for one style.

    ``scale_degrees`` are grid positions in cents relative to the tonic and
    ``note_grid_offsets`` the per-degree deviation from that grid. Rates are
    in Hz, extents peak-to-peak cents. ``tremolo_rate_hz`` of None disables
    energy tremolo.
    """

    style: str
    scale_degrees: tuple[float, ...]
    note_grid_offsets: tuple[float, ...]
    steady_fraction: float  # probability a note is a pure dwell, no ornament
    note_duration_s: tuple[float, float]
    oscillation_rate_hz: tuple[float, float]
    oscillation_extent_cents: tuple[float, float]
    dwell_fraction: float
    register_center_cents: float
    tremolo_rate_hz: tuple[float, float] | None
    seed: int
    # Intonation scatter: singers neither repeat a note at identical pitch
    # nor hold it perfectly still, and histogram peaks need that width to
    # survive median filtering the way real clips do.
    note_intonation_sd_cents: float = 5.0
    frame_jitter_sd_cents: float = 5.0

    def __post_init__(self):
        normalize_style(self.style)
        if len(self.scale_degrees) != len(self.note_grid_offsets):
            raise ValidationError("one grid offset per scale degree required")
        if not -2400.0 <= self.register_center_cents <= 2400.0:
            raise ValidationError("register center outside +/-2400 cents")
        rates = list(self.oscillation_rate_hz)
        if self.tremolo_rate_hz is not None:
            rates += list(self.tremolo_rate_hz)
        if any(not 0.0 <= r <= 15.0 for r in rates):
            raise ValidationError("rates must lie in [0, 15] Hz")
        if not 0.0 <= self.steady_fraction <= 1.0:
            raise ValidationError("steady fraction must lie in [0, 1]")


def default_archetype(style: str, seed: int) -> StyleArchetype:
    """The built-in archetype for a style name or code."""
    try:
        style = normalize_style(style)
    except ValidationError as exc:
        raise ValueError(str(exc)) from exc
    if style == "Hindustani":
        return StyleArchetype(
            style=style,
            scale_degrees=(-200.0, 0.0, 200.0, 400.0, 500.0, 700.0),
            note_grid_offsets=(3.0, 0.0, -4.0, 4.0, -3.0, 2.0),
            steady_fraction=0.85,
            note_duration_s=(0.9, 2.0),
            oscillation_rate_hz=(0.2, 0.5),
            oscillation_extent_cents=(2.0, 6.0),
            dwell_fraction=1.0,
            register_center_cents=0.0,
            tremolo_rate_hz=None,
            seed=seed,
            note_intonation_sd_cents=4.0,
            frame_jitter_sd_cents=5.0,
        )
    if style == "Carnatic":
        return StyleArchetype(
            style=style,
            scale_degrees=(400.0, 500.0, 700.0, 900.0, 1100.0),
            note_grid_offsets=(12.0, -15.0, 8.0, 18.0, -10.0),
            steady_fraction=0.1,
            note_duration_s=(0.35, 0.65),
            oscillation_rate_hz=(5.0, 7.0),
            oscillation_extent_cents=(170.0, 230.0),
            dwell_fraction=0.45,
            register_center_cents=700.0,
            tremolo_rate_hz=None,
            seed=seed,
            note_intonation_sd_cents=6.0,
            frame_jitter_sd_cents=5.0,
        )
    return StyleArchetype(
        style=style,
        scale_degrees=(1200.0, 1400.0, 1500.0, 1700.0, 1900.0),
        note_grid_offsets=(5.0, 38.0, -6.0, -42.0, 8.0),
        steady_fraction=0.45,
        note_duration_s=(0.5, 1.1),
        oscillation_rate_hz=(3.0, 4.0),
        oscillation_extent_cents=(90.0, 150.0),
        dwell_fraction=0.6,
        register_center_cents=1550.0,
        tremolo_rate_hz=(5.0, 7.0),
        seed=seed,
        note_intonation_sd_cents=5.0,
        frame_jitter_sd_cents=5.0,
    )


def _note_target(arch: StyleArchetype, degree_idx: int) -> float:
    return arch.scale_degrees[degree_idx] + arch.note_grid_offsets[degree_idx]


def _render_note(
    arch: StyleArchetype, rng: np.random.Generator, center: float, n_frames: int
) -> np.ndarray:
    """Cents trajectory for one note: a steady dwell, optionally decorated
    with an oscillation burst over the non-dwell portion.

    A fraction ``steady_fraction`` of notes stay pure dwells. The burst is a
    cubed sine: it lingers near the note center and whips to the extremes,
    so ornament time-mass keeps peaking at the note itself the way sung
    ornaments do, while the oscillation rate still dominates the pitch
    modulation spectrum.
    """
    t = np.arange(n_frames) / FRAME_RATE
    rate = rng.uniform(*arch.oscillation_rate_hz)
    amp = 0.5 * rng.uniform(*arch.oscillation_extent_cents)
    plain_dwell = rng.uniform() < arch.steady_fraction
    if arch.dwell_fraction >= 1.0:
        # Steady style: the "oscillation" is only a slow, tiny drift.
        phase = rng.uniform(0, 2 * np.pi)
        return center + amp * np.sin(2 * np.pi * rate * t + phase)
    if plain_dwell:
        return np.full(n_frames, center, dtype=float)
    dwell = max(1, int(round(arch.dwell_fraction * n_frames)))
    out = np.full(n_frames, center, dtype=float)
    osc_t = np.arange(n_frames - dwell) / FRAME_RATE
    # Phase starts at zero so the burst continues the dwell pitch smoothly.
    out[dwell:] = center + amp * np.sin(2 * np.pi * rate * osc_t) ** 3
    return out


def generate_clip(
    arch: StyleArchetype, duration_s: float, tonic_hz: float = 220.0
) -> tuple[PitchTrack, EnergyContour]:
    """Generate one clip's pitch track and energy contour.

    The melody is a seeded random walk over the archetype's scale degrees,
    rendered note by note with style-specific ornamentation, linear glides
    between notes and occasional unvoiced gaps.
    """
    if duration_s < 10.0:
        raise ValueError(f"clips must be at least 10 s, got {duration_s:g}")
    rng = np.random.default_rng(arch.seed)
    n = int(round(duration_s * FRAME_RATE))
    cents = np.full(n, np.nan)

    n_degrees = len(arch.scale_degrees)
    center_idx = int(
        np.argmin(np.abs(np.asarray(arch.scale_degrees) - arch.register_center_cents))
    )
    degree = center_idx
    pos = 0
    prev_pitch: float | None = None
    while pos < n:
        duration = rng.uniform(*arch.note_duration_s)
        if degree == center_idx:
            duration *= 1.75  # emphasize the register center, where most time is spent
        note_frames = min(int(round(duration * FRAME_RATE)), n - pos)
        target = _note_target(arch, degree) + rng.normal(
            0.0, arch.note_intonation_sd_cents
        )
        if prev_pitch is not None:
            glide_frames = min(int(rng.integers(4, 10)), note_frames, n - pos)
            cents[pos : pos + glide_frames] = np.linspace(
                prev_pitch, target, glide_frames, endpoint=False
            )
            pos += glide_frames
            note_frames = min(note_frames, n - pos)
        if note_frames > 0:
            cents[pos : pos + note_frames] = _render_note(arch, rng, target, note_frames)
            prev_pitch = float(cents[pos + note_frames - 1])
            pos += note_frames
        # Random walk biased back toward the register center.
        if degree == 0:
            degree += 1
        elif degree == n_degrees - 1:
            degree -= 1
        else:
            bias = 0.5 + 0.25 * np.sign(center_idx - degree)
            degree += int(rng.choice([-1, 1], p=[1 - bias, bias]))
        if rng.uniform() < 0.15 and pos < n:
            gap = int(round(rng.uniform(0.15, 0.4) * FRAME_RATE))
            pos += gap
            prev_pitch = None

    voiced = ~np.isnan(cents)
    cents[voiced] += rng.normal(0.0, arch.frame_jitter_sd_cents, int(voiced.sum()))

    t = np.arange(n) / FRAME_RATE
    base = 0.55 + 0.25 * np.sin(
        2 * np.pi * rng.uniform(0.08, 0.2) * t + rng.uniform(0, 2 * np.pi)
    )
    if arch.tremolo_rate_hz is not None:
        trem_rate = rng.uniform(*arch.tremolo_rate_hz)
        base = base * (
            1.0 + 0.35 * np.sin(2 * np.pi * trem_rate * t + rng.uniform(0, 2 * np.pi))
        )
    energy = np.where(voiced, np.maximum(base, 0.05), 0.0)

    f0 = np.zeros(n)
    f0[voiced] = tonic_hz * np.exp2(cents[voiced] / 1200.0)
    return PitchTrack(f0=f0), EnergyContour(energy=energy)


def generate_corpus(
    outdir: str,
    count: int,
    duration_s: float,
    seed: int,
    styles: tuple[str, ...] = STYLES,
    audio: bool = False,
) -> str:
    """Write ``count`` clips (styles round-robin) plus a manifest; returns
    the manifest path."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    os.makedirs(outdir, exist_ok=True)
    records = []
    per_style_counter = {s: 0 for s in styles}
    for i in range(count):
        style = normalize_style(styles[i % len(styles)])
        per_style_counter[style] = per_style_counter.get(style, 0) + 1
        ss = np.random.SeedSequence(entropy=(seed, i))
        tonic_ss, clip_ss = ss.spawn(2)
        tonic_hz = float(np.random.default_rng(tonic_ss).uniform(150.0, 260.0))
        clip_seed = int(clip_ss.generate_state(1)[0])
        arch = default_archetype(style, seed=clip_seed)
        pitch, energy = generate_clip(arch, duration_s, tonic_hz=tonic_hz)

        clip_id = f"{STYLE_CODES[style]}{per_style_counter[style]:03d}"
        pitch_path = os.path.join(outdir, f"{clip_id}_pitch.csv")
        energy_path = os.path.join(outdir, f"{clip_id}_energy.csv")
        write_pitch_track(pitch, pitch_path)
        write_energy_contour(energy, energy_path)
        audio_path = None
        if audio:
            audio_path = os.path.join(outdir, f"{clip_id}.wav")
            clip = synthesize_stimulus(to_cents(pitch, tonic_hz), energy, tonic_hz)
            write_wav(clip, audio_path)
        records.append(
            ClipRecord(
                clip_id=clip_id,
                style=style,
                tonic_hz=tonic_hz,
                pitch_path=pitch_path,
                energy_path=energy_path,
                audio_path=audio_path,
            )
        )
    manifest_path = os.path.join(outdir, "manifest.csv")
    write_manifest(records, manifest_path)
    return manifest_path
