"""Time-domain melodic contour features.

Covers steady/ornament segmentation of a cents track, the oscillation
energy-ratio statistic and its clip-level summary, the block-mean wavelet
approximation used for counting note transitions, and the energy tremolo
rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import CentsTrack, EnergyContour, voiced_runs
from .errors import UndefinedFeatureError

STEADY = 0
GAMAK = 1
UNVOICED = 2

# Segmentation parameter presets: window length (ms) and allowed pitch
# standard deviation (cents). The data-driven pair is the default; the
# musician-labelled pair is kept available but unused by default.
PARAMS_DATA_DRIVEN = (400.0, 20.0)
PARAMS_MUSICOLOGICAL = (700.0, 10.0)

ER_WINDOW_FRAMES = 100
ER_HOP_FRAMES = 50
ER_NFFT = 512
ER_NUM_BAND_HZ = (3.0, 7.5)
ER_DEN_BAND_HZ = (1.0, 20.0)


@dataclass(frozen=True)
class Segmentation:
    """Per-frame steady/gamak/unvoiced labels plus the parameters used."""

    labels: np.ndarray
    n_ms: float
    j_cents: float

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ErSeries:
    """Oscillation energy ratios of 1 s windows hopped by 0.5 s."""

    values: np.ndarray
    window_s: float = 1.0
    hop_s: float = 0.5

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def segment_contour(
    cents: CentsTrack,
    n_ms: float = PARAMS_DATA_DRIVEN[0],
    j_cents: float = PARAMS_DATA_DRIVEN[1],
) -> Segmentation:
    """Label each frame Steady, Gamak or Unvoiced.

    A frame is Steady when some window of ``n_ms`` consecutive voiced frames
    covering it has pitch standard deviation at most ``j_cents``. Voiced
    frames not covered by any such window are Gamak.
    """
    if n_ms < 50:
        raise ValueError(f"window length must be >= 50 ms, got {n_ms}")
    if j_cents <= 0:
        raise ValueError(f"deviation bound must be positive, got {j_cents}")
    w = int(round(n_ms / (cents.hop * 1000.0)))
    labels = np.full(len(cents), UNVOICED, dtype=np.int8)
    voiced = cents.voiced
    labels[voiced] = GAMAK
    for start, end in voiced_runs(voiced):
        run = cents.cents[start:end]
        if len(run) < w:
            continue
        # Rolling mean/variance over all length-w windows via cumulative sums.
        c1 = np.concatenate(([0.0], np.cumsum(run)))
        c2 = np.concatenate(([0.0], np.cumsum(run * run)))
        sums = c1[w:] - c1[:-w]
        sqsums = c2[w:] - c2[:-w]
        var = np.maximum(sqsums / w - (sums / w) ** 2, 0.0)
        ok = np.flatnonzero(var <= j_cents * j_cents)
        covered = np.zeros(len(run), dtype=bool)
        for k in ok:
            covered[k : k + w] = True
        labels[start:end][covered] = STEADY
    return Segmentation(labels=labels, n_ms=n_ms, j_cents=j_cents)


def stable_note_measure(seg: Segmentation) -> float:
    """Fraction of voiced time spent in steady notes."""
    n_voiced = int(np.sum(seg.labels != UNVOICED))
    if n_voiced == 0:
        raise UndefinedFeatureError("stable-note measure needs voiced frames")
    return float(np.sum(seg.labels == STEADY)) / n_voiced


def _band_bins(n_fft: int, frame_rate: float, lo_hz: float, hi_hz: float) -> slice:
    freqs = np.arange(n_fft // 2 + 1) * (frame_rate / n_fft)
    idx = np.flatnonzero((freqs >= lo_hz) & (freqs <= hi_hz))
    return slice(int(idx[0]), int(idx[-1]) + 1)


def energy_ratio_series(cents: CentsTrack, seg: Segmentation) -> ErSeries:
    """Per-window ratio of 3-7.5 Hz oscillation energy to 1-20 Hz energy.

    Windows are 1 s long, advance by 0.5 s, and must lie entirely inside a
    single contiguous Gamak run; each window is mean-subtracted and analyzed
    with a 512-point zero-padded DFT at the 100 Hz frame rate. The series is
    empty when no Gamak run reaches 1 s.
    """
    frame_rate = 1.0 / cents.hop
    num = _band_bins(ER_NFFT, frame_rate, *ER_NUM_BAND_HZ)
    den = _band_bins(ER_NFFT, frame_rate, *ER_DEN_BAND_HZ)
    values = []
    for start, end in voiced_runs(seg.labels == GAMAK):
        pos = start
        while pos + ER_WINDOW_FRAMES <= end:
            z = cents.cents[pos : pos + ER_WINDOW_FRAMES]
            z = z - np.mean(z)
            spectrum = np.abs(np.fft.rfft(z, n=ER_NFFT)) ** 2
            total = float(np.sum(spectrum[den]))
            values.append(float(np.sum(spectrum[num])) / total if total > 0 else 0.0)
            pos += ER_HOP_FRAMES
    return ErSeries(values=np.array(values))


def gamak_measure(er: ErSeries, x: float = 0.3) -> float:
    """Fraction of energy-ratio windows strictly above the threshold ``x``.

    An empty series (no ornamented stretch of at least 1 s) scores 0: a
    fully steady clip simply has no oscillatory ornaments.
    """
    if not 0.0 < x < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {x}")
    if len(er) == 0:
        return 0.0
    return float(np.sum(er.values > x)) / len(er)


def haar_approximation(values, level: int = 5) -> np.ndarray:
    """Coarse contour: replace each block of 2**level samples by its mean.

    Equivalent to keeping only the level-``level`` approximation of a Haar
    wavelet pyramid and reconstructing to signal length. A trailing partial
    block is replaced by its own mean.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot approximate an empty sequence")
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    block = 1 << level
    out = np.empty_like(x)
    n_full = (len(x) // block) * block
    if n_full:
        means = x[:n_full].reshape(-1, block).mean(axis=1)
        out[:n_full] = np.repeat(means, block)
    if n_full < len(x):
        out[n_full:] = x[n_full:].mean()
    return out


def _block_means(values: np.ndarray, level: int) -> np.ndarray:
    block = 1 << level
    n_full = (len(values) // block) * block
    means = values[:n_full].reshape(-1, block).mean(axis=1) if n_full else np.array([])
    if n_full < len(values):
        means = np.append(means, values[n_full:].mean())
    return means


def melodic_transitions(cents: CentsTrack, level: int = 5) -> float:
    """Upward note jumps larger than one semitone, per second of clip.

    Voiced frames are concatenated, coarsened to block means of 2**level
    frames (320 ms at level 5), consecutive equal-valued blocks are collapsed
    into single steps, and upward steps of strictly more than 100 cents are
    counted against the full clip duration.
    """
    voiced = cents.voiced_values()
    if voiced.size == 0:
        raise UndefinedFeatureError("melodic transitions need voiced frames")
    means = _block_means(voiced, level)
    steps = means[np.concatenate(([True], np.diff(means) != 0.0))]
    jumps = np.diff(steps)
    return float(np.sum(jumps > 100.0)) / cents.duration_s


def _shrinking_median(values: np.ndarray, half: int) -> np.ndarray:
    """Centered running median whose window shrinks at the edges."""
    n = len(values)
    out = np.empty(n)
    for i in range(n):
        out[i] = np.median(values[max(0, i - half) : min(n, i + half + 1)])
    return out


def tremolo_feature(contour: EnergyContour, filter_s: float = 1.0) -> float:
    """Zero crossings per second of the energy's median-filter residual.

    The voiced part of the contour is concatenated, median filtered with a
    centered 1 s window (shrinking at the edges), and the residual's sign
    changes are counted per second of voiced time. Exactly-zero residual
    samples are skipped rather than counted as crossings.
    """
    energy = contour.energy[contour.voiced]
    win = int(round(filter_s / contour.hop)) + 1
    if len(energy) < int(round(filter_s / contour.hop)):
        raise UndefinedFeatureError(
            f"tremolo feature needs at least {filter_s:g} s of voiced frames"
        )
    filtered = _shrinking_median(energy, win // 2)
    residual = energy - filtered
    signs = np.sign(residual)
    signs = signs[signs != 0]
    crossings = int(np.sum(signs[1:] != signs[:-1])) if signs.size else 0
    return crossings / (len(energy) * contour.hop)
