"""Pitch histograms, noisy-histogram peak picking and microtonality features.

Folded histograms wrap pitch modulo one octave into 150 bins of 8 cents and
are used for the microtonality features; the unfolded histogram keeps octave
information for the tonic-distance feature. Peak picking first finds local
maxima of a median-filtered histogram, then refines each against the raw
histogram, because short clips produce histograms too noisy for direct
maxima.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .dataio import CentsTrack
from .errors import UndefinedFeatureError

OCTAVE_CENTS = 1200.0
GRID_STEP_CENTS = 100.0
PEAK_VICINITY_CENTS = 30.0


@dataclass(frozen=True)
class PitchHistogram:
    """Histogram of voiced pitch values with fixed-width bins.

    ``origin`` is the cents value of the lower edge of bin 0. Folded
    histograms always cover [0, 1200) with origin 0.
    """

    counts: np.ndarray
    bin_width: float
    origin: float
    folded: bool

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64)
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def centers(self) -> np.ndarray:
        """Cents value of each bin center."""
        return self.origin + (np.arange(len(self.counts)) + 0.5) * self.bin_width


@dataclass(frozen=True)
class PeakSet:
    """Detected histogram peaks as (location cents, height) pairs."""

    locations: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        locations = np.asarray(self.locations, dtype=np.float64)
        heights = np.asarray(self.heights, dtype=np.float64)
        if len(locations) != len(heights):
            raise ValueError("locations and heights must have equal length")
        if len(locations) > 1 and not np.all(np.diff(locations) > 0):
            raise ValueError("peak locations must be strictly increasing")
        locations.flags.writeable = False
        heights.flags.writeable = False
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "heights", heights)

    def __len__(self) -> int:
        return len(self.locations)


def build_histogram(
    cents: CentsTrack, folded: bool, bin_width: float = 8.0
) -> PitchHistogram:
    """Histogram the voiced frames of a cents track.

    Folded mode wraps values modulo 1200 into [0, 1200); unfolded mode spans
    the data range with bin edges anchored at integer multiples of the bin
    width, so a bin center never depends on the data.
    """
    values = cents.voiced_values()
    if values.size == 0:
        raise UndefinedFeatureError("histogram needs voiced frames")
    if folded:
        values = np.mod(values, OCTAVE_CENTS)
        n_bins = int(ceil(OCTAVE_CENTS / bin_width))
        idx = np.minimum((values / bin_width).astype(int), n_bins - 1)
        counts = np.bincount(idx, minlength=n_bins).astype(float)
        return PitchHistogram(counts=counts, bin_width=bin_width, origin=0.0, folded=True)
    origin = np.floor(values.min() / bin_width) * bin_width
    n_bins = int(np.floor((values.max() - origin) / bin_width)) + 1
    idx = np.minimum(((values - origin) / bin_width).astype(int), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins).astype(float)
    return PitchHistogram(counts=counts, bin_width=bin_width, origin=origin, folded=False)


def _median_filter(counts: np.ndarray, win: int, circular: bool) -> np.ndarray:
    half = win // 2
    n = len(counts)
    if half == 0:
        return counts.astype(float)
    if circular:
        padded = np.concatenate((counts[-half:], counts, counts[:half]))
        windows = np.lib.stride_tricks.sliding_window_view(padded, win)
        return np.median(windows, axis=1)
    out = np.empty(n)
    for i in range(n):
        out[i] = np.median(counts[max(0, i - half) : min(n, i + half + 1)])
    return out


def _local_maxima(filtered: np.ndarray, circular: bool) -> list[int]:
    """Bins at least as high as both neighbours and above at least one.

    The strictness requirement rejects flat stretches (a uniform histogram
    has no peaks) while still catching plateau edges created by the median
    filter.
    """
    n = len(filtered)
    maxima = []
    for i in range(n):
        if circular:
            left, right = filtered[(i - 1) % n], filtered[(i + 1) % n]
            if filtered[i] >= left and filtered[i] >= right and (
                filtered[i] > left or filtered[i] > right
            ):
                maxima.append(i)
        else:
            left = filtered[i - 1] if i > 0 else None
            right = filtered[i + 1] if i < n - 1 else None
            neighbours = [v for v in (left, right) if v is not None]
            if all(filtered[i] >= v for v in neighbours) and any(
                filtered[i] > v for v in neighbours
            ):
                maxima.append(i)
    return maxima


def _cents_distance(a: float, b: float, circular: bool) -> float:
    d = abs(a - b)
    if circular:
        d = min(d, OCTAVE_CENTS - d)
    return d


BACKGROUND_REJECT = 3.5


def _peak_floor(filtered: np.ndarray, floor_frac: float) -> float:
    """Minimum filtered height for a candidate peak.

    The median of the filtered histogram estimates the broadband background
    level; local maxima of pure background reach about twice that level, so
    demanding 3.5x the median rejects them with margin while the
    ``floor_frac`` term keeps flat-region wiggles out of nearly noiseless
    histograms. Peaked histograms have a near-zero median, where this
    reduces to the plain fractional floor.
    """
    return floor_frac * float(filtered.max()) + BACKGROUND_REJECT * float(
        np.median(filtered)
    )


def pick_peaks(
    hist: PitchHistogram, median_win_bins: int = 7, floor_frac: float = 0.05
) -> PeakSet:
    """Detect histogram peaks robustly against bin-level noise.

    Local maxima of the median-filtered histogram (circular for folded
    histograms) must clear a background-adaptive floor (see ``_peak_floor``)
    scaled by ``floor_frac``. Maxima closer than 30 cents are merged in
    favour of the higher one, and each survivor is refined to the highest
    raw-histogram bin within 30 cents. May return an empty set for
    structureless histograms.
    """
    if median_win_bins < 1 or median_win_bins % 2 == 0:
        raise ValueError(f"median window must be odd and positive, got {median_win_bins}")
    counts = hist.counts
    if len(counts) == 0:
        return PeakSet(locations=np.array([]), heights=np.array([]))
    radius = int(ceil(PEAK_VICINITY_CENTS / hist.bin_width))
    filtered = _median_filter(counts, median_win_bins, hist.folded)
    floor = _peak_floor(filtered, floor_frac)
    candidates = [i for i in _local_maxima(filtered, hist.folded) if filtered[i] > floor]

    centers = hist.centers
    kept: list[int] = []
    for i in sorted(candidates, key=lambda i: (-filtered[i], i)):
        if all(
            _cents_distance(centers[i], centers[j], hist.folded)
            >= PEAK_VICINITY_CENTS
            for j in kept
        ):
            kept.append(i)

    n = len(counts)
    refined: dict[int, float] = {}
    for i in kept:
        best_bin, best_count = i, -1.0
        for off in range(-radius, radius + 1):
            j = i + off
            if hist.folded:
                j %= n
            elif not 0 <= j < n:
                continue
            if counts[j] > best_count:
                best_bin, best_count = j, counts[j]
        if best_count > 0:
            refined[best_bin] = counts[best_bin]

    order = sorted(refined)
    return PeakSet(
        locations=centers[order] if order else np.array([]),
        heights=np.array([refined[j] for j in order]),
    )


def tonic_distance(hist: PitchHistogram) -> float:
    """Signed cents from the tonic to the most-occupied histogram bin.

    Requires an unfolded tonic-relative histogram so octave information
    survives; ties go to the lowest bin.
    """
    if hist.folded:
        raise ValueError("tonic distance requires an unfolded histogram")
    if len(hist.counts) == 0 or hist.counts.max() <= 0:
        raise UndefinedFeatureError("tonic distance needs a non-empty histogram")
    return float(hist.centers[int(np.argmax(hist.counts))])


def fold_deviation(location: float) -> float:
    """Distance in cents from the nearest multiple of 100 cents, in [0, 50]."""
    d = location % GRID_STEP_CENTS
    return float(d if d < 50.0 else GRID_STEP_CENTS - d)


def mipd(peaks: PeakSet) -> float:
    """Largest pairwise off-grid deviation between peak locations.

    Needs no tonic: a pair of peaks whose spacing is far from a whole number
    of semitones betrays a microtone. Zero for fewer than two peaks.
    """
    n = len(peaks)
    if n < 2:
        return 0.0
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            best = max(best, fold_deviation(abs(peaks.locations[i] - peaks.locations[j])))
    return best


def mpd(peaks: PeakSet) -> float:
    """Largest deviation of any peak from the equitempered grid; 0 if empty."""
    if len(peaks) == 0:
        return 0.0
    return max(fold_deviation(l) for l in peaks.locations)


def wpd(peaks: PeakSet) -> float:
    """Peak deviations weighted by height relative to the tallest peak.

    Sum of deviation * (height / max height) over peaks, divided by the
    number of peaks, so denser notes dominate but the result stays in cents.
    """
    if len(peaks) == 0:
        raise UndefinedFeatureError("weighted peak deviation needs at least one peak")
    weights = peaks.heights / peaks.heights.max()
    return float(
        np.sum([fold_deviation(l) for l in peaks.locations] * weights) / len(peaks)
    )


def ed(hist: PitchHistogram, dev: float = 20.0) -> float:
    """Fraction of note mass lying close to the equitempered grid.

    Counts bins whose centers fall strictly within ``dev`` cents of a
    multiple of 100 cents. High for styles that stay on the 12-tone grid,
    low when microtones carry substantial mass.
    """
    if not 0.0 < dev < 50.0:
        raise ValueError(f"vicinity must be in (0, 50) cents, got {dev}")
    if not hist.folded:
        raise ValueError("equitempered density requires a folded histogram")
    total = hist.counts.sum()
    if total <= 0:
        raise UndefinedFeatureError("equitempered density needs a non-empty histogram")
    deviations = np.array([fold_deviation(c) for c in hist.centers])
    return float(hist.counts[deviations < dev].sum() / total)
