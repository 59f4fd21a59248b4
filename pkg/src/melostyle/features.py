"""Feature registry, per-clip extraction and the feature table format.

The registry fixes the canonical name and order of every feature the
pipeline can produce; subset definitions select from it. Extraction is a
pure function of the loaded clip resources, exposed both directly and as a
scikit-learn transformer so the pipeline composes with that ecosystem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import contour, histogram
from .audio import (
    DEFAULT_N_HARMONICS,
    AudioClip,
    decode_wav,
    harmonic_energy,
    mfcc,
)
from .dataio import (
    ClipRecord,
    EnergyContour,
    PitchTrack,
    load_energy_contour,
    load_pitch_track,
    to_cents,
)
from .errors import ConfigError, ValidationError

MFCC_FEATURES = tuple(f"mfcc_{i}" for i in range(1, 14))

FEATURE_REGISTRY = (
    "stable_note",
    "gamak",
    "tonic_distance",
    "transitions",
    "tremolo_zcr",
    "MIPD",
    "MPD",
    "WPD",
    "ED",
) + MFCC_FEATURES

MELODIC_FEATURES = FEATURE_REGISTRY[:9]
TIMBRE_FEATURES = MFCC_FEATURES


def _in_registry_order(names: set[str]) -> tuple[str, ...]:
    return tuple(f for f in FEATURE_REGISTRY if f in names)


# Subsets A/B/C are the fixed evaluation selections; the stable-note
# measure is computed and reported but belongs to none of them.
FEATURE_SUBSETS: dict[str, tuple[str, ...]] = {
    "A": _in_registry_order(
        {"ED", "MPD", "tremolo_zcr", "transitions", "tonic_distance", "gamak"}
    ),
    "B": _in_registry_order(
        {"ED", "MPD", "tremolo_zcr", "transitions", "tonic_distance", "gamak", "MIPD"}
    ),
    "C": _in_registry_order(
        {"ED", "MPD", "tremolo_zcr", "transitions", "tonic_distance", "MIPD"}
    ),
    "all": FEATURE_REGISTRY,
    "melodic": MELODIC_FEATURES,
    "timbre": TIMBRE_FEATURES,
    "melodic+timbre": MELODIC_FEATURES + TIMBRE_FEATURES,
}


@dataclass(frozen=True)
class FeatureVector:
    """Named feature values for one clip; only computable features appear."""

    clip_id: str
    values: dict[str, float]

    def __post_init__(self):
        unknown = [n for n in self.values if n not in FEATURE_REGISTRY]
        if unknown:
            raise ValidationError(f"unknown feature names: {unknown}")
        bad = [n for n, v in self.values.items() if not np.isfinite(v)]
        if bad:
            raise ValidationError(f"clip {self.clip_id}: non-finite features: {bad}")


@dataclass(frozen=True)
class ClipData:
    """A clip's loaded resources, ready for feature extraction."""

    record: ClipRecord
    pitch: PitchTrack
    energy: EnergyContour | None = None
    audio: AudioClip | None = None


def load_clip_data(record: ClipRecord) -> ClipData:
    return ClipData(
        record=record,
        pitch=load_pitch_track(record.pitch_path),
        energy=load_energy_contour(record.energy_path) if record.energy_path else None,
        audio=decode_wav(record.audio_path) if record.audio_path else None,
    )


def extract_clip_features(
    clip: ClipData,
    n_ms: float = 400.0,
    j_cents: float = 20.0,
    er_threshold: float = 0.3,
    bin_width: float = 8.0,
    median_win_bins: int = 7,
    floor_frac: float = 0.05,
    ed_dev: float = 20.0,
    n_harmonics: int = DEFAULT_N_HARMONICS,
) -> FeatureVector:
    """Compute every feature the clip's resources support.

    Melodic features always require the pitch track. The tremolo feature
    needs an energy contour, which is computed from the audio when only
    audio is available; the MFCC summary needs the audio itself. Features
    whose inputs are absent are simply omitted from the result.
    """
    cents = to_cents(clip.pitch, clip.record.tonic_hz)
    seg = contour.segment_contour(cents, n_ms=n_ms, j_cents=j_cents)
    er = contour.energy_ratio_series(cents, seg)
    folded = histogram.build_histogram(cents, folded=True, bin_width=bin_width)
    unfolded = histogram.build_histogram(cents, folded=False, bin_width=bin_width)
    peaks = histogram.pick_peaks(
        folded, median_win_bins=median_win_bins, floor_frac=floor_frac
    )
    values: dict[str, float] = {
        "stable_note": contour.stable_note_measure(seg),
        "gamak": contour.gamak_measure(er, x=er_threshold),
        "tonic_distance": histogram.tonic_distance(unfolded),
        "transitions": contour.melodic_transitions(cents),
        "MIPD": histogram.mipd(peaks),
        "MPD": histogram.mpd(peaks),
        "WPD": histogram.wpd(peaks),
        "ED": histogram.ed(folded, dev=ed_dev),
    }
    energy = clip.energy
    if energy is None and clip.audio is not None:
        energy = harmonic_energy(clip.audio, clip.pitch, n_harmonics=n_harmonics)
    if energy is not None:
        values["tremolo_zcr"] = contour.tremolo_feature(energy)
    if clip.audio is not None:
        summary = mfcc(clip.audio)
        for name, coeff in zip(MFCC_FEATURES, summary.coefficients):
            values[name] = float(coeff)
    ordered = {n: values[n] for n in FEATURE_REGISTRY if n in values}
    return FeatureVector(clip_id=clip.record.clip_id, values=ordered)


@dataclass(frozen=True)
class FeatureTable:
    """Feature matrix with row clip ids and style labels.

    Cells may be NaN when a clip lacked the resources for a feature; any
    subset used for learning must be NaN-free.
    """

    clip_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    X: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.shape != (len(self.clip_ids), len(self.feature_names)):
            raise ValidationError("feature matrix shape mismatch")
        X.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "clip_ids", tuple(self.clip_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.clip_ids)

    def subset(self, subset_name: str) -> "FeatureTable":
        """Restrict the table to a named feature subset, NaN-free."""
        if subset_name not in FEATURE_SUBSETS:
            raise ConfigError(
                f"unknown subset {subset_name!r}; choose from "
                f"{sorted(FEATURE_SUBSETS)}"
            )
        wanted = FEATURE_SUBSETS[subset_name]
        missing = [n for n in wanted if n not in self.feature_names]
        if missing:
            raise ConfigError(
                f"subset {subset_name!r} needs columns absent from the table: "
                f"{', '.join(missing)}"
            )
        cols = [self.feature_names.index(n) for n in wanted]
        X = self.X[:, cols]
        if np.any(np.isnan(X)):
            rows = np.flatnonzero(np.any(np.isnan(X), axis=1))
            ids = [self.clip_ids[i] for i in rows[:5]]
            raise ValidationError(
                f"subset {subset_name!r} has missing values for clips {ids}"
            )
        return FeatureTable(
            clip_ids=self.clip_ids, feature_names=wanted, X=X, labels=self.labels
        )


def feature_vectors_to_table(
    vectors: list[FeatureVector], labels: list[str]
) -> FeatureTable:
    """Assemble per-clip vectors into a table over the union of their names."""
    if len(vectors) != len(labels):
        raise ValidationError("one label per feature vector required")
    present = {n for v in vectors for n in v.values}
    names = _in_registry_order(present)
    X = np.full((len(vectors), len(names)), np.nan)
    for i, vec in enumerate(vectors):
        for j, name in enumerate(names):
            if name in vec.values:
                X[i, j] = vec.values[name]
    return FeatureTable(
        clip_ids=tuple(v.clip_id for v in vectors),
        feature_names=names,
        X=X,
        labels=tuple(labels),
    )


def write_feature_table(table: FeatureTable, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("clip_id," + ",".join(table.feature_names) + ",style\n")
        for i, clip_id in enumerate(table.clip_ids):
            cells = [
                "" if np.isnan(v) else format(v, ".10g") for v in table.X[i]
            ]
            fh.write(f"{clip_id},{','.join(cells)},{table.labels[i]}\n")


def load_feature_table(path: str) -> FeatureTable:
    from .dataio import _read_lines  # shared line reader
    from .errors import FormatError

    lines = _read_lines(path)
    if not lines or not lines[0].startswith("clip_id,") or not lines[0].endswith(",style"):
        raise FormatError(f"{path}: line 1: expected header clip_id,<features>,style")
    names = tuple(lines[0].split(",")[1:-1])
    unknown = [n for n in names if n not in FEATURE_REGISTRY]
    if unknown:
        raise FormatError(f"{path}: line 1: unknown feature columns {unknown}")
    clip_ids, labels, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(names) + 2:
            raise FormatError(
                f"{path}: line {lineno}: expected {len(names) + 2} columns"
            )
        clip_ids.append(parts[0])
        labels.append(parts[-1])
        try:
            rows.append([float(c) if c else np.nan for c in parts[1:-1]])
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: malformed value: {exc}") from exc
    return FeatureTable(
        clip_ids=tuple(clip_ids),
        feature_names=names,
        X=np.array(rows).reshape(len(clip_ids), len(names)),
        labels=tuple(labels),
    )


class ClipFeatureExtractor(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping loaded clips to a feature matrix.

    ``transform`` accepts a sequence of :class:`ClipData` and returns one row
    per clip with columns given by :meth:`get_feature_names_out`. With
    ``include_mfcc="auto"`` the timbre columns appear only when every clip
    carries audio.
    """

    def __init__(
        self,
        n_ms: float = 400.0,
        j_cents: float = 20.0,
        er_threshold: float = 0.3,
        bin_width: float = 8.0,
        median_win_bins: int = 7,
        floor_frac: float = 0.05,
        ed_dev: float = 20.0,
        n_harmonics: int = DEFAULT_N_HARMONICS,
        include_mfcc: bool | str = "auto",
    ):
        self.n_ms = n_ms
        self.j_cents = j_cents
        self.er_threshold = er_threshold
        self.bin_width = bin_width
        self.median_win_bins = median_win_bins
        self.floor_frac = floor_frac
        self.ed_dev = ed_dev
        self.n_harmonics = n_harmonics
        self.include_mfcc = include_mfcc

    def fit(self, X, y=None):
        return self

    def _names(self, clips) -> tuple[str, ...]:
        if self.include_mfcc == "auto":
            with_mfcc = all(c.audio is not None for c in clips)
        else:
            with_mfcc = bool(self.include_mfcc)
        return FEATURE_REGISTRY if with_mfcc else MELODIC_FEATURES

    def transform(self, X) -> np.ndarray:
        clips = list(X)
        names = self._names(clips)
        out = np.full((len(clips), len(names)), np.nan)
        for i, clip in enumerate(clips):
            vec = extract_clip_features(
                clip,
                n_ms=self.n_ms,
                j_cents=self.j_cents,
                er_threshold=self.er_threshold,
                bin_width=self.bin_width,
                median_win_bins=self.median_win_bins,
                floor_frac=self.floor_frac,
                ed_dev=self.ed_dev,
                n_harmonics=self.n_harmonics,
            )
            for j, name in enumerate(names):
                if name in vec.values:
                    out[i, j] = vec.values[name]
        self.feature_names_out_ = names
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        names = getattr(self, "feature_names_out_", FEATURE_REGISTRY)
        return np.asarray(names, dtype=object)
