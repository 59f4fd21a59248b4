"""Core data types and text file formats.

All on-disk formats are comma-separated UTF-8 text with a mandatory header
line. Pitch and energy files are frame-indexed on a fixed 10 ms grid;
timestamps within +/-1 ms of a grid point are snapped to it, larger
deviations are rejected. Loaded objects are immutable: their arrays are
marked read-only after construction.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError

HOP_S = 0.010
F0_MIN_HZ = 50.0
F0_MAX_HZ = 2000.0
TONIC_MIN_HZ = 50.0
TONIC_MAX_HZ = 500.0

STYLES = ("Hindustani", "Carnatic", "Turkish")
STYLE_CODES = {"Hindustani": "H", "Carnatic": "C", "Turkish": "T"}
CODE_TO_STYLE = {code: style for style, code in STYLE_CODES.items()}

LISTENER_LABELS = ("H", "C", "T", "NH", "NC", "NT", "NS")
LISTENER_CATEGORIES = (
    "Trained<3y",
    "Trained3-10y",
    "Trained>10y",
    "AvidListener",
    "Amateur",
)

PITCH_HEADER = "time_s,f0_hz"
ENERGY_HEADER = "time_s,energy"
MANIFEST_HEADER = "clip_id,style,tonic_hz,pitch_path,energy_path,audio_path"
RESPONSES_HEADER = "clip_id,listener_id,category,label"


def normalize_style(token: str) -> str:
    """Return the canonical style name for a full name or one-letter code."""
    if token in STYLE_CODES:
        return token
    if token in CODE_TO_STYLE:
        return CODE_TO_STYLE[token]
    raise ValidationError(f"unknown style {token!r}")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PitchTrack:
    """Fundamental-frequency series at 10 ms hops; 0.0 marks unvoiced frames."""

    f0: np.ndarray
    hop: float = HOP_S

    def __post_init__(self):
        if not math.isclose(self.hop, HOP_S, rel_tol=0.0, abs_tol=1e-12):
            raise ValidationError(f"pitch hop must be {HOP_S} s, got {self.hop}")
        f0 = np.asarray(self.f0, dtype=np.float64)
        if f0.ndim != 1:
            raise ValidationError("f0 must be a 1-d sequence")
        voiced = f0 > 0.0
        bad = voiced & ((f0 < F0_MIN_HZ) | (f0 > F0_MAX_HZ))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"voiced f0 out of range [{F0_MIN_HZ:g}, {F0_MAX_HZ:g}] Hz "
                f"at frame {i}: {f0[i]:g}"
            )
        object.__setattr__(self, "f0", _freeze(f0))

    def __len__(self) -> int:
        return len(self.f0)

    @property
    def voiced(self) -> np.ndarray:
        """Boolean mask of voiced frames."""
        return self.f0 > 0.0

    @property
    def duration_s(self) -> float:
        return len(self.f0) * self.hop


@dataclass(frozen=True)
class CentsTrack:
    """Tonic-relative pitch in cents; NaN marks unvoiced frames."""

    cents: np.ndarray
    tonic_hz: float
    hop: float = HOP_S

    def __post_init__(self):
        if self.tonic_hz <= 0:
            raise ValidationError(f"tonic must be positive, got {self.tonic_hz}")
        object.__setattr__(self, "cents", _freeze(self.cents))

    def __len__(self) -> int:
        return len(self.cents)

    @property
    def voiced(self) -> np.ndarray:
        return ~np.isnan(self.cents)

    @property
    def duration_s(self) -> float:
        return len(self.cents) * self.hop

    def voiced_values(self) -> np.ndarray:
        """Cents values of voiced frames only, in time order."""
        return self.cents[self.voiced]


@dataclass(frozen=True)
class EnergyContour:
    """Per-frame vocal harmonic energy aligned to a pitch track.

    Energy is zero at unvoiced frames; frames with zero energy are treated
    as unvoiced wherever the contour is used on its own.
    """

    energy: np.ndarray
    hop: float = HOP_S

    def __post_init__(self):
        energy = np.asarray(self.energy, dtype=np.float64)
        if energy.ndim != 1:
            raise ValidationError("energy must be a 1-d sequence")
        if np.any(energy < 0) or not np.all(np.isfinite(energy)):
            raise ValidationError("energy values must be finite and non-negative")
        object.__setattr__(self, "energy", _freeze(energy))

    def __len__(self) -> int:
        return len(self.energy)

    @property
    def voiced(self) -> np.ndarray:
        return self.energy > 0.0


@dataclass(frozen=True)
class ClipRecord:
    """One corpus entry: identity, style, tonic and resource paths."""

    clip_id: str
    style: str
    tonic_hz: float
    pitch_path: str
    energy_path: str | None = None
    audio_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "style", normalize_style(self.style))
        if not (TONIC_MIN_HZ <= self.tonic_hz <= TONIC_MAX_HZ):
            raise ValidationError(
                f"clip {self.clip_id}: tonic {self.tonic_hz:g} Hz outside "
                f"[{TONIC_MIN_HZ:g}, {TONIC_MAX_HZ:g}]"
            )


@dataclass(frozen=True)
class ListenerResponse:
    clip_id: str
    listener_id: str
    category: str
    label: str

    def __post_init__(self):
        if self.category not in LISTENER_CATEGORIES:
            raise ValidationError(f"unknown listener category {self.category!r}")
        if self.label not in LISTENER_LABELS:
            raise ValidationError(f"unknown response label {self.label!r}")


def voiced_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) index ranges of maximal True runs."""
    runs = []
    n = len(mask)
    i = 0
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def to_cents(track: PitchTrack, tonic_hz: float) -> CentsTrack:
    """Convert voiced frames to tonic-relative cents, 1200*log2(f0/tonic).

    Unvoiced frames stay unvoiced (NaN in the result).
    """
    if tonic_hz <= 0:
        raise ValueError(f"tonic must be positive, got {tonic_hz}")
    cents = np.full(len(track), np.nan)
    v = track.voiced
    cents[v] = 1200.0 * np.log2(track.f0[v] / tonic_hz)
    return CentsTrack(cents=cents, tonic_hz=tonic_hz, hop=track.hop)


def cents_to_f0(cents: CentsTrack) -> np.ndarray:
    """Per-frame frequency in Hz from a cents track; 0.0 at unvoiced frames."""
    f0 = np.zeros(len(cents))
    v = cents.voiced
    f0[v] = cents.tonic_hz * np.exp2(cents.cents[v] / 1200.0)
    return f0


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _parse_grid_file(path: str, header: str, value_name: str) -> np.ndarray:
    """Read a `time,value` file on the 10 ms grid into a dense value array.

    Missing grid rows become NaN; the caller decides what a gap means.
    """
    lines = _read_lines(path)
    if not lines or lines[0].strip() != header:
        raise FormatError(f"{path}: line 1: expected header {header!r}")
    entries: list[tuple[int, float]] = []
    last_idx = -1
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}: line {lineno}: expected 2 columns")
        try:
            t = float(parts[0])
            value = float(parts[1])
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: malformed row: {exc}") from exc
        idx = round(t / HOP_S)
        if idx < 0 or abs(t - idx * HOP_S) > 0.001:
            raise FormatError(
                f"{path}: line {lineno}: time {t:g} s is not on the 10 ms grid"
            )
        if idx <= last_idx:
            raise FormatError(
                f"{path}: line {lineno}: time {t:g} s does not increase"
            )
        last_idx = idx
        entries.append((idx, value))
    if not entries:
        raise FormatError(f"{path}: no {value_name} rows")
    values = np.full(last_idx + 1, np.nan)
    for idx, value in entries:
        values[idx] = value
    return values


def load_pitch_track(path: str) -> PitchTrack:
    """Load a `time_s,f0_hz` file; gaps and non-positive f0 become unvoiced."""
    values = _parse_grid_file(path, PITCH_HEADER, "pitch")
    f0 = np.where(np.isnan(values) | (values <= 0.0), 0.0, values)
    return PitchTrack(f0=f0)


def write_pitch_track(track: PitchTrack, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PITCH_HEADER + "\n")
        for i, value in enumerate(track.f0):
            fh.write(f"{i * HOP_S:.2f},{value:.6f}\n")


def load_energy_contour(path: str) -> EnergyContour:
    """Load a `time_s,energy` file; gaps become zero (unvoiced) frames."""
    values = _parse_grid_file(path, ENERGY_HEADER, "energy")
    return EnergyContour(energy=np.nan_to_num(values, nan=0.0))


def write_energy_contour(contour: EnergyContour, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ENERGY_HEADER + "\n")
        for i, value in enumerate(contour.energy):
            fh.write(f"{i * HOP_S:.2f},{value:.6f}\n")


def load_dataset(manifest_path: str) -> list[ClipRecord]:
    """Load a clip manifest; relative resource paths resolve against it.

    All problems are collected and reported together so a broken corpus is
    diagnosed in one pass.
    """
    lines = _read_lines(manifest_path)
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise FormatError(
            f"{manifest_path}: line 1: expected header {MANIFEST_HEADER!r}"
        )
    base = os.path.dirname(os.path.abspath(manifest_path))
    records: list[ClipRecord] = []
    seen: set[str] = set()
    problems: list[str] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise FormatError(f"{manifest_path}: line {lineno}: expected 6 columns")
        clip_id, style, tonic, pitch_path, energy_path, audio_path = (
            p.strip() for p in parts
        )
        if clip_id in seen:
            problems.append(f"line {lineno}: duplicate clip_id {clip_id!r}")
            continue
        seen.add(clip_id)
        try:
            record = ClipRecord(
                clip_id=clip_id,
                style=style,
                tonic_hz=float(tonic),
                pitch_path=os.path.join(base, pitch_path),
                energy_path=os.path.join(base, energy_path) if energy_path else None,
                audio_path=os.path.join(base, audio_path) if audio_path else None,
            )
        except (ValidationError, ValueError) as exc:
            problems.append(f"line {lineno}: {exc}")
            continue
        for p in (record.pitch_path, record.energy_path, record.audio_path):
            if p is not None and not os.path.isfile(p):
                problems.append(f"line {lineno}: clip {clip_id!r}: missing file {p}")
        records.append(record)
    if problems:
        raise ValidationError(
            f"{manifest_path}: invalid manifest:\n  " + "\n  ".join(problems)
        )
    return records


def write_manifest(records: list[ClipRecord], path: str) -> None:
    """Write a manifest with resource paths relative to its directory."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(MANIFEST_HEADER + "\n")
        for r in records:
            cols = [r.clip_id, r.style, f"{r.tonic_hz:.6f}"]
            for p in (r.pitch_path, r.energy_path, r.audio_path):
                cols.append(os.path.relpath(p, base) if p else "")
            fh.write(",".join(cols) + "\n")


def load_responses(path: str) -> list[ListenerResponse]:
    """Load listener responses; one label per (clip, listener) pair."""
    lines = _read_lines(path)
    if not lines or lines[0].strip() != RESPONSES_HEADER:
        raise FormatError(f"{path}: line 1: expected header {RESPONSES_HEADER!r}")
    responses: list[ListenerResponse] = []
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise FormatError(f"{path}: line {lineno}: expected 4 columns")
        key = (parts[0], parts[1])
        if key in seen:
            raise ValidationError(
                f"{path}: line {lineno}: duplicate response for clip "
                f"{parts[0]!r} by listener {parts[1]!r}"
            )
        seen.add(key)
        try:
            responses.append(ListenerResponse(*parts))
        except ValidationError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return responses


def write_responses(responses: list[ListenerResponse], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RESPONSES_HEADER + "\n")
        for r in responses:
            fh.write(f"{r.clip_id},{r.listener_id},{r.category},{r.label}\n")
