"""Raw-audio utilities: WAV I/O, harmonic energy, MFCC timbre summary and
melodic stimulus resynthesis.

Only 16 kHz mono PCM16 WAV is accepted; anything else is refused rather than
silently resampled. All analysis shares the 10 ms frame grid of the pitch
tracks.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from .dataio import CentsTrack, EnergyContour, PitchTrack, cents_to_f0, voiced_runs
from .errors import AlignmentError, UnsupportedFormatError, ValidationError

SAMPLE_RATE = 16000
SAMPLES_PER_FRAME = 160  # 10 ms at 16 kHz

HARMONIC_WINDOW_S = 0.030
HARMONIC_NFFT = 512
HARMONIC_MAX_HZ = 7800.0
HARMONIC_SEARCH_HZ = 30.0
DEFAULT_N_HARMONICS = 10

# Fixed MFCC front-end configuration (Sphinx-style defaults). Kept in one
# place so an alternate configuration stays a one-line change.
MFCC_PREEMPHASIS = 0.97
MFCC_FRAME_S = 0.0256
MFCC_HOP_S = 0.010
MFCC_NFFT = 512
MFCC_N_FILTERS = 40
MFCC_LOW_HZ = 133.33
MFCC_HIGH_HZ = 6855.5
MFCC_LOG_FLOOR = 1e-10
MFCC_N_COEFFS = 13

SYNTH_N_HARMONICS = 3
SYNTH_PEAK = 0.9
SYNTH_FADE_S = 0.005


@dataclass(frozen=True)
class AudioClip:
    """Mono 16 kHz audio with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate != SAMPLE_RATE:
            raise ValidationError(f"sample rate must be {SAMPLE_RATE} Hz")
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValidationError("audio must be mono (1-d samples)")
        if samples.size and np.max(np.abs(samples)) > 1.0 + 1e-9:
            raise ValidationError("samples must lie in [-1, 1]")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class MfccSummary:
    """Clip-level mean of the first 13 mel-cepstral coefficients."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        if coeffs.shape != (MFCC_N_COEFFS,) or not np.all(np.isfinite(coeffs)):
            raise ValidationError(f"expected {MFCC_N_COEFFS} finite coefficients")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)


def decode_wav(path: str) -> AudioClip:
    """Read a PCM16 mono 16 kHz WAV file, normalizing samples by 32768."""
    try:
        with wave.open(path, "rb") as wav:
            if wav.getcomptype() != "NONE":
                raise UnsupportedFormatError(f"{path}: compressed WAV not supported")
            if wav.getnchannels() != 1:
                raise UnsupportedFormatError(
                    f"{path}: expected mono, got {wav.getnchannels()} channels"
                )
            if wav.getsampwidth() != 2:
                raise UnsupportedFormatError(
                    f"{path}: expected 16-bit samples, got {8 * wav.getsampwidth()}-bit"
                )
            if wav.getframerate() != SAMPLE_RATE:
                raise UnsupportedFormatError(
                    f"{path}: expected {SAMPLE_RATE} Hz, got {wav.getframerate()} Hz"
                )
            raw = wav.readframes(wav.getnframes())
    except wave.Error as exc:
        raise UnsupportedFormatError(f"{path}: not a readable WAV file: {exc}") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioClip(samples=samples)


def write_wav(clip: AudioClip, path: str) -> None:
    """Write a clip as PCM16 mono 16 kHz WAV."""
    scaled = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(path, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(SAMPLE_RATE)
        wav.writeframes(scaled.tobytes())


def _frame_windows(samples: np.ndarray, n_frames: int, window_len: int) -> np.ndarray:
    """Windows of ``window_len`` samples centered on each 10 ms frame."""
    half = window_len // 2
    padded = np.concatenate(
        (np.zeros(half), samples, np.zeros(window_len))
    )
    view = np.lib.stride_tricks.sliding_window_view(padded, window_len)
    return view[::SAMPLES_PER_FRAME][:n_frames]


def harmonic_energy(
    audio: AudioClip, pitch: PitchTrack, n_harmonics: int = DEFAULT_N_HARMONICS
) -> EnergyContour:
    """Sum the spectral energy at the first ``n_harmonics`` pitch harmonics.

    Per voiced frame, a 30 ms Hann-windowed slice centered on the frame is
    analyzed with a zero-padded 512-point spectrum and, for each harmonic
    below 7800 Hz, the strongest bin within 30 Hz of the predicted harmonic
    frequency contributes its squared magnitude. Unvoiced frames get zero.
    """
    if n_harmonics < 1:
        raise ValueError(f"need at least one harmonic, got {n_harmonics}")
    n_frames = len(pitch)
    if n_frames * SAMPLES_PER_FRAME > len(audio.samples):
        raise AlignmentError(
            f"pitch covers {n_frames * 0.01:.2f} s but audio has only "
            f"{audio.duration_s:.2f} s"
        )
    window_len = int(round(HARMONIC_WINDOW_S * SAMPLE_RATE))
    voiced_idx = np.flatnonzero(pitch.voiced)
    energy = np.zeros(n_frames)
    if voiced_idx.size == 0:
        return EnergyContour(energy=energy)

    windows = _frame_windows(audio.samples, n_frames, window_len)[voiced_idx]
    spectra = np.abs(np.fft.rfft(windows * np.hanning(window_len), n=HARMONIC_NFFT)) ** 2
    bin_hz = SAMPLE_RATE / HARMONIC_NFFT
    n_bins = spectra.shape[1]
    f0 = pitch.f0[voiced_idx]
    rows = np.arange(len(voiced_idx))
    total = np.zeros(len(voiced_idx))
    for h in range(1, n_harmonics + 1):
        target = h * f0
        active = target < HARMONIC_MAX_HZ
        k0 = np.round(target / bin_hz).astype(int)
        best = np.zeros(len(voiced_idx))
        for off in (-1, 0, 1):
            k = k0 + off
            ok = active & (k >= 0) & (k < n_bins)
            ok &= np.abs(k * bin_hz - target) <= HARMONIC_SEARCH_HZ
            vals = np.where(ok, spectra[rows, np.clip(k, 0, n_bins - 1)], 0.0)
            best = np.maximum(best, vals)
        total += best
    energy[voiced_idx] = total
    return EnergyContour(energy=energy)


def _mel(hz: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(mel: np.ndarray) -> np.ndarray:
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def _mel_filterbank() -> np.ndarray:
    """Triangular unit-height filters, evenly spaced on the mel scale."""
    edges_hz = _mel_to_hz(
        np.linspace(_mel(MFCC_LOW_HZ), _mel(MFCC_HIGH_HZ), MFCC_N_FILTERS + 2)
    )
    bin_hz = np.arange(MFCC_NFFT // 2 + 1) * (SAMPLE_RATE / MFCC_NFFT)
    bank = np.zeros((MFCC_N_FILTERS, len(bin_hz)))
    for i in range(MFCC_N_FILTERS):
        lo, mid, hi = edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]
        up = (bin_hz - lo) / (mid - lo)
        down = (hi - bin_hz) / (hi - mid)
        bank[i] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def _dct_ortho(n_in: int, n_out: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix mapping n_in values to n_out coefficients."""
    n = np.arange(n_in)
    k = np.arange(n_out)[:, None]
    mat = np.cos(np.pi * k * (2 * n + 1) / (2 * n_in)) * np.sqrt(2.0 / n_in)
    mat[0] /= np.sqrt(2.0)
    return mat


def mfcc(audio: AudioClip) -> MfccSummary:
    """Average mel-frequency cepstral coefficients c0..c12 over a clip.

    The pipeline is fixed: 0.97 pre-emphasis, 25.6 ms Hann frames every
    10 ms, squared-magnitude spectrum, 40 triangular mel filters spanning
    133.33-6855.5 Hz, natural log with a 1e-10 floor, orthonormal DCT-II.
    Trailing digital silence is ignored so padding a clip cannot change its
    summary.
    """
    frame_len = int(round(MFCC_FRAME_S * SAMPLE_RATE))
    hop = int(round(MFCC_HOP_S * SAMPLE_RATE))
    if len(audio) < frame_len:
        raise ValueError(
            f"clip of {len(audio)} samples is shorter than one "
            f"{frame_len}-sample analysis frame"
        )
    samples = audio.samples
    nonzero = np.flatnonzero(samples)
    dct = _dct_ortho(MFCC_N_FILTERS, MFCC_N_COEFFS)
    if nonzero.size == 0:
        floor = np.full(MFCC_N_FILTERS, np.log(MFCC_LOG_FLOOR))
        return MfccSummary(coefficients=dct @ floor)
    samples = samples[: int(nonzero[-1]) + 1]

    emphasized = np.concatenate(
        ([samples[0]], samples[1:] - MFCC_PREEMPHASIS * samples[:-1])
    )
    n_frames = int(np.ceil(len(emphasized) / hop))
    padded = np.concatenate((emphasized, np.zeros(n_frames * hop + frame_len)))
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_len)[::hop]
    frames = frames[:n_frames] * np.hanning(frame_len)
    power = np.abs(np.fft.rfft(frames, n=MFCC_NFFT)) ** 2
    filter_energies = power @ _mel_filterbank().T
    log_energies = np.log(np.maximum(filter_energies, MFCC_LOG_FLOOR))
    return MfccSummary(coefficients=(dct @ log_energies.T).mean(axis=1))


def synthesize_stimulus(
    cents: CentsTrack, energy: EnergyContour, tonic_hz: float
) -> AudioClip:
    """Resynthesize a melody as a uniform-timbre three-harmonic tone.

    Each voiced run drives a phase-continuous oscillator bank with three
    equal-strength harmonics of the frame pitch (linearly interpolated
    between frames), amplitude proportional to the square root of the frame
    energy. Unvoiced frames are silent, with 5 ms raised-cosine fades at
    voicing boundaries, and the result is normalized to a 0.9 peak.
    """
    if len(cents) != len(energy):
        raise AlignmentError(
            f"cents has {len(cents)} frames but energy has {len(energy)}"
        )
    track = CentsTrack(cents=cents.cents, tonic_hz=tonic_hz, hop=cents.hop)
    f0 = cents_to_f0(track)
    out = np.zeros(len(cents) * SAMPLES_PER_FRAME)
    fade_len = int(round(SYNTH_FADE_S * SAMPLE_RATE))
    for start, end in voiced_runs(track.voiced):
        s0, s1 = start * SAMPLES_PER_FRAME, end * SAMPLES_PER_FRAME
        positions = np.arange(s0, s1)
        knots = np.arange(start, end) * SAMPLES_PER_FRAME
        freq = np.interp(positions, knots, f0[start:end])
        amp = np.interp(positions, knots, np.sqrt(energy.energy[start:end]))
        phase = 2.0 * np.pi * np.cumsum(freq) / SAMPLE_RATE
        tone = np.zeros(len(positions))
        for h in range(1, SYNTH_N_HARMONICS + 1):
            tone += np.sin(h * phase) / SYNTH_N_HARMONICS
        segment = amp * tone
        ramp_len = min(fade_len, len(segment) // 2)
        if ramp_len:
            ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp_len) / ramp_len)
            segment[:ramp_len] *= ramp
            segment[-ramp_len:] *= ramp[::-1]
        out[s0:s1] = segment

    peak = np.max(np.abs(out)) if out.size else 0.0
    if peak > 0:
        out *= SYNTH_PEAK / peak
    return AudioClip(samples=out)
