"""Audio <-> spectrogram conversions.

STFT analysis, triangular mel filterbanks, log-mel extraction, and
Griffin-Lim phase reconstruction as the desk-scale vocoder.  All
operations are pure functions on immutable inputs.

WAV files are RIFF/WAVE, mono, 16-bit signed PCM little-endian; samples
convert to/from unit range by division/multiplication by 32768.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from amanda import _kernels

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_N_FFT = 1024  # 64 ms at 16 kHz; must be a power of two
DEFAULT_HOP = 256
DEFAULT_N_MELS = 80
DEFAULT_LOG_FLOOR = 1e-5
DEFAULT_GRIFFIN_LIM_ITERS = 64


class ParameterError(ValueError):
    pass


class ClipTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ParameterError(f"audio must be mono (1-D), got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ParameterError("audio contains non-finite samples")
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = DEFAULT_N_FFT
    hop: int = DEFAULT_HOP
    window: str = "hann"

    def __post_init__(self):
        if self.n_fft <= 0 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise ParameterError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 < self.hop <= self.n_fft:
            raise ParameterError(f"hop must be in (0, n_fft], got {self.hop}")
        if self.window not in ("hann", "hamming", "rect"):
            raise ParameterError(f"unknown window {self.window!r}")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1


@dataclass(frozen=True)
class MagnitudeSpectrogram:
    frames: np.ndarray  # (T, n_fft/2 + 1), nonnegative

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ParameterError(f"spectrogram frames must be 2-D, got {frames.shape}")
        if not np.all(np.isfinite(frames)) or np.any(frames < 0):
            raise ParameterError("magnitudes must be finite and nonnegative")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class MelSpectrogram:
    frames: np.ndarray  # (T_y, n_mels), log-amplitude
    n_mels: int = DEFAULT_N_MELS

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] != self.n_mels:
            raise ParameterError(
                f"mel frames must be (T, {self.n_mels}), got {frames.shape}"
            )
        if not np.all(np.isfinite(frames)):
            raise ParameterError("mel frames must be finite")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def _window(cfg: StftConfig) -> np.ndarray:
    n = np.arange(cfg.n_fft)
    if cfg.window == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / cfg.n_fft)
    if cfg.window == "hamming":
        return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / cfg.n_fft)
    return np.ones(cfg.n_fft)


def _frame(samples: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """(T, n_fft) frame matrix; T = floor((len - n_fft)/hop) + 1, no padding."""
    n = len(samples)
    if n < cfg.n_fft:
        raise ClipTooShortError(
            f"clip too short: {n} samples < n_fft {cfg.n_fft}"
        )
    n_frames = (n - cfg.n_fft) // cfg.hop + 1
    idx = np.arange(cfg.n_fft)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    return samples[idx]


def _stft_complex(samples: np.ndarray, cfg: StftConfig) -> np.ndarray:
    return np.fft.rfft(_frame(samples, cfg) * _window(cfg), axis=1)


def stft(audio: AudioClip, cfg: StftConfig) -> MagnitudeSpectrogram:
    """Magnitudes of the windowed DFT per frame."""
    if len(audio) == 0:
        raise ClipTooShortError("clip too short: empty audio")
    return MagnitudeSpectrogram(np.abs(_stft_complex(audio.samples, cfg)))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_fft: int,
    n_mels: int = DEFAULT_N_MELS,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    f_min: float = 0.0,
    f_max: float | None = None,
) -> np.ndarray:
    """(n_mels, n_fft/2+1) matrix of triangular filters on the mel scale."""
    if f_max is None:
        f_max = sample_rate / 2.0
    if n_mels < 2:
        raise ParameterError(f"n_mels must be >= 2, got {n_mels}")
    if not 0 <= f_min < f_max <= sample_rate / 2.0:
        raise ParameterError(
            f"need 0 <= f_min < f_max <= sample_rate/2, got [{f_min}, {f_max}] at {sample_rate} Hz"
        )
    peaks = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)

    bank = np.zeros((n_mels, len(bin_freqs)))
    for m in range(n_mels):
        lo, center, hi = peaks[m], peaks[m + 1], peaks[m + 2]
        rising = (bin_freqs - lo) / (center - lo)
        falling = (hi - bin_freqs) / (hi - center)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
        if not bank[m].any():
            raise ParameterError(
                f"mel filter {m} has no support; use a larger n_fft or fewer bands"
            )
    return bank


def melspectrogram(
    audio: AudioClip,
    cfg: StftConfig,
    bank: np.ndarray,
    log_floor: float = DEFAULT_LOG_FLOOR,
) -> MelSpectrogram:
    """log(max(bank @ magnitude, log_floor)) per frame."""
    mag = stft(audio, cfg)
    if bank.shape[1] != cfg.n_bins:
        raise ParameterError(
            f"bank has {bank.shape[1]} bins but config implies {cfg.n_bins}"
        )
    mel = np.log(np.maximum(mag.frames @ bank.T, log_floor))
    return MelSpectrogram(mel, n_mels=bank.shape[0])


def _wola_weights(cfg: StftConfig, n_frames: int) -> np.ndarray:
    """Per-sample sum of squared window weights for a frame stack."""
    win = _window(cfg)
    out_len = (n_frames - 1) * cfg.hop + cfg.n_fft
    return _kernels.overlap_add(
        np.ascontiguousarray(np.tile(win * win, (n_frames, 1))), cfg.hop, out_len
    )


def _wola_numerator(spectra: np.ndarray, cfg: StftConfig) -> np.ndarray:
    win = _window(cfg)
    frames = np.fft.irfft(spectra, n=cfg.n_fft, axis=1) * win
    out_len = (spectra.shape[0] - 1) * cfg.hop + cfg.n_fft
    return _kernels.overlap_add(np.ascontiguousarray(frames), cfg.hop, out_len)


def istft(spectra: np.ndarray, cfg: StftConfig, edge_threshold: float = 0.01) -> np.ndarray:
    """Weighted-overlap-add least-squares inverse of _stft_complex.

    Positions whose window coverage falls below edge_threshold times the
    interior coverage (the tapered first/last samples) are muted instead
    of divided, which would otherwise amplify noise by 1/weight there.
    """
    num = _wola_numerator(spectra, cfg)
    den = _wola_weights(cfg, spectra.shape[0])
    out = num / np.maximum(den, 1e-12)
    if edge_threshold > 0:
        out[den < edge_threshold * den.max()] = 0.0
    return out


def spectral_convergence(target: np.ndarray, estimate: np.ndarray) -> float:
    """Frobenius distance between magnitudes, relative to the target norm."""
    denom = max(float(np.linalg.norm(target)), 1e-12)
    return float(np.linalg.norm(target - estimate)) / denom


def griffin_lim(
    mag: MagnitudeSpectrogram,
    cfg: StftConfig,
    iterations: int = DEFAULT_GRIFFIN_LIM_ITERS,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    return_errors: bool = False,
):
    """Iterative phase reconstruction from a magnitude spectrogram.

    Classic alternating projections: substitute the target magnitude,
    invert, re-analyze.  With return_errors=True also returns the
    spectral-convergence error series (entry k is the error of the signal
    after k iterations, starting from the zero-phase initialization), which
    the classic algorithm keeps non-increasing.
    """
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations}")
    if mag.frames.shape[1] != cfg.n_bins:
        raise ParameterError(
            f"magnitude has {mag.frames.shape[1]} bins but config implies {cfg.n_bins}"
        )
    target = mag.frames
    den = np.maximum(_wola_weights(cfg, target.shape[0]), 1e-12)
    # iterations use the exact least-squares inverse (the classic
    # monotonicity argument assumes it); edge muting is applied once at the end
    x = _wola_numerator(target.astype(np.complex128), cfg) / den  # zero phase
    errors = []
    for _ in range(iterations):
        spectra = _stft_complex(x, cfg)
        errors.append(spectral_convergence(target, np.abs(spectra)))
        phase = np.exp(1j * np.angle(spectra))
        x = _wola_numerator(target * phase, cfg) / den
    errors.append(spectral_convergence(target, np.abs(_stft_complex(x, cfg))))
    x[den < 0.01 * den.max()] = 0.0
    clip = AudioClip(x, sample_rate=sample_rate)
    return (clip, errors) if return_errors else clip


def mel_to_audio(
    mel: MelSpectrogram,
    cfg: StftConfig,
    bank: np.ndarray,
    iterations: int = DEFAULT_GRIFFIN_LIM_ITERS,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
) -> AudioClip:
    """Invert a log-mel spectrogram: pseudo-inverse of the bank, then
    Griffin-Lim; output clamped to [-1, 1]."""
    linear = np.exp(mel.frames)  # (T, n_mels)
    mag = np.maximum(linear @ np.linalg.pinv(bank).T, 0.0)
    clip = griffin_lim(MagnitudeSpectrogram(mag), cfg, iterations, sample_rate)
    return AudioClip(np.clip(clip.samples, -1.0, 1.0), sample_rate=sample_rate)


def write_wav(path, clip: AudioClip) -> None:
    """Mono 16-bit signed PCM little-endian RIFF/WAVE."""
    pcm = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(clip.sample_rate)
        fh.writeframes(pcm.tobytes())


def read_wav(path) -> AudioClip:
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1:
            raise ParameterError(f"{path}: expected mono, got {fh.getnchannels()} channels")
        if fh.getsampwidth() != 2:
            raise ParameterError(f"{path}: expected 16-bit PCM, got {8 * fh.getsampwidth()}-bit")
        raw = fh.readframes(fh.getnframes())
        rate = fh.getframerate()
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioClip(samples, sample_rate=rate)
