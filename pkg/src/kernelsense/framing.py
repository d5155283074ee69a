"""Sample streams: synthetic sources, noise at a target SNR, framing and file I/O.

A sample stream is a 1-D float64 array. A frame set is a 2-D array of shape
``(M, d)`` whose row ``j`` holds ``stream[j*stride : j*stride + d]``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .rng import generator

DEFAULT_FREQS = (0.1, 0.2, 0.3)


def _check_stream(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("sample stream must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(samples)):
        raise ValueError("sample stream contains non-finite values")
    return samples


def signal_power(samples: np.ndarray) -> float:
    """Mean-square amplitude ``(1/L) sum x(n)^2``."""
    samples = _check_stream(samples)
    return float(np.mean(samples * samples))


@dataclass(frozen=True)
class SnrSpec:
    """SNR in dB relative to a signal's mean-square power.

    SNR(dB) = 10 log10(signal_power / noise_variance).
    """

    snr_db: float
    signal_power: float

    @property
    def noise_variance(self) -> float:
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")
        if not self.signal_power > 0 or not math.isfinite(self.signal_power):
            raise ValueError("signal power must be finite and positive to define a noise variance")
        var = self.signal_power / 10.0 ** (self.snr_db / 10.0)
        if not (math.isfinite(var) and var > 0):
            raise ValueError(f"noise variance {var} is not finite and positive")
        return var


def generate_sinusoid_mix(freqs: Sequence[float], phases: Sequence[float] | None, length: int) -> np.ndarray:
    """Sum of unit-amplitude sines: x(n) = sum_j sin(2 pi f_j n + phi_j).

    Frequencies are in cycles/sample and must lie strictly inside (-0.5, 0.5).
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    phases = np.zeros_like(freqs) if phases is None else np.asarray(phases, dtype=np.float64)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("at least one frequency is required")
    if phases.shape != freqs.shape:
        raise ValueError("freqs and phases must have equal length")
    if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(phases))):
        raise ValueError("frequencies and phases must be finite")
    if np.any(np.abs(freqs) >= 0.5):
        raise ValueError("frequencies must satisfy |f| < 0.5 cycles/sample")
    if length < 1:
        raise ValueError("length must be positive")
    n = np.arange(length, dtype=np.float64)
    return np.sin(2.0 * np.pi * np.outer(n, freqs) + phases).sum(axis=1)


def generate_gaussian_noise(length: int, variance: float, seed: int) -> np.ndarray:
    """White zero-mean Gaussian noise; a pure function of ``(length, variance, seed)``.

    The same seed with a different variance gives the same realisation scaled,
    which the harness relies on for common random numbers across an SNR grid.
    """
    if not (math.isfinite(variance) and variance > 0):
        raise ValueError(f"noise variance must be finite and positive, got {variance}")
    if length < 1:
        raise ValueError("length must be positive")
    return math.sqrt(variance) * generator(seed).standard_normal(length)


def mix_at_snr(signal: np.ndarray, snr: SnrSpec | float, seed: int) -> np.ndarray:
    """Add white Gaussian noise to ``signal`` at the requested SNR.

    A bare float is read as snr_db, with power measured from ``signal``.
    """
    signal = _check_stream(signal)
    if not isinstance(snr, SnrSpec):
        snr = SnrSpec(float(snr), signal_power(signal))
    return signal + generate_gaussian_noise(signal.size, snr.noise_variance, seed)


def frame_signal(stream: np.ndarray, d: int, stride: int = 1) -> np.ndarray:
    """Slice a stream into ``M = (L - d) // stride + 1`` overlapping frames of length d."""
    stream = _check_stream(stream)
    if d < 1 or stride < 1:
        raise ValueError("frame dimension and stride must be positive")
    if stream.size < d:
        raise ValueError(f"stream of length {stream.size} is shorter than frame dimension {d}")
    windows = np.lib.stride_tricks.sliding_window_view(stream, d)[::stride]
    return np.ascontiguousarray(windows)


def generate_ar1(length: int, coeff: float = 0.95, seed: int = 0) -> np.ndarray:
    """AR(1) process s(n) = coeff s(n-1) + e(n), s(-1) = 0, scaled to unit power."""
    if not abs(coeff) < 1:
        raise ValueError(f"AR(1) coefficient must satisfy |coeff| < 1, got {coeff}")
    if length < 1:
        raise ValueError("length must be positive")
    e = generator(seed).standard_normal(length)
    s = lfilter([1.0], [1.0, -coeff], e)
    return s / math.sqrt(np.mean(s * s))


def load_samples(path: str | os.PathLike, format: str = "csv") -> np.ndarray:
    """Read a stream from disk.

    ``csv``: one decimal real per line, optional trailing newline.
    ``f64le``: consecutive little-endian IEEE-754 doubles.
    """
    if format == "csv":
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        if text.endswith("\n"):
            text = text[:-1]
        if not text:
            raise ValueError(f"{path}: empty sample file")
        values = []
        for lineno, line in enumerate(text.split("\n"), start=1):
            try:
                values.append(float(line.strip()))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed sample {line!r}") from None
        samples = np.array(values, dtype=np.float64)
    elif format == "f64le":
        with open(path, "rb") as fh:
            raw = fh.read()
        if not raw:
            raise ValueError(f"{path}: empty sample file")
        if len(raw) % 8:
            raise ValueError(f"{path}: truncated record ({len(raw)} bytes is not a multiple of 8)")
        samples = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    else:
        raise ValueError(f"unknown sample format {format!r}")
    return _check_stream(samples)


def save_samples(path: str | os.PathLike, samples: np.ndarray, format: str = "csv") -> None:
    samples = _check_stream(samples)
    if format == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            fh.writelines(f"{x!r}\n" for x in samples.tolist())
    elif format == "f64le":
        with open(path, "wb") as fh:
            fh.write(samples.astype("<f8").tobytes())
    else:
        raise ValueError(f"unknown sample format {format!r}")
