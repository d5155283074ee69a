"""Monte Carlo threshold calibration, Pd-vs-SNR sweeps, ROC curves and segment similarity.

Trial ``i`` of stream ``s`` draws its noise from ``derive_seed(base_seed, i, s)``.
The seed ignores the SNR, so every grid point sees the same unit-variance
noise realisations scaled to its own variance (common random numbers). Results
are gathered in trial order, which makes a run independent of the worker
count.
"""
from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .detectors import DetectorSpec, Scorer, make_scorer, score_kpca, score_pca, train_kpca, train_pca
from .framing import (
    DEFAULT_FREQS,
    SnrSpec,
    frame_signal,
    generate_ar1,
    generate_gaussian_noise,
    generate_sinusoid_mix,
    load_samples,
    signal_power,
)
from .rng import derive_seed

log = logging.getLogger(__name__)

# seed streams; kept disjoint so held-out H0 trials never reuse calibration noise
CALIBRATION, HELD_OUT, SIGNAL, ROC_NOISE, ROC_SIGNAL = 1, 2, 3, 4, 5

MIN_CALIBRATION_TRIALS = 50


# -- signal sources ----------------------------------------------------------

@dataclass(frozen=True)
class SinusoidSource:
    freqs: tuple[float, ...] = DEFAULT_FREQS
    phases: tuple[float, ...] | None = None

    def stream(self, length: int) -> np.ndarray:
        return generate_sinusoid_mix(self.freqs, self.phases, length)


@dataclass(frozen=True)
class Ar1Source:
    coeff: float = 0.95
    seed: int = 0

    def stream(self, length: int) -> np.ndarray:
        return generate_ar1(length, self.coeff, self.seed)


@dataclass(frozen=True)
class FileSource:
    path: str
    format: str = "csv"

    def stream(self, length: int | None = None) -> np.ndarray:
        samples = load_samples(self.path, self.format)
        if length is None:
            return samples
        if samples.size < length:
            raise ValueError(f"{self.path} holds {samples.size} samples, {length} requested")
        return samples[:length]


@dataclass(frozen=True)
class ExperimentConfig:
    detector: DetectorSpec
    source: SinusoidSource | Ar1Source | FileSource = field(default_factory=SinusoidSource)
    d: int = 128
    stride: int = 1
    length: int = 500
    snr_db: tuple[float, ...] = (-10.0,)
    trials: int = 1000
    target_pf: float = 0.1
    base_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.target_pf < 1:
            raise ValueError("target_pf must lie in (0, 1)")
        if len(self.snr_db) == 0:
            raise ValueError("the SNR grid is empty")
        if self.d < 1 or self.stride < 1 or self.length < self.d:
            raise ValueError("need d >= 1, stride >= 1 and length >= d")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))

    def clean_signal(self) -> np.ndarray:
        return self.source.stream(self.length)


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    threshold: float
    pd: float
    pf: float


@dataclass
class TrialReport:
    detector: str
    trials: int
    rows: list[SweepRow]

    def crossing(self, level: float = 0.9) -> float | None:
        """First SNR whose empirical Pd exceeds ``level`` (None if never)."""
        for row in self.rows:
            if row.pd > level:
                return row.snr_db
        return None


@dataclass
class RocCurve:
    pf: np.ndarray
    pd: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.pf, self.pd])

    def auc(self) -> float:
        return float(np.trapezoid(self.pd, self.pf))


# -- trial machinery ---------------------------------------------------------

class _Trial:
    """Scores one realisation: fresh noise, optional fixed clean signal."""

    def __init__(self, scorer: Scorer, clean: np.ndarray | None, length: int, noise_var: float,
                 d: int, stride: int, base_seed: int, stream: int):
        self.scorer = scorer
        self.clean = clean
        self.length = length
        self.noise_var = noise_var
        self.d = d
        self.stride = stride
        self.base_seed = base_seed
        self.stream = stream

    def __call__(self, i: int) -> float:
        y = generate_gaussian_noise(self.length, self.noise_var, derive_seed(self.base_seed, i, self.stream))
        if self.clean is not None:
            y = y + self.clean
        return self.scorer(frame_signal(y, self.d, self.stride))


def _workers(threads: int) -> int:
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads or (os.cpu_count() or 1)


def run_trials(trial: _Trial, n: int, threads: int = 1) -> np.ndarray:
    workers = _workers(threads)
    if workers == 1:
        return np.fromiter((trial(i) for i in range(n)), dtype=np.float64, count=n)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.fromiter(pool.map(trial, range(n)), dtype=np.float64, count=n)


class _Setup:
    """Per-SNR quantities shared by calibration, sweeps and ROC runs."""

    def __init__(self, config: ExperimentConfig, snr_db: float):
        self.config = config
        self.clean = config.clean_signal()
        self.noise_var = SnrSpec(snr_db, signal_power(self.clean)).noise_variance
        training = frame_signal(self.clean, config.d, config.stride)
        self.scorer = make_scorer(config.detector, training, self.noise_var)

    def scores(self, stream: int, signal: bool, n: int | None = None) -> np.ndarray:
        c = self.config
        trial = _Trial(self.scorer, self.clean if signal else None, c.length, self.noise_var,
                       c.d, c.stride, c.base_seed, stream)
        return run_trials(trial, c.trials if n is None else n, c.threads)


def threshold_from_scores(scores: np.ndarray, target_pf: float) -> float:
    """Empirical (1 - target_pf) quantile, linear between order statistics."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("no scores to calibrate on")
    if np.ptp(scores) == 0:
        raise ValueError("degenerate score distribution: every H0 score is identical")
    return float(np.quantile(scores, 1.0 - target_pf, method="linear"))


def calibrate_threshold(config: ExperimentConfig, snr_db: float) -> float:
    """Threshold reaching ``target_pf`` on ``trials`` noise-only realisations."""
    if config.trials < MIN_CALIBRATION_TRIALS:
        raise ValueError(f"calibration needs at least {MIN_CALIBRATION_TRIALS} trials")
    return threshold_from_scores(_Setup(config, snr_db).scores(CALIBRATION, signal=False), config.target_pf)


def measure_false_alarm(config: ExperimentConfig, snr_db: float, held_out: int | None = None) -> tuple[float, float]:
    """Calibrate on ``trials`` H0 runs, then re-measure Pf on a disjoint held-out H0 set."""
    if config.trials < MIN_CALIBRATION_TRIALS:
        raise ValueError(f"calibration needs at least {MIN_CALIBRATION_TRIALS} trials")
    setup = _Setup(config, snr_db)
    thr = threshold_from_scores(setup.scores(CALIBRATION, signal=False), config.target_pf)
    pf = float(np.mean(setup.scores(HELD_OUT, signal=False, n=held_out) > thr))
    return thr, pf


def run_sweep(config: ExperimentConfig) -> TrialReport:
    if config.trials < MIN_CALIBRATION_TRIALS:
        raise ValueError(f"calibration needs at least {MIN_CALIBRATION_TRIALS} trials")
    rows = []
    for snr in sorted(config.snr_db):
        setup = _Setup(config, snr)
        thr = threshold_from_scores(setup.scores(CALIBRATION, signal=False), config.target_pf)
        pd = float(np.mean(setup.scores(SIGNAL, signal=True) > thr))
        pf = float(np.mean(setup.scores(HELD_OUT, signal=False) > thr))
        log.info("%s snr=%+.1f dB threshold=%.6g pd=%.3f pf=%.3f", config.detector.label, snr, thr, pd, pf)
        rows.append(SweepRow(snr, thr, pd, pf))
    return TrialReport(config.detector.label, config.trials, rows)


def roc_from_scores(h0: np.ndarray, h1: np.ndarray) -> RocCurve:
    """Sweep the threshold over every distinct pooled score (decide H1 when score >= t).

    The curve starts at (0, 0), ends at (1, 1) and has one point per distinct
    pooled score in between.
    """
    h0 = np.asarray(h0, dtype=np.float64)
    h1 = np.asarray(h1, dtype=np.float64)
    thresholds = np.unique(np.concatenate([h0, h1]))[::-1]
    s0, s1 = np.sort(h0), np.sort(h1)
    pf = (h0.size - np.searchsorted(s0, thresholds, side="left")) / h0.size
    pd = (h1.size - np.searchsorted(s1, thresholds, side="left")) / h1.size
    return RocCurve(np.concatenate([[0.0], pf, [1.0]]), np.concatenate([[0.0], pd, [1.0]]))


def roc_curve(config: ExperimentConfig, snr_db: float) -> RocCurve:
    setup = _Setup(config, snr_db)
    return roc_from_scores(setup.scores(ROC_NOISE, signal=False), setup.scores(ROC_SIGNAL, signal=True))


def segment_similarity(stream: np.ndarray, segment_len: int, method: DetectorSpec,
                       d: int = 128, stride: int = 1) -> list[float]:
    """Similarity of each later segment's leading eigenvector to segment 0's.

    ``method.kind`` is ``pca`` (lag-scanned cross-correlation) or ``kpca``
    (feature-space inner product).
    """
    stream = np.asarray(stream, dtype=np.float64)
    if segment_len < d:
        raise ValueError("segment length must be at least the frame dimension")
    n_seg = stream.size // segment_len
    if n_seg < 2:
        raise ValueError(f"stream of {stream.size} samples holds fewer than two segments of {segment_len}")
    segments = [frame_signal(stream[k * segment_len:(k + 1) * segment_len], d, stride) for k in range(n_seg)]
    if method.kind == "pca":
        t = train_pca(segments[0])
        return [score_pca(t, s) for s in segments[1:]]
    if method.kind == "kpca":
        t = train_kpca(method.kernel, segments[0], method.centering)
        return [score_kpca(t, s) for s in segments[1:]]
    raise ValueError(f"segment similarity supports pca and kpca, not {method.kind!r}")


# -- CSV output --------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _write_rows(header: Sequence[str], rows: Iterable[Sequence[float]], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def report_csv(report: TrialReport) -> str:
    buf = io.StringIO()
    _write_rows(("snr_db", "threshold", "pd", "pf"),
                ((r.snr_db, r.threshold, r.pd, r.pf) for r in report.rows), buf)
    return buf.getvalue()


def roc_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    _write_rows(("pf", "pd"), zip(curve.pf, curve.pd), buf)
    return buf.getvalue()


def similarity_csv(values: Sequence[float]) -> str:
    return "".join(f"{_fmt(v)}\n" for v in values)
