"""Detector templates and test statistics.

Each detector is a ``train_*`` / ``score_*`` pair. Training consumes clean
frames of the primary user's signal (rows of an ``(M, d)`` array); scoring
consumes received frames and returns one scalar that is compared against a
threshold, larger meaning "signal present".

Statistics that naturally live per frame (GLRT, kernel GLRT, EC) are
averaged over the received frames.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .eig import eigvalsh_desc, leading_eigvec, sample_covariance, sym_eig
from .kernels import (
    GAUSSIAN_KINDS,
    KernelSpec,
    center_cross_gram,
    center_gram,
    center_kernel_vector,
    cross_gram,
    gaussian_rbf,
    gram_matrix,
    polynomial,
)

RANK_TOL = 1e-8
STAT_CAP = 1e12
GUARD = 1e-12
DEGENERATE_TOL = 1e-12

DETECTOR_KINDS = ("pca", "kpca", "glrt", "kglrt", "ec", "mme")


class DegenerateError(ValueError):
    """Training or received data carry no usable structure (e.g. an all-zero Gram)."""


def _frames(x, d: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"expected a non-empty (M, d) frame array, got shape {x.shape}")
    if d is not None and x.shape[1] != d:
        raise ValueError(f"received frame dimension {x.shape[1]} does not match template dimension {d}")
    return x


# -- PCA ---------------------------------------------------------------------

@dataclass(frozen=True)
class PcaTemplate:
    v1: np.ndarray

    @property
    def d(self) -> int:
        return self.v1.size


def train_pca(training) -> PcaTemplate:
    _, v1 = leading_eigvec(sample_covariance(_frames(training)))
    return PcaTemplate(v1)


def lag_correlation(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """c[l] = sum_k v1[k] v2[k + l] for l = 0..d, zero-padding past the end."""
    d = v1.size
    c = np.correlate(v2, v1, mode="full")[d - 1:]
    return np.append(c, 0.0)


def score_pca(t: PcaTemplate, received) -> float:
    """Max absolute one-sided cross-correlation between template and received leading eigenvectors."""
    Y = _frames(received, t.d)
    _, v2 = leading_eigvec(sample_covariance(Y))
    return float(np.max(np.abs(lag_correlation(t.v1, v2))))


# -- kernel PCA --------------------------------------------------------------

@dataclass(frozen=True)
class KpcaTemplate:
    kernel: KernelSpec
    training: np.ndarray
    beta1: np.ndarray
    mu1: float
    centering: bool = False


def _leading_feature_vector(K: np.ndarray) -> tuple[float, np.ndarray]:
    """Leading Gram eigenpair with beta scaled so mu * <beta, beta> = 1."""
    mu, u = leading_eigvec(K)
    if not mu > DEGENERATE_TOL * max(float(np.trace(K)), 0.0) or mu <= 0:
        raise DegenerateError(f"leading Gram eigenvalue {mu:.3e} is numerically zero")
    return mu, u / math.sqrt(mu)


def train_kpca(kernel: KernelSpec, training, centering: bool = False) -> KpcaTemplate:
    X = _frames(training)
    if X.shape[0] < 2:
        raise ValueError("kernel PCA needs at least two training frames")
    K = gram_matrix(kernel, X)
    if centering:
        K = center_gram(K)
    mu, beta = _leading_feature_vector(K)
    return KpcaTemplate(kernel, X, beta, mu, centering)


def score_kpca(t: KpcaTemplate, received) -> float:
    """|beta1^T Kt beta1~|: inner product of the unit leading feature-space eigenvectors."""
    Y = _frames(received, t.training.shape[1])
    Kr = gram_matrix(t.kernel, Y)
    Kt = cross_gram(t.kernel, t.training, Y)
    if t.centering:
        Kr = center_gram(Kr)
        Kt = center_cross_gram(Kt)
    _, beta_r = _leading_feature_vector(Kr)
    return abs(float(t.beta1 @ Kt @ beta_r))


# -- GLRT (matched subspace) -------------------------------------------------

@dataclass(frozen=True)
class SubspaceTemplate:
    T: np.ndarray  # (d, r), orthonormal columns

    @property
    def rank(self) -> int:
        return self.T.shape[1]


def train_glrt(training, rank_tol: float = RANK_TOL) -> SubspaceTemplate:
    eig = sym_eig(sample_covariance(_frames(training)))
    lead = eig.values[0]
    if not lead > 0:
        raise DegenerateError("training covariance has no positive eigenvalue")
    keep = eig.values > rank_tol * lead
    return SubspaceTemplate(eig.vectors[:, keep])


def glrt_frame_stats(t: SubspaceTemplate, received) -> np.ndarray:
    """Per-frame y^T y / y^T (I - T T^T) y, capped at STAT_CAP.

    The cap applies once the residual falls below GUARD relative to the frame
    energy, which keeps the statistic scale invariant. An all-zero frame
    scores 1.
    """
    Y = _frames(received, t.T.shape[0])
    energy = np.einsum("ij,ij->i", Y, Y)
    resid = Y - (Y @ t.T) @ t.T.T
    # a projection residual never exceeds the frame energy; clamp rounding excess
    denom = np.minimum(np.einsum("ij,ij->i", resid, resid), energy)
    out = np.ones_like(energy)
    live = energy > 0
    capped = live & (denom <= GUARD * energy)
    ok = live & ~capped
    out[ok] = energy[ok] / denom[ok]
    out[capped] = STAT_CAP
    return out


def score_glrt(t: SubspaceTemplate, received) -> float:
    return float(np.mean(glrt_frame_stats(t, received)))


# -- kernel GLRT -------------------------------------------------------------

@dataclass(frozen=True)
class KglrtTemplate:
    kernel: KernelSpec
    training: np.ndarray
    betas: np.ndarray   # (M, K); column k scaled so mu_k <beta_k, beta_k> = 1
    mus: np.ndarray     # (K,)
    centering: bool = False

    @property
    def rank(self) -> int:
        return self.betas.shape[1]


def train_kglrt(kernel: KernelSpec, training, rank_tol: float = RANK_TOL, centering: bool = False) -> KglrtTemplate:
    if kernel.kind not in GAUSSIAN_KINDS:
        raise ValueError(f"kernel GLRT needs a Gaussian kernel (k(y, y) = 1), got {kernel.kind!r}")
    X = _frames(training)
    if X.shape[0] < 2:
        raise ValueError("kernel GLRT needs at least two training frames")
    K = gram_matrix(kernel, X)
    if centering:
        K = center_gram(K)
    eig = sym_eig(K)
    lead = eig.values[0]
    if not lead > DEGENERATE_TOL * max(float(np.trace(K)), 0.0) or lead <= 0:
        raise DegenerateError("training Gram matrix is numerically zero")
    keep = eig.values > rank_tol * lead
    mus = eig.values[keep]
    return KglrtTemplate(kernel, X, eig.vectors[:, keep] / np.sqrt(mus), mus, centering)


def kglrt_projection(t: KglrtTemplate, received) -> np.ndarray:
    """Per-frame p = k_T^T B B^T k_T for unit-normalised received frames.

    p is the squared norm of phi(y) projected onto the training feature
    subspace; with k(y, y) = 1 it lies in [0, 1] up to rounding.
    """
    Y = _frames(received, t.training.shape[1])
    norms = np.linalg.norm(Y, axis=1)
    if np.any(norms == 0):
        raise ValueError("cannot normalise an all-zero received frame")
    kT = cross_gram(t.kernel, Y / norms[:, None], t.training)  # row i is k_T for frame i
    if t.centering:
        kT = kT - kT.mean(axis=1, keepdims=True)
    proj = kT @ t.betas
    return np.einsum("ij,ij->i", proj, proj)


def kglrt_frame_stats(t: KglrtTemplate, received, cap: bool = True) -> np.ndarray:
    p = kglrt_projection(t, received)
    denom = 1.0 - p
    if not cap:
        with np.errstate(divide="ignore"):
            return 1.0 / denom
    out = np.full_like(p, STAT_CAP)
    ok = denom >= GUARD
    out[ok] = 1.0 / denom[ok]
    return out


def score_kglrt(t: KglrtTemplate, received) -> float:
    return float(np.mean(kglrt_frame_stats(t, received)))


def kglrt_single(t: KglrtTemplate, y) -> float:
    """Uncapped kernel-GLRT statistic for one received vector, evaluated step by step."""
    y = np.asarray(y, dtype=np.float64)
    y = y / np.linalg.norm(y)
    kT = cross_gram(t.kernel, t.training, y[None, :])[:, 0]
    if t.centering:
        kT = center_kernel_vector(kT)
    BBt = t.betas @ t.betas.T
    return 1.0 / (1.0 - kT @ BBt @ kT)


# -- estimator-correlator ----------------------------------------------------

@dataclass(frozen=True)
class EcModel:
    sigma_x: np.ndarray
    noise_var: float
    W: np.ndarray  # Sigma_x (Sigma_x + noise_var I)^-1


def ec_model(sigma_x, noise_var: float) -> EcModel:
    if not (math.isfinite(noise_var) and noise_var > 0):
        raise ValueError(f"noise variance must be finite and positive, got {noise_var}")
    eig = sym_eig(sigma_x)
    lam = np.clip(eig.values, 0.0, None)
    V = eig.vectors
    W = (V * (lam / (lam + noise_var))) @ V.T
    return EcModel(np.asarray(sigma_x, dtype=np.float64), float(noise_var), 0.5 * (W + W.T))


def train_ec(training, noise_var: float) -> EcModel:
    return ec_model(sample_covariance(_frames(training)), noise_var)


def score_ec(m: EcModel, received) -> float:
    """(1/M) sum_i y_i^T W y_i."""
    Y = _frames(received, m.W.shape[0])
    return float(np.mean(np.einsum("ij,ij->i", Y @ m.W, Y)))


# -- maximum-minimum eigenvalue ----------------------------------------------

def score_mme(received) -> float:
    """lambda_max / lambda_min of the received sample covariance (floored denominator)."""
    lam = eigvalsh_desc(sample_covariance(_frames(received)))
    top = lam[0]
    if not top > 0:
        return 1.0
    return float(top / max(lam[-1], GUARD * top))


# -- uniform construction for the harness -----------------------------------

@dataclass(frozen=True)
class DetectorSpec:
    """A detector kind plus its tuning knobs.

    ``kernel`` defaults to polynomial(c=1, degree=2) for kpca and
    gaussian_rbf(sigma=15/sqrt(2)) for kglrt.
    """

    kind: str
    kernel: KernelSpec | None = None
    rank_tol: float = RANK_TOL
    centering: bool = False

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(f"unknown detector {self.kind!r}; expected one of {DETECTOR_KINDS}")
        if self.kernel is None:
            if self.kind == "kpca":
                object.__setattr__(self, "kernel", polynomial(1.0, 2))
            elif self.kind == "kglrt":
                object.__setattr__(self, "kernel", gaussian_rbf(15.0 / math.sqrt(2.0)))
        if self.kind == "kglrt" and self.kernel.kind not in GAUSSIAN_KINDS:
            raise ValueError("kernel GLRT needs a gaussian_rbf or rbf kernel")
        if not self.rank_tol > 0:
            raise ValueError("rank_tol must be positive")

    @property
    def needs_noise_var(self) -> bool:
        return self.kind == "ec"

    @property
    def label(self) -> str:
        return self.kind


Scorer = Callable[[np.ndarray], float]


def make_scorer(spec: DetectorSpec, training, noise_var: float | None = None) -> Scorer:
    """Train ``spec`` on clean frames and return a frames -> statistic function."""
    if spec.kind == "pca":
        t = train_pca(training)
        return lambda y: score_pca(t, y)
    if spec.kind == "kpca":
        t = train_kpca(spec.kernel, training, spec.centering)
        return lambda y: score_kpca(t, y)
    if spec.kind == "glrt":
        t = train_glrt(training, spec.rank_tol)
        return lambda y: score_glrt(t, y)
    if spec.kind == "kglrt":
        t = train_kglrt(spec.kernel, training, spec.rank_tol, spec.centering)
        return lambda y: score_kglrt(t, y)
    if spec.kind == "ec":
        if noise_var is None:
            raise ValueError("the estimator-correlator needs the noise variance")
        m = train_ec(training, noise_var)
        return lambda y: score_ec(m, y)
    return score_mme
