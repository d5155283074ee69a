"""Spectrum sensing with leading eigenvectors, kernel PCA and kernel GLRT."""
from .detectors import (
    DetectorSpec,
    make_scorer,
    score_ec,
    score_glrt,
    score_kglrt,
    score_kpca,
    score_mme,
    score_pca,
    train_ec,
    train_glrt,
    train_kglrt,
    train_kpca,
    train_pca,
)
from .eig import leading_eigvec, sample_covariance, sym_eig
from .framing import (
    SnrSpec,
    frame_signal,
    generate_ar1,
    generate_gaussian_noise,
    generate_sinusoid_mix,
    load_samples,
    mix_at_snr,
    save_samples,
)
from .harness import ExperimentConfig, calibrate_threshold, roc_curve, run_sweep, segment_similarity
from .kernels import (
    KernelSpec,
    center_gram,
    center_kernel_vector,
    cross_gram,
    eval_kernel,
    gaussian_rbf,
    gram_matrix,
    linear,
    polynomial,
)

__version__ = "0.1.0"
