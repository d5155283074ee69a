"""Kernel functions, Gram / cross-Gram matrices and feature-space centering."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

# kind -> (parameter names, defaults)
KERNEL_PARAMS: dict[str, dict[str, float]] = {
    "linear": {},
    "polynomial": {"c": 1.0, "degree": 2},
    "gaussian_rbf": {"sigma": 1.0},
    "rbf": {"gamma": 1.0},
    "heavy_tailed_rbf": {"gamma": 1.0, "a": 1.0, "b": 1.0},
    "tanh_nn": {"b": 0.0},
}
GAUSSIAN_KINDS = ("gaussian_rbf", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """One kernel function and its parameters.

    >>> KernelSpec("polynomial", {"c": 1.0, "degree": 2})
    KernelSpec(kind='polynomial', params={'c': 1.0, 'degree': 2})
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KERNEL_PARAMS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {sorted(KERNEL_PARAMS)}")
        allowed = KERNEL_PARAMS[self.kind]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ValueError(f"{self.kind} kernel got unknown parameter(s) {sorted(unknown)}")
        merged = {**allowed, **self.params}
        for name, value in merged.items():
            if not math.isfinite(value):
                raise ValueError(f"{self.kind}.{name} must be finite")
        k = self.kind
        if k == "polynomial":
            if merged["c"] < 0:
                raise ValueError("polynomial c must be >= 0")
            deg = merged["degree"]
            if deg < 1 or int(deg) != deg:
                raise ValueError("polynomial degree must be an integer >= 1")
            merged["degree"] = int(deg)
        elif k == "gaussian_rbf" and merged["sigma"] <= 0:
            raise ValueError("gaussian_rbf sigma must be > 0")
        elif k == "rbf" and merged["gamma"] <= 0:
            raise ValueError("rbf gamma must be > 0")
        elif k == "heavy_tailed_rbf" and min(merged["gamma"], merged["a"], merged["b"]) <= 0:
            raise ValueError("heavy_tailed_rbf gamma, a and b must all be > 0")
        object.__setattr__(self, "params", merged)

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "KernelSpec":
        d = dict(d)
        kind = d.pop("kind")
        return cls(kind, d)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.params}


def linear() -> KernelSpec:
    return KernelSpec("linear")


def polynomial(c: float = 1.0, degree: int = 2) -> KernelSpec:
    return KernelSpec("polynomial", {"c": c, "degree": degree})


def gaussian_rbf(sigma: float) -> KernelSpec:
    return KernelSpec("gaussian_rbf", {"sigma": sigma})


def _signed_power(x: np.ndarray, a: float) -> np.ndarray:
    # x^a taken as sign(x)|x|^a so negative samples stay in the domain
    return np.sign(x) * np.abs(x) ** a


def eval_kernel(k: KernelSpec, x, y) -> float:
    """k(x, y) for a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"kernel arguments must be vectors of equal length, got {x.shape} and {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel arguments must be finite")
    p = k.params
    if k.kind == "linear":
        return float(np.dot(x, y))
    if k.kind == "polynomial":
        return float((np.dot(x, y) + p["c"]) ** p["degree"])
    if k.kind == "tanh_nn":
        return float(np.tanh(np.dot(x, y) + p["b"]))
    if k.kind == "heavy_tailed_rbf":
        diff = _signed_power(x, p["a"]) - _signed_power(y, p["a"])
        return float(np.exp(-p["gamma"] * np.sqrt(np.dot(diff, diff)) ** p["b"]))
    sq = float(np.dot(x - y, x - y))
    return math.exp(-_gamma(k) * sq)


def _frames(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty (M, d) frame array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("frames contain non-finite values")
    return a


def _from_inner(k: KernelSpec, G: np.ndarray) -> np.ndarray:
    p = k.params
    if k.kind == "linear":
        return G
    if k.kind == "polynomial":
        return (G + p["c"]) ** p["degree"]
    return np.tanh(G + p["b"])


def _gamma(k: KernelSpec) -> float:
    # gaussian_rbf is evaluated as rbf with gamma = 1/(2 sigma^2)
    if k.kind == "gaussian_rbf":
        return 1.0 / (2.0 * k["sigma"] ** 2)
    return k["gamma"]


def _from_sqdist(k: KernelSpec, D2: np.ndarray) -> np.ndarray:
    if k.kind == "heavy_tailed_rbf":
        return np.exp(-k["gamma"] * np.sqrt(D2) ** k["b"])
    return np.exp(-_gamma(k) * D2)


def gram_matrix(k: KernelSpec, frames) -> np.ndarray:
    """K[i, j] = k(x_i, x_j) over the rows of ``frames``; exactly symmetric."""
    X = _frames(frames)
    if k.kind in ("linear", "polynomial", "tanh_nn"):
        G = X @ X.T
        return _from_inner(k, 0.5 * (G + G.T))
    if k.kind == "heavy_tailed_rbf":
        X = _signed_power(X, k["a"])
    D2 = squareform(pdist(X, "sqeuclidean")) if X.shape[0] > 1 else np.zeros((1, 1))
    return _from_sqdist(k, D2)


def cross_gram(k: KernelSpec, a, b) -> np.ndarray:
    """Kt[i, j] = k(a_i, b_j), shape (M_a, M_b)."""
    A, B = _frames(a), _frames(b)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"frame dimensions differ: {A.shape[1]} vs {B.shape[1]}")
    if k.kind in ("linear", "polynomial", "tanh_nn"):
        return _from_inner(k, A @ B.T)
    if k.kind == "heavy_tailed_rbf":
        A, B = _signed_power(A, k["a"]), _signed_power(B, k["a"])
    return _from_sqdist(k, cdist(A, B, "sqeuclidean"))


def center_gram(K) -> np.ndarray:
    """K_c = K - 1_M K - K 1_M + 1_M K 1_M with (1_M)_ij = 1/M."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {K.shape}")
    Kc = center_cross_gram(K)
    return 0.5 * (Kc + Kc.T)


def center_cross_gram(Kt) -> np.ndarray:
    """Centre a cross-Gram matrix with each side's own feature-space mean.

    Reduces to :func:`center_gram` when both sides are the same frame set.
    """
    Kt = np.asarray(Kt, dtype=np.float64)
    row = Kt.mean(axis=1, keepdims=True)
    col = Kt.mean(axis=0, keepdims=True)
    return Kt - row - col + Kt.mean()


def center_kernel_vector(kT) -> np.ndarray:
    """k_T - (1/M) 1 1^T k_T."""
    kT = np.asarray(kT, dtype=np.float64)
    if kT.ndim != 1 or kT.size == 0:
        raise ValueError("kernel vector must be non-empty and 1-D")
    return kT - kT.mean()
