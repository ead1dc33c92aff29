"""Polynomial and Gaussian kernels in the scaled convention used throughout.

Both polynomial families carry an explicit scale factor ``theta``: the
homogeneous kernel of degree ``d`` is ``theta^d * <x, y>^d`` and the
inhomogeneous one is ``(theta * <x, y> + 1)^d``.  Dividing by ``theta^d``
recovers the textbook polynomial kernel.  The scaled form is what makes the
entrywise power identity ``k1 ** d == k_d`` exact for the inhomogeneous
family and gives the degree-stepping algorithms their geometrically decaying
thresholds.

The Gaussian kernel is ``exp(-||x - y||^2 / (2 * width^2))``; it has no
finite monomial expansion and is only usable on the implicit (matrix) side.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_THETA = 1.0 / np.sqrt(2.0)


class KernelFamily(Enum):
    HOMOGENEOUS_POLY = "homogeneous"
    INHOMOGENEOUS_POLY = "inhomogeneous"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    ``theta`` must lie in ``(0, 1]``; values below 1 make repeated degree
    thresholds decay, while ``theta = 1`` recovers the unscaled kernel and is
    admitted for exact-arithmetic cross-checks.  ``degree`` applies to the
    polynomial families, ``width`` only to the Gaussian.
    """

    family: KernelFamily
    degree: int = 1
    theta: float = DEFAULT_THETA
    width: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.family, KernelFamily):
            raise ValueError(f"unknown kernel family: {self.family!r}")
        if not (0.0 < self.theta <= 1.0):
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if self.family is KernelFamily.GAUSSIAN:
            if self.width is None or not (self.width > 0.0):
                raise ValueError("Gaussian kernel requires width > 0")
        else:
            if not (isinstance(self.degree, (int, np.integer)) and self.degree >= 0):
                raise ValueError(f"polynomial degree must be an integer >= 0, got {self.degree}")

    @property
    def is_polynomial(self) -> bool:
        return self.family is not KernelFamily.GAUSSIAN

    @classmethod
    def homogeneous(cls, degree: int, theta: float = DEFAULT_THETA) -> "KernelSpec":
        return cls(KernelFamily.HOMOGENEOUS_POLY, degree=degree, theta=theta)

    @classmethod
    def inhomogeneous(cls, degree: int, theta: float = DEFAULT_THETA) -> "KernelSpec":
        return cls(KernelFamily.INHOMOGENEOUS_POLY, degree=degree, theta=theta)

    @classmethod
    def gaussian(cls, width: float, theta: float = DEFAULT_THETA) -> "KernelSpec":
        return cls(KernelFamily.GAUSSIAN, degree=1, theta=theta, width=width)


def as_point_matrix(X, *, name: str = "X", allow_empty: bool = False) -> np.ndarray:
    """Validate and return a 2-D float64 point matrix (rows are points)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array of points, got ndim={X.ndim}")
    if X.shape[1] < 1:
        raise ValueError(f"{name} must have at least one coordinate column")
    if X.shape[0] < 1 and not allow_empty:
        raise ValueError(f"{name} must contain at least one point")
    if X.size and not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def as_point(x, *, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-D point, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def kernel_matrix(spec: KernelSpec, X, Y) -> np.ndarray:
    """Kernel matrix with entry ``(i, j) = k(x_i, y_j)``.

    ``X`` and ``Y`` must share their ambient dimension.  Zero-row inputs are
    accepted (the result then has zero rows), which the bulk evaluators rely
    on.
    """
    X = as_point_matrix(X, name="X", allow_empty=True)
    Y = as_point_matrix(Y, name="Y", allow_empty=True)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(
            f"dimension mismatch: X has {X.shape[1]} columns, Y has {Y.shape[1]}"
        )
    if spec.family is KernelFamily.GAUSSIAN:
        sq = _squared_distances(X, Y)
        return np.exp(-sq / (2.0 * spec.width**2))
    G = X @ Y.T
    if spec.family is KernelFamily.HOMOGENEOUS_POLY:
        return (spec.theta * G) ** spec.degree
    return (spec.theta * G + 1.0) ** spec.degree


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of points."""
    x = as_point(x, name="x")
    y = as_point(y, name="y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: x has {x.shape[0]} entries, y has {y.shape[0]}")
    return float(kernel_matrix(spec, x[np.newaxis, :], y[np.newaxis, :])[0, 0])


def hadamard_step(K_prev: np.ndarray, K1: np.ndarray) -> np.ndarray:
    """Entrywise product; one degree-raising step of the powering recursion."""
    K_prev = np.asarray(K_prev, dtype=float)
    K1 = np.asarray(K1, dtype=float)
    if K_prev.shape != K1.shape:
        raise ValueError(f"shape mismatch: {K_prev.shape} vs {K1.shape}")
    return K_prev * K1


def _squared_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    x2 = np.sum(X * X, axis=1)[:, np.newaxis]
    y2 = np.sum(Y * Y, axis=1)[np.newaxis, :]
    sq = x2 + y2 - 2.0 * (X @ Y.T)
    # rounding can push tiny true distances below zero
    return np.maximum(sq, 0.0)
