"""Thresholded singular value decomposition.

The single numerical primitive both feature-extraction algorithms consume:
a full dense SVD split at a threshold ``epsilon`` into a retained part
(singular values ``>= epsilon``) and a rejected part (``< epsilon``).  Right
singular vectors are stored as rows.  The underlying factorization is
delegated to LAPACK via numpy; this module only fixes signs and splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThresholdedSvd:
    """Split SVD ``K = U diag(S) V + U_perp diag(S_perp) V_perp``.

    ``S`` holds the values ``>= epsilon`` and ``S_perp`` the rest, each in
    descending order; their concatenation is the full spectrum of ``K``.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    U_perp: np.ndarray
    S_perp: np.ndarray
    V_perp: np.ndarray
    epsilon: float

    @property
    def rank(self) -> int:
        return self.S.shape[0]

    @property
    def spectrum(self) -> np.ndarray:
        return np.concatenate([self.S, self.S_perp])


def thresholded_svd(K, epsilon: float) -> ThresholdedSvd:
    """Compute the SVD of ``K`` split at ``epsilon``.

    Ties at exactly ``epsilon`` land on the retained side.  For
    reproducibility across runs and platforms, each right singular vector is
    flipped so that its largest-magnitude entry is positive (the matching
    left vector is flipped with it).
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2:
        raise ValueError(f"K must be a matrix, got ndim={K.ndim}")
    if not np.all(np.isfinite(K)):
        raise ValueError("K contains non-finite entries")
    if not (epsilon >= 0.0):
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")

    U, s, Vh = np.linalg.svd(K, full_matrices=False)
    if s.size:
        lead = np.argmax(np.abs(Vh), axis=1)
        signs = np.sign(Vh[np.arange(Vh.shape[0]), lead])
        signs[signs == 0.0] = 1.0
        Vh = Vh * signs[:, np.newaxis]
        U = U * signs[np.newaxis, :]

    r = int(np.sum(s >= epsilon))
    return ThresholdedSvd(
        U=U[:, :r],
        S=s[:r],
        V=Vh[:r],
        U_perp=U[:, r:],
        S_perp=s[r:],
        V_perp=Vh[r:],
        epsilon=float(epsilon),
    )


def low_rank_project(t: ThresholdedSvd) -> np.ndarray:
    """Reassemble the retained part ``U diag(S) V``."""
    return (t.U * t.S) @ t.V
