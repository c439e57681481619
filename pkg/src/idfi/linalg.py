"""Small dense symmetric-matrix utilities.

Every PSD test and matrix function in the package goes through this module so
that a single eigenvalue-clipping convention applies everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import PSD_EIG_CLIP
from .errors import NumericsError, ValidationError


def as_symmetric(a: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Return the symmetrized copy of ``a``, rejecting gross asymmetry."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > tol * scale:
        raise ValidationError(f"matrix asymmetry {asym:.3e} exceeds tolerance {tol:.1e}")
    return 0.5 * (a + a.T)


def sym_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix (ascending eigenvalues)."""
    a = 0.5 * (np.asarray(a, dtype=float) + np.asarray(a, dtype=float).T)
    w, v = np.linalg.eigh(a)
    return w, v


def apply_spectral(a: np.ndarray, fn) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix through its spectrum."""
    w, v = sym_eig(a)
    return (v * fn(w)) @ v.T


def is_psd(a: np.ndarray, clip: float = PSD_EIG_CLIP) -> bool:
    w, _ = sym_eig(a)
    return bool(np.min(w) >= -clip)


def psd_leq(a: np.ndarray, b: np.ndarray, clip: float = PSD_EIG_CLIP) -> bool:
    """Loewner-order test a <= b with the shared eigenvalue clip."""
    return is_psd(np.asarray(b) - np.asarray(a), clip=clip)


def logdet_pd(a: np.ndarray) -> float:
    """log det of a positive-definite symmetric matrix."""
    w, _ = sym_eig(a)
    if np.min(w) <= 0.0:
        raise NumericsError(f"log det of a non-PD matrix (min eigenvalue {np.min(w):.3e})")
    return float(np.sum(np.log(w)))


def sqrt_psd(a: np.ndarray, clip: float = PSD_EIG_CLIP) -> np.ndarray:
    w, v = sym_eig(a)
    if np.min(w) < -clip:
        raise NumericsError(f"matrix square root of a non-PSD matrix (min eigenvalue {np.min(w):.3e})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


@dataclass(frozen=True)
class SymMatrix:
    """Immutable symmetric matrix with cached spectral data.

    Construction symmetrizes (and validates) the input once; downstream code
    can then rely on exact symmetry.
    """

    array: np.ndarray
    _eig: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = as_symmetric(self.array)
        a.setflags(write=False)
        object.__setattr__(self, "array", a)
        w, v = np.linalg.eigh(a)
        object.__setattr__(self, "_eig", (w, v))

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.array))

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eig[0]

    def logdet(self) -> float:
        w = self.eigenvalues
        if np.min(w) <= 0.0:
            raise NumericsError(f"log det of a non-PD matrix (min eigenvalue {np.min(w):.3e})")
        return float(np.sum(np.log(w)))

    def is_psd(self, clip: float = PSD_EIG_CLIP) -> bool:
        return bool(np.min(self.eigenvalues) >= -clip)

    def is_pd(self) -> bool:
        return bool(np.min(self.eigenvalues) > 0.0)

    def leq(self, other: "SymMatrix", clip: float = PSD_EIG_CLIP) -> bool:
        return psd_leq(self.array, other.array, clip=clip)

    def inv(self) -> "SymMatrix":
        w, v = self._eig
        if np.min(np.abs(w)) == 0.0:
            raise NumericsError("inverse of a singular symmetric matrix")
        return SymMatrix((v / w) @ v.T)


def random_psd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((n, n))
    return scale * (g @ g.T) / n + 1e-3 * np.eye(n)


def random_well_conditioned(rng: np.random.Generator, n: int, cond_max: float = 10.0) -> np.ndarray:
    """Random dense invertible matrix with condition number below ``cond_max``."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    smin = 1.0
    smax = min(cond_max, 1.0 + rng.uniform(0.5, cond_max - 1.0))
    s = np.exp(rng.uniform(np.log(smin), np.log(smax), size=n))
    return (q1 * s) @ q2
