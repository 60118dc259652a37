"""Dense complex linear algebra for small (dimension <= 256) spin spaces.

Thin wrappers around numpy's LAPACK bindings that add the conventions the
rest of the package relies on: Hermitian inputs are validated before use,
eigenvalues come back ascending with orthonormal eigenvectors, and unitary
propagators are built from the spectral decomposition so they stay unitary
to near machine precision.  All functions are pure and never mutate their
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian

#: Absolute scale for the Hermitian symmetry check, relative to max(1, |A|_max).
HERMITIAN_ATOL = 1e-10

#: Size guard: spaces handled here are tiny, dense storage is deliberate.
MAX_DIMENSION = 256


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIMENSION:
        raise DimensionMismatch(f"dimension {m.shape[0]} exceeds guard {MAX_DIMENSION}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def max_abs(a: np.ndarray) -> float:
    """Largest entry magnitude (max norm)."""
    a = np.asarray(a)
    return 0.0 if a.size == 0 else float(np.max(np.abs(a)))


def hermiticity_defect(a) -> float:
    """max |A - A^dagger|, the distance from Hermitian symmetry."""
    m = as_complex_matrix(a)
    return max_abs(m - dagger(m))


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    """True if max|A - A^dagger| < atol * max(1, |A|_max)."""
    m = as_complex_matrix(a)
    return hermiticity_defect(m) < atol * max(1.0, max_abs(m))


def require_hermitian(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return the input as a complex array, raising NotHermitian otherwise."""
    m = as_complex_matrix(a)
    defect = hermiticity_defect(m)
    if defect >= atol * max(1.0, max_abs(m)):
        raise NotHermitian(f"symmetry defect {defect:.3e} exceeds tolerance")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class HermitianEig:
    """Spectral decomposition A = V diag(w) V^dagger.

    ``eigenvalues`` are real and ascending; ``eigenvectors`` holds the
    orthonormal eigenvectors as columns.  Inside a degenerate cluster the
    column basis is arbitrary; compare projectors, not raw columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """V diag(w) V^dagger, for round-trip checks."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def eig_hermitian(a, atol: float = HERMITIAN_ATOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix.

    Raises:
        NotHermitian: if the symmetry check fails at ``atol``.
    """
    m = require_hermitian(a, atol)
    w, v = np.linalg.eigh(m)
    return HermitianEig(eigenvalues=w, eigenvectors=v)


def propagator(h, t: float, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Unitary exp(-i h t) of a Hermitian generator, via eigendecomposition.

    Args:
        h: Hermitian matrix.
        t: finite real evolution time.

    Raises:
        NotHermitian: if ``h`` fails the symmetry check.
        ValueError: if ``t`` is not a finite real number.
    """
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("propagation time must be finite")
    eig = eig_hermitian(h, atol)
    phases = np.exp(-1j * eig.eigenvalues * t)
    v = eig.eigenvectors
    return (v * phases) @ dagger(v)
