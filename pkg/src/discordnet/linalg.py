"""Dense complex linear algebra kernel for small multi-qubit operators.

Everything here operates on plain ``numpy`` arrays of ``complex128``.  The
matrices involved never exceed 64x64, so no attempt is made at sparsity or
blocking; clarity and strict validation win over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Max absolute deviation of H - H^dag tolerated before an input is rejected
# as non-Hermitian.  Accounts for round-off accumulated by repeated
# kron/matmul chains.
HERMITICITY_TOL = 1e-10

# Eigenvalues below this magnitude are treated as exactly zero inside
# entropic matrix functions (0*log 0 := 0 continuity).
EIGENVALUE_FLOOR = 1e-12


class LinalgError(ValueError):
    """Raised on dimension mismatches or invalid (non-finite, non-Hermitian) input."""


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise LinalgError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise LinalgError("matrix has NaN/Inf entries")
    return m


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise LinalgError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return np.conjugate(np.transpose(as_matrix(a)))


def hermiticity_defect(h) -> float:
    h = as_matrix(h)
    return float(np.max(np.abs(h - h.conj().T)))


def require_hermitian(h, tol: float = HERMITICITY_TOL) -> np.ndarray:
    h = as_matrix(h)
    defect = hermiticity_defect(h)
    if defect > tol:
        raise LinalgError(f"matrix is not Hermitian (defect {defect:.3e} > {tol:.0e})")
    return h


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigensystem of a Hermitian matrix: ascending eigenvalues, unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def reconstruction_residual(self, h) -> float:
        h = as_matrix(h)
        scale = max(1.0, float(np.linalg.norm(h)))
        return float(np.linalg.norm(self.reconstruct() - h)) / scale

    def unitarity_residual(self) -> float:
        v = self.eigenvectors
        return float(np.linalg.norm(v.conj().T @ v - np.eye(v.shape[0])))


def eigh(h) -> EigenDecomposition:
    """Hermitian eigendecomposition (validated input, ascending eigenvalues)."""
    h = require_hermitian(h)
    vals, vecs = np.linalg.eigh(h)
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def mat_fn(h, f: Callable[[float], float], zero_policy: float = 0.0) -> np.ndarray:
    """Apply a real function to the spectrum of a Hermitian matrix.

    Eigenvalues with magnitude below ``EIGENVALUE_FLOOR`` are mapped to
    ``zero_policy`` instead of being fed to ``f``, which keeps entropic
    functions like ``x*log2(x)`` well defined at 0.
    """
    dec = eigh(h)
    mapped = np.array(
        [zero_policy if abs(x) < EIGENVALUE_FLOOR else f(x) for x in dec.eigenvalues],
        dtype=float,
    )
    return (dec.eigenvectors * mapped) @ dec.eigenvectors.conj().T
