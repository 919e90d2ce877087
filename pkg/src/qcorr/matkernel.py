"""Dense complex-matrix primitives: Hermitian eigendecomposition and norms.

The heavy lifting is done by ``_kernels`` (Cython, cyclic Jacobi) when it is
built, otherwise by ``_kernels_py`` (numpy/LAPACK).  Set ``QCORR_BACKEND=python``
to force the fallback.
"""

from __future__ import annotations

import os
from typing import NamedTuple

import numpy as np

from .errors import NotHermitian, NumericalFailure
from .tolerance import ToleranceProfile, resolve

if os.environ.get("QCORR_BACKEND", "").lower() == "python":
    from . import _kernels_py as _k
else:
    try:
        from . import _kernels as _k
    except ImportError:  # extension not built
        from . import _kernels_py as _k

BACKEND: str = _k.BACKEND


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate a square, finite, complex matrix and return it as complex128."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.transpose(m))


def hermiticity_defect(m) -> float:
    a = as_matrix(m)
    return op_norm(a - dagger(a))


def eig_hermitian(m, herm_tol: float | None = None,
                  tol: ToleranceProfile | None = None) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Inputs within ``herm_tol`` (operator norm of ``M - M^dag``) of Hermitian
    are symmetrized to ``(M + M^dag)/2``; anything further off raises.
    """
    a = as_matrix(m)
    limit = resolve(tol).herm_tol if herm_tol is None else herm_tol
    defect = np.max(np.abs(a - dagger(a)))
    # entrywise max bounds the operator norm from below; only pay for the
    # exact check when the cheap one is inconclusive
    if defect > limit or (defect > limit / a.shape[0] and hermiticity_defect(a) > limit):
        raise NotHermitian(f"matrix deviates from Hermitian by {defect:.3g} > {limit:.3g}")
    try:
        w, v = _k.eigh(a)
    except ArithmeticError as exc:
        raise NumericalFailure(str(exc)) from exc
    return SpectralDecomposition(np.asarray(w, dtype=float), np.asarray(v))


def eigvalsh(m) -> np.ndarray:
    try:
        return np.asarray(_k.eigvalsh(as_matrix(m)), dtype=float)
    except ArithmeticError as exc:
        raise NumericalFailure(str(exc)) from exc


def trace_norm(m) -> float:
    """Sum of singular values; sum of |eigenvalues| for Hermitian input."""
    try:
        return _k.trace_norm(as_matrix(m))
    except ArithmeticError as exc:
        raise NumericalFailure(str(exc)) from exc


def op_norm(m) -> float:
    """Largest singular value."""
    try:
        return _k.op_norm(as_matrix(m))
    except ArithmeticError as exc:
        raise NumericalFailure(str(exc)) from exc


def singular_values(m) -> np.ndarray:
    try:
        return np.asarray(_k.singular_values(as_matrix(m)), dtype=float)
    except ArithmeticError as exc:
        raise NumericalFailure(str(exc)) from exc


def sign_operator(m, cutoff: float = 0.0) -> np.ndarray:
    """sign(M) for Hermitian M; eigenvalues with |lambda| <= cutoff map to 0."""
    w, u = eig_hermitian(m)
    s = np.where(w > cutoff, 1.0, np.where(w < -cutoff, -1.0, 0.0))
    return (u * s) @ dagger(u)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def ordered_product(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """alpha*AB + (1-alpha)*BA."""
    return alpha * (a @ b) + (1.0 - alpha) * (b @ a)


def apply_kraus(kraus: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.asarray(_k.apply_kraus(kraus, rho))


def invasiveness_pure(psi: np.ndarray, kraus: np.ndarray) -> float:
    try:
        return _k.invasiveness_pure(psi, kraus)
    except ArithmeticError as exc:
        raise NumericalFailure(str(exc)) from exc
