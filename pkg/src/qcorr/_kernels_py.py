"""numpy/LAPACK fallback for the compiled kernels in ``_kernels.pyx``.

Same function names and return conventions; selected at import time when
the extension is unavailable or ``QCORR_BACKEND=python`` is set.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _hermitian_part(m):
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    return 0.5 * (a + a.conj().T)


def eigh(m):
    try:
        w, v = np.linalg.eigh(_hermitian_part(m))
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(str(exc)) from exc
    return w, v


def eigvalsh(m):
    try:
        return np.linalg.eigvalsh(_hermitian_part(m))
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(str(exc)) from exc


def _is_hermitian(a) -> bool:
    scale = np.max(np.abs(a)) if a.size else 0.0
    return bool(np.max(np.abs(a - a.conj().T)) <= 1e-14 * scale)


def singular_values(m):
    try:
        return np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(str(exc)) from exc


def trace_norm(m):
    a = np.asarray(m, dtype=np.complex128)
    if _is_hermitian(a):
        return float(np.abs(eigvalsh(a)).sum())
    return float(singular_values(a).sum())


def op_norm(m):
    a = np.asarray(m, dtype=np.complex128)
    if _is_hermitian(a):
        return float(np.max(np.abs(eigvalsh(a))))
    return float(singular_values(a)[0])


def apply_kraus(kraus, rho):
    ks = np.asarray(kraus, dtype=np.complex128)
    return np.einsum("kij,jl,kml->im", ks, np.asarray(rho, dtype=np.complex128), ks.conj())


def invasiveness_pure(psi, kraus):
    v = np.asarray(psi, dtype=np.complex128)
    ks = np.asarray(kraus, dtype=np.complex128)
    kv = ks @ v
    diff = np.einsum("ki,kj->ij", kv, kv.conj()) - np.outer(v, v.conj())
    return float(np.abs(eigvalsh(diff)).sum())
