# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for small dense complex matrices.

Cyclic Jacobi eigensolver for Hermitian input, one-sided Jacobi for singular
values, norms built on both, and Kraus-channel application.  Matrices larger
than ``JACOBI_MAX`` go to LAPACK.  ``_kernels_py`` mirrors every function
with numpy/LAPACK and is used when this extension is not built.
"""

import numpy as np

from libc.math cimport sqrt, fabs

BACKEND = "cython"

cdef int MAX_SWEEPS = 100
cdef double SKIP_REL = 1e-18


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef int _jacobi(double complex[:, ::1] a, double complex[:, ::1] v,
                 bint want_vectors) nogil:
    """In-place cyclic Jacobi; returns sweeps used or -1 without convergence."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotations
    cdef double fro2 = 0.0, floor2, ag, theta, t, c, s
    cdef double complex g, e, jpp, jpq, jqp, jqq, x, y

    for p in range(n):
        for q in range(n):
            fro2 += cabs2(a[p, q])
    floor2 = SKIP_REL * SKIP_REL * fro2

    for sweep in range(MAX_SWEEPS):
        rotations = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                if cabs2(g) <= floor2:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                rotations += 1
                ag = sqrt(cabs2(g))
                e = g / ag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * ag)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # J = diag-phase * real rotation acting on the (p, q) plane
                jpp = c
                jpq = s
                jqp = -s * e.conjugate()
                jqq = c * e.conjugate()
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = x * jpp + y * jqp
                    a[k, q] = x * jpq + y * jqq
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = jpp.conjugate() * x + jqp.conjugate() * y
                    a[q, k] = jpq.conjugate() * x + jqq.conjugate() * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = x * jpp + y * jqp
                        v[k, q] = x * jpq + y * jqq
        if rotations == 0:
            return sweep + 1
    return -1


# above this size LAPACK (through numpy) beats the O(n^3)-per-sweep Jacobi
# loops; see benchmarks/bench_kernels.py
JACOBI_MAX = 6
EIGH_MAX = 3  # eigenvectors make the Jacobi sweep costlier
cdef Py_ssize_t _JMAX = JACOBI_MAX
cdef Py_ssize_t _EMAX = EIGH_MAX


def _prepare(m):
    a = np.array(m, dtype=np.complex128, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    return a


cdef void _herm_part(const double complex[:, ::1] m, double complex[:, ::1] out) nogil:
    # Hermitian part; callers validate hermiticity beforehand
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            out[i, j] = 0.5 * (m[i, j] + m[j, i].conjugate())


cdef int _eigvals_into(double complex[:, ::1] a, double[::1] w) nogil:
    """Jacobi on ``a`` in place (destroyed); unsorted eigenvalues into ``w``."""
    cdef Py_ssize_t i
    cdef int sweeps = _jacobi(a, a, False)
    for i in range(a.shape[0]):
        w[i] = a[i, i].real
    return sweeps


cdef int _hestenes(double complex[:, ::1] a, double[::1] sv) nogil:
    """One-sided Jacobi: orthogonalize the columns of ``a`` in place.

    On return ``sv`` holds the column norms, i.e. the singular values
    (unsorted).  Returns sweeps used, or -1 without convergence.
    """
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotations
    cdef double al, be, gr, zeta, t, c, s, fro2 = 0.0
    cdef double complex g, ph, x, y
    for p in range(n):
        for q in range(m):
            fro2 += cabs2(a[p, q])
    for sweep in range(MAX_SWEEPS):
        rotations = 0
        for p in range(m - 1):
            for q in range(p + 1, m):
                al = 0.0
                be = 0.0
                g = 0.0
                for k in range(n):
                    al = al + cabs2(a[k, p])
                    be = be + cabs2(a[k, q])
                    g = g + a[k, p].conjugate() * a[k, q]
                gr = sqrt(cabs2(g))
                # relative test, plus an absolute floor for columns that
                # have collapsed to rounding noise (rank-deficient input)
                if gr <= 1e-15 * sqrt(al * be) or gr <= 1e-15 * fro2:
                    continue
                rotations += 1
                # rotate a_p and e^{-i arg g} a_q, whose inner product is real
                ph = g.conjugate() / gr
                zeta = (be - al) / (2.0 * gr)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + sqrt(zeta * zeta + 1.0))
                else:
                    t = -1.0 / (-zeta + sqrt(zeta * zeta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = c * t
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q] * ph
                    a[k, p] = c * x - s * y
                    a[k, q] = s * x + c * y
        if rotations == 0:
            for p in range(m):
                al = 0.0
                for k in range(n):
                    al = al + cabs2(a[k, p])
                sv[p] = sqrt(al)
            return sweep + 1
    return -1


def eigh(m):
    """Eigenvalues (ascending) and unitary eigenvector matrix of Hermitian ``m``."""
    src = _prepare(m)
    cdef Py_ssize_t n = src.shape[0]
    if n > _EMAX:
        return np.linalg.eigh(0.5 * (src + src.conj().T))
    a = np.empty((n, n), dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] av = a
    cdef double complex[:, ::1] vv = v
    cdef int sweeps
    _herm_part(src, av)
    with nogil:
        sweeps = _jacobi(av, vv, True)
    if sweeps < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.real(np.diagonal(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


cdef object _eigvals_unsorted(const double complex[:, ::1] m):
    cdef Py_ssize_t n = m.shape[0]
    a = np.empty((n, n), dtype=np.complex128)
    w = np.empty(n, dtype=np.float64)
    cdef double complex[:, ::1] av = a
    cdef double[::1] wv = w
    cdef int sweeps
    with nogil:
        _herm_part(m, av)
        sweeps = _eigvals_into(av, wv)
    if sweeps < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    return w


cdef object _singvals_unsorted(const double complex[:, ::1] m):
    cdef Py_ssize_t n = m.shape[0]
    a = np.array(m, dtype=np.complex128, order="C", copy=True)
    w = np.empty(n, dtype=np.float64)
    cdef double complex[:, ::1] av = a
    cdef double[::1] wv = w
    cdef int sweeps
    with nogil:
        sweeps = _hestenes(av, wv)
    if sweeps < 0:
        raise ArithmeticError("one-sided Jacobi did not converge")
    return w


def eigvalsh(m):
    a = _prepare(m)
    if a.shape[0] > _JMAX:
        return np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return np.sort(_eigvals_unsorted(a))


cdef bint _is_hermitian(const double complex[:, ::1] m) nogil:
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j
    cdef double scale = 0.0, dev = 0.0, d
    for i in range(n):
        for j in range(n):
            d = cabs2(m[i, j])
            if d > scale:
                scale = d
            d = cabs2(m[i, j] - m[j, i].conjugate())
            if d > dev:
                dev = d
    return dev <= 1e-28 * scale


def singular_values(m):
    """Singular values, descending (one-sided Jacobi)."""
    a = np.ascontiguousarray(m, dtype=np.complex128)
    if a.shape[0] > _JMAX:
        return np.linalg.svd(a, compute_uv=False)
    return np.sort(_singvals_unsorted(a))[::-1]


cdef double _sum_abs(double[::1] w) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        acc += fabs(w[i])
    return acc


cdef double _max_abs(double[::1] w) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        if fabs(w[i]) > acc:
            acc = fabs(w[i])
    return acc


def trace_norm(m):
    a = np.ascontiguousarray(m, dtype=np.complex128)
    if a.shape[0] > _JMAX:
        if _is_hermitian(a):
            return float(np.abs(np.linalg.eigvalsh(a)).sum())
        return float(np.linalg.svd(a, compute_uv=False).sum())
    if _is_hermitian(a):
        return _sum_abs(_eigvals_unsorted(a))
    return _sum_abs(_singvals_unsorted(a))


def op_norm(m):
    a = np.ascontiguousarray(m, dtype=np.complex128)
    if a.shape[0] > _JMAX:
        if _is_hermitian(a):
            return float(np.abs(np.linalg.eigvalsh(a)).max())
        return float(np.linalg.svd(a, compute_uv=False)[0])
    if _is_hermitian(a):
        return _max_abs(_eigvals_unsorted(a))
    return _max_abs(_singvals_unsorted(a))


def apply_kraus(kraus, rho):
    """sum_k K rho K^dag for a stack of Kraus operators of shape (r, d, d)."""
    cdef const double complex[:, :, ::1] ks = np.ascontiguousarray(kraus, dtype=np.complex128)
    cdef const double complex[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t nk = ks.shape[0], d = ks.shape[1]
    out = np.zeros((d, d), dtype=np.complex128)
    tmp = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex[:, ::1] w = tmp
    cdef Py_ssize_t k, i, j, l
    cdef double complex acc
    with nogil:
        for k in range(nk):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for l in range(d):
                        acc = acc + ks[k, i, l] * r[l, j]
                    w[i, j] = acc
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for l in range(d):
                        acc = acc + w[i, l] * ks[k, j, l].conjugate()
                    o[i, j] = o[i, j] + acc
    return out


def invasiveness_pure(psi, kraus):
    """Trace norm of Lambda(|psi><psi|) - |psi><psi| for a normalized vector."""
    cdef const double complex[:, :, ::1] ks = np.ascontiguousarray(kraus, dtype=np.complex128)
    cdef const double complex[::1] v = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef Py_ssize_t nk = ks.shape[0], d = ks.shape[1]
    diff = np.empty((d, d), dtype=np.complex128)
    kv = np.empty(d, dtype=np.complex128)
    cdef double complex[:, ::1] o = diff
    cdef double complex[::1] u = kv
    cdef Py_ssize_t k, i, j, l
    cdef double complex acc
    with nogil:
        for i in range(d):
            for j in range(d):
                o[i, j] = -v[i] * v[j].conjugate()
        for k in range(nk):
            for i in range(d):
                acc = 0.0
                for l in range(d):
                    acc = acc + ks[k, i, l] * v[l]
                u[i] = acc
            for i in range(d):
                for j in range(d):
                    o[i, j] = o[i, j] + u[i] * u[j].conjugate()
    if d > _JMAX:
        return float(np.abs(np.linalg.eigvalsh(diff)).sum())
    wv_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] wv = wv_arr
    cdef int sweeps
    with nogil:
        sweeps = _eigvals_into(o, wv)
    if sweeps < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    return _sum_abs(wv)
