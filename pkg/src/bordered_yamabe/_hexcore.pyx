# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched hexagon kernel; same contract as ``_hexcore_py``."""
import numpy as np
from libc.math cimport expm1, log, log1p, sqrt, cosh

cdef double _LARGE_U = 1e300
cdef double _LN2 = 0.6931471805599453


cdef inline double _acosh1p_s(double u, double* s) nogil:
    # acosh(1 + u); leaves sinh of the result in s
    s[0] = sqrt(u) * sqrt(u + 2.0)
    if u > _LARGE_U:
        return log(u) + _LN2
    return log1p(u + s[0])


cdef inline double _acosh1p(double u) nogil:
    cdef double s
    return _acosh1p_s(u, &s)


cdef inline void _edge(double m, double* ch, double* chm1, double* sh,
                       double* length) nogil:
    cdef double q = expm1(m)
    cdef double e2 = q * (q + 2.0)  # expm1(2 m), no cancellation for m > 0
    cdef double d = 2.0 * e2
    chm1[0] = d
    ch[0] = d + 1.0
    sh[0] = sqrt(d) * sqrt(2.0 * (e2 + 1.0))
    length[0] = 2.0 * _acosh1p(q)


def edge_lengths(margins):
    cdef double[::1] m = np.ascontiguousarray(margins, dtype=float).ravel()
    out = np.empty(m.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t e
    with nogil:
        for e in range(m.shape[0]):
            o[e] = 2.0 * _acosh1p(expm1(m[e]))
    return out.reshape(np.shape(margins))


cdef void _face(const double* m, double* th, double* jac, bint want_jac) nogil:
    cdef double ch[3]
    cdef double chm1[3]
    cdef double sh[3]
    cdef double ln[3]
    cdef double u[3]
    cdef double sn[3]
    cdef int t, i, j, k
    cdef double c_jk, c_ki, c_ij, d_ki, d_ij, inv_a
    for t in range(3):
        _edge(m[t], &ch[t], &chm1[t], &sh[t], &ln[t])
    for t in range(3):
        j = (t + 1) % 3
        k = (t + 2) % 3
        u[t] = (ch[t] + cosh(ln[j] - ln[k])) / sh[j] / sh[k]
        th[t] = _acosh1p_s(u[t], &sn[t])
    if not want_jac:
        return
    for i in range(3):
        j = (i + 1) % 3
        k = (i + 2) % 3
        c_jk = ch[i]
        c_ki = ch[j]
        c_ij = ch[k]
        d_ki = chm1[j]
        d_ij = chm1[k]
        inv_a = 2.0 / sn[i] / sh[j] / sh[k]
        jac[3 * i + j] = -inv_a * (c_jk + c_ki - c_ij + 1.0) / d_ij
        jac[3 * i + k] = -inv_a * (c_jk + c_ij - c_ki + 1.0) / d_ki
        jac[3 * i + i] = -inv_a * (c_ij / d_ki + c_jk * (c_ki / d_ki)
                                   + c_ki / d_ij + c_jk * (c_ij / d_ij))


def face_thetas(margins):
    cdef double[:, ::1] m = np.ascontiguousarray(margins, dtype=float).reshape(-1, 3)
    cdef Py_ssize_t nf = m.shape[0], f
    out = np.empty((nf, 3))
    cdef double[:, ::1] th = out
    cdef double dummy[9]
    with nogil:
        for f in range(nf):
            _face(&m[f, 0], &th[f, 0], dummy, False)
    return out


def face_thetas_jac(margins):
    cdef double[:, ::1] m = np.ascontiguousarray(margins, dtype=float).reshape(-1, 3)
    cdef Py_ssize_t nf = m.shape[0], f
    out = np.empty((nf, 3))
    jout = np.empty((nf, 3, 3))
    cdef double[:, ::1] th = out
    cdef double[:, :, ::1] jac = jout
    with nogil:
        for f in range(nf):
            _face(&m[f, 0], &th[f, 0], &jac[f, 0, 0], True)
    return out, jout
