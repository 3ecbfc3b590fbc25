"""NumPy implementation of the batched hexagon kernel.

Mirrors ``_hexcore.pyx`` exactly; used when the compiled extension is not
importable, and as the reference side of the backend benchmark.

Input is an ``(F, 3)`` array of admissibility margins, ``margins[f, t]``
belonging to the edge opposite corner ``t`` of face ``f``. The margin ``m``
of an edge determines its length through ``cosh(l/2) = exp(m)``.
"""
import numpy as np

_LARGE_U = 1e300
_LN2 = 0.6931471805599453


def _acosh1p(u):
    # arccosh(1 + u) without cancellation near u = 0
    big = u > _LARGE_U
    safe = np.where(big, 1.0, u)
    small = np.log1p(safe + np.sqrt(safe) * np.sqrt(safe + 2.0))
    return np.where(big, np.log(np.where(big, u, 1.0)) + _LN2, small)


def _edge_terms(margins):
    e2 = np.exp(2.0 * margins)
    chm1 = 2.0 * np.expm1(2.0 * margins)
    ch = chm1 + 1.0
    sh = np.sqrt(chm1) * np.sqrt(2.0 * e2)
    length = 2.0 * _acosh1p(np.expm1(margins))
    return ch, chm1, sh, length


def edge_lengths(margins):
    margins = np.asarray(margins, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return 2.0 * _acosh1p(np.expm1(margins))


def _thetas(ch, sh, length):
    th = np.empty_like(ch)
    u_all = np.empty_like(ch)
    for t in range(3):
        a, b = (t + 1) % 3, (t + 2) % 3
        num = ch[:, t] + np.cosh(length[:, a] - length[:, b])
        u = num / sh[:, a] / sh[:, b]
        u_all[:, t] = u
        th[:, t] = _acosh1p(u)
    return th, u_all


def face_thetas(margins):
    margins = np.ascontiguousarray(margins, dtype=float).reshape(-1, 3)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ch, _, sh, length = _edge_terms(margins)
        th, _ = _thetas(ch, sh, length)
    return th


def face_thetas_jac(margins):
    margins = np.ascontiguousarray(margins, dtype=float).reshape(-1, 3)
    nf = margins.shape[0]
    jac = np.empty((nf, 3, 3))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ch, chm1, sh, length = _edge_terms(margins)
        th, u = _thetas(ch, sh, length)
        sinh_th = np.sqrt(u) * np.sqrt(u + 2.0)
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            # edge jk is opposite i, ki opposite j, ij opposite k
            c_jk, c_ki, c_ij = ch[:, i], ch[:, j], ch[:, k]
            d_ki, d_ij = chm1[:, j], chm1[:, k]
            inv_a = 2.0 / sinh_th[:, i] / sh[:, j] / sh[:, k]
            jac[:, i, j] = -inv_a * (c_jk + c_ki - c_ij + 1.0) / d_ij
            jac[:, i, k] = -inv_a * (c_jk + c_ij - c_ki + 1.0) / d_ki
            # c_jk * c_ki / d_ki grouped so the product cannot overflow
            jac[:, i, i] = -inv_a * (
                c_ij / d_ki + c_jk * (c_ki / d_ki)
                + c_ki / d_ij + c_jk * (c_ij / d_ij)
            )
    return th, jac
