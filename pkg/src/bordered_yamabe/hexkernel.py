"""Trigonometry of a single right-angled hyperbolic hexagon.

A hexagon is described by the lengths ``l_ij, l_jk, l_ki`` of three pairwise
non-adjacent sides. The B-arc ``theta_i`` is the side opposite ``l_jk``
(likewise ``theta_j`` opposite ``l_ki`` and ``theta_k`` opposite ``l_ij``).

Conformal factors act through ``cosh(l/2) = exp(w_a + w_b) cosh(l0/2)``. We
work internally with the edge *margin* ``m = w_a + w_b + ln cosh(l0/2)``,
for which ``cosh(l/2) = exp(m)`` and ``cosh l - 1 = 2 expm1(2m)``; both stay
accurate as ``m -> 0+`` where the naive forms cancel.
"""
from dataclasses import dataclass
from functools import cached_property
import math
import sys

import numpy as np

from . import kernel
from .errors import AdmissibilityError, DomainError, RangeError
from .kernel import L_MAX, MARGIN_MAX

_EPS = sys.float_info.epsilon
_LN2 = math.log(2.0)


def _acosh1p(u):
    if u > 1e300:
        return math.log(u) + _LN2
    return math.log1p(u + math.sqrt(u) * math.sqrt(u + 2.0))


def stable_acosh(x):
    """arccosh(x) with full relative accuracy as ``x -> 1+``.

    Values within ``4 * eps`` below 1 are clamped to 1; smaller ones raise
    :class:`DomainError`.
    """
    x = float(x)
    if math.isnan(x) or x < 1.0 - 4.0 * _EPS:
        raise DomainError(f"arccosh argument {x!r} < 1")
    if x <= 1.0:
        return 0.0
    return _acosh1p(x - 1.0)


def log_cosh(x):
    """ln cosh(x), accurate for small and overflow-free for large ``|x|``."""
    x = abs(float(x))
    if x < 1.0:
        return math.log1p(2.0 * math.sinh(0.5 * x) ** 2)
    return x + math.log1p(math.exp(-2.0 * x)) - _LN2


def edge_margin(w_a, w_b, l0):
    return w_a + w_b + log_cosh(0.5 * l0)


def conformal_edge_length(w_a, w_b, l0):
    """Length of an edge with reference length ``l0`` after rescaling by ``w``."""
    _check_length(l0, "l0")
    m = edge_margin(w_a, w_b, l0)
    if not m > 0.0:
        raise AdmissibilityError(
            f"w_a + w_b = {w_a + w_b!r} is not > -ln cosh(l0/2) (margin {m!r})",
            margin=m)
    if m > MARGIN_MAX:
        raise RangeError(f"conformal length exceeds L_MAX={L_MAX} (margin {m!r})")
    return 2.0 * _acosh1p(math.expm1(m))


def _check_length(value, name):
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name}={value!r} must be positive and finite")
    if value > L_MAX:
        raise RangeError(f"{name}={value!r} exceeds L_MAX={L_MAX}")


@dataclass(frozen=True)
class HexSides:
    l_ij: float
    l_jk: float
    l_ki: float

    def __post_init__(self):
        for name in ("l_ij", "l_jk", "l_ki"):
            _check_length(getattr(self, name), name)


@dataclass(frozen=True)
class HexGeometry:
    sides: HexSides
    theta_i: float
    theta_j: float
    theta_k: float

    @cached_property
    def A(self):
        """Normalizer ``sinh(theta_i) sinh(l_ki) sinh(l_ij)`` of corner ``i``."""
        s = self.sides
        a = math.sinh(self.theta_i) * math.sinh(s.l_ki) * math.sinh(s.l_ij)
        if not math.isfinite(a):
            raise RangeError("hexagon normalizer A overflows")
        return a

    @property
    def thetas(self):
        return (self.theta_i, self.theta_j, self.theta_k)


def _barc(opp, adj1, adj2):
    # cosh(theta) - 1, written so no subtraction of nearly equal terms occurs
    u = (math.cosh(opp) + math.cosh(adj1 - adj2)) / math.sinh(adj1) / math.sinh(adj2)
    if not math.isfinite(u):
        raise RangeError("cosine-law argument overflows")
    return _acosh1p(u)


def barc_lengths(sides):
    """B-arc lengths of the hexagon with the given alternate side lengths."""
    s = sides
    return HexGeometry(
        sides=s,
        theta_i=_barc(s.l_jk, s.l_ki, s.l_ij),
        theta_j=_barc(s.l_ki, s.l_ij, s.l_jk),
        theta_k=_barc(s.l_ij, s.l_jk, s.l_ki),
    )


def face_margins(w_i, w_j, w_k, l0_sides):
    """Margins of edges ``(jk, ki, ij)``, the order the batch kernel expects."""
    return np.array([
        edge_margin(w_j, w_k, l0_sides.l_jk),
        edge_margin(w_k, w_i, l0_sides.l_ki),
        edge_margin(w_i, w_j, l0_sides.l_ij),
    ])


def _admissible_face(w_i, w_j, w_k, l0_sides):
    m = face_margins(w_i, w_j, w_k, l0_sides)
    for name, value in zip(("jk", "ki", "ij"), m):
        if not value > 0.0:
            raise AdmissibilityError(
                f"factor inadmissible on edge {name} (margin {value!r})", margin=value)
    return m


def conformal_barc_lengths(w_i, w_j, w_k, l0_sides):
    """``(theta_i, theta_j, theta_k)`` of the hexagon after a conformal change."""
    m = _admissible_face(w_i, w_j, w_k, l0_sides)
    return tuple(kernel.face_thetas(m)[0])


def corner_jacobian(w_i, w_j, w_k, l0_sides):
    """Analytic ``d theta_r / d w_s`` for ``r, s`` in ``(i, j, k)``.

    Each row ``r`` is scaled by that corner's own normalizer
    ``sinh(theta_r) sinh(l) sinh(l')`` over its two adjacent sides.
    """
    m = _admissible_face(w_i, w_j, w_k, l0_sides)
    _, jac = kernel.face_thetas_jac(m)
    return jac[0]


def sine_law_residual(geom):
    """Largest pairwise relative spread of ``sinh(theta) / sinh(opposite side)``."""
    s = geom.sides
    ratios = (
        math.sinh(geom.theta_i) / math.sinh(s.l_jk),
        math.sinh(geom.theta_j) / math.sinh(s.l_ki),
        math.sinh(geom.theta_k) / math.sinh(s.l_ij),
    )
    worst = 0.0
    for a in range(3):
        for b in range(a + 1, 3):
            ra, rb = ratios[a], ratios[b]
            worst = max(worst, abs(ra - rb) / max(abs(ra), abs(rb)))
    return worst
