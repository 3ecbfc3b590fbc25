"""Backend selection for the batched per-face hexagon kernel.

The compiled extension ``_hexcore`` is used when it imports; otherwise the
NumPy module ``_hexcore_py`` is used. :func:`set_backend` switches at run
time (tests and the benchmark use it to compare both).

All entry points take an ``(F, 3)`` array of per-face edge margins (column
``t`` is the edge opposite corner ``t``) and check range limits, so callers
never see infinities or NaNs.
"""
import math

import numpy as np

from . import _hexcore_py
from .errors import AdmissibilityError, RangeError

try:
    from . import _hexcore as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

#: Longest edge length accepted; cosh(710) overflows binary64.
L_MAX = 700.0
#: Margin at which an edge reaches ``L_MAX``: ln cosh(L_MAX / 2).
MARGIN_MAX = L_MAX / 2 - math.log(2.0) + math.log1p(math.exp(-L_MAX))

_BACKENDS = {"python": _hexcore_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _BACKENDS.get("compiled", _hexcore_py)


def available_backends():
    return sorted(_BACKENDS)


def get_backend():
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; "
                         f"available: {available_backends()}")
    previous = get_backend()
    _active = _BACKENDS[name]
    return previous


def _check_margins(margins):
    margins = np.ascontiguousarray(margins, dtype=float).reshape(-1, 3)
    if margins.size:
        lo = margins.min()
        if not lo > 0.0:
            raise AdmissibilityError(
                f"inadmissible face data: margin {float(lo)!r} <= 0", margin=float(lo))
        hi = margins.max()
        if hi > MARGIN_MAX:
            raise RangeError(f"edge length exceeds L_MAX={L_MAX} (margin {float(hi)!r})")
    return margins


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise RangeError(f"{what} left the binary64 range")
    return arr


def edge_lengths(margins):
    """Edge lengths ``2 arccosh(exp(m))`` for an array of positive margins."""
    m = np.asarray(margins, dtype=float)
    if m.size and m.max() > MARGIN_MAX:
        raise RangeError(f"edge length exceeds L_MAX={L_MAX}")
    return _check_finite(_active.edge_lengths(m), "edge length")


def face_thetas(margins):
    """B-arc lengths, shape ``(F, 3)``; entry ``[f, t]`` belongs to corner ``t``."""
    return _check_finite(_active.face_thetas(_check_margins(margins)), "B-arc length")


def face_thetas_jac(margins):
    """B-arc lengths and per-face 3x3 Jacobians ``d theta_r / d w_s``."""
    th, jac = _active.face_thetas_jac(_check_margins(margins))
    _check_finite(th, "B-arc length")
    # near-wall 1/(cosh l - 1) factors beyond this are treated as overflow
    if not np.all(np.isfinite(jac)) or (jac.size and np.abs(jac).max() > 1e300):
        raise RangeError("corner Jacobian left the binary64 range")
    return th, jac
