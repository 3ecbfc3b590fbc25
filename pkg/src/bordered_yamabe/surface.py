"""Ideally triangulated bordered surfaces and their conformal geometry.

Boundary components are labelled ``1..n`` in the public data model (as in
surface documents) and ``0..n-1`` in the internal arrays. Faces carry an
ordered corner triple, repeats allowed; ``opposite_edges[t]`` joins the two
corners other than ``corners[t]``. Boundary lengths and the Jacobian are
accumulated per corner slot, in face order.
"""
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import kernel
from .errors import AdmissibilityError, DomainError, NumericError
from .hexkernel import log_cosh

GAUSS_ORDER = 16
QUAD_RTOL = 1e-10
QUAD_MAX_PANELS = 2 ** 10
_ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Edge:
    id: int
    ends: tuple


@dataclass(frozen=True)
class Face:
    id: int
    corners: tuple
    opposite_edges: tuple


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(self.violations)


@dataclass(frozen=True)
class IdealTriangulation:
    """Combinatorics of an ideal triangulation.

    Use :func:`validate` before handing a hand-built instance to the
    geometric routines; the index arrays assume a consistent structure.
    """

    n: int
    edges: tuple
    faces: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(
            e if isinstance(e, Edge) else Edge(int(e[0]), tuple(e[1])) for e in self.edges))
        object.__setattr__(self, "faces", tuple(
            f if isinstance(f, Face) else Face(int(f[0]), tuple(f[1]), tuple(f[2]))
            for f in self.faces))

    @cached_property
    def edge_position(self):
        return {e.id: pos for pos, e in enumerate(self.edges)}

    @cached_property
    def edge_ends(self):
        return np.array([[a - 1, b - 1] for a, b in (e.ends for e in self.edges)],
                        dtype=np.intp).reshape(-1, 2)

    @cached_property
    def face_edges(self):
        pos = self.edge_position
        return np.array([[pos[e] for e in f.opposite_edges] for f in self.faces],
                        dtype=np.intp).reshape(-1, 3)

    @cached_property
    def face_corners(self):
        return np.array([[c - 1 for c in f.corners] for f in self.faces],
                        dtype=np.intp).reshape(-1, 3)

    @cached_property
    def corner_incidence(self):
        """``(3F, n)`` 0/1 matrix mapping corner slots to boundary labels."""
        inc = np.zeros((3 * len(self.faces), self.n))
        inc[np.arange(3 * len(self.faces)), self.face_corners.ravel()] = 1.0
        return inc


def validate(tri):
    """Check the combinatorial consistency of ``tri``; never raises."""
    report = ValidationReport()
    bad = report.violations
    n = tri.n
    if not isinstance(n, (int, np.integer)) or n < 1:
        bad.append(f"boundary count n={n!r} must be a positive integer")
        return report

    ids = Counter(e.id for e in tri.edges)
    for eid, k in sorted(ids.items()):
        if k > 1:
            bad.append(f"edge id {eid} defined {k} times")
    fids = Counter(f.id for f in tri.faces)
    for fid, k in sorted(fids.items()):
        if k > 1:
            bad.append(f"face id {fid} defined {k} times")

    ends = {}
    for e in tri.edges:
        if len(e.ends) != 2 or any(not 1 <= a <= n for a in e.ends):
            bad.append(f"edge {e.id}: ends {e.ends} not a pair in 1..{n}")
        else:
            ends[e.id] = e.ends

    if 2 * len(tri.edges) != 3 * len(tri.faces):
        bad.append(f"count mismatch: 2*|E| = {2 * len(tri.edges)} "
                   f"!= 3*|F| = {3 * len(tri.faces)}")

    slots = Counter()
    used = set()
    for f in tri.faces:
        if len(f.corners) != 3 or len(f.opposite_edges) != 3:
            bad.append(f"face {f.id}: needs 3 corners and 3 opposite edges")
            continue
        for c in f.corners:
            if not 1 <= c <= n:
                bad.append(f"face {f.id}: corner {c} not in 1..{n}")
            else:
                used.add(c)
        for t, eid in enumerate(f.opposite_edges):
            slots[eid] += 1
            if eid not in ids:
                bad.append(f"face {f.id}: unknown edge id {eid}")
                continue
            if eid not in ends:
                continue
            want = sorted((f.corners[(t + 1) % 3], f.corners[(t + 2) % 3]))
            if sorted(ends[eid]) != want:
                bad.append(f"face {f.id}: edge {eid} opposite corner slot {t} has ends "
                           f"{tuple(ends[eid])}, expected {tuple(want)}")

    for e in tri.edges:
        if slots[e.id] != 2:
            bad.append(f"edge slot count: edge {e.id} used in {slots[e.id]} face slots, "
                       f"expected 2")
    for i in range(1, n + 1):
        if i not in used:
            bad.append(f"boundary {i} occurs in no face corner")
    return report


@dataclass(frozen=True, eq=False)
class Metric:
    """Positive length per ideal edge, in the triangulation's edge order.

    ``reference`` marks an initial metric ``l0`` as opposed to one obtained
    by a conformal change.
    """

    lengths: np.ndarray
    reference: bool = True

    def __post_init__(self):
        arr = np.array(self.lengths, dtype=float).ravel()
        if arr.size and not (np.all(arr > 0) and np.all(np.isfinite(arr))):
            raise DomainError("edge lengths must be positive and finite")
        if arr.size and arr.max() > kernel.L_MAX:
            raise kernel.RangeError(f"edge length exceeds L_MAX={kernel.L_MAX}")
        arr.setflags(write=False)
        object.__setattr__(self, "lengths", arr)
        lch = np.array([log_cosh(0.5 * x) for x in arr])
        lch.setflags(write=False)
        object.__setattr__(self, "log_cosh_half", lch)

    @cached_property
    def rho(self):
        """``2 cosh^2(l/2)`` per edge."""
        return 2.0 * np.cosh(0.5 * self.lengths) ** 2

    def __len__(self):
        return self.lengths.size


def _factor(tri, w):
    w = np.asarray(w, dtype=float)
    if w.shape != (tri.n,):
        raise DomainError(f"conformal factor must have length {tri.n}, got shape {w.shape}")
    return w


def edge_margins(tri, l0, w):
    """``w_a + w_b + ln cosh(l0_e / 2)`` for every edge."""
    w = _factor(tri, w)
    ee = tri.edge_ends
    return w[ee[:, 0]] + w[ee[:, 1]] + l0.log_cosh_half


def admissibility_margin(tri, l0, w):
    """Smallest edge margin; ``w`` is admissible iff this is positive."""
    return float(edge_margins(tri, l0, w).min())


def check_admissible(tri, l0, w):
    m = edge_margins(tri, l0, w)
    bad = np.flatnonzero(~(m > 0.0))
    if bad.size:
        e = tri.edges[bad[0]]
        raise AdmissibilityError(
            f"conformal factor inadmissible on edge {e.id} {tuple(e.ends)}: "
            f"margin {float(m[bad[0]])!r}", margin=float(m[bad[0]]), edge=e.id)
    return m


def apply_conformal(tri, l0, w):
    """The metric ``w * l0``."""
    m = check_admissible(tri, l0, w)
    return Metric(kernel.edge_lengths(m), reference=False)


def _face_margins(tri, l0, w):
    return check_admissible(tri, l0, w)[tri.face_edges]


def boundary_lengths(tri, l0, w):
    """Total B-arc length of every boundary component, shape ``(n,)``."""
    th = kernel.face_thetas(_face_margins(tri, l0, w))
    return np.bincount(tri.face_corners.ravel(), th.ravel(), minlength=tri.n)


def _accumulate_jacobian(tri, jac):
    fc = tri.face_corners
    L = np.zeros((tri.n, tri.n))
    rows = np.broadcast_to(fc[:, :, None], jac.shape).ravel()
    cols = np.broadcast_to(fc[:, None, :], jac.shape).ravel()
    np.add.at(L, (rows, cols), jac.ravel())
    return L


def lengths_and_jacobian(tri, l0, w):
    """``(B, L)`` from a single kernel pass."""
    th, jac = kernel.face_thetas_jac(_face_margins(tri, l0, w))
    B = np.bincount(tri.face_corners.ravel(), th.ravel(), minlength=tri.n)
    return B, _accumulate_jacobian(tri, jac)


def assemble_jacobian(tri, l0, w):
    """``L[i, j] = dB_i / dw_j``; all matching corner pairs are summed."""
    return lengths_and_jacobian(tri, l0, w)[1]


def boundary_lengths_batch(tri, l0, ws):
    """``B`` at each row of ``ws`` (shape ``(N, n)``) in one kernel call."""
    ws = np.atleast_2d(np.asarray(ws, dtype=float))
    ee = tri.edge_ends
    m = ws[:, ee[:, 0]] + ws[:, ee[:, 1]] + l0.log_cosh_half
    if m.size and not m.min() > 0.0:
        k, e = np.unravel_index(np.argmin(m), m.shape)
        raise AdmissibilityError(
            f"conformal factor inadmissible on edge {tri.edges[e].id}",
            margin=float(m[k, e]), edge=tri.edges[e].id)
    th = kernel.face_thetas(m[:, tri.face_edges].reshape(-1, 3))
    return th.reshape(ws.shape[0], -1) @ tri.corner_incidence


_GL_CACHE = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        x, wt = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * wt)
    return _GL_CACHE[order]


def _panel_sum(tri, l0, a, d, panels, shift, order):
    x, wt = _gauss_legendre(order)
    starts = np.arange(panels) / panels
    s = (starts[:, None] + x[None, :] / panels).ravel()
    weights = np.tile(wt, panels) / panels
    B = boundary_lengths_batch(tri, l0, a[None, :] + s[:, None] * d[None, :])
    f = (B - shift) @ d
    return float(weights @ f), float(weights @ ((np.abs(B) + np.abs(shift)) @ np.abs(d)))


def line_integral(tri, l0, a, b, shift=None, rtol=QUAD_RTOL,
                  max_panels=QUAD_MAX_PANELS, order=GAUSS_ORDER):
    """``integral of sum_i (B_i - shift_i) dw_i`` along the segment ``a -> b``.

    Composite Gauss-Legendre with panel doubling until two successive
    estimates agree to ``rtol``. Both endpoints must be admissible; the
    segment then is too, because the admissible set is convex.
    """
    a = _factor(tri, a)
    b = _factor(tri, b)
    d = b - a
    if not np.any(d):
        return 0.0
    check_admissible(tri, l0, a)
    check_admissible(tri, l0, b)
    shift = np.zeros(tri.n) if shift is None else np.asarray(shift, dtype=float)
    panels = 1
    prev, scale = _panel_sum(tri, l0, a, d, panels, shift, order)
    while panels < max_panels:
        panels *= 2
        cur, scale = _panel_sum(tri, l0, a, d, panels, shift, order)
        # round-off in B - shift bounds what any refinement can resolve
        if abs(cur - prev) <= max(rtol * abs(cur), _ROUNDOFF * scale):
            return cur
        prev = cur
    raise NumericError(f"line integral did not converge with {max_panels} panels")


def _path_points(w, base, path):
    if path == "straight":
        return [base, w]
    if path == "two-leg":
        # raise the coordinates that grow first, then lower the rest; the
        # corner max(base, w) and both legs stay admissible
        return [base, np.maximum(base, w), w]
    raise ValueError(f"unknown path {path!r}")


def energy_phi(tri, l0, w, base, path="straight"):
    """``-integral_base^w sum_i B_i dw_i``; zero at ``base``, gradient ``-B``."""
    w = _factor(tri, w)
    base = _factor(tri, base)
    pts = _path_points(w, base, path)
    return -sum(line_integral(tri, l0, p, q) for p, q in zip(pts[:-1], pts[1:]))


def energy_psi(tri, l0, w, base, b, path="straight"):
    """``Phi(w) + <b, w>``, strictly convex with gradient ``b - B``."""
    b = _targets(tri, b)
    return energy_phi(tri, l0, w, base, path) + float(b @ _factor(tri, w))


def psi_difference(tri, l0, w_from, w_to, b):
    """``Psi(w_to) - Psi(w_from)`` integrated directly along the segment.

    Integrating ``B - b`` avoids the cancellation of differencing two
    large energies, which matters once ``B`` is close to ``b``.
    """
    return -line_integral(tri, l0, w_from, w_to, shift=_targets(tri, b))


def _targets(tri, b):
    b = np.asarray(b, dtype=float)
    if b.shape != (tri.n,):
        raise DomainError(f"targets must have length {tri.n}, got shape {b.shape}")
    if not np.all(b > 0) or not np.all(np.isfinite(b)):
        raise DomainError("target boundary lengths must be positive and finite")
    return b


def defect(tri, l0, w, b):
    """``C(w) = sum (B_i - b_i)^2``."""
    r = boundary_lengths(tri, l0, w) - _targets(tri, b)
    return float(r @ r)


def defect_and_lyapunov(tri, l0, w, base, b, psi_ref=0.0):
    """``(C, Psi(w) - psi_ref + C)``; pass ``Psi(w*)`` as ``psi_ref`` when known."""
    C = defect(tri, l0, w, b)
    return C, energy_psi(tri, l0, w, base, b) - psi_ref + C


# bundled instances

def pair_of_pants(l0=None):
    """Three-holed sphere: two hexagons glued along three edges."""
    l0 = math.acosh(2.0) if l0 is None else l0
    tri = IdealTriangulation(
        n=3,
        edges=(Edge(1, (1, 2)), Edge(2, (2, 3)), Edge(3, (3, 1))),
        faces=(Face(1, (1, 2, 3), (2, 3, 1)), Face(2, (1, 2, 3), (2, 3, 1))),
    )
    return tri, Metric(np.broadcast_to(np.asarray(l0, dtype=float), (3,)))


def tetrahedral_surface(l0=None):
    """Sphere minus four disks, from the tetrahedron triangulation."""
    l0 = math.acosh(2.0) if l0 is None else l0
    pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    eid = {p: k + 1 for k, p in enumerate(pairs)}
    faces = []
    for fid, (a, b, c) in enumerate([(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)], start=1):
        opp = (eid[(b, c)], eid[(a, c)], eid[(a, b)])
        faces.append(Face(fid, (a, b, c), opp))
    tri = IdealTriangulation(
        n=4, edges=tuple(Edge(eid[p], p) for p in pairs), faces=tuple(faces))
    return tri, Metric(np.broadcast_to(np.asarray(l0, dtype=float), (6,)))


def sample_admissible(tri, l0, rng, low=-1.0, high=1.0, min_margin=0.0, max_tries=10000):
    """Uniform sample from ``[low, high]^n`` conditioned on margin > ``min_margin``."""
    for _ in range(max_tries):
        w = rng.uniform(low, high, size=tri.n)
        if admissibility_margin(tri, l0, w) > min_margin:
            return w
    raise DomainError("no admissible sample found; widen the box or lower min_margin")
