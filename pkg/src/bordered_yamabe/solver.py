"""Solvers for prescribed boundary lengths, and degeneration probes.

Two routes to the factor ``w*`` with ``B(w*) = b``:

* :func:`flow_solve` integrates ``dw/dt = B - b`` with classical RK4. A step
  is kept only if it stays admissible and does not raise the Lyapunov
  function ``Lambda = Psi - Psi(w*) + C`` by more than ``guard_slack``.
* :func:`newton_solve` minimizes the convex energy ``Psi`` (Hessian ``-L``)
  by damped Newton steps.
"""
from dataclasses import dataclass, field
import csv
import io
import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from . import surface as sf
from .errors import (AdmissibilityError, DomainError, NonConvergenceError, NumericError,
                     ProbeError, RangeError, StiffnessError)


@dataclass(frozen=True)
class FlowConfig:
    dt0: float = 0.1
    tol: float = 1e-10
    max_time: float = 1e4
    max_steps: int = 100_000
    guard_slack: float = 1e-9
    guard_rel: float = 1e-12
    grow_after: int = 5
    max_dt_factor: float = 8.0
    min_dt: float = 1e-12

    def __post_init__(self):
        for name in ("dt0", "tol", "max_time", "max_steps", "guard_slack", "min_dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"FlowConfig.{name} must be positive")
        if not self.tol < 1:
            raise ValueError("FlowConfig.tol must be < 1")


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iters: int = 50
    armijo: float = 1e-4
    backtrack: float = 0.5

    def __post_init__(self):
        if not self.tol > 0 or self.max_iters < 0:
            raise ValueError("NewtonConfig.tol must be positive, max_iters >= 0")
        for name in ("armijo", "backtrack"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"NewtonConfig.{name} must lie in (0, 1)")


@dataclass(frozen=True)
class FlowRecord:
    t: float
    w: np.ndarray
    B: np.ndarray
    C: float
    dlambda: float
    dt: float
    accepted: bool


@dataclass
class FlowTrace:
    records: list = field(default_factory=list)

    def accepted(self):
        return [r for r in self.records if r.accepted]

    def write_csv(self, fh):
        """Accepted records as ``t,w_1..w_n,B_1..B_n,C,dLambda``."""
        acc = self.accepted()
        n = acc[0].w.size if acc else 0
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", *(f"w_{i}" for i in range(1, n + 1)),
                         *(f"B_{i}" for i in range(1, n + 1)), "C", "dLambda"])
        for r in acc:
            writer.writerow([_fmt(r.t), *map(_fmt, r.w), *map(_fmt, r.B),
                             _fmt(r.C), _fmt(r.dlambda)])

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _fmt(x):
    return format(float(x), ".17g")


@dataclass
class SolveReport:
    method: str
    w: np.ndarray
    B: np.ndarray
    residual: float
    iterations: int
    time: float = 0.0
    lambda0: float = None
    fit_r2: float = None
    residual_history: list = field(default_factory=list)


def _residual(B, b):
    return float(np.max(np.abs(B - b)))


def _prepare(tri, l0, w0, b):
    b = sf._targets(tri, b)
    w0 = np.array(sf.np.zeros(tri.n) if w0 is None else w0, dtype=float)
    sf.check_admissible(tri, l0, w0)
    return w0, b


def fit_decay(trace):
    """Least-squares line through ``log C(t)`` over the last half of the run.

    Returns ``(lambda0, r2)`` with slope ``-2 lambda0``, or ``(None, None)``
    when fewer than three usable points exist.
    """
    acc = [r for r in trace.accepted() if r.C > 0]
    tail = acc[len(acc) // 2:]
    if len(tail) < 3:
        return None, None
    t = np.array([r.t for r in tail])
    y = np.log([r.C for r in tail])
    slope, intercept = np.polyfit(t, y, 1)
    ss_res = float(np.sum((y - (slope * t + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return -0.5 * float(slope), r2


def _rk4(tri, l0, w, b, dt):
    def f(x):
        return sf.boundary_lengths(tri, l0, x) - b

    k1 = f(w)
    k2 = f(w + 0.5 * dt * k1)
    k3 = f(w + 0.5 * dt * k2)
    k4 = f(w + dt * k3)
    return w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def flow_solve(tri, l0, w0, b, cfg=FlowConfig()):
    """Integrate the flow from ``w0`` until ``max|B - b| <= cfg.tol``.

    A step is accepted when it stays admissible and neither ``Lambda`` nor
    ``C`` rises by more than ``min(guard_slack, guard_rel * C)``. Rejection
    halves ``dt``; ``grow_after`` consecutive acceptances double it, capped
    at ``max_dt_factor * dt0``.

    Returns ``(SolveReport, FlowTrace)``. Rejected steps are kept in the
    trace with ``accepted=False``.
    """
    w, b = _prepare(tri, l0, w0, b)
    B = sf.boundary_lengths(tri, l0, w)
    C = float((B - b) @ (B - b))
    t, dlam, dt, streak, steps = 0.0, 0.0, cfg.dt0, 0, 0
    dt_max = cfg.dt0 * cfg.max_dt_factor
    trace = FlowTrace([FlowRecord(t, w, B, C, dlam, 0.0, True)])

    while _residual(B, b) > cfg.tol:
        if steps >= cfg.max_steps or t >= cfg.max_time:
            raise NonConvergenceError(
                f"flow stopped after {steps} steps at t={t:g}, residual "
                f"{_residual(B, b):.3e}", residual=_residual(B, b), trace=trace)
        steps += 1
        try:
            w_new = _rk4(tri, l0, w, b, dt)
            B_new = sf.boundary_lengths(tri, l0, w_new)
            C_new = float((B_new - b) @ (B_new - b))
            step_lam = sf.psi_difference(tri, l0, w, w_new, b) + (C_new - C)
            # the exact flow strictly decreases Lambda and C; an increase past
            # round-off means dt is beyond the RK4 stability limit
            allowed = min(cfg.guard_slack, cfg.guard_rel * max(C, C_new))
            ok = step_lam <= allowed and C_new - C <= allowed
        except (AdmissibilityError, RangeError):
            ok = False
        if ok:
            t += dt
            w, B, C, dlam = w_new, B_new, C_new, dlam + step_lam
            trace.records.append(FlowRecord(t, w, B, C, dlam, dt, True))
            streak += 1
            if streak >= cfg.grow_after:
                dt = min(2.0 * dt, dt_max)
                streak = 0
        else:
            trace.records.append(FlowRecord(t + dt, w, B, C, dlam, dt, False))
            dt *= 0.5
            streak = 0
            if dt < cfg.min_dt:
                raise StiffnessError(f"step size underflow at t={t:g}",
                                     residual=_residual(B, b), trace=trace)

    lam0, r2 = fit_decay(trace)
    report = SolveReport("flow", w, B, _residual(B, b), steps, time=t,
                         lambda0=lam0, fit_r2=r2)
    return report, trace


def newton_solve(tri, l0, w0, b, cfg=NewtonConfig()):
    """Damped Newton iteration on ``Psi``; the step solves ``(-L) d = B - b``."""
    w, b = _prepare(tri, l0, w0, b)
    history = []
    for it in range(cfg.max_iters + 1):
        B, L = sf.lengths_and_jacobian(tri, l0, w)
        res = _residual(B, b)
        history.append(res)
        if res <= cfg.tol:
            return SolveReport("newton", w, B, res, it, residual_history=history)
        if it == cfg.max_iters:
            break
        try:
            factor = cho_factor(-L)
        except LinAlgError as exc:
            raise NumericError(f"Cholesky of -L failed at iteration {it}") from exc
        d = cho_solve(factor, B - b)
        slope = float((b - B) @ d)
        alpha = 1.0
        while not sf.admissibility_margin(tri, l0, w + alpha * d) > 0.0:
            alpha *= cfg.backtrack
            if alpha < 1e-16:
                raise NumericError("no admissible Newton step")
        while sf.psi_difference(tri, l0, w, w + alpha * d, b) > cfg.armijo * alpha * slope:
            alpha *= cfg.backtrack
            if alpha < 1e-16:
                raise NumericError("Armijo backtracking failed")
        w = w + alpha * d
    raise NonConvergenceError(
        f"Newton did not converge in {cfg.max_iters} iterations (residual {res:.3e})",
        residual=res)


def fd_jacobian_check(tri, l0, w, h=1e-6):
    """Max relative deviation of central differences of ``B`` from ``L``.

    Entries with ``|L_ij| < 1e-8`` are skipped.
    """
    w = np.asarray(w, dtype=float)
    if not sf.admissibility_margin(tri, l0, w) >= 2 * h * tri.n:
        raise DomainError("fd_jacobian_check needs margin >= 2 h n")
    L = sf.assemble_jacobian(tri, l0, w)
    eye = np.eye(tri.n)
    stencil = np.concatenate([w + h * eye, w - h * eye])
    Bs = sf.boundary_lengths_batch(tri, l0, stencil)
    fd = ((Bs[:tri.n] - Bs[tri.n:]) / (2 * h)).T
    mask = np.abs(L) >= 1e-8
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(fd - L)[mask] / np.abs(L)[mask]))


@dataclass
class ProbeReport:
    mode: str
    boundary: int
    t: np.ndarray
    margin: np.ndarray
    B: np.ndarray
    trend: str
    extreme: float
    threshold: float
    observed: bool
    detail: str = ""


PROBE_MODES = ("plus-inf", "finite-wall", "mixed")
DEFAULT_TMAX = {"plus-inf": 8.0, "mixed": 130.0}


def _trend(x):
    dx = np.diff(x)
    if np.all(dx < 0):
        return "decreasing"
    if np.all(dx > 0):
        return "increasing"
    return "non-monotone"


def _pick_edge(tri, i, edge):
    if edge is not None:
        e = tri.edges[tri.edge_position[edge]]
        if i not in e.ends:
            raise ProbeError(f"edge {edge} is not incident to boundary {i}")
        return e
    incident = [e for e in tri.edges if i in e.ends]
    distinct = [e for e in incident if e.ends[0] != e.ends[1]]
    if not incident:
        raise ProbeError(f"boundary {i} has no incident edge")
    return (distinct or incident)[0]


def _pick_face(tri, i, face):
    if face is not None:
        f = next((f for f in tri.faces if f.id == face), None)
        if f is None or i not in f.corners:
            raise ProbeError(f"face {face} does not have boundary {i} as a corner")
        return f
    for f in tri.faces:
        if f.corners.count(i) == 1:
            return f
    raise ProbeError(f"no face has boundary {i} as a single corner")


def probe_limits(tri, l0, mode, boundary, tmax=None, samples=None, w_base=None,
                 edge=None, face=None, margin_floor=1e-6, low=1e-2, high=1e3,
                 min_samples=3):
    """Sample ``B`` along a ray that approaches the boundary of the admissible set.

    ``plus-inf``: ``w = w_base + t e_i``; expect ``B_i`` decreasing below ``low``.
    ``finite-wall``: ``w = w_base - t (e_i + e_j)`` toward the wall of an edge
    ``(i, j)``, sampled geometrically in that edge's margin down to
    ``margin_floor``; expect ``B_i`` above ``high``.
    ``mixed``: on a face ``(i, j, k)``, ``w_i -= t`` and ``w_j, w_k += t``;
    expect ``B_i`` above ``high``.
    """
    if mode not in PROBE_MODES:
        raise ValueError(f"unknown probe mode {mode!r}")
    if not 1 <= boundary <= tri.n:
        raise ProbeError(f"boundary {boundary} not in 1..{tri.n}")
    base = np.zeros(tri.n) if w_base is None else np.asarray(w_base, dtype=float)
    sf.check_admissible(tri, l0, base)
    i = boundary - 1
    detail = ""

    if mode == "finite-wall":
        e = _pick_edge(tri, boundary, edge)
        direction = np.zeros(tri.n)
        for a in set(e.ends):
            direction[a - 1] = 1.0
        pos = tri.edge_position[e.id]
        m0 = sf.edge_margins(tri, l0, base)[pos]
        rate = direction[e.ends[0] - 1] + direction[e.ends[1] - 1]
        k = np.arange(samples or 41)
        target = m0 * (margin_floor / m0) ** (k / (k.size - 1))
        ts = (m0 - target) / rate
        detail = f"edge {e.id} {tuple(e.ends)}"
    else:
        tmax = DEFAULT_TMAX[mode] if tmax is None else tmax
        direction = np.zeros(tri.n)
        if mode == "plus-inf":
            direction[i] = 1.0
        else:
            f = _pick_face(tri, boundary, face)
            for c in set(f.corners) - {boundary}:
                direction[c - 1] = 1.0
            direction[i] = -1.0
            detail = f"face {f.id} {tuple(f.corners)}"
        ts = np.linspace(0.0, tmax, samples or 41)
        if mode == "finite-wall":
            direction = -direction

    sign = -1.0 if mode == "finite-wall" else 1.0
    rows, margins, tvals = [], [], []
    for t in ts:
        w = base + sign * t * direction
        try:
            B = sf.boundary_lengths(tri, l0, w)
        except (AdmissibilityError, RangeError) as exc:
            if len(rows) < min_samples:
                raise ProbeError(f"{mode} ray left the admissible set at t={t:g}: "
                                 f"{exc}") from exc
            detail += f"; truncated at t={t:g}"
            break
        rows.append(B)
        margins.append(sf.admissibility_margin(tri, l0, w))
        tvals.append(t)

    Bs = np.array(rows)
    Bi = Bs[:, i]
    if mode == "plus-inf":
        extreme, threshold = float(Bi[-1]), low
        observed = _trend(Bi) == "decreasing" and extreme < low
    else:
        ok = np.array(margins) >= margin_floor
        extreme, threshold = float(Bi[ok].max()), high
        observed = extreme > high
    return ProbeReport(mode, boundary, np.array(tvals), np.array(margins), Bs,
                       _trend(Bi), extreme, threshold, bool(observed), detail)
