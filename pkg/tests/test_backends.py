import subprocess
import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bordered_yamabe import _hexcore_py, kernel
from bordered_yamabe.errors import AdmissibilityError, RangeError

compiled = pytest.mark.skipif("compiled" not in kernel.available_backends(),
                              reason="compiled kernel not built")

margin_arrays = arrays(
    float, st.tuples(st.integers(1, 6), st.just(3)),
    elements=st.floats(1e-9, 40.0).map(float))


@compiled
@settings(max_examples=200)
@given(margin_arrays)
def test_backends_agree(m):
    from bordered_yamabe import _hexcore
    th_c, jac_c = _hexcore.face_thetas_jac(m)
    th_p, jac_p = _hexcore_py.face_thetas_jac(m)
    np.testing.assert_allclose(th_c, th_p, rtol=1e-12, atol=0)
    np.testing.assert_allclose(jac_c, jac_p, rtol=1e-11, atol=0)
    np.testing.assert_allclose(_hexcore.face_thetas(m), th_p, rtol=1e-12, atol=0)
    np.testing.assert_allclose(_hexcore.edge_lengths(m[:, 0]),
                               _hexcore_py.edge_lengths(m[:, 0]), rtol=1e-13, atol=0)


def test_set_backend_roundtrip():
    before = kernel.get_backend()
    for name in kernel.available_backends():
        kernel.set_backend(name)
        assert kernel.get_backend() == name
    kernel.set_backend(before)
    with pytest.raises(ValueError):
        kernel.set_backend("fortran")


def test_kernel_rejects_bad_margins(backend):
    with pytest.raises(AdmissibilityError):
        kernel.face_thetas([[0.0, 1.0, 1.0]])
    with pytest.raises(RangeError):
        kernel.face_thetas([[kernel.MARGIN_MAX * 1.001, 1.0, 1.0]])


def test_long_edges_stay_finite(backend):
    # every side near L_MAX; products of cosh/sinh would overflow if formed
    m = np.full((1, 3), kernel.MARGIN_MAX * 0.999)
    th = kernel.face_thetas(m)
    assert np.all(np.isfinite(th)) and np.all(th > 0)


def test_empty_batch(backend):
    assert kernel.face_thetas(np.zeros((0, 3))).shape == (0, 3)


def test_fallback_when_extension_missing():
    # a fresh interpreter where importing the extension fails
    code = textwrap.dedent("""
        import sys
        sys.modules["bordered_yamabe._hexcore"] = None
        import numpy as np
        from bordered_yamabe import kernel, solver, surface
        assert kernel.available_backends() == ["python"], kernel.available_backends()
        assert kernel.get_backend() == "python"
        r = solver.newton_solve(*surface.pair_of_pants(), None, np.ones(3))
        assert r.residual <= 1e-10
    """)
    subprocess.run([sys.executable, "-c", code], check=True)
