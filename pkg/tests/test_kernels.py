import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from stokes_wkb import kernels

needs_compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(8, 400), elements=st.floats(-50.0, 50.0)), st.floats(1e-3, 0.2),
       st.booleans())
def test_backends_agree(f, h, backwards):
    n = f.size
    start, stop = (n - 1, 0) if backwards else (0, n - 1)
    py = kernels.numerov_shoot(f, h, start, stop, 0.0, 1e-6, backend="python")
    cy = kernels.numerov_shoot(f, h, start, stop, 0.0, 1e-6, backend="cython")
    assert cy[2] == py[2]
    assert cy[3] == pytest.approx(py[3], abs=1e-9)
    assert cy[0] == pytest.approx(py[0], rel=1e-9, abs=1e-300)
    assert cy[1] == pytest.approx(py[1], rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=needs_compiled)])
def test_node_count_of_harmonic_shot(backend):
    # psi'' = (x^2 - E) psi: E between 2m+1 and 2m+3 gives m+1 nodes
    x = np.linspace(-8.0, 8.0, 4001)
    h = x[1] - x[0]
    for energy, nodes in ((0.5, 0), (2.0, 1), (4.0, 2), (8.0, 4)):
        out = kernels.numerov_shoot(x * x - energy, h, 0, x.size - 1, 0.0, 1e-12, backend=backend)
        assert out[2] == nodes


def test_env_var_forces_python_fallback():
    env = dict(os.environ, STOKES_WKB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from stokes_wkb import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_oracle_runs_on_the_python_fallback():
    code = ("from stokes_wkb import kernels; from stokes_wkb.oracle import oracle_spectrum; "
            "from stokes_wkb.potentials import make_potential; "
            "print(kernels.BACKEND, *oracle_spectrum(make_potential('HARMONIC', {}), 1).energies)")
    env = dict(os.environ, STOKES_WKB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, *levels = out.stdout.split()
    assert backend == "python"
    assert [float(v) for v in levels] == pytest.approx([1.0, 3.0], abs=1e-8)
