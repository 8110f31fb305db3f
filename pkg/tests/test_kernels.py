import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opencavity import _fallback, kernels

compiled = pytest.importorskip("opencavity._kernels")


layers = st.lists(st.tuples(st.floats(1.0, 3.5), st.floats(1.0, 300.0)), min_size=1, max_size=30)


@settings(max_examples=50, deadline=None)
@given(layers, st.floats(1.0, 2.0), st.floats(1.0, 2.0))
def test_stack_backends_agree(lay, n0, ns):
    idx = np.array([n for n, _ in lay])
    th = np.array([d for _, d in lay])
    wl = np.linspace(400.0, 900.0, 37)
    rc, tc = compiled.stack_response(idx, th, n0, ns, wl)
    rf, tf = _fallback.stack_response(idx, th, n0, ns, wl)
    np.testing.assert_allclose(rc, rf, atol=1e-11)
    np.testing.assert_allclose(tc, tf, atol=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(620.0, 660.0), min_size=1, max_size=8), st.floats(50.0, 5000.0))
def test_overlap_backends_agree(centers, q):
    wl = np.linspace(600.0, 700.0, 2001)
    dens = np.exp(-0.5 * ((wl - 640.0) / 3.0) ** 2)
    c = np.array(centers)
    qs = np.full(c.shape, q)
    np.testing.assert_allclose(compiled.lorentz_overlap(wl, dens, c, qs),
                               _fallback.lorentz_overlap(wl, dens, c, qs), rtol=1e-12, atol=1e-15)


def test_dispatcher_uses_compiled_by_default():
    if os.environ.get("OPENCAVITY_PURE"):
        pytest.skip("pure mode forced")
    assert kernels.BACKEND == "compiled"


def test_pure_env_selects_fallback_and_gives_same_f_zpl():
    code = ("from opencavity import kernels, pipeline; from opencavity.config import load_config;"
            "print(kernels.BACKEND, repr(pipeline.coupling(load_config()).f_zpl))")
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, OPENCAVITY_PURE=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, value = res.stdout.split()
        out[backend] = float(value)
    assert set(out) == {"compiled", "numpy"}
    assert out["compiled"] == pytest.approx(out["numpy"], rel=1e-12)


def test_dispatcher_accepts_read_only_and_scalar_inputs():
    wl = np.linspace(600.0, 700.0, 11)
    wl.flags.writeable = False
    r, t = kernels.stack_response([1.5], [100.0], 1.0, 1.46, wl)
    assert r.shape == (11,)
    assert kernels.lorentz_overlap(wl, np.ones_like(wl), 650.0, 100.0).shape == (1,)
