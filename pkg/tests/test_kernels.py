import os
import subprocess
import sys

import numpy as np
import pytest

from vekuabvp import kernels


@pytest.fixture
def data():
    rng = np.random.default_rng(7)
    disk = lambda n, r: r * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    return disk(40, 0.9), disk(300, 0.6), rng.standard_normal(300) + 1j * rng.standard_normal(300), rng.random(300)


def _brute_cauchy(t, s, g, w, sub):
    return np.array([np.sum(w * (g - sub) / (z - s)) for z in t])


def test_python_kernels_match_direct_sums(data):
    t, s, g, w = data
    py = kernels.available_backends()["python"]
    assert np.allclose(kernels.cauchy_sum(t, s, g, w, 0.2, impl=py), _brute_cauchy(t, s, g, w, 0.2))
    c2 = np.array([np.sum(w * g / (z - s) ** 2) for z in t])
    assert np.allclose(kernels.cauchy2_sum(t, s, g, w, impl=py), c2)
    lg = np.array([np.sum(w * (g.real - 0.1) * np.log(np.abs(z - s))) for z in t])
    assert np.allclose(kernels.log_sum(t, s, g.real, w, 0.1, impl=py), lg)


def test_backends_agree(data):
    backends = kernels.available_backends()
    if "cython" not in backends:
        pytest.skip("compiled extension not built")
    t, s, g, w = data
    for name in ("cauchy_sum", "log_sum"):
        fn = getattr(kernels, name)
        vals = g.real if name == "log_sum" else g
        a, b = (fn(t, s, vals, w, 0.3, 0.1 + 0.2j, impl=backends[k]) for k in ("python", "cython"))
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    a, b = (kernels.cauchy2_sum(t, s, g, w, impl=backends[k]) for k in ("python", "cython"))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_pure_python_switch():
    env = dict(os.environ, VEKUABVP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import vekuabvp; print(vekuabvp.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
