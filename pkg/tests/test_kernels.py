import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate

from lpnorm_minimax import kernels

BACKENDS = kernels.backends()


def test_bump_normalisation():
    val, _ = integrate.quad(lambda u: float(kernels.bump(np.array([u]))[0]), -1, 1,
                            epsabs=1e-15)
    assert val == pytest.approx(1.0, abs=1e-12)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
class TestBackendParity:
    rng = np.random.default_rng(0)

    def test_kde_1d(self):
        x = self.rng.normal(size=2000)
        args = (x, 0.2, x.min() - 0.3, 0.0125, int((x.max() - x.min() + 0.6) / 0.0125) + 2)
        a = BACKENDS["cython"].kde_grid_1d(*args)
        b = BACKENDS["python"].kde_grid_1d(*args)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_kde_2d(self):
        x = self.rng.normal(size=(500, 2))
        lo = x.min(axis=0) - 0.4
        ng = [int(v) for v in (x.max(axis=0) + 0.4 - lo) / 0.05 + 2]
        args = (x, 0.3, 0.35, lo[0], lo[1], 0.05, 0.05, ng[0], ng[1])
        a = BACKENDS["cython"].kde_grid_2d(*args)
        b = BACKENDS["python"].kde_grid_2d(*args)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_pair_sum(self, d):
        x = self.rng.normal(size=(800, d))
        x = np.ascontiguousarray(x[np.argsort(x[:, 0])])
        h = np.full(d, 0.4)
        a = BACKENDS["cython"].pair_kernel_sum(x, h)
        b = BACKENDS["python"].pair_kernel_sum(x, h)
        assert a == pytest.approx(b, rel=1e-12)


def test_pure_python_switch():
    env = dict(os.environ, LPNORM_MINIMAX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c",
                          "from lpnorm_minimax import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_estimators_agree_across_backends():
    code = ("import numpy as np; from lpnorm_minimax.estimators import plugin_lp, ustat_l2;"
            "x=np.random.default_rng(2).normal(size=3000);"
            "print(repr(plugin_lp(x, None, 2.5, bandwidths=[0.25])), repr(ustat_l2(x, [0.25])))")
    vals = []
    for flag in ("0", "1"):
        env = dict(os.environ, LPNORM_MINIMAX_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        vals.append([float(v) for v in out.stdout.split()])
    assert vals[0] == pytest.approx(vals[1], rel=1e-12)
