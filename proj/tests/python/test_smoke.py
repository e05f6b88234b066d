# SPDX-License-Identifier: Apache-2.0
import math

import numpy as np
import pytest

mkhbm = pytest.importorskip("mkhbm")


@pytest.fixture(scope="module")
def problem():
    return mkhbm.generate("exponential", n=400, d=8, kappa=20.0, seed=3)


def test_spectrum(problem):
    s = mkhbm.spectrum(problem)
    eigs = np.linalg.eigvalsh(problem.gram())
    assert s["kappa"] == pytest.approx(eigs[-1] / eigs[0], rel=1e-9)
    assert s["kappa_bar"] == pytest.approx(eigs.mean() / eigs[0], rel=1e-9)
    assert problem.n == 400 and problem.d == 8


def test_heavy_ball_rate(problem):
    prm = mkhbm.params(problem)
    assert prm.method == "hbm"
    errs, diverged = mkhbm.run(problem, prm, method="hbm", iters=200)
    assert not diverged and errs.shape == (201,)
    slope = (math.log(errs[200]) - math.log(errs[100])) / 100
    assert math.exp(slope) < math.sqrt(prm.beta) * 1.05


def test_minibatch_reproducible(problem):
    prm = mkhbm.params(problem)
    b = math.ceil(mkhbm.critical_batch(problem, prm))
    a1, _ = mkhbm.run(problem, prm, batch=b, iters=50, seed=4)
    a2, _ = mkhbm.run(problem, prm, batch=b, iters=50, seed=4)
    a3, _ = mkhbm.run(problem, prm, batch=b, iters=50, seed=5)
    assert np.array_equal(a1, a2) and not np.array_equal(a1, a3)
    assert a1[-1] < a1[0]


def test_theory_report(problem):
    prm = mkhbm.params(problem)
    t = mkhbm.theory_report(problem, prm)
    assert t["B_star"] == mkhbm.critical_batch(problem, prm)
    assert abs(mkhbm.block_modulus(mkhbm.spectrum(problem)["lambda_min"], prm)) < 1


def test_errors(problem):
    with pytest.raises(mkhbm.Error):
        mkhbm.generate("nope", n=10, d=2)
    with pytest.raises(ValueError):
        mkhbm.run(problem, mkhbm.params(problem), method="adam")


def test_preset():
    assert "fig5" in mkhbm.preset_names()
    r = mkhbm.run_preset("fig5", trials=2, iters=10)
    assert r["configs"]
