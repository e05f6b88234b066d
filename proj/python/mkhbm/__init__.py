# SPDX-License-Identifier: Apache-2.0
"""Minibatch heavy-ball momentum for least squares."""
import json as _json

import numpy as _np

from ._mkhbm import (  # noqa: F401
    Error,
    MomentumParams,
    Problem,
    block_modulus,
    critical_batch,
    generate,
    load,
    params,
    preset_names,
    spectrum_algebraic,
    spectrum_exponential,
)
from . import _mkhbm

__version__ = "0.1.0"


def spectrum(problem):
    """Gram spectrum summary as a dict."""
    return _json.loads(problem.spectrum_json())


def theory_report(problem, momentum, sampling="rownorm", k_star=0.0):
    return _json.loads(_mkhbm.theory_report(problem, momentum, sampling, k_star))


def run(problem, momentum, method="mbhbm", batch=1, iters=300, seed=0, sampling="rownorm"):
    """Returns (errors, diverged) with errors[k] = ||x_k - x*||."""
    errs, diverged = _mkhbm.run(problem, momentum, method, batch, iters, seed, sampling)
    return _np.asarray(errs), diverged


def run_preset(name, trials=10, iters=300, seed=0, jobs=1):
    return _json.loads(_mkhbm.run_preset(name, trials, iters, seed, jobs))
