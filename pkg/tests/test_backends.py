"""The compiled and pure-numpy kernels compute the same thing."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from conftest import random_well_conditioned
from nilmoment import kernels
from nilmoment import lie_core as lc

needs_numba = pytest.mark.skipif(kernels.BACKEND != "numba", reason="numba backend not active")


@needs_numba
@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_moment_kernels_agree(n, rng):
    c = lc.random_bracket(n, rng).coeffs
    a = kernels.moment_coeffs_numba(c)
    b = kernels.moment_coeffs_numpy(c)
    assert np.allclose(a, b, atol=1e-12)
    assert np.allclose(a, oracles.moment(c), atol=1e-12)


@needs_numba
@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_action_kernels_agree(n, rng):
    c = lc.random_bracket(n, rng).coeffs
    a = rng.standard_normal((n, n))
    assert np.allclose(kernels.act_coeffs_numba(a, c), kernels.act_coeffs_numpy(a, c), atol=1e-12)
    g = random_well_conditioned(n, rng)
    gi = np.linalg.inv(g)
    assert np.allclose(kernels.group_act_coeffs_numba(g, gi, c), kernels.group_act_coeffs_numpy(g, gi, c),
                       atol=1e-12)


_SCRIPT = """
import json, numpy as np
from nilmoment import flow, kernels, lie_core as lc
g = np.array([[1.0, 0.5, 0, 0], [0, 1, 0, 0.5], [0.5, 0, 1, 0], [0, 0, 0.5, 1]])
rep = flow.run_flow(lc.gl_act(g, lc.filiform(4)))
print(json.dumps({"backend": kernels.BACKEND, "steps": rep.steps_taken,
                  "value": rep.final_moment_norm_sq, "c": rep.critical_constant,
                  "verdict": rep.verdict.value}))
"""


def _run_flow_in(disable):
    env = dict(os.environ)
    env["NILMOMENT_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", _SCRIPT], env=env, capture_output=True, text=True,
                         check=True, timeout=600)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_flow_limits_agree_across_backends():
    plain = _run_flow_in(True)
    fast = _run_flow_in(False)
    assert plain["backend"] == "numpy"
    assert fast["backend"] in {"numba", "numpy"}
    assert plain["verdict"] == fast["verdict"]
    assert abs(plain["value"] - fast["value"]) <= 1e-9
    assert abs(plain["c"] - fast["c"]) <= 1e-9
    assert abs(plain["steps"] - fast["steps"]) <= 2
