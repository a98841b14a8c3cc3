"""The compiled kernels and the numpy fallback must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from weakkam import _kernels, _pykernels
from weakkam.bellman import policy, solve_discounted

from conftest import Setup, pendulum_model, two_well_model

ck = pytest.importorskip("weakkam._ckernels", reason="compiled extension not built")

FAMILIES = [pendulum_model(), pendulum_model("cubic"), pendulum_model("state_weighted"), two_well_model()]


@pytest.fixture(scope="module", params=range(len(FAMILIES)), ids=["linear", "cubic", "weighted", "two_well"])
def setup(request):
    return Setup(FAMILIES[request.param], 48, W=4)


def _args(s, lam):
    g, m = s.graph, s.model
    return (lam, g.tau, g.tau * s.c, g.cost_band, g.src_band, g.node_a, m.g_kind,
            np.ascontiguousarray(m.g_poly, dtype=float))


def test_constants_agree():
    assert ck.RELAX_EPS == _pykernels.RELAX_EPS
    assert ck.BACKEND == "cython" and _pykernels.BACKEND == "python"


def test_bellman_step(setup):
    u = np.random.default_rng(3).normal(size=setup.graph.N)
    for lam in (0.0, 0.3):
        a = ck.bellman_step(u, *_args(setup, lam))
        b = _pykernels.bellman_step(u, *_args(setup, lam))
        assert np.array_equal(a, b)


def test_apply_operator(setup):
    phi = np.random.default_rng(4).normal(size=setup.graph.N)
    g = setup.graph
    assert np.array_equal(ck.apply_operator(phi, g.cost_band, g.src_band),
                          _pykernels.apply_operator(phi, g.cost_band, g.src_band))


def test_fixed_point(setup):
    g = setup.graph
    stop = 1e-9 * g.tau * 0.05 * g.lu0_bounds[0]
    u0 = np.zeros(g.N)
    a = ck.discounted_fixed_point(u0, *_args(setup, 0.05), stop, 10 ** 6)
    b = _pykernels.discounted_fixed_point(u0, *_args(setup, 0.05), stop, 10 ** 6)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1] and a[2] == b[2]


def test_karp(setup):
    g = setup.graph
    assert ck.karp_min_mean(g.cost_band, g.src_band) == _pykernels.karp_min_mean(g.cost_band, g.src_band)


def test_all_pairs(setup):
    g = setup.graph
    r = g.reduced_band(setup.c)
    a = ck.all_pairs_shortest(r, g.src_band, g.N + 1)
    b = _pykernels.all_pairs_shortest(r, g.src_band, g.N + 1)
    assert np.array_equal(a[0], b[0]) and a[1:] == b[1:]
    # below the critical level both report non-convergence
    r_low = g.reduced_band(setup.c - 1.0)
    assert not ck.all_pairs_shortest(r_low, g.src_band, g.N + 1)[2]
    assert not _pykernels.all_pairs_shortest(r_low, g.src_band, g.N + 1)[2]


def test_trajectory_weights(setup):
    g = setup.graph
    lam = 0.1
    u = solve_discounted(g, lam, setup.c)
    pred, pred_edge, _ = policy(g, u, lam, setup.c)
    factor = 1.0 + g.tau * lam * g.edge_lu0[pred_edge]
    a = ck.trajectory_weights(pred, pred_edge, factor, g.N // 2, 1e-12, 10 ** 6, g.n_edges)
    b = _pykernels.trajectory_weights(pred, pred_edge, factor, g.N // 2, 1e-12, 10 ** 6, g.n_edges)
    assert np.array_equal(a[0], b[0]) and a[1:] == b[1:]


def test_environment_switch_selects_fallback():
    code = "from weakkam import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, WEAKKAM_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert _kernels.BACKEND == ("python" if os.environ.get("WEAKKAM_PURE") == "1" else "cython")


def test_pipeline_values_identical_across_backends(tmp_path):
    code = (
        "import numpy as np, sys\n"
        "from weakkam import HamiltonianModel, DiscreteScheme, build_graph, compute_barrier, solve_discounted\n"
        "g = build_graph(HamiltonianModel.pendulum(), DiscreteScheme(64, W=4))\n"
        "b = compute_barrier(g)\n"
        "u = solve_discounted(g, 0.05, b.c)\n"
        "np.save(sys.argv[1], np.concatenate([[b.c], b.h.ravel(), u.values]))\n"
    )
    outs = []
    for pure in ("0", "1"):
        path = tmp_path / f"out{pure}.npy"
        subprocess.run([sys.executable, "-c", code, str(path)], env=dict(os.environ, WEAKKAM_PURE=pure),
                       check=True)
        outs.append(np.load(path))
    assert np.array_equal(outs[0], outs[1])
