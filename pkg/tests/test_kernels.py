"""Backend parity: the compiled kernels must match the pure-Python reference bit-for-bit."""

from __future__ import annotations

import os
import random
import subprocess
import sys
from array import array

import pytest

from flowgames import _kernels_py, kernels
from flowgames._engine import GameCore
from flowgames.scenarios import (
    gen_random_config,
    gen_random_heterogeneous,
    gen_random_homogeneous,
    gen_random_metric,
)

speedups = pytest.importorskip("flowgames._speedups")


def _pure_core(game) -> GameCore:
    core = GameCore(game)
    core._impl = _kernels_py
    core._arrays = False
    core._interest_buf = core.interest
    if core.dist is not None:
        core._dist_buf = [core.dist[u][s] for u in range(core.n) for s in range(core.p)]
        core._order_buf = [u for s in range(core.p) for u in core.subject_order[s]]
    return core


@pytest.mark.skipif(
    os.environ.get("FLOWGAMES_PURE_PYTHON", "") not in ("", "0"),
    reason="fallback forced via environment",
)
def test_backend_is_compiled_by_default():
    assert kernels.BACKEND == "cython"
    assert kernels.impl_for(8).BACKEND_NAME == "cython"
    assert kernels.impl_for(kernels.MAX_COMPILED_SUBJECTS + 1).BACKEND_NAME == "python"


def test_reach_parity_across_games():
    for seed in range(40):
        if seed % 3 == 0:
            game = gen_random_metric(seed)
        elif seed % 3 == 1:
            game = gen_random_homogeneous(seed)
        else:
            game = gen_random_heterogeneous(seed)
        config = gen_random_config(game, seed)
        fast = GameCore(game)
        pure = _pure_core(game)
        dense = fast.to_dense(config)
        assert fast.received_masks(dense) == pure.received_masks(dense)
        for u in range(fast.n):
            assert fast.received_masks(dense, skip=u) == pure.received_masks(dense, skip=u)


def test_plain_reach_direct_call_parity():
    rng = random.Random(3)
    n, p = 5, 6
    for _ in range(50):
        interest = [rng.getrandbits(p) for _ in range(n)]
        rows = [[] for _ in range(n + p)]
        for node in range(n + p):
            for u in range(n):
                if u != node and rng.random() < 0.3:
                    rows[node].append(u)
        indptr = [0]
        indices = []
        for row in rows:
            indices.extend(row)
            indptr.append(len(indices))
        args_fast = (array("i", indptr), array("i", indices), array("Q", interest), n, p, -1)
        args_pure = (indptr, indices, interest, n, p, -1)
        assert speedups.plain_received(*args_fast) == _kernels_py.plain_received(*args_pure)


def test_subset_search_parity():
    rng = random.Random(11)
    for _ in range(200):
        ne = rng.randint(1, 9)
        p = rng.randint(1, 10)
        delivery = [rng.getrandbits(p) for _ in range(ne)]
        weights = [rng.randint(0, 7) for _ in range(p)]
        k = rng.randint(1, 4)
        assert speedups.best_weighted_subset(delivery, weights, p, k) == (
            _kernels_py.best_weighted_subset(delivery, weights, p, k)
        )


def test_pure_python_env_override():
    code = (
        "import flowgames.kernels as k; print(k.BACKEND)"
    )
    env = dict(os.environ, FLOWGAMES_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"
