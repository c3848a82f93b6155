#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each workload in a subprocess per backend (the backend is chosen at
import time via FLOWGAMES_PURE_PYTHON) and prints a comparison table:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _big_homogeneous(n: int, p: int, seed: int):
    import random

    from flowgames.model import Configuration, FlowGame, User

    rng = random.Random(seed)
    weights = {s: 1 for s in range(p)}
    users = tuple(User(id=1000 + i, budget=6, weights=dict(weights)) for i in range(n))
    game = FlowGame(producers=tuple(range(p)), users=users, scale=1)
    endpoints = sorted(set(game.user_ids) | game.producer_set)
    follows = {
        u.id: frozenset(rng.sample([e for e in endpoints if e != u.id], 6)) for u in game.users
    }
    return game, Configuration(follows)


def bench_plain_dissemination(repeats: int = 300) -> float:
    from flowgames._engine import GameCore

    game, config = _big_homogeneous(48, 60, seed=1)
    core = GameCore(game)
    dense = core.to_dense(config)
    start = time.perf_counter()
    for _ in range(repeats):
        core.received_masks(dense)
    return time.perf_counter() - start


def bench_expertise_dissemination(repeats: int = 150) -> float:
    from flowgames._engine import GameCore
    from flowgames.scenarios import gen_grid_metric, gen_random_config

    game = gen_grid_metric(7, 7, 1)
    config = gen_random_config(game, 1)
    core = GameCore(game)
    dense = core.to_dense(config)
    start = time.perf_counter()
    for _ in range(repeats):
        core.received_masks(dense)
    return time.perf_counter() - start


def bench_improving_move_scan(seeds: int = 25) -> float:
    from flowgames.dynamics import improving_move
    from flowgames.scenarios import gen_random_config, gen_random_homogeneous

    cases = []
    for seed in range(seeds):
        game = gen_random_homogeneous(seed, n_range=(6, 8), p_range=(6, 8), budget_range=(3, 3))
        cases.append((game, gen_random_config(game, seed)))
    start = time.perf_counter()
    for game, config in cases:
        for uid in game.user_ids:
            improving_move(game, config, uid, search="exhaustive")
    return time.perf_counter() - start


def bench_dynamics_batch(seeds: int = 40) -> float:
    from flowgames.dynamics import run_dynamics
    from flowgames.scenarios import gen_random_config, gen_random_homogeneous

    cases = []
    for seed in range(seeds):
        game = gen_random_homogeneous(seed, n_range=(5, 8), p_range=(5, 8), budget_range=(2, 3))
        cases.append((game, gen_random_config(game, seed)))
    start = time.perf_counter()
    for game, config in cases:
        trace = run_dynamics(game, config, scheduler="round_robin", seed=0)
        assert trace.verdict.kind == "converged"
    return time.perf_counter() - start


WORKLOADS = {
    "plain_dissemination": bench_plain_dissemination,
    "expertise_dissemination": bench_expertise_dissemination,
    "improving_move_scan": bench_improving_move_scan,
    "dynamics_batch": bench_dynamics_batch,
}


def run_backend() -> None:
    import flowgames

    results = {"backend": flowgames.KERNEL_BACKEND}
    for name, fn in WORKLOADS.items():
        results[name] = fn()
    print(json.dumps(results))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        run_backend()
        return 0

    rows = {}
    for backend, force in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, FLOWGAMES_PURE_PYTHON=force)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker"],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            return 1
        data = json.loads(proc.stdout.strip().splitlines()[-1])
        rows[backend] = data
        if backend == "cython" and data["backend"] != "cython":
            print("note: compiled backend unavailable, comparing python with itself")

    print(f"{'workload':<26} {'python (s)':>12} {'cython (s)':>12} {'speedup':>9}")
    for name in WORKLOADS:
        py = rows["python"][name]
        cy = rows["cython"][name]
        speedup = py / cy if cy > 0 else float("inf")
        print(f"{name:<26} {py:>12.4f} {cy:>12.4f} {speedup:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
