"""Shared fixtures and independent brute-force oracles for the test suite."""

from __future__ import annotations

from itertools import combinations

from flowgames.metric import MetricSpace
from flowgames.model import MODE_EXPERTISE, Configuration, FlowGame, User
from flowgames.propagation import active_dissemination, user_utility


def line_space(points) -> MetricSpace:
    pts = tuple(points)
    return MetricSpace(pts, tuple(tuple(abs(a - b) for b in pts) for a in pts))


def oracle_received(game: FlowGame, config: Configuration) -> dict[int, set[int]]:
    """Dissemination by brute-force enumeration of simple paths.

    Deliberately shares nothing with the engine: recursive DFS over explicit
    paths, re-checking interest (and distance monotonicity in expertise mode)
    edge by edge.
    """
    followers: dict[int, list[int]] = {}
    for uid in game.user_ids:
        for v in config.strategy(uid):
            followers.setdefault(v, []).append(uid)
    received: dict[int, set[int]] = {uid: set() for uid in game.user_ids}
    expertise = game.mode == MODE_EXPERTISE
    space = game.metric

    def center(uid: int) -> int:
        return game.user(uid).ball.center

    for s in game.producers:

        def dfs(node: int, visited: frozenset) -> None:
            for w in sorted(followers.get(node, ())):
                if w in visited:
                    continue
                if node != s:
                    if s not in game.user(node).weights:
                        continue
                    if expertise and space.distance(center(node), s) > space.distance(center(w), s):
                        continue
                received[w].add(s)
                dfs(w, visited | {w})

        dfs(s, frozenset())
    return received


def brute_force_equilibrium(game: FlowGame, config: Configuration) -> bool:
    """Deviation enumeration over every subset within budget, via full recomputes."""
    endpoints = sorted(set(game.user_ids) | game.producer_set)
    dissemination = active_dissemination(game, config)
    for u in game.users:
        current = user_utility(game, dissemination, u.id)
        pool = [e for e in endpoints if e != u.id]
        for k in range(0, u.budget + 1):
            for combo in combinations(pool, k):
                deviated = config.replaced(u.id, combo)
                value = user_utility(game, active_dissemination(game, deviated), u.id)
                if value > current:
                    return False
    return True


def homogeneous_game(n: int, p: int, budgets) -> FlowGame:
    weights = {s: 1 for s in range(p)}
    users = tuple(
        User(id=100 + i, budget=budgets[i], weights=dict(weights)) for i in range(n)
    )
    return FlowGame(producers=tuple(range(p)), users=users, scale=1)
