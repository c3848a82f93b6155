"""Equilibrium verification, welfare accounting, benchmarks, and graph structure checks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ._engine import GameCore
from .dynamics import (
    DEFAULT_EXHAUSTIVE_CAP,
    SEARCH_EXHAUSTIVE,
    SEARCH_SWAP,
    Move,
    _best_candidate,
)
from .model import Configuration, FlowGame, ValidationError
from .propagation import active_dissemination, user_utility


@dataclass(frozen=True)
class EquilibriumReport:
    """Whether a configuration is stable, with a profitable deviation if not."""

    is_equilibrium: bool
    witness: Optional[Move]
    certification: str  # "exhaustive" | "swap_only"

    def to_json_obj(self) -> dict:
        return {
            "is_equilibrium": self.is_equilibrium,
            "certification": self.certification,
            "witness": self.witness.to_json_obj() if self.witness else None,
        }


def is_equilibrium(
    game: FlowGame,
    config: Configuration,
    search: str = SEARCH_EXHAUSTIVE,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
) -> EquilibriumReport:
    """Check every user for an improving deviation (lowest user id witnesses first).

    Exhaustive search certifies a pure Nash equilibrium; swap search certifies
    single-edge stability only. The exhaustive cap propagates as an error.
    """
    if search not in (SEARCH_EXHAUSTIVE, SEARCH_SWAP):
        raise ValidationError(f"unknown search mode {search!r}")
    config.validate(game)
    core = GameCore(game)
    dense = core.to_dense(config)
    certification = "exhaustive" if search == SEARCH_EXHAUSTIVE else "swap_only"
    for u in range(core.n):
        found = _best_candidate(core, dense, u, search, None, exhaustive_cap)
        if found is not None:
            nodes, before, after = found
            witness = Move(
                user=core.uid_of[u],
                old_strategy=frozenset(core.id_of_node[x] for x in dense[u]),
                new_strategy=frozenset(core.id_of_node[x] for x in nodes),
                utility_before=before,
                utility_after=after,
            )
            return EquilibriumReport(False, witness, certification)
    return EquilibriumReport(True, None, certification)


def global_welfare(game: FlowGame, config: Configuration) -> int:
    """Sum of per-user utilities (ticks) under the game's active utility mode."""
    dissemination = active_dissemination(game, config)
    return sum(user_utility(game, dissemination, uid) for uid in game.user_ids)


@dataclass(frozen=True)
class UtilityBound:
    """Per-user utility ceiling in subject counts; refined when the ring analysis applies."""

    value: Fraction
    refined: bool


def homogeneous_upper_bound(game: FlowGame) -> UtilityBound:
    """Best utility any user can reach in a homogeneous game.

    In the refined regime (every budget below the subject count, at least two
    budgets >= 2) the bound is min(p, sum(budgets) - n); otherwise the cruder
    min(p, sum(budgets)) is returned and flagged as unrefined.
    """
    if not game.is_homogeneous:
        raise ValidationError("upper bound requires a homogeneous game")
    budgets = [u.budget for u in game.users]
    total = sum(budgets)
    refined = all(b < game.p for b in budgets) and sum(1 for b in budgets if b >= 2) >= 2
    if refined:
        return UtilityBound(Fraction(min(game.p, total - game.n)), True)
    return UtilityBound(Fraction(min(game.p, total)), False)


def homogeneous_benchmark(game: FlowGame) -> Configuration:
    """Reference near-optimal configuration: an oriented ring of budget>=2 users,
    budget-1 users attached to it, and all residual budget on distinct producers.

    Ring orientation and producer assignment are lowest-id-first deterministic.
    """
    homogeneous_upper_bound(game)  # also enforces homogeneity
    ring = [u.id for u in game.users if u.budget >= 2]
    if len(ring) < 2:
        raise ValidationError("benchmark requires at least two users with budget >= 2")
    follows: dict[int, set[int]] = {}
    for i, uid in enumerate(ring):
        follows[uid] = {ring[i - 1]} if len(ring) > 1 else set()
    for u in game.users:
        if u.budget == 1:
            follows[u.id] = {ring[0]} if ring[0] != u.id else {ring[1]}
    producers = iter(game.producers)
    for u in game.users:
        spent = len(follows[u.id])
        while spent < u.budget:
            s = next(producers, None)
            if s is None:
                break
            follows[u.id].add(s)
            spent += 1
    return Configuration({uid: frozenset(eps) for uid, eps in follows.items()})


def poa_ratio(
    game: FlowGame, equilibrium_welfares: Sequence[int], benchmark_welfare: int
) -> Fraction:
    """Benchmark welfare over the worst sampled equilibrium welfare, exact.

    This lower-bounds the true price of anarchy whenever the benchmark is not
    proven optimal and the equilibria are sampled rather than enumerated.
    """
    if not equilibrium_welfares:
        raise ValidationError("need at least one equilibrium welfare")
    worst = min(equilibrium_welfares)
    if worst <= 0:
        raise ValidationError("worst equilibrium welfare is zero; ratio is unbounded")
    return Fraction(benchmark_welfare, worst)


def _reachable(adjacency: dict, start) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adjacency.get(x, ()):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def find_transitivity_arc(arcs: Sequence[tuple[int, int]]) -> Optional[tuple[int, int]]:
    """First arc (s, t) made redundant by an s-to-t path avoiding that one arc.

    Arcs form a multigraph: parallel copies count, so a duplicated arc is
    always redundant; a self-loop is redundant via the empty path.
    """
    arcs = list(arcs)
    for i, (s, t) in enumerate(arcs):
        if s == t:
            return s, t
        adjacency: dict = {}
        for j, (a, b) in enumerate(arcs):
            if j != i:
                adjacency.setdefault(a, set()).add(b)
        if t in _reachable(adjacency, s):
            return s, t
    return None


def strongly_connected_components(
    nodes: Iterable, arcs: Iterable[tuple]
) -> list[list]:
    """Kosaraju SCCs with iterative DFS; components are in discovery order."""
    nodes = list(nodes)
    fwd: dict = {x: [] for x in nodes}
    rev: dict = {x: [] for x in nodes}
    for a, b in arcs:
        fwd[a].append(b)
        rev[b].append(a)
    seen: set = set()
    order: list = []
    for root in nodes:
        if root in seen:
            continue
        stack = [(root, iter(fwd[root]))]
        seen.add(root)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(fwd[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    components: list[list] = []
    assigned: set = set()
    for root in reversed(order):
        if root in assigned:
            continue
        component = [root]
        assigned.add(root)
        stack = [root]
        while stack:
            x = stack.pop()
            for y in rev[x]:
                if y not in assigned:
                    assigned.add(y)
                    component.append(y)
                    stack.append(y)
        components.append(component)
    return components


@dataclass(frozen=True)
class StructureCheckReport:
    """Structural consequences of stability on the deficient part of the graph."""

    ok: bool
    missing_back_paths: tuple[tuple[int, int], ...]
    redundant_arcs: tuple[tuple[int, int], ...]

    def to_json_obj(self) -> dict:
        return {
            "ok": self.ok,
            "missing_back_paths": [list(pair) for pair in self.missing_back_paths],
            "redundant_arcs": [list(pair) for pair in self.redundant_arcs],
        }


def equilibrium_structure_check(game: FlowGame, config: Configuration) -> StructureCheckReport:
    """Verify stability consequences on users that miss subjects.

    For every user following a producer directly, each reachable deficient user
    must reach it back; and the subgraph induced by deficient users must contain
    no redundant (transitivity) arc inside any of its strongly connected
    components. Requires a homogeneous game with all budgets >= 3; a violation
    falsifies the caller's equilibrium certification.
    """
    if not game.is_homogeneous:
        raise ValidationError("structure check requires a homogeneous game")
    if any(u.budget < 3 for u in game.users):
        raise ValidationError("structure check requires every budget >= 3")
    config.validate(game)
    dissemination = active_dissemination(game, config)
    users = set(game.user_ids)
    deficient = {uid for uid in users if len(dissemination.of(uid)) < game.p}
    user_arcs = [
        (v, uid)
        for uid in game.user_ids
        for v in sorted(config.strategy(uid))
        if v in users
    ]
    fwd: dict[int, list[int]] = {uid: [] for uid in users}
    for a, b in user_arcs:
        fwd[a].append(b)

    missing: list[tuple[int, int]] = []
    entry_users = [
        uid for uid in game.user_ids if any(e not in users for e in config.strategy(uid))
    ]
    for u1 in entry_users:
        reach_fwd = _reachable(fwd, u1)
        for uk in sorted(reach_fwd):
            if uk == u1 or uk not in deficient:
                continue
            if u1 not in _reachable(fwd, uk):
                missing.append((u1, uk))

    redundant: list[tuple[int, int]] = []
    deficient_arcs = [(a, b) for a, b in user_arcs if a in deficient and b in deficient]
    for component in strongly_connected_components(sorted(deficient), deficient_arcs):
        members = set(component)
        inner = [(a, b) for a, b in deficient_arcs if a in members and b in members]
        if len(inner) < 2:
            continue
        arc = find_transitivity_arc(inner)
        if arc is not None:
            redundant.append(arc)

    ok = not missing and not redundant
    return StructureCheckReport(ok, tuple(missing), tuple(redundant))
