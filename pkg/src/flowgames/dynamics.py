"""Selfish-move search, schedulers, cycle detection, and lexicographic potentials."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator, Optional, Sequence

from ._engine import DenseConfig, GameCore
from .model import Configuration, FlowGame, ValidationError

DEFAULT_EXHAUSTIVE_CAP = 10**6
DEFAULT_MAX_STEPS = 10_000

SEARCH_SWAP = "swap"
SEARCH_EXHAUSTIVE = "exhaustive"
SEARCH_COVER = "cover"
SEARCH_MODES = (SEARCH_SWAP, SEARCH_EXHAUSTIVE, SEARCH_COVER)

SCHEDULER_ROUND_ROBIN = "round_robin"
SCHEDULER_RANDOM = "random"
SCHEDULERS = (SCHEDULER_ROUND_ROBIN, SCHEDULER_RANDOM)


class ExhaustiveCapError(RuntimeError):
    """The exhaustive candidate count exceeds the configured cap."""


@dataclass(frozen=True)
class Move:
    """A strictly improving unilateral strategy change."""

    user: int
    old_strategy: frozenset[int]
    new_strategy: frozenset[int]
    utility_before: int
    utility_after: int

    def to_json_obj(self) -> dict:
        return {
            "user": self.user,
            "old": sorted(self.old_strategy),
            "new": sorted(self.new_strategy),
            "u_before": self.utility_before,
            "u_after": self.utility_after,
        }


@dataclass(frozen=True)
class Verdict:
    kind: str  # "converged" | "cycled" | "step_limit"
    steps: int
    cycle_entry: Optional[int] = None
    cycle_period: Optional[int] = None

    def to_json_obj(self) -> dict:
        obj: dict = {"verdict": self.kind, "steps": self.steps}
        if self.kind == "cycled":
            obj["entry"] = self.cycle_entry
            obj["period"] = self.cycle_period
        return obj


@dataclass
class DynamicsTrace:
    """Ordered move log with potentials and the termination verdict."""

    initial: Configuration
    moves: list[Move]
    potentials: list[Optional[tuple[int, ...]]]
    verdict: Verdict
    scheduler: str
    search: str
    certification: str
    seed: Optional[int]
    rounds: int

    def configurations(self) -> Iterator[Configuration]:
        """Replay the move log: yields the configuration at every step."""
        config = self.initial
        yield config
        for mv in self.moves:
            config = config.replaced(mv.user, mv.new_strategy)
            yield config

    @property
    def final(self) -> Configuration:
        config = self.initial
        for mv in self.moves:
            config = config.replaced(mv.user, mv.new_strategy)
        return config


def _exhaustive_count(n_endpoints: int, k_max: int) -> int:
    return sum(comb(n_endpoints, k) for k in range(1, min(k_max, n_endpoints) + 1))


def _swap_candidates(core: GameCore, u: int, current: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    cur = set(current)
    endpoints = core.endpoints_for(u)
    seen = {current}

    def emit(nodes: set[int]):
        t = tuple(sorted(nodes))
        if t not in seen:
            seen.add(t)
            yield t

    for e in current:
        yield from emit(cur - {e})
    room = len(current) < core.budgets[u]
    for f in endpoints:
        if f in cur:
            continue
        if room:
            yield from emit(cur | {f})
        for e in current:
            yield from emit((cur - {e}) | {f})


def _cover_candidate(
    core: GameCore, u: int, delivery: list[int], covered_now: int
) -> Optional[tuple[int, ...]]:
    """Greedy prefix best response for nearest-subject games.

    Walk subjects outward from the user's center; whenever the next subject is
    uncovered, follow the deliverer that adds the most new subjects (ties to
    the lowest endpoint id) until the budget is spent.
    """
    order = sorted(range(core.p), key=lambda s: (core.dist[u][s], s))
    endpoints = core.endpoints_for(u)
    chosen: list[int] = []
    covered = 0
    budget = core.budgets[u]
    for s in order:
        if covered >> s & 1:
            continue
        if len(chosen) >= budget:
            break
        best = -1
        best_new = 0
        for x in endpoints:  # id-ascending, so the first maximum wins ties
            m = delivery[x]
            if not (m >> s & 1):
                continue
            new = (m & ~covered).bit_count()
            if new > best_new:
                best = x
                best_new = new
        if best < 0:
            continue  # nobody can deliver s right now; later subjects may still be coverable
        chosen.append(best)
        covered |= delivery[best]
    if not chosen:
        return None
    return tuple(sorted(chosen))


def _best_candidate(
    core: GameCore,
    dense: DenseConfig,
    u: int,
    search: str,
    restrict_strategies: Optional[Sequence[frozenset[int]]],
    exhaustive_cap: int,
) -> Optional[tuple[tuple[int, ...], int, int]]:
    """Best strictly improving strategy for user index u, or None.

    Returns (new nodes, utility_before, utility_after). Ties between equally
    improving strategies go to the lowest sorted endpoint-id tuple.
    """
    delivery = core.delivery_masks(dense, u)
    current = dense[u]
    cur_mask = core.mask_of_strategy(delivery, current)
    cur_util = core.utility_of_mask(u, cur_mask)

    def id_tuple(nodes: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sorted(core.id_of_node[x] for x in nodes))

    best: Optional[tuple[int, ...]] = None
    best_util = cur_util
    best_ids: Optional[tuple[int, ...]] = None

    def consider(nodes: tuple[int, ...]) -> None:
        nonlocal best, best_util, best_ids
        mask = core.mask_of_strategy(delivery, nodes)
        util = core.utility_of_mask(u, mask)
        if util < best_util or (util == best_util and best is None):
            return
        if core.nearest and not core.reconnection_ok(u, cur_mask, mask):
            return
        ids = id_tuple(nodes)
        if util > best_util or (best_ids is not None and ids < best_ids):
            best, best_util, best_ids = nodes, util, ids

    if restrict_strategies is not None:
        for strategy in restrict_strategies:
            if len(strategy) > core.budgets[u]:
                raise ValidationError(
                    f"restricted strategy for user {core.uid_of[u]} exceeds its budget"
                )
            try:
                nodes = tuple(sorted(core.node_of_id[e] for e in strategy))
            except KeyError as exc:
                raise ValidationError(
                    f"restricted strategy for user {core.uid_of[u]}: unknown endpoint {exc.args[0]}"
                ) from None
            if u in nodes:
                raise ValidationError(f"restricted strategy for user {core.uid_of[u]} self-follows")
            if nodes != current:
                consider(nodes)
    elif search == SEARCH_SWAP:
        for nodes in _swap_candidates(core, u, current):
            consider(nodes)
    elif search == SEARCH_COVER:
        if not core.nearest:
            raise ValidationError("cover search requires utility_mode=nearest_subject")
        nodes = _cover_candidate(core, u, delivery, cur_mask)
        if nodes is not None and nodes != current:
            consider(nodes)
    elif search == SEARCH_EXHAUSTIVE:
        endpoints = core.endpoints_for(u)
        k_max = min(core.budgets[u], len(endpoints))
        if _exhaustive_count(len(endpoints), k_max) > exhaustive_cap:
            raise ExhaustiveCapError(
                f"exhaustive search for user {core.uid_of[u]} exceeds cap {exhaustive_cap}"
            )
        if not core.nearest:
            # hot path: compiled subset search over delivery masks
            dmask_by_id = [delivery[x] for x in endpoints]
            util, combo = core._impl.best_weighted_subset(
                dmask_by_id, core.weights[u], core.p, k_max
            )
            if util > cur_util and combo is not None:
                nodes = tuple(sorted(endpoints[i] for i in combo))
                best, best_util, best_ids = nodes, util, id_tuple(nodes)
        else:
            for k in range(1, k_max + 1):
                for combo in combinations(endpoints, k):
                    consider(tuple(sorted(combo)))
    else:
        raise ValidationError(f"unknown search mode {search!r}")

    if best is None or best_util <= cur_util:
        return None
    return best, cur_util, best_util


def improving_move(
    game: FlowGame,
    config: Configuration,
    uid: int,
    search: str = SEARCH_EXHAUSTIVE,
    restrict: Optional[dict[int, Sequence[frozenset[int]]]] = None,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
) -> Optional[Move]:
    """Best strictly improving move for one user, or None if it has none.

    Swap search tries single-edge add/remove/replace changes; exhaustive search
    enumerates every subset within budget (raising ExhaustiveCapError above the
    cap); cover search builds a greedy outward-covering best response for
    nearest-subject games. In nearest-subject games a move is only offered when
    it loses no subject strictly closer than its closest gain.
    """
    config.validate(game)
    core = GameCore(game)
    try:
        u = core.uidx[uid]
    except KeyError:
        raise ValidationError(f"unknown user {uid}") from None
    strategies = restrict.get(uid) if restrict else None
    found = _best_candidate(core, core.to_dense(config), u, search, strategies, exhaustive_cap)
    if found is None:
        return None
    nodes, before, after = found
    return Move(
        user=uid,
        old_strategy=config.strategy(uid),
        new_strategy=frozenset(core.id_of_node[x] for x in nodes),
        utility_before=before,
        utility_after=after,
    )


def _trace_potential(core: GameCore, dense: DenseConfig) -> Optional[tuple[int, ...]]:
    # expertise/nearest games carry the increasing distance-pair potential even
    # when their weights happen to look homogeneous; the decreasing reception
    # histogram is only sound for plain dissemination with count utility
    if core.expertise and core.nearest:
        return core.distance_pair_counts(dense)
    if core.game.is_homogeneous and core.game.mode == "plain" and not core.nearest:
        return core.reception_counts(dense)
    return None


def run_dynamics(
    game: FlowGame,
    initial: Configuration,
    scheduler: str = SCHEDULER_ROUND_ROBIN,
    search: str = SEARCH_EXHAUSTIVE,
    seed: Optional[int] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    restrict: Optional[dict[int, Sequence[frozenset[int]]]] = None,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
) -> DynamicsTrace:
    """Run selfish dynamics until a quiescent round, a repeated configuration,
    or the step limit.

    A round offers every user one move opportunity (round-robin in id order, or
    a seeded random permutation). Convergence is declared only after a full
    round without moves; a repeated configuration (checked structurally) ends
    the run with a cycle verdict. Fixed seeds make runs bit-reproducible.
    """
    if scheduler not in SCHEDULERS:
        raise ValidationError(f"unknown scheduler {scheduler!r}")
    if search not in SEARCH_MODES:
        raise ValidationError(f"unknown search mode {search!r}")
    initial.validate(game)
    core = GameCore(game)
    dense = core.to_dense(initial)
    rng = random.Random(seed)
    moves: list[Move] = []
    potentials: list[Optional[tuple[int, ...]]] = [_trace_potential(core, dense)]
    seen: dict[tuple, int] = {tuple(dense): 0}
    certification = "restricted" if restrict else search
    rounds = 0
    user_indices = list(range(core.n))

    def finish(verdict: Verdict) -> DynamicsTrace:
        return DynamicsTrace(
            initial=initial,
            moves=moves,
            potentials=potentials,
            verdict=verdict,
            scheduler=scheduler,
            search=search,
            certification=certification,
            seed=seed,
            rounds=rounds,
        )

    while True:
        rounds += 1
        order = list(user_indices)
        if scheduler == SCHEDULER_RANDOM:
            rng.shuffle(order)
        moved = False
        for u in order:
            if len(moves) >= max_steps:
                return finish(Verdict("step_limit", len(moves)))
            strategies = restrict.get(core.uid_of[u]) if restrict else None
            try:
                found = _best_candidate(core, dense, u, search, strategies, exhaustive_cap)
            except ExhaustiveCapError:
                # documented fallback: swap search, certified as swap-only
                certification = "swap_only"
                found = _best_candidate(core, dense, u, SEARCH_SWAP, strategies, exhaustive_cap)
            if found is None:
                continue
            nodes, before, after = found
            moves.append(
                Move(
                    user=core.uid_of[u],
                    old_strategy=frozenset(core.id_of_node[x] for x in dense[u]),
                    new_strategy=frozenset(core.id_of_node[x] for x in nodes),
                    utility_before=before,
                    utility_after=after,
                )
            )
            dense = list(dense)
            dense[u] = nodes
            potentials.append(_trace_potential(core, dense))
            moved = True
            key = tuple(dense)
            step = len(moves)
            if key in seen:
                return finish(
                    Verdict("cycled", step, cycle_entry=seen[key], cycle_period=step - seen[key])
                )
            seen[key] = step
        if not moved:
            return finish(Verdict("converged", len(moves)))


def detect_cycle(trace: DynamicsTrace) -> Optional[tuple[int, int]]:
    """First configuration recurrence in a trace as (entry step, period)."""
    seen: dict[tuple, int] = {}
    for step, config in enumerate(trace.configurations()):
        key = tuple(sorted((uid, tuple(sorted(eps))) for uid, eps in config.follows.items()))
        if key in seen:
            return seen[key], step - seen[key]
        seen[key] = step
    return None


def potential_homogeneous(game: FlowGame, config: Configuration) -> tuple[int, ...]:
    """Reception histogram (n_0..n_p); selfish moves strictly decrease it lexicographically."""
    if not game.is_homogeneous:
        raise ValidationError("potential_homogeneous requires a homogeneous game")
    config.validate(game)
    core = GameCore(game)
    return core.reception_counts(core.to_dense(config))


def potential_metric(game: FlowGame, config: Configuration) -> tuple[int, ...]:
    """Received-pair counts per realized distance (n_1..n_m); selfish moves
    strictly increase it lexicographically in expertise/nearest games."""
    if not (game.mode == "expertise_filtered" and game.utility_mode == "nearest_subject"):
        raise ValidationError(
            "potential_metric requires expertise filtering and nearest-subject utility"
        )
    config.validate(game)
    core = GameCore(game)
    return core.distance_pair_counts(core.to_dense(config))
