"""Deterministic instance generators for benchmark families and seeded random sweeps."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .metric import MetricSpace, contact_levels, doubling_constant, sparsity
from .model import (
    MODE_EXPERTISE,
    UTILITY_NEAREST,
    Configuration,
    FlowGame,
    User,
    ball_user,
)

USER_BASE = 100
GRID_USER_BASE = 1000


def _homogeneous_users(n: int, p: int, budgets: list[int]) -> tuple[User, ...]:
    weights = {s: 1 for s in range(p)}
    return tuple(
        User(id=USER_BASE + i, budget=budgets[i], weights=dict(weights)) for i in range(n)
    )


def gen_chain_vs_ring(n: int) -> tuple[FlowGame, Configuration, Configuration]:
    """Budget-2 homogeneous family: a doubly linked chain vs an oriented ring.

    User i pairs with producer i. Chain: interior users follow both neighbors,
    endpoint users follow their own producer and their single neighbor. Ring:
    each user follows its predecessor and one distinct producer.
    """
    if n < 2:
        raise ValueError("chain_vs_ring needs n >= 2")
    game = FlowGame(
        producers=tuple(range(n)),
        users=_homogeneous_users(n, n, [2] * n),
        scale=1,
    )
    chain = {}
    for i in range(n):
        uid = USER_BASE + i
        if i == 0:
            chain[uid] = frozenset({0, USER_BASE + 1})
        elif i == n - 1:
            chain[uid] = frozenset({n - 1, USER_BASE + n - 2})
        else:
            chain[uid] = frozenset({USER_BASE + i - 1, USER_BASE + i + 1})
    ring = {
        USER_BASE + i: frozenset({USER_BASE + (i - 1) % n, i}) for i in range(n)
    }
    return game, Configuration(chain), Configuration(ring)


def gen_four_cycle_game() -> tuple[FlowGame, frozenset, frozenset, frozenset, frozenset]:
    """Two-user homogeneous game whose strategy square has a nonzero-sum 4-cycle.

    Producers {0..3}; user 100 (budget 2) picks strategy A={0} or B={1,2};
    user 101 (budget 3) picks C={100,1,2} or D={100,3}.
    """
    game = FlowGame(
        producers=(0, 1, 2, 3),
        users=(
            User(id=100, budget=2, weights={0: 1, 1: 1, 2: 1, 3: 1}),
            User(id=101, budget=3, weights={0: 1, 1: 1, 2: 1, 3: 1}),
        ),
        scale=1,
    )
    a = frozenset({0})
    b = frozenset({1, 2})
    c = frozenset({100, 1, 2})
    d = frozenset({100, 3})
    return game, a, b, c, d


def gen_het_poa(k: int, delta: int) -> tuple[FlowGame, Configuration, Configuration]:
    """Two-block heterogeneous family with a large benchmark/equilibrium welfare gap.

    2k users in blocks a_i/b_i and 2k(delta-1) producers in groups A_i/B_i.
    a_i values all of A_i u B_i plus the first producer of every other A_j
    (b_i symmetrically with B_j). The benchmark wires two oriented rings; the
    stable configuration pairs a_i with b_i and their own producer groups.
    """
    if k < 2 or delta < 2:
        raise ValueError("het_poa needs k >= 2 and delta >= 2")
    group = delta - 1
    a_group = [tuple(range(i * group, (i + 1) * group)) for i in range(k)]
    b_group = [tuple(range(k * group + i * group, k * group + (i + 1) * group)) for i in range(k)]
    users = []
    for i in range(k):
        weights = {s: 1 for s in a_group[i] + b_group[i]}
        weights.update({a_group[j][0]: 1 for j in range(k) if j != i})
        users.append(User(id=USER_BASE + i, budget=delta, weights=weights))
    for i in range(k):
        weights = {s: 1 for s in a_group[i] + b_group[i]}
        weights.update({b_group[j][0]: 1 for j in range(k) if j != i})
        users.append(User(id=USER_BASE + k + i, budget=delta, weights=weights))
    game = FlowGame(
        producers=tuple(range(2 * k * group)),
        users=tuple(users),
        scale=1,
    )
    benchmark = {}
    equilibrium = {}
    for i in range(k):
        a_id = USER_BASE + i
        b_id = USER_BASE + k + i
        benchmark[a_id] = frozenset({USER_BASE + (i - 1) % k, *a_group[i]})
        benchmark[b_id] = frozenset({USER_BASE + k + (i - 1) % k, *b_group[i]})
        equilibrium[a_id] = frozenset({b_id, *a_group[i]})
        equilibrium[b_id] = frozenset({a_id, *b_group[i]})
    return game, Configuration(benchmark), Configuration(equilibrium)


INSTABILITY_SCALE = 100
INSTABILITY_EPSILON = 1  # ticks; any 0 < eps < scale/2 keeps every inequality strict


def gen_instability() -> tuple[FlowGame, Configuration]:
    """Heterogeneous 8-topic game whose third-slot dynamics cycle forever.

    Producers 0..7 stand for topics a,b,c,d,x,y,k,l. Six relay users republish
    fixed topic pairs (each follows its two producers and values them fully);
    users 106 and 107 hold budget 3, values from the topic table at scale 100
    with epsilon = 1 tick, and start on relays 102 and 104.
    """
    scale = INSTABILITY_SCALE
    eps = INSTABILITY_EPSILON
    two = 2 * scale
    one = scale
    relay_topics = {
        100: (0, 1),  # a, b
        101: (2, 3),  # c, d
        102: (4, 5),  # x, y
        103: (6, 7),  # k, l
        104: (4, 6),  # x, k
        105: (5, 7),  # y, l
    }
    users = [
        User(id=rid, budget=2, weights={t: one for t in topics})
        for rid, topics in relay_topics.items()
    ]
    users.append(
        User(id=106, budget=3, weights={0: two, 1: two, 2: two, 4: eps, 5: one, 6: one, 7: eps})
    )
    users.append(
        User(id=107, budget=3, weights={0: two, 2: two, 3: two, 4: one, 5: eps, 6: eps, 7: one})
    )
    game = FlowGame(producers=tuple(range(8)), users=tuple(users), scale=scale)
    follows = {rid: frozenset(topics) for rid, topics in relay_topics.items()}
    follows[106] = frozenset({100, 107, 102})
    follows[107] = frozenset({101, 106, 104})
    return game, Configuration(follows)


def instability_allowed_strategies(game: FlowGame) -> dict[int, tuple[frozenset, ...]]:
    """Third-slot restriction reproducing the cycle: each mover only swaps its relay."""
    return {
        106: (frozenset({100, 107, 102}), frozenset({100, 107, 103})),
        107: (frozenset({101, 106, 104}), frozenset({101, 106, 105})),
    }


def _l1_grid_space(side: int) -> MetricSpace:
    points = list(range(side * side))
    coords = [(i // side, i % side) for i in points]
    matrix = [
        [abs(ax - bx) + abs(ay - by) for bx, by in coords] for ax, ay in coords
    ]
    return MetricSpace(tuple(points), tuple(tuple(row) for row in matrix))


def grid_budget_bound(space: MetricSpace, producers: tuple[int, ...], radius: int, r: int) -> int:
    """Greedy-certified attention budget for full coverage at the given radii."""
    gamma = doubling_constant(space, "greedy")
    delta = sparsity(space, producers, r)
    return gamma * delta + gamma * gamma * contact_levels(radius, r)


def gen_grid_metric(side: int, radius: int, r: int) -> FlowGame:
    """L1 grid instance: one subject and one user per grid point, uniform radii.

    Budgets are the greedy-certified coverage bound, clamped to the number of
    followable endpoints. Expertise filtering and nearest-subject utility.
    """
    if side < 1 or radius < 0 or r < 1:
        raise ValueError("grid_metric needs side >= 1, radius >= 0, r >= 1")
    space = _l1_grid_space(side)
    producers = tuple(space.points)
    n = len(producers)
    budget = min(grid_budget_bound(space, producers, radius, r), 2 * n - 1)
    users = tuple(
        ball_user(GRID_USER_BASE + i, budget, i, radius, space, producers) for i in range(n)
    )
    return FlowGame(
        producers=producers,
        users=users,
        scale=1,
        mode=MODE_EXPERTISE,
        utility_mode=UTILITY_NEAREST,
        metric=space,
    )


def empty_configuration() -> Configuration:
    return Configuration({})


# -- seeded random families ----------------------------------------------------


def gen_random_homogeneous(
    seed: int,
    n_range: tuple[int, int] = (2, 8),
    p_range: tuple[int, int] = (2, 8),
    budget_range: tuple[int, int] = (1, 3),
) -> FlowGame:
    rng = random.Random(f"hom-{seed}")
    n = rng.randint(*n_range)
    p = rng.randint(*p_range)
    budgets = [rng.randint(*budget_range) for _ in range(n)]
    return FlowGame(producers=tuple(range(p)), users=_homogeneous_users(n, p, budgets), scale=1)


def gen_random_heterogeneous(seed: int) -> FlowGame:
    """Small weighted plain-mode game with n + p <= 7 (oracle-sized)."""
    rng = random.Random(f"het-{seed}")
    n = rng.randint(1, 5)
    p = rng.randint(1, 7 - n)
    weight_table: list[dict[int, int]] = []
    for _ in range(n):
        weights = {}
        for s in range(p):
            ticks = rng.choice((0, 0, 1, 2, 3))
            if ticks:
                weights[s] = ticks
        weight_table.append(weights)
    for s in range(p):
        if not any(s in w for w in weight_table):
            weight_table[rng.randrange(n)][s] = 1
    users = tuple(
        User(id=USER_BASE + i, budget=rng.randint(1, 3), weights=weight_table[i])
        for i in range(n)
    )
    return FlowGame(producers=tuple(range(p)), users=users, scale=1)


def gen_random_metric(
    seed: int,
    n_range: tuple[int, int] = (1, 4),
    max_total: int = 7,
    max_points: int = 5,
) -> FlowGame:
    """Small expertise/nearest game on a random line or L1-plane metric.

    Budgets stay tight (1..3) so multi-hop relaying matters; radii are enlarged
    as needed so every subject lies in some user's ball. The defaults keep
    n + p <= 7 (oracle-sized); pass larger bounds for dynamics sweeps.
    """
    rng = random.Random(f"met-{seed}")
    m_pts = rng.randint(2, max_points)
    if rng.random() < 0.5:
        coords = rng.sample(range(16), m_pts)
        dist = lambda a, b: abs(a - b)
    else:
        coords = rng.sample([(x, y) for x in range(5) for y in range(5)], m_pts)
        dist = lambda a, b: abs(a[0] - b[0]) + abs(a[1] - b[1])
    matrix = tuple(tuple(dist(a, b) for b in coords) for a in coords)
    space = MetricSpace(tuple(range(m_pts)), matrix)
    n = min(rng.randint(*n_range), max_total - 1)
    p = rng.randint(1, min(max_total - n, m_pts))
    producers = tuple(sorted(rng.sample(range(m_pts), p)))
    max_d = max(space.realized_distances())
    centers = [rng.randrange(m_pts) for _ in range(n)]
    radii = [rng.randint(0, max_d) for _ in range(n)]
    for s in producers:
        if not any(space.distance(centers[i], s) <= radii[i] for i in range(n)):
            i = rng.randrange(n)
            radii[i] = space.distance(centers[i], s)
    users = tuple(
        ball_user(USER_BASE + i, rng.randint(1, 3), centers[i], radii[i], space, producers)
        for i in range(n)
    )
    return FlowGame(
        producers=producers,
        users=users,
        scale=1,
        mode=MODE_EXPERTISE,
        utility_mode=UTILITY_NEAREST,
        metric=space,
    )


def gen_random_config(game: FlowGame, seed: int) -> Configuration:
    """Valid random configuration: each user follows a random endpoint sample."""
    rng = random.Random(f"cfg-{seed}")
    endpoints = sorted(set(game.user_ids) | game.producer_set)
    follows = {}
    for u in game.users:
        pool = [e for e in endpoints if e != u.id]
        count = rng.randint(0, min(u.budget, len(pool)))
        follows[u.id] = frozenset(rng.sample(pool, count))
    return Configuration(follows)


def gen_random_multigraph(seed: int, n_range: tuple[int, int] = (2, 12)) -> list[tuple[int, int]]:
    """Strongly connected multigraph arc list with at least 2n - 1 arcs."""
    rng = random.Random(f"graph-{seed}")
    n = rng.randint(*n_range)
    perm = rng.sample(range(n), n)
    arcs = [(perm[i], perm[(i + 1) % n]) for i in range(n)]
    target = 2 * n - 1 + rng.randint(0, 3)
    while len(arcs) < target:
        a = rng.randrange(n)
        b = rng.randrange(n)
        if a != b:
            arcs.append((a, b))
    return arcs


# -- registry for the command line ----------------------------------------------


@dataclass(frozen=True)
class ScenarioBuild:
    game: FlowGame
    configs: dict[str, Configuration] = field(default_factory=dict)
    restrict: Optional[dict[int, tuple[frozenset, ...]]] = None


def _build_chain_vs_ring(n: int = 6) -> ScenarioBuild:
    game, chain, ring = gen_chain_vs_ring(n)
    return ScenarioBuild(game, {"chain": chain, "ring": ring})


def _build_four_cycle() -> ScenarioBuild:
    game, a, b, c, d = gen_four_cycle_game()
    configs = {
        "ac": Configuration({100: a, 101: c}),
        "bc": Configuration({100: b, 101: c}),
        "bd": Configuration({100: b, 101: d}),
        "ad": Configuration({100: a, 101: d}),
    }
    return ScenarioBuild(game, configs)


def _build_het_poa(k: int = 4, delta: int = 2) -> ScenarioBuild:
    game, benchmark, equilibrium = gen_het_poa(k, delta)
    return ScenarioBuild(game, {"benchmark": benchmark, "equilibrium": equilibrium})


def _build_instability() -> ScenarioBuild:
    game, initial = gen_instability()
    return ScenarioBuild(game, {"initial": initial}, restrict=instability_allowed_strategies(game))


def _build_grid_metric(side: int = 4, radius: int = 4, r: int = 1) -> ScenarioBuild:
    return ScenarioBuild(gen_grid_metric(side, radius, r))


def _build_random_homogeneous(seed: int = 0) -> ScenarioBuild:
    game = gen_random_homogeneous(seed)
    return ScenarioBuild(game, {"initial": gen_random_config(game, seed)})


def _build_random_metric(seed: int = 0) -> ScenarioBuild:
    game = gen_random_metric(seed)
    return ScenarioBuild(game, {"initial": gen_random_config(game, seed)})


SCENARIO_FAMILIES = {
    "chain_vs_ring": (_build_chain_vs_ring, ("n",)),
    "four_cycle": (_build_four_cycle, ()),
    "het_poa": (_build_het_poa, ("k", "delta")),
    "instability": (_build_instability, ()),
    "grid_metric": (_build_grid_metric, ("side", "radius", "r")),
    "random_homogeneous": (_build_random_homogeneous, ("seed",)),
    "random_metric": (_build_random_metric, ("seed",)),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """Family id plus integer parameters; equal specs build byte-identical instances."""

    family: str
    params: tuple[tuple[str, int], ...] = ()

    def build(self) -> ScenarioBuild:
        if self.family not in SCENARIO_FAMILIES:
            raise ValueError(f"unknown scenario family {self.family!r}")
        builder, names = SCENARIO_FAMILIES[self.family]
        kwargs = dict(self.params)
        unknown = set(kwargs) - set(names)
        if unknown:
            raise ValueError(f"{self.family}: unknown parameters {sorted(unknown)}")
        return builder(**kwargs)


def build_scenario(family: str, **params: int) -> ScenarioBuild:
    return ScenarioSpec(family, tuple(sorted(params.items()))).build()
