"""Generator determinism and the numeric claims each family reproduces."""

from __future__ import annotations

from fractions import Fraction

import pytest

from flowgames.analysis import global_welfare, is_equilibrium, poa_ratio
from flowgames.dynamics import run_dynamics
from flowgames.model import Configuration, serialize_configuration, serialize_instance
from flowgames.propagation import disseminate, utility
from flowgames.scenarios import (
    ScenarioSpec,
    build_scenario,
    gen_chain_vs_ring,
    gen_four_cycle_game,
    gen_grid_metric,
    gen_het_poa,
    gen_instability,
    gen_random_config,
    gen_random_heterogeneous,
    gen_random_homogeneous,
    gen_random_metric,
    gen_random_multigraph,
    instability_allowed_strategies,
)
from flowgames.metric import structure_report


def test_generators_are_deterministic():
    specs = [
        ScenarioSpec("chain_vs_ring", (("n", 5),)),
        ScenarioSpec("four_cycle"),
        ScenarioSpec("het_poa", (("delta", 3), ("k", 4))),
        ScenarioSpec("instability"),
        ScenarioSpec("grid_metric", (("r", 1), ("radius", 3), ("side", 3))),
        ScenarioSpec("random_homogeneous", (("seed", 11),)),
        ScenarioSpec("random_metric", (("seed", 11),)),
    ]
    for spec in specs:
        first = spec.build()
        second = spec.build()
        assert serialize_instance(first.game) == serialize_instance(second.game)
        for name in first.configs:
            assert serialize_configuration(first.configs[name]) == serialize_configuration(
                second.configs[name]
            )


def test_unknown_family_and_params():
    with pytest.raises(ValueError, match="unknown scenario family"):
        build_scenario("nope")
    with pytest.raises(ValueError, match="unknown parameters"):
        build_scenario("four_cycle", n=3)


def test_chain_vs_ring_values():
    game, chain, ring = gen_chain_vs_ring(6)
    assert global_welfare(game, chain) == 12
    assert global_welfare(game, ring) == 36


def test_chain_vs_ring_degenerate_pair():
    game, chain, ring = gen_chain_vs_ring(2)
    wc, wr = global_welfare(game, chain), global_welfare(game, ring)
    assert poa_ratio(game, [wc], wr) == 1


def test_chain_and_ring_are_equilibria():
    for n in range(3, 9):
        game, chain, ring = gen_chain_vs_ring(n)
        assert is_equilibrium(game, chain).is_equilibrium, n
        assert is_equilibrium(game, ring).is_equilibrium, n


def test_four_cycle_transitions():
    game, a, b, c, d = gen_four_cycle_game()
    states = [(a, c), (b, c), (b, d), (a, d), (a, c)]
    movers = [100, 101, 100, 101]
    deltas = []
    for i, mover in enumerate(movers):
        before = Configuration({100: states[i][0], 101: states[i][1]})
        after = Configuration({100: states[i + 1][0], 101: states[i + 1][1]})
        deltas.append(
            utility(game, disseminate(game, after), mover)
            - utility(game, disseminate(game, before), mover)
        )
    assert deltas == [1, 1, -1, 1]
    assert sum(deltas) == 2


def test_het_poa_welfare_formulas():
    for k, delta in [(3, 2), (4, 2), (4, 3), (6, 4)]:
        game, bench, eq = gen_het_poa(k, delta)
        n = 2 * k
        assert global_welfare(game, bench) == n * (n // 2 + delta - 2)
        assert global_welfare(game, eq) == n * (2 * delta - 2)
        ratio = poa_ratio(game, [global_welfare(game, eq)], global_welfare(game, bench))
        assert ratio >= Fraction(n, 4 * delta)


def test_instability_cycle_and_gains():
    game, initial = gen_instability()
    d = disseminate(game, initial)
    assert {utility(game, d, 106), utility(game, d, 107)} == {801, 702}
    trace = run_dynamics(game, initial, restrict=instability_allowed_strategies(game))
    assert trace.verdict.kind == "cycled"
    assert trace.verdict.cycle_period == 4
    for mv in trace.moves:
        assert mv.utility_after - mv.utility_before == 99
        assert mv.utility_after > mv.utility_before


def test_grid_metric_passes_structure_checks():
    game = gen_grid_metric(4, 4, 1)
    report = structure_report(game, 1)
    assert report.ok
    single = gen_grid_metric(1, 1, 1)
    assert single.n == 1 and single.users[0].budget == 1


def test_random_families_shapes():
    for seed in range(20):
        hom = gen_random_homogeneous(seed)
        assert 2 <= hom.n <= 8 and 2 <= hom.p <= 8
        assert hom.is_homogeneous
        het = gen_random_heterogeneous(seed)
        assert het.n + het.p <= 7
        met = gen_random_metric(seed)
        assert met.n + met.p <= 7
        assert met.mode == "expertise_filtered"
        cfg = gen_random_config(het, seed)
        cfg.validate(het)


def test_random_multigraph_is_strongly_connected_and_dense():
    for seed in range(20):
        arcs = gen_random_multigraph(seed)
        nodes = {x for arc in arcs for x in arc}
        n = len(nodes)
        assert len(arcs) >= 2 * n - 1
        adjacency: dict = {}
        for a, b in arcs:
            adjacency.setdefault(a, set()).add(b)
        for start in nodes:
            seen = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in adjacency.get(x, ()):
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            assert seen == nodes
