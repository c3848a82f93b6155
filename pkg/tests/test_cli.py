"""Command-line behavior: exit codes, manifests, and byte-stable outputs."""

from __future__ import annotations

import json

from flowgames.cli import main
from flowgames.model import load_configuration, load_instance
from flowgames.propagation import disseminate_expertise, utility_nearest


def run_cli(*argv) -> int:
    return main(list(argv))


def test_scenario_emit_and_verify_roundtrip(tmp_path):
    instance = tmp_path / "chain.json"
    chain = tmp_path / "chain_cfg.json"
    ring = tmp_path / "ring_cfg.json"
    code = run_cli(
        "scenario",
        "chain_vs_ring",
        "--param",
        "n=6",
        "--emit",
        str(instance),
        "--emit-config",
        f"chain={chain}",
        "--emit-config",
        f"ring={ring}",
    )
    assert code == 0
    game = load_instance(instance.read_text())
    load_configuration(chain.read_text(), game)

    report = tmp_path / "report.json"
    assert run_cli(
        "verify", "--instance", str(instance), "--config", str(chain), "--out", str(report)
    ) == 0
    obj = json.loads(report.read_text())
    assert obj["is_equilibrium"] and obj["certification"] == "exhaustive"
    assert obj["welfare"] == 12
    assert obj["manifest"]["command"] == "verify"
    assert "instance_sha256" in obj["manifest"]


def test_verify_failure_emits_witness(tmp_path):
    instance = tmp_path / "inst.json"
    run_cli("scenario", "chain_vs_ring", "--param", "n=4", "--emit", str(instance))
    empty = tmp_path / "empty.json"
    empty.write_text('{"follows": {}}')
    out = tmp_path / "report.json"
    code = run_cli("verify", "--instance", str(instance), "--config", str(empty), "--out", str(out))
    assert code == 4
    obj = json.loads(out.read_text())
    assert not obj["is_equilibrium"]
    assert obj["witness"]["u_after"] > obj["witness"]["u_before"]


def test_run_cycles_on_instability(tmp_path):
    instance = tmp_path / "inst.json"
    initial = tmp_path / "initial.json"
    restrict = tmp_path / "restrict.json"
    assert run_cli(
        "scenario",
        "instability",
        "--emit",
        str(instance),
        "--emit-config",
        f"initial={initial}",
        "--emit-restrict",
        str(restrict),
    ) == 0
    trace = tmp_path / "trace.jsonl"
    code = run_cli(
        "run",
        "--instance",
        str(instance),
        "--config",
        str(initial),
        "--restrict",
        str(restrict),
        "--out",
        str(trace),
    )
    assert code == 2
    lines = [json.loads(line) for line in trace.read_text().splitlines()]
    assert "manifest" in lines[0]
    assert lines[-1]["verdict"] == "cycled" and lines[-1]["period"] == 4
    assert [rec["user"] for rec in lines[1:-1]] == [107, 106, 107, 106]


def test_run_converges_and_is_byte_stable(tmp_path):
    instance = tmp_path / "inst.json"
    run_cli("scenario", "random_homogeneous", "--param", "seed=5", "--emit", str(instance))
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    for out in (out1, out2):
        code = run_cli(
            "run", "--instance", str(instance), "--seed", "9", "--scheduler", "random",
            "--out", str(out),
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()
    final = json.loads(out1.read_text().splitlines()[-1])
    assert final["verdict"] == "converged"


def test_run_step_limit_exit_code(tmp_path):
    instance = tmp_path / "inst.json"
    run_cli("scenario", "chain_vs_ring", "--param", "n=4", "--emit", str(instance))
    code = run_cli("run", "--instance", str(instance), "--max-steps", "0", "--out", "-")
    assert code == 3


def test_poa_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run_cli("poa", "chain_vs_ring", "--n", "4..8", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# manifest=")
    assert lines[1] == "family,params,welfare_eq,welfare_bench,ratio"
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 5
    for row, n in zip(rows, range(4, 9)):
        assert row[2] == str(2 * n) and row[3] == str(n * n)
    single = tmp_path / "single.csv"
    assert run_cli("poa", "het_poa", "--k", "4", "--delta", "2", "--out", str(single)) == 0
    assert len(single.read_text().splitlines()) == 3


def test_construct_grid(tmp_path):
    instance = tmp_path / "grid.json"
    run_cli(
        "scenario", "grid_metric",
        "--param", "side=3", "--param", "radius=3", "--param", "r=1",
        "--emit", str(instance),
    )
    config_path = tmp_path / "config.json"
    report_path = tmp_path / "report.json"
    code = run_cli(
        "construct", "--instance", str(instance), "--r", "1",
        "--out", str(config_path), "--report", str(report_path),
    )
    assert code == 0
    game = load_instance(instance.read_text())
    config = load_configuration(config_path.read_text(), game)
    d = disseminate_expertise(game, config)
    assert all(utility_nearest(game, d, u.id) == u.ball.radius for u in game.users)
    assert json.loads(config_path.read_text())["manifest"]["command"] == "construct"
    report = json.loads(report_path.read_text())
    assert report["structure"]["covering_ok"] and report["structure"]["regularity_ok"]


def test_construct_fails_on_bad_geometry(tmp_path):
    instance = tmp_path / "bad.json"
    doc = {
        "scale": 1,
        "mode": "expertise_filtered",
        "utility_mode": "nearest_subject",
        "producers": list(range(8)),
        "users": [
            {"id": 100, "budget": 10, "center": 0, "radius": 100},
            {"id": 101, "budget": 10, "center": 1, "radius": 1},
        ]
        + [{"id": 102 + i, "budget": 10, "center": 2 + i, "radius": 4} for i in range(6)],
        "metric": {
            "points": list(range(8)),
            "matrix": [[abs(a - b) for b in range(8)] for a in range(8)],
        },
    }
    instance.write_text(json.dumps(doc))
    report = tmp_path / "report.json"
    code = run_cli(
        "construct", "--instance", str(instance), "--r", "1",
        "--out", str(tmp_path / "cfg.json"), "--report", str(report),
    )
    assert code == 4
    obj = json.loads(report.read_text())
    assert "regularity" in obj["error"]
    assert obj["structure"]["regularity_witness"] == [100, 101]


def test_usage_and_io_errors_exit_one(tmp_path):
    assert run_cli("run", "--no-such-flag") == 1
    assert run_cli("run", "--instance", str(tmp_path / "missing.json")) == 1
    assert run_cli("scenario", "four_cycle", "--param", "bogus") == 1
