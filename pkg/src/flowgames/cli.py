"""Command-line front end: reproducible runs with machine-readable outputs.

Exit codes: 0 converged/verified, 2 cycled, 3 step limit, 4 verification
failure, 1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import global_welfare, is_equilibrium, poa_ratio
from .dynamics import run_dynamics
from .metric import ConstructionError, build_optimal_configuration, structure_report
from .model import (
    Configuration,
    FlowGame,
    ValidationError,
    canonical_json,
    instance_hash,
    load_configuration,
    load_instance,
    serialize_configuration,
    serialize_instance,
)
from .scenarios import SCENARIO_FAMILIES, build_scenario, gen_chain_vs_ring, gen_het_poa

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CYCLED = 2
EXIT_STEP_LIMIT = 3
EXIT_VERIFY_FAIL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _manifest(command: str, game: Optional[FlowGame] = None, **fields) -> dict:
    obj = {"tool": "flowgames", "version": __version__, "command": command}
    if game is not None:
        obj["instance_sha256"] = instance_hash(game)
    obj.update({k: v for k, v in fields.items() if v is not None})
    return obj


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_restrict(path: str, game: FlowGame) -> dict[int, tuple[frozenset, ...]]:
    doc = json.loads(_read(path))
    if not isinstance(doc, dict) or "allowed" not in doc:
        raise ValidationError("restriction document needs an 'allowed' object")
    out: dict[int, tuple[frozenset, ...]] = {}
    for key, strategies in doc["allowed"].items():
        uid = int(key)
        game.user(uid)
        out[uid] = tuple(frozenset(s) for s in strategies)
    return out


def _ratio_str(ratio: Fraction) -> str:
    if ratio.denominator == 1:
        return str(ratio.numerator)
    return f"{float(ratio):.6g}"


def cmd_run(args) -> int:
    game = load_instance(_read(args.instance))
    config = (
        load_configuration(_read(args.config), game) if args.config else Configuration({})
    )
    restrict = _load_restrict(args.restrict, game) if args.restrict else None
    trace = run_dynamics(
        game,
        config,
        scheduler=args.scheduler.replace("-", "_"),
        search=args.search,
        seed=args.seed,
        max_steps=args.max_steps,
        restrict=restrict,
    )
    manifest = _manifest(
        "run",
        game,
        seed=args.seed,
        scheduler=args.scheduler,
        search=args.search,
        max_steps=args.max_steps,
        certification=trace.certification,
    )
    lines = [canonical_json({"manifest": manifest})]
    for step, mv in enumerate(trace.moves, start=1):
        record = {"step": step, **mv.to_json_obj()}
        potential = trace.potentials[step]
        record["potential"] = list(potential) if potential is not None else None
        lines.append(canonical_json(record))
    lines.append(canonical_json(trace.verdict.to_json_obj()))
    _write(args.out, "\n".join(lines) + "\n")
    if trace.verdict.kind == "cycled":
        return EXIT_CYCLED
    if trace.verdict.kind == "step_limit":
        return EXIT_STEP_LIMIT
    return EXIT_OK


def cmd_verify(args) -> int:
    game = load_instance(_read(args.instance))
    config = load_configuration(_read(args.config), game)
    report = is_equilibrium(game, config, search=args.search)
    obj = {
        "manifest": _manifest("verify", game, search=args.search),
        **report.to_json_obj(),
        "welfare": global_welfare(game, config),
    }
    _write(args.out, canonical_json(obj) + "\n")
    return EXIT_OK if report.is_equilibrium else EXIT_VERIFY_FAIL


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def cmd_poa(args) -> int:
    rows = []
    if args.family == "chain_vs_ring":
        for n in _parse_range(args.n):
            game, chain, ring = gen_chain_vs_ring(n)
            we = global_welfare(game, chain)
            wb = global_welfare(game, ring)
            rows.append((f"n={n}", we, wb, poa_ratio(game, [we], wb)))
    elif args.family == "het_poa":
        for k in _parse_range(args.k):
            for delta in _parse_range(args.delta):
                game, bench, eq = gen_het_poa(k, delta)
                we = global_welfare(game, eq)
                wb = global_welfare(game, bench)
                rows.append((f"k={k},delta={delta}", we, wb, poa_ratio(game, [we], wb)))
    else:
        raise ValidationError(f"unknown poa family {args.family!r}")
    manifest = _manifest("poa", None, family=args.family)
    lines = [f"# manifest={canonical_json(manifest)}"]
    lines.append("family,params,welfare_eq,welfare_bench,ratio")
    for params, we, wb, ratio in rows:
        lines.append(f"{args.family},\"{params}\",{we},{wb},{_ratio_str(ratio)}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_construct(args) -> int:
    game = load_instance(_read(args.instance))
    report = structure_report(game, args.r, gamma_method=args.gamma_method)
    report_obj = {
        "manifest": _manifest("construct", game, r=args.r, gamma_method=args.gamma_method),
        "structure": report.to_json_obj(),
    }
    try:
        config = build_optimal_configuration(game, args.r, gamma_method=args.gamma_method)
    except ConstructionError as exc:
        report_obj["error"] = str(exc)
        _write(args.report, canonical_json(report_obj) + "\n")
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    _write(args.report, canonical_json(report_obj) + "\n")
    config_obj = {"manifest": report_obj["manifest"], **config.to_json_obj(game)}
    _write(args.out, canonical_json(config_obj) + "\n")
    return EXIT_OK


def cmd_scenario(args) -> int:
    params = {}
    for pair in args.param or []:
        if "=" not in pair:
            raise ValidationError(f"bad parameter {pair!r}, expected name=value")
        name, value = pair.split("=", 1)
        params[name] = int(value)
    build = build_scenario(args.family, **params)
    _write(args.emit, serialize_instance(build.game) + "\n")
    for spec in args.emit_config or []:
        if "=" not in spec:
            raise ValidationError(f"bad --emit-config {spec!r}, expected name=path")
        name, path = spec.split("=", 1)
        if name not in build.configs:
            raise ValidationError(
                f"scenario {args.family} has no config {name!r}; has {sorted(build.configs)}"
            )
        _write(path, serialize_configuration(build.configs[name], build.game) + "\n")
    if args.emit_restrict:
        if build.restrict is None:
            raise ValidationError(f"scenario {args.family} has no strategy restriction")
        doc = {
            "allowed": {
                str(uid): [sorted(s) for s in strategies]
                for uid, strategies in sorted(build.restrict.items())
            }
        }
        _write(args.emit_restrict, canonical_json(doc) + "\n")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowgames", description=__doc__)
    parser.add_argument("--version", action="version", version=f"flowgames {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run selfish dynamics and write a JSONL trace")
    run.add_argument("--instance", required=True)
    run.add_argument("--config", help="initial configuration (default: empty)")
    run.add_argument("--scheduler", choices=["round-robin", "random"], default="round-robin")
    run.add_argument("--search", choices=["swap", "exhaustive", "cover"], default="exhaustive")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--max-steps", type=int, default=10_000)
    run.add_argument("--restrict", help="JSON file of allowed strategies per user")
    run.add_argument("--out", default="-")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="check a configuration for stability")
    verify.add_argument("--instance", required=True)
    verify.add_argument("--config", required=True)
    verify.add_argument("--search", choices=["swap", "exhaustive"], default="exhaustive")
    verify.add_argument("--out", default="-")
    verify.set_defaults(func=cmd_verify)

    poa = sub.add_parser("poa", help="benchmark-vs-equilibrium welfare sweep (CSV)")
    poa.add_argument("family", choices=["chain_vs_ring", "het_poa"])
    poa.add_argument("--n", default="6", help="range like 4..8 (chain_vs_ring)")
    poa.add_argument("--k", default="4", help="range like 3..6 (het_poa)")
    poa.add_argument("--delta", default="2", help="range like 2..4 (het_poa)")
    poa.add_argument("--out", default="-")
    poa.set_defaults(func=cmd_poa)

    construct = sub.add_parser("construct", help="build the full-coverage metric configuration")
    construct.add_argument("--instance", required=True)
    construct.add_argument("--r", type=int, required=True, help="covering radius")
    construct.add_argument("--gamma-method", choices=["greedy", "exact"], default="greedy")
    construct.add_argument("--out", default="-", help="configuration output")
    construct.add_argument("--report", default="-", help="structure report output")
    construct.set_defaults(func=cmd_construct)

    scenario = sub.add_parser("scenario", help="emit a generated instance (and configs)")
    scenario.add_argument("family", choices=sorted(SCENARIO_FAMILIES))
    scenario.add_argument("--param", action="append", metavar="NAME=VALUE")
    scenario.add_argument("--emit", default="-", help="instance output path")
    scenario.add_argument("--emit-config", action="append", metavar="NAME=PATH")
    scenario.add_argument("--emit-restrict", metavar="PATH")
    scenario.set_defaults(func=cmd_scenario)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
