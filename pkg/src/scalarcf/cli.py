"""Command-line front end: run scenarios, check acceptance, solve the basin
radius.

Exit codes: 0 success, 1 acceptance/convergence failure, 2 configuration
error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

from . import analysis, configfile, engine, scenarios


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scalarcf")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a scenario and write CSV/SVG")
    run_p.add_argument(
        "--scenario",
        required=True,
        choices=("sim1", "sim2", "sim3", "custom"),
    )
    run_p.add_argument("--config", help="flat key = value config file")
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument(
        "--variants",
        nargs="+",
        metavar="NAME",
        help="observer variants to run (default: all for the scenario)",
    )
    run_p.add_argument("--dt", type=float, help="integration step override")
    run_p.add_argument("--seed", type=int, help="noise seed override")

    sub.add_parser("check", help="run the acceptance suite and print verdicts")

    ts_p = sub.add_parser("theta-star", help="basin radius for a disturbance level")
    ts_p.add_argument("--epsilon", type=float, required=True)
    return p


def _config_from_args(args) -> scenarios.ScenarioConfig:
    fields: dict = {}
    if args.config is not None:
        fields = configfile.load_config(args.config)
    file_scenario = fields.pop("scenario", None)
    family = fields.pop("family", None)
    scenario = args.scenario or file_scenario
    if scenario == "custom" and family is None:
        raise configfile.ConfigError(
            "custom scenario needs a config file that sets 'family'"
        )
    if args.dt is not None:
        fields["dt"] = args.dt
    if args.seed is not None:
        fields["seed"] = args.seed
    return scenarios.config_for(
        scenario, family if scenario == "custom" else None, **fields
    )


def _cmd_run(args) -> int:
    try:
        cfg = _config_from_args(args)
        engine._resolve_variants(cfg, args.variants)  # validate names up front
    except (configfile.ConfigError, scenarios.IncompatibleVariantError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    try:
        records, manifest = engine.timed_run(cfg, variants=args.variants)
    except engine.NonFiniteStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    from .chart import emit_chart

    written = []
    for rec in records:
        path = os.path.join(args.out, f"{rec.scenario}-{rec.variant}.csv")
        engine.emit_csv(rec, path)
        written.append(path)
    svg_path = os.path.join(args.out, f"{cfg.scenario}.svg")
    emit_chart(records, svg_path)
    written.append(svg_path)
    manifest_path = os.path.join(args.out, f"{cfg.scenario}-manifest.json")
    manifest.save(manifest_path)
    written.append(manifest_path)
    cfg_path = os.path.join(args.out, f"{cfg.scenario}-resolved.cfg")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        fh.write(configfile.format_config(cfg))
    written.append(cfg_path)

    for rec in records:
        wall = manifest.wall_time_s[rec.variant]
        print(
            f"{rec.scenario} {rec.variant}: final error "
            f"{rec.theta_tilde_deg[-1]:.4f} deg over {cfg.duration:g} s "
            f"({wall:.2f} s wall)"
        )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_check() -> int:
    from .acceptance import run_all

    results = run_all()
    for res in results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"[{mark}] {res.name}: {res.detail} ({res.duration_s:.2f} s)")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_theta_star(args) -> int:
    try:
        root = analysis.solve_theta_star(args.epsilon)
    except (analysis.NoSolutionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{math.degrees(root):.6f}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "check":
        return _cmd_check()
    return _cmd_theta_star(args)


if __name__ == "__main__":
    sys.exit(main())
