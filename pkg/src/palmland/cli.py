"""Command-line front end.

    palmland run approach_static --mode ideal --out trace.csv
    palmland replay session.csv --config tuned.json
    palmland audit trace.csv
    palmland scenarios list
    palmland serve --bind 127.0.0.1:8765 --scenario switching

Exit codes: 0 success, 1 the run or audit found safety violations,
2 bad input (config, scenario, trace, or arguments).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import default_run_config, load_run_config
from .metrics import (
    MetricsError,
    compute_report,
    load_run_trace,
    parse_run_trace,
)
from .planner import ConfigError
from .scenario import (
    ScenarioError,
    TraceFormatError,
    builtin_scenario_names,
    load_builtin_scenario,
    load_scenario,
    load_user_trace,
)
from .simloop import MODES, run_replay, run_scenario

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _load_cfg(args):
    if args.config is None:
        return default_run_config()
    return load_run_config(args.config)


def _resolve_scenario(name_or_path: str):
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return load_scenario(p)
    return load_builtin_scenario(name_or_path)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", default=None,
                   help="JSON run configuration (defaults built in)")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="write the run trace CSV here")
    p.add_argument("--mode", choices=MODES, default="dynamic",
                   help="plant model (default: dynamic)")
    p.add_argument("--seed", type=int, default=None,
                   help="sensor-jitter seed (default: scenario's own)")
    p.add_argument("--duration-override", type=float, default=None,
                   metavar="SECONDS", help="run this long instead")


def _finish_run(result, cfg) -> int:
    trace = parse_run_trace(result.lines)
    report = compute_report(trace, cfg.planner)
    print(report.to_json())
    violations = report.disk_violations + report.speed_violations
    return EXIT_VIOLATIONS if violations else EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load_cfg(args)
    scn = _resolve_scenario(args.scenario)
    result = run_scenario(scn, cfg, mode=args.mode, seed=args.seed,
                          duration_override=args.duration_override,
                          out_path=args.out)
    return _finish_run(result, cfg)


def _cmd_replay(args) -> int:
    cfg = _load_cfg(args)
    trace = load_user_trace(args.trace)
    seed = 0 if args.seed is None else args.seed
    result = run_replay(trace, cfg, mode=args.mode, seed=seed,
                        duration_override=args.duration_override,
                        out_path=args.out)
    return _finish_run(result, cfg)


def _cmd_audit(args) -> int:
    cfg = _load_cfg(args)
    trace = load_run_trace(args.trace)
    report = compute_report(trace, cfg.planner)
    print(report.to_json())
    violations = report.disk_violations + report.speed_violations
    return EXIT_VIOLATIONS if violations else EXIT_OK


def _cmd_scenarios_list(_args) -> int:
    for name in builtin_scenario_names():
        print(name)
    return EXIT_OK


def _cmd_serve(args) -> int:
    host, _, port_s = args.bind.rpartition(":")
    if not host or not port_s.isdigit():
        print(f"error: --bind must be HOST:PORT, got '{args.bind}'",
              file=sys.stderr)
        return EXIT_ERROR
    if args.time_scale <= 0.0:
        print("error: --time-scale must be > 0", file=sys.stderr)
        return EXIT_ERROR
    cfg = _load_cfg(args)
    scn = _resolve_scenario(args.scenario)
    from .bridge import serve  # deferred: pulls in the web stack

    serve(cfg, scn, host=host, port=int(port_s), time_scale=args.time_scale)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palmland",
        description="Deterministic palm-landing simulator for a "
                    "flapping-wing drone.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scripted scenario")
    p_run.add_argument("scenario",
                       help="built-in scenario name or path to a JSON file")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_replay = sub.add_parser("replay", help="simulate against a recorded user trace")
    p_replay.add_argument("trace", help="user trace CSV")
    _add_run_flags(p_replay)
    p_replay.set_defaults(func=_cmd_replay)

    p_audit = sub.add_parser("audit", help="safety-check an existing run trace")
    p_audit.add_argument("trace", help="run trace CSV")
    p_audit.add_argument("--config", metavar="FILE", default=None)
    p_audit.set_defaults(func=_cmd_audit)

    p_scen = sub.add_parser("scenarios", help="scenario utilities")
    scen_sub = p_scen.add_subparsers(dest="scenarios_command", required=True)
    p_list = scen_sub.add_parser("list", help="print built-in scenario names")
    p_list.set_defaults(func=_cmd_scenarios_list)

    p_serve = sub.add_parser("serve", help="run the live operator bridge")
    p_serve.add_argument("--bind", default="127.0.0.1:8765", metavar="HOST:PORT")
    p_serve.add_argument("--time-scale", type=float, default=1.0,
                         help="simulated seconds per wall second")
    p_serve.add_argument("--scenario", default="approach_static",
                         help="scenario the user starts out following")
    p_serve.add_argument("--config", metavar="FILE", default=None)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, TraceFormatError, MetricsError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
