"""Command line entry point ``subspace-loc``.

Errors go to stderr as one JSON object per line, e.g.
``{"error": "ConfigError", "field": "geometry.spacing", "message": "..."}``.
Exit status: 0 on success, 2 for usage or config errors, 3 for runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import ConfigError, SubspaceLocError
from .config import load_config
from .presets import load_preset, preset_names
from .runner import run_scenario

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report("UsageError", message)
        sys.exit(EXIT_CONFIG)


def _report(kind, message, field=None):
    payload = {"error": kind, "message": message}
    if field is not None:
        payload["field"] = field
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def build_parser():
    parser = _Parser(prog="subspace-loc", description="Subspace DoA / range estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config or preset")
    run.add_argument("config", nargs="?", help="path to a YAML scenario config")
    run.add_argument("--preset", help="name of a bundled preset (see list-presets)")
    run.add_argument("--seed", type=int, action="append",
                     help="run only this seed (repeatable); overrides the config's seed list")
    run.add_argument("--out", default=None, help="output directory (default: runs/<scenario>)")
    sub.add_parser("list-presets", help="print the bundled preset names")
    return parser


def _summary(report):
    lines = [f"scenario {report.scenario}: {len(report.config['run']['seeds'])} seed(s), "
             f"{report.wall_clock:.1f} s"]
    for name, rep in report.estimators.items():
        agg = rep.aggregate(len(report.true_angles))
        rng = agg["range_rel_rmse"]
        lines.append(
            f"  {name:15s} angle RMSE {_num(agg['angle_rmse'])} rad"
            + ("" if rng is None else f", range RMSE {_num(rng)} (relative)")
            + f", under-resolved {agg['under_resolved_seeds']}/{agg['seeds']}")
    return "\n".join(lines)


def _num(x):
    return "n/a" if x is None else f"{x:.3e}"


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list-presets":
        for name in preset_names():
            print(name)
        return 0
    try:
        if (args.config is None) == (args.preset is None):
            raise ConfigError("give exactly one of a config path or --preset", "config")
        cfg = load_preset(args.preset) if args.preset else load_config(args.config)
        if args.seed:
            if any(s < 0 for s in args.seed):
                raise ConfigError("seeds must be non-negative", "--seed")
            cfg = cfg.with_seeds(args.seed)
        out = args.out or f"runs/{cfg.name}"
        report = run_scenario(cfg, out)
    except ConfigError as exc:
        _report("ConfigError", exc.message, exc.field)
        return EXIT_CONFIG
    except SubspaceLocError as exc:
        _report(type(exc).__name__, str(exc))
        return EXIT_RUNTIME
    except (OSError, ArithmeticError) as exc:
        _report(type(exc).__name__, str(exc))
        return EXIT_RUNTIME
    print(_summary(report))
    print(f"outputs written to {out}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
