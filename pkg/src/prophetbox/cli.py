"""Command line driver: ``prophetbox {table,gen,run,ratio-sweep,solve-reservation}``.

Exit codes: 0 success, 1 computational error, 2 usage or variant error.
Errors are reported on stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
from pathlib import Path

from . import __version__, engine, model, registry
from .distributions import make_distribution, reservation_value
from .errors import ComputationError, UsageError
from .io import emit_instance, load_instance, save_instance

DEFAULT_TRIALS = 10_000
SWEEPS = {
    "tightness": [10, 100, 1000, 10**4, 10**5, 10**6],
    "example41": [4, 16, 64, 256, 1024, 4096, 10**4],
    "example32": [4, 100, 10**4, 10**6],
    "prophet-half": [2, 10, 100, 10**4, 10**6],
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def git_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return f"v{__version__}"
    return res.stdout.strip() if res.returncode == 0 and res.stdout.strip() else f"v{__version__}"


def _global_flags(parser, suppress: bool):
    # registered on the main parser and on every subcommand, so they can go
    # before or after the subcommand name; the subcommand copy only
    # overrides when given
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="base seed of the random streams")
    parser.add_argument("--trials", type=int, default=default(DEFAULT_TRIALS), help="Monte Carlo trials")
    parser.add_argument("--format", choices=("csv", "json", "pretty"), default=default("pretty"))
    parser.add_argument("--output", default=default(None), help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="prophetbox", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("table", help="all 16 variant cells with desk-scale demos")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--no-demo", action="store_true", help="statuses only")
    _global_flags(p, suppress=True)

    p = sub.add_parser("gen", help="write a generated instance file")
    p.add_argument("family", choices=sorted(model.FAMILIES))
    p.add_argument("n", type=int)
    p.add_argument("path", nargs="?", help="instance file to write (stdout if omitted)")
    _global_flags(p, suppress=True)

    p = sub.add_parser("run", help="evaluate a policy against an oracle on an instance file")
    p.add_argument("instance")
    p.add_argument("--policy", required=True, choices=sorted(engine.POLICIES))
    p.add_argument("--oracle", default="prophet", choices=list(engine.ORACLES))
    p.add_argument("--exact", action="store_true", help="exact expectation; never falls back to sampling")
    p.add_argument("--workers", type=int, default=1)
    _global_flags(p, suppress=True)

    p = sub.add_parser("ratio-sweep", help="closed forms, exact checks and Monte Carlo over n")
    p.add_argument("family", choices=sorted(model.CLOSED_FORMS))
    p.add_argument("--n", type=int, nargs="+", help="sizes (default: a family-specific sweep)")
    p.add_argument("--mc-max-n", type=int, default=10**4, help="skip Monte Carlo above this n")
    p.add_argument("--workers", type=int, default=1)
    _global_flags(p, suppress=True)

    p = sub.add_parser("solve-reservation", help="solve E[(sigma - X)^+] = cost")
    p.add_argument("--dist", required=True, help="JSON list of [value, probability] pairs")
    p.add_argument("--cost", type=float, required=True)
    _global_flags(p, suppress=True)
    return parser


# --- rendering ---------------------------------------------------------------


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_json_safe(v) for v in x]
    return x


def _pretty(rows, columns) -> str:
    cells = [[registry._fmt(_round(r.get(c))) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _round(x):
    if isinstance(x, float) and math.isfinite(x):
        return float(f"{x:.6g}")
    return x


def render(rows, columns, args, extra_meta=None) -> str:
    if args.format == "csv":
        return registry.write_csv(rows, columns)
    if args.format == "json":
        meta = {"seed": args.seed, "trials": args.trials, "version": git_describe()}
        meta.update(extra_meta or {})
        doc = {"metadata": meta, "rows": [{c: r.get(c) for c in columns} for r in rows]}
        return json.dumps(_json_safe(doc), indent=1) + "\n"
    return _pretty(rows, columns)


# --- subcommands -------------------------------------------------------------


def cmd_table(args):
    rows = registry.table_rows(args.n, args.trials, args.seed, demos=not args.no_demo)
    columns = registry.STATUS_COLUMNS if args.no_demo else registry.TABLE_COLUMNS
    return render(rows, columns, args, {"n": args.n})


def cmd_gen(args):
    instance = model.FAMILIES[args.family](args.n)
    if args.path:
        save_instance(instance, args.path)
        return ""
    return emit_instance(instance)


RUN_COLUMNS = ("policy", "oracle", "method", "alg", "oracle_value", "ratio", "alg_ci", "oracle_ci", "ratio_ci")


def cmd_run(args):
    instance = load_instance(args.instance)
    policy = engine.make_policy(args.policy, instance)
    oracle = engine.make_oracle(args.oracle, instance)
    row = {"policy": args.policy, "oracle": args.oracle}
    if args.exact:
        alg = policy.result.value if isinstance(policy, engine.DPPolicy) else engine.exact_eval(policy, instance)
        orc = engine.exact_oracle_value(oracle, instance)
        row.update(method="exact", alg=alg, oracle_value=orc, ratio=alg / orc, alg_ci=0.0, oracle_ci=0.0, ratio_ci=0.0)
    else:
        alg, orc = engine.simulate_paired(policy, instance, oracle, args.trials, args.seed, workers=args.workers)
        ea, eo = engine.estimate_from(alg, args.seed), engine.estimate_from(orc, args.seed)
        ratio, half = engine.ratio_of_means(alg, orc)
        row.update(
            method="monte-carlo",
            alg=ea.mean,
            oracle_value=eo.mean,
            ratio=ratio,
            alg_ci=ea.half_width,
            oracle_ci=eo.half_width,
            ratio_ci=half,
        )
        row["violations"] = engine.dominance_violations(instance, alg, orc) if args.oracle == "prophet" else None
    columns = RUN_COLUMNS + (("violations",) if "violations" in row else ())
    return render([row], columns, args, {"instance": str(args.instance), "n": instance.n})


def cmd_ratio_sweep(args):
    n_list = args.n or SWEEPS[args.family]
    rows = engine.ratio_report(args.family, n_list, args.trials, args.seed, args.mc_max_n, args.workers)
    return render(rows, engine.REPORT_COLUMNS, args, {"family": args.family, "trend": engine.TRENDS[args.family]})


def cmd_solve_reservation(args):
    try:
        pairs = json.loads(args.dist)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--dist is not valid JSON: {exc}") from None
    if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
        raise UsageError("--dist must be a JSON list of [value, probability] pairs")
    if args.cost < 0:
        raise UsageError("--cost must be nonnegative")
    res = reservation_value(make_distribution(pairs), args.cost)
    return render([{"cost": args.cost, "sigma": res.sigma, "residual": res.residual}], ("cost", "sigma", "residual"), args)


COMMANDS = {
    "table": cmd_table,
    "gen": cmd_gen,
    "run": cmd_run,
    "ratio-sweep": cmd_ratio_sweep,
    "solve-reservation": cmd_solve_reservation,
}


def _diagnose(exc, code: int) -> int:
    record = {"level": "error", "exit_code": code, "error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.trials < 1:
            raise UsageError("--trials must be at least 1")
        text = COMMANDS[args.command](args)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        elif text:
            sys.stdout.write(text)
        return 0
    except (UsageError, OSError) as exc:
        return _diagnose(exc, 2)
    except ComputationError as exc:
        return _diagnose(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
