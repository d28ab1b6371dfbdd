"""Command-line entry point: ``volrates {simulate,estimate,rates,minimax}``.

Exit codes: 0 success, 1 usage error, 2 config error, 3 numerical error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import minimax as mm
from .config import (
    ConfigError,
    apply_overrides,
    estimators_from_config,
    model_from_config,
    parse_config,
    plan_from_config,
    read_config,
)
from .estimators import EstimatorConfig, FrequencyRule, estimate
from .harness import ClassMembershipError, run_experiment
from .models import SamplePath, simulate_path

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

MINIMAX_COLUMNS = ("r", "n", "a_n", "u_n", "norm_eta", "norm_eta_prime", "tv_bound",
                   "grid_spacing", "grid_extent")
ESTIMATE_COLUMNS = ("estimator", "n", "seed", "value", "tuning_used", "degenerate")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_path_csv(path: SamplePath, out) -> None:
    with open(out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["time", "value"])
        for t, x in zip(path.times, path.values):
            w.writerow([_fmt(float(t)), _fmt(float(x))])


def read_path_csv(src) -> np.ndarray:
    with open(src, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["time", "value"]:
        raise ConfigError(f"{src}: expected a 'time,value' header")
    try:
        return np.array([float(r[1]) for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{src}: malformed row ({exc})") from exc


def _load(args):
    if args.config is None:
        cp = parse_config("")
    else:
        cp = read_config(args.config)
    apply_overrides(cp, args.set or [])
    return cp


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("VOLRATES_THREADS", "1"))


def _cmd_simulate(args) -> None:
    cp = _load(args)
    model = model_from_config(cp)
    n = args.n if args.n is not None else int(cp.get("simulate", "n", fallback="0"))
    if n < 1:
        raise ConfigError("simulate needs --n >= 1")
    path = simulate_path(model, n, args.seed)
    write_path_csv(path, args.out)


def _cli_estimators(args, cp) -> list[EstimatorConfig]:
    if args.variant is None:
        cfgs = list(estimators_from_config(cp))
        if not cfgs:
            raise ConfigError("no estimator: give --variant or [estimator.i] sections")
        return cfgs
    freq = None
    if args.variant == "spectral":
        if args.u is not None:
            freq = args.u
        elif args.rule_r is not None and args.rule_A is not None:
            freq = FrequencyRule(args.rule_r, args.rule_A)
    try:
        return [EstimatorConfig(args.variant, args.varpi, args.trunc_scale, args.k, freq)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_estimate(args) -> None:
    cp = _load(args)
    cfgs = _cli_estimators(args, cp)
    values = read_path_csv(args.path)
    n = values.size - 1
    if n < 1:
        raise ConfigError("path needs at least two observations")
    path = SamplePath(n, values, 0.0, args.seed)
    with open(args.out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(ESTIMATE_COLUMNS)
        for cfg in cfgs:
            res = estimate(path, cfg)
            w.writerow([cfg.label, n, _fmt(args.seed), _fmt(res.value), _fmt(res.tuning_used),
                        int(res.degenerate)])


def _cmd_rates(args) -> None:
    cp = _load(args)
    if args.threads is not None or "VOLRATES_THREADS" in os.environ:
        apply_overrides(cp, [f"plan.threads={_threads(args)}"])
    if args.seed is not None:
        apply_overrides(cp, [f"plan.base_seed={args.seed}"])
    plan = plan_from_config(cp)
    report = run_experiment(plan)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "report.csv")
    report.write_json(out / "summary.json")


def _minimax_row(r: float, n: int, dump_dir) -> list:
    pair = mm.build_pair(r, n)
    diag = mm.indistinguishability_norms(pair)
    if dump_dir is not None:
        u = pair.exponents.u
        et = pair.eta_values()
        with open(Path(dump_dir) / f"eta_r{r:g}_n{n}.csv", "w", newline="") as fh:
            w = _writer(fh)
            w.writerow(["u", "eta"])
            for a, b in zip(u, et):
                w.writerow([_fmt(float(a)), _fmt(float(b))])
    g = pair.H.grid
    return [r, n, pair.a_n, pair.u_n, diag.norm_eta, diag.norm_eta_prime, diag.tv_bound,
            g.spacing, g.extent]


def _cmd_minimax(args) -> None:
    cp = _load(args)
    sec = cp["minimax"] if cp.has_section("minimax") else {}
    r = args.r if args.r is not None else float(sec.get("r", "nan"))
    grid_text = args.n_grid if args.n_grid is not None else sec.get("n_grid", "")
    try:
        n_grid = [int(v) for v in grid_text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --n-grid {grid_text!r}") from exc
    if not n_grid or not 1.0 < r < 2.0:
        raise ConfigError("minimax needs r in (1, 2) and a nonempty n-grid")
    if args.dump_dir is not None:
        Path(args.dump_dir).mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max(1, _threads(args))) as pool:
        rows = list(pool.map(lambda n: _minimax_row(r, n, args.dump_dir), n_grid))
    with open(args.out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(MINIMAX_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI-style config file")
    common.add_argument("--out", required=True, help="output file (directory for rates)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry, e.g. model.volatility.value=2")

    p = _Parser(prog="volrates", description="Integrated-volatility estimation laboratory")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate one path to CSV")
    s.add_argument("--n", type=int, default=None)

    e = sub.add_parser("estimate", parents=[common], help="apply estimators to a path CSV")
    e.add_argument("--path", required=True)
    e.add_argument("--variant", choices=["realized", "truncated", "multipower", "spectral"])
    e.add_argument("--varpi", type=float, default=0.4)
    e.add_argument("--trunc-scale", type=float, default=1.0)
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--u", type=float, default=None, help="explicit spectral frequency")
    e.add_argument("--rule-r", type=float, default=None)
    e.add_argument("--rule-A", type=float, default=None)

    sub.add_parser("rates", parents=[common], help="run a Monte Carlo rate experiment")

    m = sub.add_parser("minimax", parents=[common], help="lower-bound construction diagnostics")
    m.add_argument("--r", type=float, default=None)
    m.add_argument("--n-grid", default=None, help="comma-separated sample sizes")
    m.add_argument("--dump-dir", default=None, help="write (u, eta_n(u)) tabulations here")
    return p


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "rates": _cmd_rates,
    "minimax": _cmd_minimax,
}


def _say(kind: str, exc: BaseException) -> None:
    text = " ".join(str(exc).split())
    print(f"volrates: {kind}: {text}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("missing subcommand")
        if args.command == "simulate" and args.seed is None:
            args.seed = 0
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        _say("usage error", exc)
        return EXIT_USAGE
    except ConfigError as exc:
        _say("config error", exc)
        return EXIT_CONFIG
    except OSError as exc:
        _say("I/O error", exc)
        return EXIT_IO
    except (ArithmeticError, mm.GridError, ClassMembershipError, ValueError) as exc:
        _say("numerical error", exc)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
