"""Command line front end: ``dimfgp simulate|backtest|decompose``.

Every flag can also be given in a flat YAML file passed with ``--config``
(keys are flag names, with ``-`` or ``_``); flags on the command line win.
The default output directory comes from ``$DIMFGP_OUT`` (else ``.``).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .engine import multiplicative_decomposition
from .errors import DimFGPError
from .generators import parse_family
from .ingest import DlretPolicy, apply_policy, load_csv, write_csv
from .ranks import open_market_decomposition, ranked_multiplicative_decomposition
from .report import plot_decomposition, write_series
from .simulate import MODELS, SimConfig, simulate

OUT_ENV = "DIMFGP_OUT"
BASELINES = ("total_market", "sfm", "top_m:<m>")


def _sim_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("simulation (used when --input is absent)")
    g.add_argument("--model", choices=MODELS, default="combined")
    g.add_argument("--horizon", type=int, default=500)
    g.add_argument("--n0", type=int, default=50)
    g.add_argument("--birth-rate", type=float, default=0.01)
    g.add_argument("--death-rate", type=float, default=0.01)
    g.add_argument("--split-threshold", type=float, default=0.2)
    g.add_argument("--merge-rate", type=float, default=0.005)
    g.add_argument("--vol", type=float, default=0.02)
    g.add_argument("--drift", type=float, default=0.0)
    g.add_argument("--entrant-scale", type=float, default=1.0)
    g.add_argument("--dlret-missing-prob", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)
    return p


def _run_parent():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="panel CSV (date,stock_id,cap,dlret); simulate if absent")
    p.add_argument(
        "--dlret-policy",
        choices=[x.value for x in DlretPolicy],
        default="conservative",
        help="fill for missing delisting returns",
    )
    p.add_argument("--no-dlret", action="store_true", help="ignore delisting returns")
    p.add_argument(
        "--baseline",
        default="total_market",
        help="total_market, sfm, or top_m:<m> for the top-m open market",
    )
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dimfgp", description="Generated portfolios on markets of changing dimension."
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="flat YAML file of flag values")
    sub = parser.add_subparsers(dest="command", required=True)
    sim, run = _sim_parent(), _run_parent()

    s = sub.add_parser("simulate", parents=[sim], help="write a simulated panel CSV")
    s.add_argument("--out", help="output file or directory (default: $DIMFGP_OUT)")

    b = sub.add_parser("backtest", parents=[sim, run], help="decompose one or more families")
    b.add_argument("--family", action="append", help="e.g. diversity:p=0.5 (repeatable)")
    b.add_argument("--out", help="output directory (default: $DIMFGP_OUT or .)")
    b.add_argument("--plot", action="store_true", help="also write an SVG per family")

    d = sub.add_parser("decompose", parents=[sim, run], help="one family, CSV on stdout")
    d.add_argument("--family", required=False)
    return parser


def _load_config(path):
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise SystemExit(f"dimfgp: config {path} must be a flat mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    conf = _load_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(conf) - known - {"command", "config"})
    if unknown:
        parser.error(f"unknown config keys: {', '.join(unknown)}")
    if "family" in conf and isinstance(conf["family"], str):
        conf["family"] = [conf["family"]] if args.command == "backtest" else conf["family"]
    sub.set_defaults(**{k: v for k, v in conf.items() if k in known})
    return parser.parse_args(argv)


def _sim_config(args):
    return SimConfig(
        model=args.model,
        horizon=args.horizon,
        n0=args.n0,
        birth_rate=args.birth_rate,
        death_rate=args.death_rate,
        split_threshold=args.split_threshold,
        merge_rate=args.merge_rate,
        vol=args.vol,
        drift=args.drift,
        entrant_scale=args.entrant_scale,
        dlret_missing_prob=args.dlret_missing_prob,
        seed=args.seed,
    )


def _out_dir(args):
    return Path(args.out or os.environ.get(OUT_ENV) or ".")


def cmd_simulate(args):
    path = simulate(_sim_config(args))
    dest = Path(args.out) if args.out else Path(os.environ.get(OUT_ENV) or ".")
    if dest.is_dir() or not dest.suffix:
        dest.mkdir(parents=True, exist_ok=True)
        dest = dest / f"panel_seed{args.seed}.csv"
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
    write_csv(path, dest)
    print(dest)
    return 0


def _raw_market(args):
    if args.input:
        return load_csv(args.input, DlretPolicy.AS_GIVEN)
    return simulate(_sim_config(args))


def _parse_baseline(text):
    if text in ("total_market", "sfm"):
        return text, None
    name, _, m = text.partition(":")
    if name == "top_m" and m.isdigit() and int(m) >= 1:
        return "top_m", int(m)
    raise DimFGPError(f"unknown baseline {text!r}; choose from {', '.join(BASELINES)}")


def _decompose(path, fam, baseline, m, dlret_on):
    if baseline == "top_m":
        return open_market_decomposition(path, fam, m, dlret_on)
    if fam.rank_only:
        series = ranked_multiplicative_decomposition(path, fam, dlret_on)
    else:
        series = multiplicative_decomposition(path, fam, dlret_on)
    series.baseline = baseline
    return series


def cmd_backtest(args):
    specs = args.family or []
    if not specs:
        print("dimfgp: backtest needs at least one --family", file=sys.stderr)
        return 2
    baseline, m = _parse_baseline(args.baseline)
    raw = _raw_market(args)
    path = apply_policy(raw, args.dlret_policy)
    dlret_on = not args.no_dlret
    missing = dlret_on and any(d.dlret is None for d in raw.delistings)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)

    failures = []
    for spec in specs:
        try:
            fam = parse_family(spec)
            series = _decompose(path, fam, baseline, m, dlret_on)
            target = out / f"series_{fam.slug}.csv"
            write_series(series, target)
            print(target)
            if args.plot:
                solid, dashed = series, None
                if missing:
                    solid = _decompose(apply_policy(raw, "conservative"), fam, baseline, m, True)
                    dashed = _decompose(apply_policy(raw, "optimistic"), fam, baseline, m, True)
                figure = out / f"decomposition_{fam.slug}.svg"
                plot_decomposition(solid, figure, optimistic=dashed, title=fam.spec)
                print(figure)
        except (DimFGPError, ArithmeticError) as exc:
            failures.append((spec, type(exc).__name__, str(exc)))

    if failures:
        width = max(len(f[0]) for f in failures)
        print(f"{'family'.ljust(width)}  error", file=sys.stderr)
        for spec, kind, msg in failures:
            print(f"{spec.ljust(width)}  {kind}: {msg}", file=sys.stderr)
        return 1
    return 0


def cmd_decompose(args):
    spec = args.family[0] if isinstance(args.family, list) else args.family
    if not spec:
        print("dimfgp: decompose needs --family", file=sys.stderr)
        return 2
    baseline, m = _parse_baseline(args.baseline)
    path = apply_policy(_raw_market(args), args.dlret_policy)
    series = _decompose(path, parse_family(spec), baseline, m, not args.no_dlret)
    write_series(series, sys.stdout)
    return 0


COMMANDS = {"simulate": cmd_simulate, "backtest": cmd_backtest, "decompose": cmd_decompose}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head)
        sys.stderr.close()
        return 0
    except (DimFGPError, ArithmeticError, OSError) as exc:
        print(f"dimfgp: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
