"""Command-line entry point.

Subcommands: run (experiment from a JSON config), tune (grid search, emits a
score table), gen (synthetic CSV bundle), features (transactions CSV to an
epoch bundle). Exit codes: 0 success, 1 config error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import ConfigError, DataError, NumericalError
from .features import FeatureSpec, build_features, load_transactions
from .harness import ExperimentConfig, run_experiment, write_score_table
from .simgen import Exp2Config, gen_exp1, gen_exp2, save_stream
from .tuning import grid_search


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json_file(args.config)
    report = run_experiment(cfg)
    ok = sum(1 for r in report.rows if r.status == "ok")
    failed = sum(1 for r in report.rows if r.status == "failed")
    print(f"run complete: {ok} rows, {failed} failed"
          + (f", results in {cfg.out_dir}" if cfg.out_dir else ""))
    return 0


def _cmd_tune(args) -> int:
    cfg = ExperimentConfig.from_json_file(args.config)
    if cfg.grid is None:
        raise ConfigError("tune requires a 'grid' section in the config")
    from .harness import _obtain_stream

    stream = _obtain_stream(cfg, cfg.seeds[0])
    hp, table = grid_search(
        stream.prefix(cfg.grid.n_epochs), cfg.grid, cfg.descent, cfg.state.q
    )
    out_dir = Path(cfg.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "scores.csv"
    write_score_table(out_path, table)
    print(f"selected lambda={hp.lam} tau={hp.tau}; table in {out_path}")
    return 0


def _cmd_gen(args) -> int:
    if args.exp == 1:
        stream = gen_exp1(args.p, args.T, args.seed)
    else:
        stream = gen_exp2(args.p, args.T, args.seed, Exp2Config())
    manifest = save_stream(stream, args.out)
    print(f"wrote {stream.T} epochs (p={stream.p}) to {manifest.parent}")
    return 0


def _cmd_features(args) -> int:
    column_map = None
    if args.map:
        with open(args.map) as fh:
            column_map = json.load(fh)
    frame, dropped = load_transactions(args.infile, column_map)
    stream = build_features(frame, FeatureSpec())
    manifest = save_stream(stream, args.out)
    print(
        f"built {stream.T} monthly epochs with {stream.p} columns "
        f"({dropped} rows dropped); bundle in {manifest.parent}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs", description="Sequential sparse-regression experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(func=_cmd_run)

    p_tune = sub.add_parser("tune", help="grid-search (lambda, tau) on a stream prefix")
    p_tune.add_argument("--config", required=True)
    p_tune.set_defaults(func=_cmd_tune)

    p_gen = sub.add_parser("gen", help="generate a synthetic stream bundle")
    p_gen.add_argument("--exp", type=int, choices=(1, 2), required=True)
    p_gen.add_argument("--p", type=int, required=True)
    p_gen.add_argument("--T", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen)

    p_feat = sub.add_parser("features", help="build monthly epochs from transactions")
    p_feat.add_argument("--in", dest="infile", required=True)
    p_feat.add_argument("--map", default=None, help="JSON column map")
    p_feat.add_argument("--out", required=True)
    p_feat.set_defaults(func=_cmd_features)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
