"""Command-line sweep harness.

    sweep --config FILE [--preset fig3] [--out CSV] [--plot FILE]
          [--threads N] [--seed S] [--resume]

Exit codes: 0 success, 1 at least one grid point failed, 2 config error.
With several kicking strengths the output paths gain a _phid<value>
suffix per curve.  SWEEP_THREADS sets the worker count when --threads
is absent.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .output import emit_csv, emit_plot, read_csv
from .sweep import _period_key, run_sweep

THREADS_ENV = "SWEEP_THREADS"


def _suffixed(path, phi_d, multiple):
    if not multiple:
        return path
    root, dot, ext = path.rpartition(".")
    if not dot:
        return f"{path}_phid{phi_d:g}"
    return f"{root}_phid{phi_d:g}.{ext}"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sweep",
        description="Pulse-period sweep of kicked-rotor energies.")
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--preset", help="named preset, e.g. fig3")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--plot", help="output SVG path")
    parser.add_argument("--threads", type=int, help="worker processes")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--resume", action="store_true",
                        help="skip grid points already in the output CSV")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is None and os.environ.get(THREADS_ENV):
        try:
            threads = int(os.environ[THREADS_ENV])
        except ValueError:
            print(f"sweep: bad {THREADS_ENV} value "
                  f"{os.environ[THREADS_ENV]!r}", file=sys.stderr)
            return 2
    try:
        config = load_config(path=args.config, preset=args.preset,
                             out=args.out, plot=args.plot, threads=threads,
                             master_seed=args.seed, resume=args.resume)
    except ConfigError as exc:
        print(f"sweep: config error: {exc}", file=sys.stderr)
        return 2

    multiple = len(config.phi_d_list) > 1
    existing = {}
    if config.resume:
        for p, phi_d in enumerate(config.phi_d_list):
            path = _suffixed(config.out, phi_d, multiple)
            if not os.path.exists(path):
                continue
            try:
                curve = read_csv(path)
            except (OSError, ValueError) as exc:
                print(f"sweep: cannot resume from {path}: {exc}", file=sys.stderr)
                return 2
            for row in curve.rows:
                if not row.failed:
                    existing[(p, _period_key(row.period))] = row

    result = run_sweep(config, existing_rows=existing)
    for phi_d, curve in zip(config.phi_d_list, result.curves):
        out_path = _suffixed(config.out, phi_d, multiple)
        emit_csv(curve, out_path)
        print(f"sweep: wrote {out_path}")
        if config.plot:
            plot_path = _suffixed(config.plot, phi_d, multiple)
            emit_plot(curve, plot_path)
            print(f"sweep: wrote {plot_path}")
    if result.failures:
        print(f"sweep: {result.failures} grid point(s) failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
