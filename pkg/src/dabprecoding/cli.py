"""Command-line entry point: ``python -m dabprecoding <command> --config FILE``.

Commands
--------
sweep     sum rate of MRT, ZF and DAB over an SNR grid
converge  mean best-so-far DAB rate per iteration
pattern   far-field radiation patterns of MRT and DAB
validate  quick oracle checks of the closed-form expressions

On failure a single JSON line ``{"error": ..., "key": ..., "message": ...}``
is printed to stderr and the exit status is nonzero (2 for configuration
errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .config import load_config
from .errors import ConfigError, DabError
from .harness import THREADS_ENV, default_workers, run_convergence, run_pattern, run_sweep, summary_path


def _parser():
    p = argparse.ArgumentParser(prog="dabprecoding", description="Distortion-aware precoding experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("sweep", "sum-rate sweep over SNR"),
        ("converge", "convergence of the projected gradient ascent"),
        ("pattern", "far-field radiation patterns"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="JSON configuration file")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out", help="override the output CSV path")
        if name != "pattern":
            sp.add_argument(
                "--threads", type=int, default=None, help=f"worker processes (default ${THREADS_ENV} or 1)"
            )
    v = sub.add_parser("validate", help="run the oracle checks")
    v.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _error(exc, code):
    line = {"error": type(exc).__name__, "key": getattr(exc, "key", None), "message": str(exc)}
    print(json.dumps(line), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            from .validate import run_checks

            results = run_checks(seed=args.seed)
            for r in results:
                print(r.line())
            return 0 if all(r.passed for r in results) else 1

        kind = "pattern" if args.command == "pattern" else "sweep"
        cfg = load_config(args.config, kind)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, output_path=args.out)
        workers = getattr(args, "threads", None)
        if workers is None:
            try:
                workers = default_workers()
            except ValueError as exc:
                raise ConfigError(f"{THREADS_ENV} must be an integer", THREADS_ENV) from exc
        if workers < 1:
            raise ConfigError("--threads must be >= 1", "threads")

        if args.command == "sweep":
            res = run_sweep(cfg, workers=workers)
            for row in res.summary:
                print(f"{row['snr_db']:6.1f} dB  {row['precoder']:4s}  {row['mean_rate']:8.4f} +/- {row['stderr']:.4f}")
            print(f"wrote {cfg.output_path} and {summary_path(cfg.output_path)}")
        elif args.command == "converge":
            res = run_convergence(cfg, workers=workers)
            for snr, it in zip(res.snr_db, res.iterations_to_fraction(0.99)):
                print(f"{snr:6.1f} dB  99% of final rate after {int(it)} iterations")
            print(f"wrote {cfg.output_path}")
        else:
            run_pattern(cfg)
            print(f"wrote {cfg.output_path}")
    except ConfigError as exc:
        return _error(exc, 2)
    except (DabError, OSError) as exc:
        return _error(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
