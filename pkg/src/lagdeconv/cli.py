"""Command-line driver for the ensemble reconstruction study.

Exit codes: 0 on success, 2 when any record violates its error bounds
(a correctness failure of the method, not of the run), 1 on runtime or
usage errors.
"""

from __future__ import annotations

import argparse
import sys

from . import study


class _Parser(argparse.ArgumentParser):
    # usage problems are runtime errors (exit 1); exit 2 is reserved for
    # bound violations
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="study",
        description="Monte Carlo deconvolution study with model-error bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser(
        "run",
        help="execute an ensemble and write records/figure data",
        description="Run the ensemble study and emit records.csv, "
                    "summary.json, figure-data CSVs, and schema.txt.",
    )
    run.add_argument("--config", metavar="FILE",
                     help="flat key = value config file")
    run.add_argument("--realizations", type=int, metavar="N")
    run.add_argument("--seed", type=int, dest="base_seed", metavar="S")
    run.add_argument("--estimator", choices=["averaged", "lsq", "least_squares"])
    run.add_argument("--laguerre-terms", type=int, dest="laguerre_terms")
    run.add_argument("--scale-T", type=float, dest="scale_T")
    run.add_argument("--kle-terms", type=int, dest="kle_terms")
    run.add_argument("--nx", type=int)
    run.add_argument("--ny", type=int)
    run.add_argument("--dt", type=float)
    run.add_argument("--t-end", type=float, dest="t_end")
    run.add_argument("--workers", type=int)
    run.add_argument("--plots", action="store_true",
                     help="also write SVG figures (needs matplotlib)")
    run.add_argument("--paper", action="store_true",
                     help="start from the full-scale preset "
                          "(500 realizations, fine grid)")
    run.add_argument("--out", required=True, metavar="DIR",
                     help="output directory")
    return parser


_OVERRIDE_KEYS = ("realizations", "base_seed", "estimator", "laguerre_terms",
                  "scale_T", "kle_terms", "nx", "ny", "dt", "t_end", "workers")


def _config_from_args(args) -> study.StudyConfig:
    flat = study.flat_defaults(paper=args.paper)
    if args.config:
        flat.update(study.load_config(args.config))
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key)
        if value is not None:
            flat[key] = value
    flat["output_dir"] = args.out
    return study.config_from_flat(flat)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config_from_args(args)
        records, summary = study.run_study(cfg)
        study.emit_outputs(records, summary, cfg, plots=args.plots)
    except Exception as exc:
        print(f"study: error: {exc}", file=sys.stderr)
        return 1
    print(f"{summary.total} records ({summary.exclusions} excluded), "
          f"{summary.violations} bound violations, "
          f"median relative error {summary.quantiles['p50']:.4g} "
          f"-> {cfg.output_dir}")
    if summary.violations:
        print("study: error bounds violated", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
