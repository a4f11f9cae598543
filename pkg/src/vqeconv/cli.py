"""Command-line entry point: ``vqeconv {check-surjectivity,run,basins,repro}``."""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import ConfigError, bundled_configs, load_config
from .repro import REPRO_TAGS

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vqeconv",
        description="Local surjectivity, landscape and gradient-descent experiments for VQE ansatzes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True,
                           help="JSON problem config (path, or name of a bundled config)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    p = sub.add_parser("check-surjectivity", help="sample omega ranks and singular points")
    common(p)
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("run", help="single gradient-descent run with terminal classification")
    common(p)

    p = sub.add_parser("basins", help="seeded multi-start basin statistics")
    common(p)
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("repro", help="regenerate a reference data table with self-checks")
    p.add_argument("figure", choices=sorted(REPRO_TAGS))
    common(p, config=False)

    sub.add_parser("list-configs", help="print the bundled config names")
    return parser


def _summary_line(report):
    cmd = report.get("command")
    if cmd == "run":
        t = report["terminal"]
        cls = t.get("classification", "-")
        return f"run: {report['outcome']} after {report['iterations']} iterations, " \
               f"J = {t['energy']:.12g}, {cls}"
    if cmd == "basins":
        frac = report["ground_fraction_of_terminated"]
        frac = "n/a" if frac is None else f"{frac:.4f}"
        return f"basins: {report['n_starts']} starts, counts {report['counts']}, " \
               f"ground fraction of terminated {frac}"
    if cmd == "check-surjectivity":
        line = f"check-surjectivity: min rank {report['min_rank']} / {report['required_rank']}, " \
               f"{report['singular_samples']} singular samples"
        agr = report.get("predictor_agreement")
        if agr:
            line += f"; predictor agree {agr['agree']}, disagree {agr['disagree']}, " \
                    f"inconclusive {agr['inconclusive']}"
        return line
    if cmd == "repro":
        lines = [f"repro {report['tag']}: {'PASS' if report['passed'] else 'FAIL'}"]
        lines += [f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['name']}: {c['value']}"
                  for c in report["checks"]]
        return "\n".join(lines)
    return json.dumps(report)


def main(argv=None):
    from . import experiments as ex

    args = build_parser().parse_args(argv)
    if args.command == "list-configs":
        print("\n".join(bundled_configs()))
        return EXIT_OK
    figures = not args.no_figures
    try:
        if args.command == "repro":
            out = args.out or f"out/repro_{args.figure.replace('-', '_')}"
            report = ex.cmd_repro(args.figure, out, seed=args.seed or 0, figures=figures)
            status = EXIT_OK if report["passed"] else EXIT_CHECK_FAILED
        else:
            cfg = load_config(args.config)
            out = args.out or cfg.output["dir"]
            figures = figures and cfg.output["figures"]
            if args.command == "run":
                report = ex.cmd_run(cfg, out, seed=args.seed, figures=figures)
                status = EXIT_CHECK_FAILED if report["outcome"] == "Aborted" else EXIT_OK
            elif args.command == "basins":
                if args.starts < 1 or args.jobs < 1:
                    raise ConfigError("--starts/--jobs", "must be >= 1")
                report = ex.cmd_basins(cfg, args.starts, out, seed=args.seed,
                                       n_jobs=args.jobs, figures=figures)
                status = EXIT_OK
            else:
                if args.samples < 1:
                    raise ConfigError("--samples", "must be >= 1")
                report = ex.cmd_check_surjectivity(cfg, args.samples, out, seed=args.seed,
                                                   figures=figures)
                status = EXIT_OK if report["passed"] else EXIT_CHECK_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(_summary_line(report))
    print(f"outputs written to {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
