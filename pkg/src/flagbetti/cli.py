"""``flagbetti`` command line.

Exit codes: 0 success, 2 bad flags or config, 3 capacity guard, 4 a gate
failed under ``--assert``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ._validation import CapacityError, ConfigError, FlagBettiError, ParameterError
from .betti import betti_table, ring_invariants
from .experiments import KINDS, ExperimentConfig, run, write_outputs
from .graph import SampleParams, graph_to_edgelist, graph_to_json, load_graph, sample_graph
from .oracle import cross_validate, verify_extremal_lemma

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_ASSERT = 4

log = logging.getLogger("flagbetti")


def _emit(text: str, out=None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    g = sample_graph(SampleParams(args.n, args.p, args.seed, args.stream))
    text = graph_to_json(g) + "\n" if args.format == "json" else graph_to_edgelist(g)
    _emit(text, args.out)
    return EXIT_OK


def _graph_from_args(args):
    if args.input:
        return load_graph(args.input)
    if args.n is None or args.p is None:
        raise ParameterError("betti needs --input or both --n and --p")
    return sample_graph(SampleParams(args.n, args.p, args.seed, args.stream))


def cmd_betti(args) -> int:
    g = _graph_from_args(args)
    t = betti_table(g, args.char, allow_large=args.allow_large, n_jobs=args.threads)
    if args.json:
        data = t.to_dict()
        if args.invariants:
            data["invariants"] = vars(ring_invariants(g, t))
        _emit(json.dumps(data, sort_keys=True) + "\n", args.out)
    else:
        text = t.to_grid()
        if args.invariants:
            inv = ring_invariants(g, t)
            text += "".join(f"{k}: {v}\n" for k, v in vars(inv).items())
        _emit(text, args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if cfg.kind != args.kind:
        raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.kind!r}")
    summary = run(cfg, threads=args.threads)
    if args.out:
        paths = write_outputs(summary, args.out)
        log.info("wrote %s", ", ".join(paths.values()))
    sys.stdout.write(summary.summary_csv())
    for gate in summary.gates:
        log.info("gate %s: %s", json.dumps(gate["gate"], sort_keys=True), "pass" if gate["passed"] else "FAIL")
    if args.check_gates and not summary.passed:
        failed = [g for g in summary.gates if not g["passed"]]
        sys.stderr.write(f"{len(failed)} gate(s) failed\n")
        return EXIT_ASSERT
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.what == "lemma-edges":
        report = verify_extremal_lemma(args.r, args.n_max, args.char)
        ok = report["passed"]
    else:
        report = cross_validate(args.trials, args.n_max, args.seed, args.char)
        ok = report["agree"]
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    if args.check_gates and not ok:
        return EXIT_ASSERT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flagbetti", description=__doc__.splitlines()[0])
    parser.add_argument("--verbose", "-v", action="count", default=0, help="log to stderr (repeat for debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="sample G(n, p)")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--stream", type=int, default=0)
    gen.add_argument("--format", choices=("json", "edgelist"), default="json")
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    betti = sub.add_parser("betti", help="Betti table of the Stanley-Reisner ring")
    betti.add_argument("--input", help="graph file (JSON or edge list)")
    betti.add_argument("--n", type=int)
    betti.add_argument("--p", type=float)
    betti.add_argument("--seed", type=int, default=0)
    betti.add_argument("--stream", type=int, default=0)
    betti.add_argument("--char", type=int, default=2)
    betti.add_argument("--json", action="store_true")
    betti.add_argument("--invariants", action="store_true", help="also print pdim, reg, depth, codim, CM")
    betti.add_argument("--allow-large", action="store_true", help="raise the vertex guard to 26")
    betti.add_argument("--threads", type=int, default=1)
    betti.add_argument("--out")
    betti.set_defaults(func=cmd_betti)

    exp = sub.add_parser("experiment", help="run a Monte Carlo suite")
    exp.add_argument("kind", choices=KINDS)
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", help="directory for records.csv, summary.csv, summary.json")
    exp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    exp.add_argument("--assert", dest="check_gates", action="store_true", help="exit 4 if a gate fails")
    exp.set_defaults(func=cmd_experiment)

    ver = sub.add_parser("verify", help="exhaustive and cross-check verifications")
    ver.add_argument("what", choices=("lemma-edges", "oracle"))
    ver.add_argument("--r", type=int, default=1)
    ver.add_argument("--n-max", type=int, default=5)
    ver.add_argument("--trials", type=int, default=200)
    ver.add_argument("--seed", type=int, default=1)
    ver.add_argument("--char", type=int, default=2)
    ver.add_argument("--assert", dest="check_gates", action="store_true", help="exit 4 if verification fails")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return EXIT_CAPACITY
    except (ConfigError, ParameterError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except FlagBettiError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
