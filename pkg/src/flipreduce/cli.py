"""Command-line interface.

Exit codes: 0 success, 2 proven infeasible for an explicit k, 1 any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import DEFAULT_RESTARTS, Strategy, lower_bound, upper_bound
from .exact import MAX_TAXA, solve_exact
from .generate import GenConfig, gen_instance
from .matrix import MatrixError, parse_matrix, write_matrix
from .phylo import enumerate_local_conflicts, is_perfect_phylogeny
from .reduction import ReductionOptions, Status, reduce
from .report import dumps, format_table, metrics_from_result, report_metrics, result_dict
from .trees import NewickError, parse_newick_file, encode_matrix, write_newick

log = logging.getLogger("flipreduce")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _strategy(name: str) -> Strategy:
    try:
        return Strategy[name.upper().replace("-", "_")]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown strategy {name!r}") from None


def _k_value(text: str):
    if text == "auto":
        return text
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("k must be a non-negative integer or 'auto'") from None
    if k < 0:
        raise argparse.ArgumentTypeError("k must be non-negative")
    return k


# -- subcommands ---------------------------------------------------------------


def cmd_encode(args) -> int:
    trees = parse_newick_file(_read(args.trees))
    _write(args.out, write_matrix(encode_matrix(trees)))
    return EXIT_OK


def cmd_check(args) -> int:
    M = parse_matrix(_read(args.matrix))
    pp = "unknown ('?' entries)" if not M.is_binary() else ("yes" if is_perfect_phylogeny(M) else "no")
    conflicts = len(enumerate_local_conflicts(M))
    cert = lower_bound(M, args.lb_strategy, args.lb_restarts, args.seed)
    out = {"perfect_phylogeny": pp, "conflicts": conflicts, "lb": cert.value}
    if args.bounds:
        ub = upper_bound(M, seed=args.seed)
        out["lb_certificate"] = [
            {"u": M.ids[c.u], "v": M.ids[c.v], "t1": M.taxa[c.t1], "t2": M.taxa[c.t2], "t3": M.taxa[c.t3]}
            for c in cert.conflicts
        ]
        out["ub"] = ub.value
        out["ub_tree"] = write_newick(ub.witness_tree)
    if args.format == "json":
        _write(args.out, dumps(out))
    else:
        text = f"perfect phylogeny: {pp}; conflicts: {conflicts}; lb={cert.value}"
        if args.bounds:
            text += f"; ub={out['ub']}\nub tree: {out['ub_tree']}"
            for c in out["lb_certificate"]:
                text += f"\nconflict {c['u']} {c['v']}: {c['t1']} {c['t2']} {c['t3']}"
        _write(args.out, text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    M = parse_matrix(_read(args.matrix))
    use_bounds = args.bounds
    start = time.perf_counter()
    if args.k == "auto":
        log.info("computing upper bound")
        k = upper_bound(M, seed=args.seed).value
        use_bounds = True
    else:
        k = args.k
    log.info("reducing with k=%d, bounds %s", k, "on" if use_bounds else "off")
    opts = ReductionOptions(use_bounds=use_bounds, lb_strategy=args.lb_strategy,
                            lb_restarts=args.lb_restarts, seed=args.seed)
    S = reduce(M, k, opts)
    elapsed = time.perf_counter() - start
    solved = args.solved_cost if args.solved_cost is not None else (k if args.k == "auto" else None)
    report = report_metrics(S, solved)
    out = result_dict(S, include_trace=args.trace)
    out["metrics"] = report.to_dict()
    if args.residual and S.status is Status.REDUCED:
        _write(args.residual, write_matrix(S.residual()))
    if args.format == "json":
        _write(args.out, dumps(out))
    else:
        report.running_time = elapsed
        text = f"status: {S.status.value}; k={k}; k_remaining={S.k_remaining}\n{format_table(report)}"
        _write(args.out, text)
    log.info("done in %.2fs", elapsed)
    return EXIT_INFEASIBLE if S.status is Status.INFEASIBLE else EXIT_OK


def cmd_solve(args) -> int:
    M = parse_matrix(_read(args.matrix))
    if M.n > MAX_TAXA:
        raise CliError(f"the exact solver handles at most {MAX_TAXA} taxa, matrix has {M.n}")
    res = solve_exact(M)
    newick = write_newick(res.witness_tree)
    if args.witness:
        _write(args.witness, write_matrix(M.with_entries(res.witness_matrix)))
    if args.format == "json":
        _write(args.out, dumps({"optimum": res.optimum, "tree": newick}))
    else:
        _write(args.out, f"optimum: {res.optimum}\ntree: {newick}")
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = GenConfig(n=args.taxa, s=args.trees, keep=args.keep, nni_moves=args.nni, seed=args.seed)
    M, model, sources = gen_instance(cfg)
    if args.out is None:
        _write(None, write_matrix(M))
        return EXIT_OK
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    _write(str(d / "matrix.flip"), write_matrix(M))
    _write(str(d / "model.nwk"), write_newick(model))
    _write(str(d / "sources.nwk"), "\n".join(write_newick(T) for T in sources))
    _write(str(d / "manifest.json"), json.dumps({**cfg.to_dict(), "m": M.m}, indent=2))
    return EXIT_OK


def cmd_stats(args) -> int:
    M = parse_matrix(_read(args.matrix))
    try:
        result = json.loads(_read(args.result))
        report = metrics_from_result(M, result, args.solved_cost)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CliError(f"malformed result file: {exc}") from None
    if args.format == "json":
        _write(args.out, dumps(report.to_dict()))
    else:
        _write(args.out, format_table(report))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _lb_options(p) -> None:
    p.add_argument("--lb-strategy", type=_strategy, default=Strategy.RANDOM,
                   help="greedy, inverse-weight or random (default)")
    p.add_argument("--lb-restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flipreduce", description="Data reduction for minimum-flip supertrees.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log one line per phase to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode Newick trees as a matrix")
    p.add_argument("--trees", required=True, help="Newick file ('-' for stdin)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("check", help="perfect-phylogeny test, conflicts and bounds")
    p.add_argument("--matrix", default="-")
    p.add_argument("--bounds", action="store_true", help="also print the certificate and an upper bound")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    _lb_options(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="apply the data reduction")
    p.add_argument("--matrix", default="-")
    p.add_argument("--k", type=_k_value, required=True, help="flip budget or 'auto'")
    p.add_argument("--bounds", action="store_true", help="use lower bounds with an explicit k")
    p.add_argument("--trace", action="store_true", help="include every decision in the output")
    p.add_argument("--solved-cost", type=int, help="cost of a known solution for the relative flip count")
    p.add_argument("--residual", help="write the reduced matrix here")
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.add_argument("--out")
    _lb_options(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="exact optimum for small matrices")
    p.add_argument("--matrix", default="-")
    p.add_argument("--witness", help="write the optimal matrix here")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--taxa", type=int, required=True)
    p.add_argument("--trees", type=int, default=4)
    p.add_argument("--keep", type=float, default=0.75)
    p.add_argument("--nni", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory; matrix to stdout if omitted")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="metrics from a reduction result")
    p.add_argument("--result", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--solved-cost", type=int)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (OSError, MatrixError, NewickError, CliError, ValueError) as exc:
        print(f"flipreduce {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
