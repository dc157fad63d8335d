"""Command-line interface: synth | run | oracle | fuzz | stats | bench."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .circuit import gate_name, syn
from .engine import EXIT_CODES, RunState, TraceClosed, execute, run_stream
from .harness import Bounds, bench, circuit_stats, fuzz, random_case
from .oracle import eval_hyper
from .regular import StateSpaceExceeded, print_term, to_term
from .syntax import (
    Alphabet,
    Box,
    SyntaxErr,
    parse_hyper,
    parse_suite,
    print_hyper,
    quantifiers,
)

EXIT_ERROR = 3


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _box_actions(f) -> set[str]:
    out: set[str] = set()
    stack = [q.body for q in quantifiers(f)]
    while stack:
        g = stack.pop()
        if isinstance(g, Box):
            out.add(g.action)
        stack.extend(getattr(g, n) for n in ("body", "left", "right") if hasattr(g, n))
    return out


def load_formula(args, alphabet: Alphabet | None = None):
    if args.expr is not None:
        text = args.expr
    elif args.formula is not None:
        text = Path(args.formula).read_text()
    else:
        raise UsageError("give a formula with --formula FILE or -e TEXT")
    if alphabet is None and args.alphabet:
        alphabet = Alphabet.of(args.alphabet)
    f = parse_hyper(text, alphabet)
    if alphabet is None:
        # no declared alphabet: use the actions the formula mentions
        acts = sorted(_box_actions(f)) or ["a"]
        alphabet = Alphabet(tuple(acts))
    return f, alphabet


def load_suite(args):
    if args.suite is None:
        raise UsageError("give a trace suite with --suite FILE")
    suite = parse_suite(Path(args.suite).read_text())
    if args.alphabet and tuple(Alphabet.of(args.alphabet)) != tuple(suite.alphabet):
        raise UsageError("--alphabet does not match the suite's alphabet line")
    return suite


def _row(cols: list, tsv: bool, widths: list[int]) -> str:
    if tsv:
        return "\t".join(str(c) for c in cols)
    return "  ".join(str(c).rjust(w) for c, w in zip(cols, widths))


# -- subcommands --------------------------------------------------------------


def cmd_synth(args, out: TextIO) -> int:
    f, alphabet = load_formula(args)
    circuit = syn(f, alphabet, args.max_states)
    k = args.k[0] if args.k else None
    if args.dump in ("tree", "both"):
        print(circuit.dump(k), file=out)
    if args.dump in ("term", "both"):
        for path in circuit.quantifier_paths:
            g = circuit.gates[path]
            print(f"{gate_name(path)}\t{print_term(to_term(g.monitor))}", file=out)
    if args.automaton:
        for path in circuit.quantifier_paths:
            print(f"# {gate_name(path)}", file=out)
            print(circuit.gates[path].monitor.dump(), file=out)
    return 0


def cmd_run(args, out: TextIO) -> int:
    if args.stream:
        f, alphabet = load_formula(args)
        if not args.k or len(args.k) != 1:
            raise UsageError("--stream needs the number of traces as --k N")
        run = RunState(syn(f, alphabet, args.max_states), args.k[0], alphabet)
        source = open(args.events) if args.events else sys.stdin
        try:
            verdict = run_stream(run, source, out)
        finally:
            if args.events:
                source.close()
        return EXIT_CODES[verdict]
    suite = load_suite(args)
    f, _ = load_formula(args, suite.alphabet)
    circuit = syn(f, suite.alphabet, args.max_states)
    run = execute(circuit, suite, detect_cycles=args.detect_cycles)
    print(f"verdict {run.verdict}", file=out)
    if args.show_config:
        print(run.config.dump(), file=out)
    return EXIT_CODES[run.verdict]


def cmd_oracle(args, out: TextIO) -> int:
    suite = load_suite(args)
    f, _ = load_formula(args, suite.alphabet)
    print("sat" if eval_hyper(f, suite) else "unsat", file=out)
    return 0


def cmd_fuzz(args, out: TextIO) -> int:
    b = Bounds(
        shml_depth=args.depth,
        max_k=args.max_k,
        max_prefix=args.max_prefix,
        max_loop=args.max_loop,
        max_actions=args.max_actions,
    )
    if args.replay is not None:
        f, suite = random_case(args.seed, args.replay, b)
        print(f"formula: {print_hyper(f)}", file=out)
        print(f"suite: {' ; '.join(str(t) for t in suite.traces)}", file=out)
        run = execute(syn(f, suite.alphabet), suite)
        print(f"monitor: {run.verdict}", file=out)
        print(f"oracle: {'sat' if eval_hyper(f, suite) else 'unsat'}", file=out)
        return 0
    report = fuzz(args.seed, args.cases, b)
    tsv = args.tsv
    rows = [
        ("seed", report.seed),
        ("cases", report.cases),
        ("soundness_violations", report.soundness_violations),
        ("completeness_misses", report.completeness_misses),
        ("oracle_sat", report.satisfied),
        *((f"verdict_{v}", n) for v, n in sorted(report.verdicts.items(), key=lambda x: x[0].value)),
    ]
    for name, value in rows:
        print(f"{name}\t{value}" if tsv else f"{name}: {value}", file=out)
    for failure in report.failures:
        print(failure, file=out)
    return 0 if report.ok else 1


def cmd_stats(args, out: TextIO) -> int:
    f, alphabet = load_formula(args)
    circuit = syn(f, alphabet, args.max_states)
    ks = args.k or [1, 8, 64]
    header = ["k", "depth", "gates", "max_fan_in", "monitor_copies", "monitor_states"]
    widths = [4, 5, 5, 10, 14, 14]
    print(_row(header, args.tsv, widths), file=out)
    for k in ks:
        s = circuit_stats(circuit, k)
        states = ",".join(map(str, s.monitor_states))
        print(_row([s.k, s.depth, s.gate_count, s.max_fan_in, s.monitor_copies, states], args.tsv, widths), file=out)
    return 0


def cmd_bench(args, out: TextIO) -> int:
    f, alphabet = load_formula(args)
    circuit = syn(f, alphabet, args.max_states)
    ks = args.k or [1]
    counts = args.events_counts or [1000, 100000]
    header = ["k", "events", "total_s", "per_event_us"]
    widths = [4, 8, 10, 12]
    print(_row(header, args.tsv, widths), file=out)
    for k in ks:
        for row in bench(circuit, k, counts, args.repeats):
            if row.events == 0:
                print(_row([k, 0, "", ""], args.tsv, widths), file=out)
                continue
            cells = [k, row.events, f"{row.seconds:.4f}", f"{row.per_event * 1e6:.3f}"]
            print(_row(cells, args.tsv, widths), file=out)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "run": cmd_run,
    "oracle": cmd_oracle,
    "fuzz": cmd_fuzz,
    "stats": cmd_stats,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alphabet", help='actions, e.g. "a b"')
    common.add_argument("--formula", metavar="FILE", help="formula file")
    common.add_argument("-e", "--expr", metavar="TEXT", help="formula given inline")
    common.add_argument("--suite", metavar="FILE", help="trace-suite file")
    common.add_argument("--k", type=_int_list, metavar="LIST", help='trace counts, e.g. "1,8,64"')
    common.add_argument("--tsv", action="store_true", help="tab-separated output")
    common.add_argument("--max-states", type=int, default=100_000, help="derivative state cap")

    parser = argparse.ArgumentParser(prog="hypershml", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="synthesize and print a circuit monitor")
    p.add_argument("--dump", choices=("tree", "term", "both"), default="tree")
    p.add_argument("--automaton", action="store_true", help="also dump each monitor automaton")

    p = sub.add_parser("run", parents=[common], help="monitor a lasso suite or an event stream")
    p.add_argument("--stream", action="store_true", help="read '<trace> <action>' lines")
    p.add_argument("--events", metavar="FILE", help="event file for --stream (default stdin)")
    p.add_argument("--detect-cycles", action="store_true")
    p.add_argument("--show-config", action="store_true", help="print the final configuration")

    sub.add_parser("oracle", parents=[common], help="brute-force satisfaction check")

    p = sub.add_parser("fuzz", parents=[common], help="differential test against the oracle")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--depth", type=int, default=4, help="sHML body depth")
    p.add_argument("--max-k", type=int, default=6)
    p.add_argument("--max-prefix", type=int, default=4)
    p.add_argument("--max-loop", type=int, default=4)
    p.add_argument("--max-actions", type=int, default=3)
    p.add_argument("--replay", type=int, metavar="CASE", help="show one case of the seed")

    sub.add_parser("stats", parents=[common], help="circuit depth, size and fan-in per k")

    p = sub.add_parser("bench", parents=[common], help="per-event latency of feed")
    p.add_argument("--events", dest="events_counts", type=_int_list, metavar="LIST")
    p.add_argument("--repeats", type=int, default=3)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (SyntaxErr, UsageError, OSError, StateSpaceExceeded, TraceClosed, IndexError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
