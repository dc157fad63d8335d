"""Random generation, differential fuzzing, circuit statistics and timing."""

from __future__ import annotations

import gc
import itertools
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from .circuit import CircuitMonitor, syn
from .engine import RunState, bounds, execute
from .oracle import eval_hyper
from .regular import MonitorAutomaton, Verdict, compile_shml
from .syntax import (
    FF,
    TT,
    Alphabet,
    And,
    Box,
    Exists,
    Forall,
    Hyper,
    Join,
    LassoTrace,
    Max,
    Meet,
    RecVar,
    Shml,
    SyntaxErr,
    TraceSuite,
    check_shml,
    print_hyper,
    print_suite,
    quantifiers,
)

ACTIONS = ("a", "b", "c")


@dataclass(frozen=True)
class Bounds:
    """Size limits for random cases."""

    shml_depth: int = 4
    hyper_depth: int = 2
    max_k: int = 6
    max_prefix: int = 4
    max_loop: int = 4
    max_actions: int = 3
    steer: float = 0.3


# -- generators ---------------------------------------------------------------


def _raw_shml(rng: random.Random, depth: int, actions: tuple[str, ...], bound: list[str]) -> Shml:
    if depth <= 0:
        if bound and rng.random() < 0.7:
            return RecVar(rng.choice(bound))
        return FF() if rng.random() < 0.8 else TT()
    r = rng.random()
    if r < 0.40:
        return Box(rng.choice(actions), _raw_shml(rng, depth - 1, actions, bound))
    if r < 0.65:
        return And(
            _raw_shml(rng, depth - 1, actions, bound),
            _raw_shml(rng, depth - 1, actions, bound),
        )
    if r < 0.85:
        if bound and rng.random() < 0.3:
            return RecVar(rng.choice(bound))
        var = "xyz"[len(bound) % 3] if len(bound) < 3 else f"x{len(bound)}"
        return Max(var, _raw_shml(rng, depth - 1, actions, bound + [var]))
    return rng.choice((TT(), FF()))


def random_shml(
    rng: random.Random,
    actions: tuple[str, ...],
    depth: int = 4,
    keep_trivial: float = 0.2,
    recursive: float = 0.35,
) -> Shml:
    """Random closed, guarded sHML formula.

    A ``recursive`` share of draws is rooted at a ``max`` binder.  Ill-formed
    draws are discarded, and so are most draws whose monitor is a single
    verdict state.
    """
    while True:
        if rng.random() < recursive:
            f = Max("x", _raw_shml(rng, depth - 1, actions, ["x"]))
        else:
            f = _raw_shml(rng, depth, actions, [])
        try:
            check_shml(f)
        except SyntaxErr:
            continue
        if _trivial(f, actions) and rng.random() >= keep_trivial:
            continue
        return f


def _trivial(f: Shml, actions: tuple[str, ...]) -> bool:
    return compile_shml(f, Alphabet(actions)).size == 1


def random_hyper(
    rng: random.Random, actions: tuple[str, ...], depth: int = 2, shml_depth: int = 4
) -> Hyper:
    if depth > 0 and rng.random() < 0.6:
        op = Join if rng.random() < 0.5 else Meet
        return op(
            random_hyper(rng, actions, depth - 1, shml_depth),
            random_hyper(rng, actions, depth - 1, shml_depth),
        )
    q = Exists if rng.random() < 0.5 else Forall
    return q("p", random_shml(rng, actions, shml_depth))


def random_lasso(rng: random.Random, actions: tuple[str, ...], max_prefix: int = 4, max_loop: int = 4) -> LassoTrace:
    u = tuple(rng.choice(actions) for _ in range(rng.randint(0, max_prefix)))
    v = tuple(rng.choice(actions) for _ in range(rng.randint(1, max_loop)))
    return LassoTrace(u, v)


def random_suite(rng: random.Random, alphabet: Alphabet, b: Bounds = Bounds()) -> TraceSuite:
    k = rng.randint(1, b.max_k)
    acts = tuple(alphabet)
    return TraceSuite(alphabet, tuple(random_lasso(rng, acts, b.max_prefix, b.max_loop) for _ in range(k)))


def random_alphabet(rng: random.Random, max_actions: int = 3) -> Alphabet:
    return Alphabet(ACTIONS[: rng.randint(1, max_actions)])


def case_rng(seed: int, case: int) -> random.Random:
    return random.Random(f"{seed}:{case}")


def random_case(seed: int, case: int, b: Bounds = Bounds()) -> tuple[Hyper, TraceSuite]:
    """Reproducible (formula, suite) pair for one fuzz case.

    Roughly a third of the traces are steered onto a lasso that keeps one
    of the formula's monitors undecided forever, so inconclusive lanes get
    exercised; the rest are uniform.
    """
    rng = case_rng(seed, case)
    alphabet = random_alphabet(rng, b.max_actions)
    f = random_hyper(rng, tuple(alphabet), b.hyper_depth, b.shml_depth)
    suite = random_suite(rng, alphabet, b)
    bodies = [q.body for q in quantifiers(f)]
    traces = []
    for t in suite.traces:
        if rng.random() < b.steer:
            m = compile_shml(rng.choice(bodies), alphabet)
            live = _live_lasso([m], rng)
            if live is not None and len(live.prefix) <= b.max_prefix + 2:
                t = live
        traces.append(t)
    return f, TraceSuite(alphabet, tuple(traces))


# -- fuzzing ------------------------------------------------------------------


@dataclass
class FuzzFailure:
    seed: int
    case: int
    kind: str  # "soundness" or "completeness"
    formula: str
    suite: str
    verdict: Verdict
    satisfied: bool

    def __str__(self) -> str:
        return (
            f"{self.kind} failure (seed={self.seed} case={self.case}): "
            f"monitor={self.verdict} oracle={'sat' if self.satisfied else 'unsat'}\n"
            f"  formula: {self.formula}\n  suite: " + self.suite.strip().replace("\n", " ; ")
        )


@dataclass
class FuzzReport:
    seed: int
    cases: int = 0
    soundness_violations: int = 0
    completeness_misses: int = 0
    failures: list[FuzzFailure] = field(default_factory=list)
    verdicts: Counter = field(default_factory=Counter)
    satisfied: int = 0

    @property
    def ok(self) -> bool:
        return self.soundness_violations == 0 and self.completeness_misses == 0


def check_case(f: Hyper, suite: TraceSuite) -> tuple[Verdict, bool, bool]:
    """(monitor verdict, oracle satisfaction, rejected within budget)."""
    circuit = syn(f, suite.alphabet)
    run = execute(circuit, suite)
    sat = eval_hyper(f, suite)
    budget = bounds(circuit, suite)
    in_time = all(c <= b for c, b in zip(run.cursors, budget))
    return run.verdict, sat, in_time


def fuzz(seed: int, cases: int, b: Bounds = Bounds()) -> FuzzReport:
    if cases < 1:
        raise ValueError("cases must be at least 1")
    report = FuzzReport(seed)
    for i in range(cases):
        f, suite = random_case(seed, i, b)
        verdict, sat, in_time = check_case(f, suite)
        report.cases += 1
        report.verdicts[verdict] += 1
        report.satisfied += sat
        kind = None
        if (verdict is Verdict.NO and sat) or (verdict is Verdict.YES and not sat):
            report.soundness_violations += 1
            kind = "soundness"
        elif not sat and (verdict is not Verdict.NO or not in_time):
            report.completeness_misses += 1
            kind = "completeness"
        if kind:
            report.failures.append(
                FuzzFailure(seed, i, kind, print_hyper(f), print_suite(suite), verdict, sat)
            )
    return report


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class CircuitStats:
    k: int
    depth: int
    gate_count: int
    max_fan_in: int
    monitor_copies: int
    monitor_states: tuple[int, ...]


def circuit_stats(circuit: CircuitMonitor, k: int) -> CircuitStats:
    if k < 1:
        raise ValueError("k must be at least 1")
    states = tuple(circuit.gates[p].monitor.size for p in circuit.quantifier_paths)
    return CircuitStats(
        k=k,
        depth=circuit.depth,
        gate_count=circuit.gate_count,
        max_fan_in=circuit.max_fan_in(k),
        monitor_copies=k * len(states),
        monitor_states=states,
    )


# -- benchmarking -------------------------------------------------------------


def live_lasso(circuit: CircuitMonitor) -> LassoTrace | None:
    """A lasso on which no monitor of ``circuit`` ever reaches a verdict."""
    return _live_lasso([circuit.gates[p].monitor for p in circuit.quantifier_paths])


def busiest_lasso(circuit: CircuitMonitor) -> LassoTrace | None:
    """A lasso keeping as many distinct monitors undecided as possible."""
    monitors = list({id(circuit.gates[p].monitor): circuit.gates[p].monitor
                     for p in circuit.quantifier_paths}.values())
    for size in range(len(monitors), 0, -1):
        for group in itertools.combinations(monitors, size):
            t = _live_lasso(list(group))
            if t is not None:
                return t
    return None


def _live_lasso(
    monitors: list[MonitorAutomaton], rng: random.Random | None = None
) -> LassoTrace | None:
    """Depth-first search over the product automaton for a back edge that
    avoids verdict states; ``rng`` shuffles the order actions are tried in."""
    acts = tuple(monitors[0].alphabet)

    def dead(node: tuple) -> bool:
        return any(s in m.verdicts for s, m in zip(node, monitors))

    def options() -> list[int]:
        cols = list(range(len(acts)))
        if rng is not None:
            rng.shuffle(cols)
        return cols

    start = tuple(m.initial for m in monitors)
    if dead(start):
        return None
    path, word = [start], []
    on_path, visited = {start: 0}, {start}
    choices = [iter(options())]
    while choices:
        j = next(choices[-1], None)
        if j is None:
            choices.pop()
            del on_path[path.pop()]
            if word:
                word.pop()
            continue
        nxt = tuple(m.delta[s][j] for s, m in zip(path[-1], monitors))
        if dead(nxt):
            continue
        if nxt in on_path:
            full = word + [acts[j]]
            cut = on_path[nxt]
            return LassoTrace(tuple(full[:cut]), tuple(full[cut:]))
        if nxt in visited:
            continue
        visited.add(nxt)
        on_path[nxt] = len(path)
        path.append(nxt)
        word.append(acts[j])
        choices.append(iter(options()))
    return None


@dataclass(frozen=True)
class BenchRow:
    k: int
    events: int
    seconds: float

    @property
    def per_event(self) -> float:
        return self.seconds / self.events if self.events else 0.0


def bench(circuit: CircuitMonitor, k: int, event_counts: list[int], repeats: int = 3) -> list[BenchRow]:
    """Mean per-event latency of ``feed``.

    Events are spread round-robin over the ``k`` traces along a lasso that
    keeps as many monitors busy as possible.  Runs do not stop at a root
    verdict, so every event does real work.  Each length is run ``repeats``
    times and the fastest run is kept.
    """
    lasso = busiest_lasso(circuit)
    acts = tuple(circuit.gates[circuit.quantifier_paths[0]].monitor.alphabet)
    rows = []
    for n in event_counts:
        if n == 0:
            rows.append(BenchRow(k, 0, 0.0))
            continue
        per_trace = -(-n // k)
        word = lasso.take(per_trace) if lasso else (acts[0],) * per_trace
        events = [(1 + i % k, word[i // k]) for i in range(n)]
        best = None
        for _ in range(repeats):
            run = RunState(circuit, k, stop_on_verdict=False)
            feed = run.feed
            gc.disable()
            try:
                t0 = time.perf_counter()
                for trace, a in events:
                    feed(trace, a)
                elapsed = time.perf_counter() - t0
            finally:
                gc.enable()
            best = elapsed if best is None else min(best, elapsed)
        rows.append(BenchRow(k, n, best))
    return rows
