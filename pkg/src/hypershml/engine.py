"""Instrumenting a circuit monitor over a finite set of traces."""

from __future__ import annotations

import random
from typing import Iterable, Iterator, TextIO

from .circuit import CircuitMonitor, Configuration, init_configuration
from .regular import Verdict
from .syntax import Alphabet, SyntaxErr, TraceSuite


class TraceClosed(RuntimeError):
    pass


class RunState:
    """Configuration, per-trace monitor lanes and cursors of one run.

    ``lanes[i][q]`` is the automaton state of the copy of quantifier gate
    ``q``'s monitor running on trace ``i + 1``.  With ``stop_on_verdict``
    (the default) the run freezes once the root decides; the exhaustive
    mode keeps every lane running, which the schedule-independence and
    compositionality checks need.
    """

    def __init__(
        self,
        circuit: CircuitMonitor,
        k: int,
        alphabet: Alphabet | None = None,
        stop_on_verdict: bool = True,
    ):
        self.circuit = circuit
        self.k = k
        self.config: Configuration = init_configuration(circuit, k)
        self.stop_on_verdict = stop_on_verdict
        self.quantifiers = circuit.quantifier_paths
        self.monitors = [circuit.gates[p].monitor for p in self.quantifiers]
        self.alphabet = alphabet or self.monitors[0].alphabet
        for m in self.monitors:
            if tuple(m.alphabet) != tuple(self.alphabet):
                raise SyntaxErr("circuit monitors were compiled over a different alphabet")
        self.column = self.monitors[0].column
        self.lanes = [[m.initial for m in self.monitors] for _ in range(k)]
        self.cursors = [0] * k
        self.closed = [False] * k
        # lanes that start in a verdict state report it straight away
        for i in range(k):
            for q, m in enumerate(self.monitors):
                v = m.verdicts.get(m.initial)
                if v is not None and not self._frozen:
                    self.config.update(self.quantifiers[q], i + 1, v)

    @property
    def verdict(self) -> Verdict | None:
        return self.config.root

    @property
    def _frozen(self) -> bool:
        return self.stop_on_verdict and self.config.root is not None

    def _check_index(self, trace: int) -> int:
        if not 1 <= trace <= self.k:
            raise IndexError(f"trace index {trace} outside 1..{self.k}")
        return trace - 1

    def feed(self, trace: int, action: str) -> Verdict | None:
        """Advance every monitor on ``trace`` by one event."""
        i = self._check_index(trace)
        if self._frozen:
            return self.config.root
        if self.closed[i]:
            raise TraceClosed(f"trace {trace} is closed")
        col = self.column.get(action)
        if col is None:
            raise SyntaxErr(f"unknown action {action!r}")
        lanes = self.lanes[i]
        fresh = []
        for q, m in enumerate(self.monitors):
            s = lanes[q]
            if s in m.verdicts:
                continue
            s = m.delta[s][col]
            lanes[q] = s
            v = m.verdicts.get(s)
            if v is not None:
                fresh.append((q, v))
        self.cursors[i] += 1
        for q, v in fresh:
            if self._frozen:
                break
            self.config.update(self.quantifiers[q], trace, v)
        return self.config.root

    def close(self, trace: int) -> Verdict | None:
        """End of stream on ``trace``: undecided lanes report ``end``."""
        i = self._check_index(trace)
        if self.closed[i]:
            return self.config.root
        self.closed[i] = True
        for q, m in enumerate(self.monitors):
            if self._frozen:
                break
            if self.lanes[i][q] not in m.verdicts:
                self.config.update(self.quantifiers[q], trace, Verdict.END)
        return self.config.root

    def close_all(self) -> Verdict | None:
        for trace in range(1, self.k + 1):
            self.close(trace)
        return self.config.root

    def lane_signature(self, trace: int) -> tuple[int, ...]:
        return tuple(self.lanes[trace - 1])


def instrument(
    circuit: CircuitMonitor, k: int, alphabet: Alphabet | None = None, **kwargs
) -> RunState:
    return RunState(circuit, k, alphabet, **kwargs)


def feed(r: RunState, trace: int, action: str) -> tuple[RunState, Verdict | None]:
    return r, r.feed(trace, action)


def close_trace(r: RunState, trace: int) -> tuple[RunState, Verdict | None]:
    return r, r.close(trace)


# -- lasso runs ---------------------------------------------------------------


def bounds(circuit: CircuitMonitor, suite: TraceSuite) -> list[int]:
    """Per-trace event budget ``|u| + |v| * S``, S the largest monitor.

    After that many events every lane on a lasso is either in a verdict
    state or cycling through non-verdict states forever.
    """
    s = circuit.max_monitor_states
    return [len(t.prefix) + len(t.loop) * s for t in suite.traces]


def round_robin(budget: list[int]) -> Iterator[int]:
    for r in range(max(budget, default=0)):
        for i, b in enumerate(budget):
            if r < b:
                yield i + 1


def random_schedule(budget: list[int], rng: random.Random) -> list[int]:
    order = [i + 1 for i, b in enumerate(budget) for _ in range(b)]
    rng.shuffle(order)
    return order


def execute(
    circuit: CircuitMonitor,
    suite: TraceSuite,
    *,
    exhaustive: bool = False,
    schedule: Iterable[int] | None = None,
    detect_cycles: bool = False,
) -> RunState:
    """Run ``circuit`` over the lasso suite and close every trace at the end.

    ``schedule`` lists trace indices, one per event; each trace must appear
    exactly as often as its budget (round-robin by default).  With
    ``detect_cycles`` a trace stops being fed once its lane states repeat
    at the same loop phase.
    """
    if tuple(suite.alphabet) != tuple(circuit.gates[circuit.quantifier_paths[0]].monitor.alphabet):
        raise SyntaxErr("suite alphabet does not match the circuit alphabet")
    run = RunState(circuit, suite.k, suite.alphabet, stop_on_verdict=not exhaustive)
    budget = bounds(circuit, suite)
    streams = [t.events() for t in suite.traces]
    seen: list[set] = [set() for _ in suite.traces]
    parked = [False] * suite.k
    for trace in schedule if schedule is not None else round_robin(budget):
        if run.verdict is not None and not exhaustive:
            return run
        i = trace - 1
        if parked[i]:
            continue
        if run.cursors[i] >= budget[i]:
            raise ValueError(f"schedule feeds trace {trace} beyond its budget {budget[i]}")
        if detect_cycles:
            t = suite.traces[i]
            n = run.cursors[i]
            if n >= len(t.prefix) and (n - len(t.prefix)) % len(t.loop) == 0:
                sig = run.lane_signature(trace)
                if sig in seen[i]:
                    parked[i] = True
                    continue
                seen[i].add(sig)
        run.feed(trace, next(streams[i]))
    if run.verdict is None or exhaustive:
        run.close_all()
    return run


def run_suite(circuit: CircuitMonitor, suite: TraceSuite, **kwargs) -> Verdict:
    v = execute(circuit, suite, **kwargs).verdict
    assert v is not None
    return v


# -- live streams -------------------------------------------------------------


def run_stream(run: RunState, lines: Iterable[str], out: TextIO | None = None) -> Verdict:
    """Consume ``<trace> <action>`` / ``<trace> $`` lines until the root decides.

    Traces still open at end of input are closed.
    """
    for lineno, raw in enumerate(lines, 1):
        if run.verdict is not None:
            break
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[0].isdigit():
            raise SyntaxErr(f"expected '<trace> <action>' or '<trace> $', got {line!r}", lineno, 1)
        trace, action = int(parts[0]), parts[1]
        if action == "$":
            run.close(trace)
        else:
            run.feed(trace, action)
    if run.verdict is None:
        run.close_all()
    v = run.verdict
    assert v is not None
    if out is not None:
        print(f"verdict {v}", file=out)
    return v


EXIT_CODES = {Verdict.YES: 0, Verdict.NO: 1, Verdict.END: 2}


def interleavings(budget: list[int], n: int, seed: int) -> list[list[int]]:
    rng = random.Random(seed)
    return [random_schedule(budget, rng) for _ in range(n)]

