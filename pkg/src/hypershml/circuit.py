"""Circuit monitors: gate trees, configurations and verdict propagation.

Gates are addressed by their path from the root: ``()`` is the root and
``path + (i,)`` is the ``i``-th child (1-based, matching the sub-index used
by :func:`apply_verdict`).  A quantifier gate's sub-gates are the ``k``
monitor copies, one per trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .regular import (
    DEFAULT_MAX_STATES,
    MonitorAutomaton,
    Verdict,
    compile_shml,
    print_term,
    to_term,
)
from .syntax import Alphabet, Exists, Forall, Hyper, Join, Meet, Shml

# -- gates --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BigOr:
    monitor: MonitorAutomaton
    body: Shml


@dataclass(frozen=True, eq=False)
class BigAnd:
    monitor: MonitorAutomaton
    body: Shml


@dataclass(frozen=True, eq=False)
class OrGate:
    left: "Gate"
    right: "Gate"


@dataclass(frozen=True, eq=False)
class AndGate:
    left: "Gate"
    right: "Gate"


Gate = Union[BigOr, BigAnd, OrGate, AndGate]
Path = tuple[int, ...]

QUANTIFIER_GATES = (BigOr, BigAnd)
OR_KIND = (BigOr, OrGate)


def gate_name(path: Path) -> str:
    return ".".join(["g", *map(str, path)])


class CircuitMonitor:
    """A gate tree plus the indexes the runtime needs.

    ``gates`` is in preorder; ``parent[p]`` is ``(parent path, sub-index)``.
    """

    def __init__(self, root: Gate):
        self.root = root
        self.gates: dict[Path, Gate] = {}
        self.parent: dict[Path, tuple[Path, int]] = {}

        def walk(g: Gate, path: Path) -> None:
            self.gates[path] = g
            if isinstance(g, (OrGate, AndGate)):
                for i, child in ((1, g.left), (2, g.right)):
                    self.parent[path + (i,)] = (path, i)
                    walk(child, path + (i,))

        walk(root, ())
        self.quantifier_paths: list[Path] = [
            p for p, g in self.gates.items() if isinstance(g, QUANTIFIER_GATES)
        ]

    def __iter__(self) -> Iterator[tuple[Path, Gate]]:
        return iter(self.gates.items())

    @property
    def depth(self) -> int:
        return 1 + max(len(p) for p in self.gates)

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def fan_in(self, path: Path, k: int) -> int:
        return k if isinstance(self.gates[path], QUANTIFIER_GATES) else 2

    def max_fan_in(self, k: int) -> int:
        return max(self.fan_in(p, k) for p in self.gates)

    @property
    def max_monitor_states(self) -> int:
        return max(self.gates[p].monitor.size for p in self.quantifier_paths)

    def dump(self, k: int | None = None) -> str:
        lines = []
        for path, g in self.gates.items():
            indent = "  " * len(path)
            if isinstance(g, QUANTIFIER_GATES):
                name = "BIGOR" if isinstance(g, BigOr) else "BIGAND"
                karg = f" k={k}" if k is not None else ""
                lines.append(f"{indent}{name}{karg} monitor={print_term(to_term(g.monitor))}")
            else:
                lines.append(indent + ("OR" if isinstance(g, OrGate) else "AND"))
        return "\n".join(lines)


def syn(
    f: Hyper, alphabet: Alphabet, max_states: int = DEFAULT_MAX_STATES
) -> CircuitMonitor:
    """Synthesize the circuit monitor of a Hyper-sHML formula."""
    cache: dict[Shml, MonitorAutomaton] = {}

    def monitor(body: Shml) -> MonitorAutomaton:
        if body not in cache:
            cache[body] = compile_shml(body, alphabet, max_states)
        return cache[body]

    def build(g: Hyper) -> Gate:
        if isinstance(g, Exists):
            return BigOr(monitor(g.body), g.body)
        if isinstance(g, Forall):
            return BigAnd(monitor(g.body), g.body)
        if isinstance(g, Join):
            return OrGate(build(g.left), build(g.right))
        if isinstance(g, Meet):
            return AndGate(build(g.left), build(g.right))
        raise TypeError(f"not a hyper formula: {g!r}")

    return CircuitMonitor(build(f))


# -- configurations -----------------------------------------------------------


@dataclass(frozen=True)
class Decided:
    verdict: Verdict


@dataclass
class Pending:
    """Bit ``i`` set means sub-gate ``i + 1`` has not produced a verdict."""

    bits: list[bool]
    end: bool = False
    waiting: int = field(init=False)

    def __post_init__(self) -> None:
        self.waiting = sum(self.bits)

    def copy(self) -> "Pending":
        return Pending(list(self.bits), self.end)


GateValue = Union[Decided, Pending]


class Configuration:
    """Values of every gate variable of a circuit.

    ``log`` records gate decisions in the order they happened.
    """

    def __init__(self, circuit: CircuitMonitor, values: dict[Path, GateValue]):
        self.circuit = circuit
        self.values = values
        self.log: list[tuple[Path, Verdict]] = []

    def copy(self) -> "Configuration":
        c = Configuration(
            self.circuit,
            {p: v.copy() if isinstance(v, Pending) else v for p, v in self.values.items()},
        )
        c.log = list(self.log)
        return c

    def __getitem__(self, path: Path) -> GateValue:
        return self.values[path]

    @property
    def root(self) -> Verdict | None:
        v = self.values[()]
        return v.verdict if isinstance(v, Decided) else None

    def snapshot(self, under: Path = ()) -> dict[Path, object]:
        """Comparable view of the gates below ``under``, re-rooted there."""
        n = len(under)
        out = {}
        for p, v in self.values.items():
            if p[:n] == under:
                out[p[n:]] = v.verdict if isinstance(v, Decided) else (tuple(v.bits), v.end)
        return out

    def dump(self) -> str:
        lines = []
        for p, v in self.values.items():
            if isinstance(v, Decided):
                lines.append(f"{gate_name(p)}: {v.verdict}")
            else:
                bits = "".join("1" if b else "0" for b in v.bits)
                lines.append(f"{gate_name(p)}: bits={bits} end={int(v.end)}")
        return "\n".join(lines)

    # in-place updates; the engine relies on these to keep per-event work
    # independent of k

    def _decide(self, path: Path, verdict: Verdict) -> None:
        self.values[path] = Decided(verdict)
        self.log.append((path, verdict))

    def _apply(self, path: Path, sub: int, verdict: Verdict) -> None:
        val = self.values[path]
        if isinstance(val, Decided):
            return
        if not 1 <= sub <= len(val.bits):
            raise IndexError(f"sub-gate {sub} out of range for {gate_name(path)}")
        if not val.bits[sub - 1]:
            return
        or_kind = isinstance(self.circuit.gates[path], OR_KIND)
        if verdict is (Verdict.YES if or_kind else Verdict.NO):
            self._decide(path, verdict)
            return
        val.bits[sub - 1] = False
        val.waiting -= 1
        if verdict is Verdict.END:
            val.end = True

    def _settle(self, path: Path) -> None:
        """Reduce ``path`` and push any decision up towards the root."""
        while True:
            val = self.values[path]
            if isinstance(val, Pending):
                if val.waiting:
                    return
                or_kind = isinstance(self.circuit.gates[path], OR_KIND)
                if val.end:
                    verdict = Verdict.END
                else:
                    verdict = Verdict.NO if or_kind else Verdict.YES
                self._decide(path, verdict)
            else:
                verdict = val.verdict
            if path not in self.circuit.parent:
                return
            path, sub = self.circuit.parent[path]
            before = self.values[path]
            if isinstance(before, Decided) or not before.bits[sub - 1]:
                return
            self._apply(path, sub, verdict)

    def update(self, path: Path, sub: int, verdict: Verdict) -> None:
        """Apply a sub-gate verdict and reduce along the path to the root."""
        self._apply(path, sub, verdict)
        self._settle(path)


def init_configuration(c: CircuitMonitor, k: int) -> Configuration:
    if k < 1:
        raise ValueError("a trace suite needs at least one trace (k >= 1)")
    values: dict[Path, GateValue] = {
        p: Pending([True] * c.fan_in(p, k)) for p in c.gates
    }
    return Configuration(c, values)


def apply_verdict(s: Configuration, gate: Path, sub: int, verdict: Verdict) -> Configuration:
    """One gate rule: record that sub-gate ``sub`` produced ``verdict``.

    Does not reduce; a gate left with no pending bits is settled by
    :func:`reduce`.
    """
    out = s.copy()
    out._apply(gate, sub, verdict)
    return out


def reduce(s: Configuration) -> Configuration:
    """Fire the completion and propagation rules until quiescence."""
    out = s.copy()
    changed = True
    while changed:
        changed = False
        for path in sorted(out.values, key=len, reverse=True):
            val = out.values[path]
            if isinstance(val, Pending) and not val.waiting:
                out._settle(path)
                changed = True
            elif isinstance(val, Decided) and path in out.circuit.parent:
                parent, sub = out.circuit.parent[path]
                pval = out.values[parent]
                if isinstance(pval, Pending) and pval.bits[sub - 1]:
                    out._settle(path)
                    changed = True
    return out


def root_verdict(s: Configuration) -> Verdict | None:
    return s.root
