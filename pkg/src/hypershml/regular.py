"""Regular monitors for sHML, compiled through formula derivatives.

A formula is compiled into a deterministic automaton whose states are the
normalized derivatives of the formula.  Unsatisfiable states become the
``no`` sink and states that can no longer reach ``no`` become the ``yes``
sink, so a run is rejected at the first prefix all of whose extensions
violate the formula.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Union

from .syntax import (
    FF,
    TT,
    Alphabet,
    And,
    Box,
    Max,
    RecVar,
    Shml,
    SyntaxErr,
    print_shml,
    unfold,
)

DEFAULT_MAX_STATES = 100_000


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    END = "end"

    def __str__(self) -> str:
        return self.value


class StateSpaceExceeded(RuntimeError):
    pass


# -- derivatives --------------------------------------------------------------


def conjuncts(f: Shml) -> frozenset[Shml] | None:
    """Flattened conjunct set of ``f``; None stands for ff."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack += (g.left, g.right)
        elif isinstance(g, FF):
            return None
        elif not isinstance(g, TT):
            out.add(g)
    return frozenset(out)


def from_conjuncts(parts: Iterable[Shml] | None) -> Shml:
    if parts is None:
        return FF()
    ordered = sorted(parts, key=print_shml)
    if not ordered:
        return TT()
    f = ordered[0]
    for g in ordered[1:]:
        f = And(f, g)
    return f


def normalize(f: Shml) -> Shml:
    return from_conjuncts(conjuncts(f))


def _derive(f: Shml, a: str) -> Shml:
    if isinstance(f, (TT, FF)):
        return f
    if isinstance(f, Box):
        return f.body if f.action == a else TT()
    if isinstance(f, And):
        return And(_derive(f.left, a), _derive(f.right, a))
    if isinstance(f, Max):
        return _derive(unfold(f), a)
    if isinstance(f, RecVar):
        raise SyntaxErr(f"unbound recursion variable {f.name!r}")
    raise TypeError(f"not an sHML formula: {f!r}")


def derivative(f: Shml, a: str) -> Shml:
    """Residual obligation after observing ``a``, normalized."""
    return normalize(_derive(f, a))


# -- automata -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MonitorAutomaton:
    """Deterministic, total monitor over ``alphabet``.

    ``delta[s][j]`` is the successor of state ``s`` on ``alphabet.actions[j]``;
    ``labels[s]`` is the residual formula a state stands for.
    """

    alphabet: Alphabet
    initial: int
    delta: tuple[tuple[int, ...], ...]
    verdicts: dict[int, Verdict]
    labels: tuple[Shml, ...]
    column: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "column", {a: j for j, a in enumerate(self.alphabet)})

    @property
    def size(self) -> int:
        return len(self.delta)

    def verdict(self, state: int) -> Verdict | None:
        return self.verdicts.get(state)

    def run(self, word: Iterable[str], state: int | None = None) -> int:
        s = self.initial if state is None else state
        for a in word:
            s = step(self, s, a)
        return s

    def first_verdict(self, word: Iterable[str]) -> tuple[int, Verdict] | None:
        """(prefix length, verdict) of the first verdict state met along ``word``."""
        s = self.initial
        for n, a in enumerate(itertools.chain(word, [None])):
            v = self.verdicts.get(s)
            if v is not None:
                return n, v
            if a is None:
                return None
            s = step(self, s, a)
        return None

    def dump(self) -> str:
        lines = []
        for s in range(self.size):
            v = self.verdicts.get(s)
            lines.append(f"state {s}" + (f" {v}" if v else ""))
        for s in range(self.size):
            for a, t in zip(self.alphabet, self.delta[s]):
                lines.append(f"{s} -{a}-> {t}")
        return "\n".join(lines)


def step(m: MonitorAutomaton, state: int, action: str) -> int:
    try:
        return m.delta[state][m.column[action]]
    except KeyError:
        raise SyntaxErr(f"unknown action {action!r}") from None


def compile_shml(
    f: Shml, alphabet: Alphabet, max_states: int = DEFAULT_MAX_STATES
) -> MonitorAutomaton:
    """Compile a closed, guarded sHML formula into a monitor automaton."""
    acts = tuple(alphabet)
    init = conjuncts(f)
    index = {init: 0}
    states = [init]
    delta: list[list[int]] = []
    i = 0
    while i < len(states):
        parts = states[i]
        row = []
        for a in acts:
            if parts is None:
                succ = None
            else:
                succ = conjuncts(_derive(from_conjuncts(parts), a))
            if succ not in index:
                if len(states) >= max_states:
                    raise StateSpaceExceeded(
                        f"more than {max_states} derivative states; formula is pathological"
                    )
                index[succ] = len(states)
                states.append(succ)
            row.append(index[succ])
        delta.append(row)
        i += 1

    n = len(states)
    # greatest set of states with an infinite ff-free continuation
    sat = {s for s in range(n) if states[s] is not None}
    changed = True
    while changed:
        changed = False
        for s in list(sat):
            if not any(t in sat for t in delta[s]):
                sat.discard(s)
                changed = True
    rejecting = set(range(n)) - sat
    # states that can still reach a rejecting state
    preds: dict[int, set[int]] = {s: set() for s in range(n)}
    for s in range(n):
        for t in delta[s]:
            preds[t].add(s)
    live = set(rejecting)
    stack = list(rejecting)
    while stack:
        t = stack.pop()
        for s in preds[t]:
            if s not in live:
                live.add(s)
                stack.append(s)

    def kind(s: int) -> object:
        if s in rejecting:
            return Verdict.NO
        if s not in live:
            return Verdict.YES
        return s

    # collapse all verdict states into two sinks, renumber in BFS order
    new_id: dict[object, int] = {}
    order: list[object] = []

    def visit(key: object) -> int:
        if key not in new_id:
            new_id[key] = len(order)
            order.append(key)
        return new_id[key]

    visit(kind(0))
    rows: list[tuple[int, ...]] = []
    j = 0
    while j < len(order):
        key = order[j]
        if isinstance(key, Verdict):
            rows.append((j,) * len(acts))
        else:
            rows.append(tuple(visit(kind(t)) for t in delta[key]))
        j += 1
    verdicts = {new_id[k]: k for k in order if isinstance(k, Verdict)}
    labels = []
    for key in order:
        if key is Verdict.NO:
            labels.append(FF())
        elif key is Verdict.YES:
            labels.append(TT())
        else:
            labels.append(from_conjuncts(states[key]))
    return MonitorAutomaton(alphabet, 0, tuple(rows), verdicts, tuple(labels))


# -- monitor terms ------------------------------------------------------------


@dataclass(frozen=True)
class Yes:
    pass


@dataclass(frozen=True)
class No:
    pass


@dataclass(frozen=True)
class End:
    pass


@dataclass(frozen=True)
class Prefix:
    action: str
    cont: "Term"


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Rec:
    var: str
    body: "Term"


@dataclass(frozen=True)
class Var:
    name: str


Term = Union[Yes, No, End, Prefix, Sum, Rec, Var]

_VERDICT_TERMS = {Verdict.YES: Yes(), Verdict.NO: No(), Verdict.END: End()}


def _var_name(i: int) -> str:
    return "xyzw"[i] if i < 4 else f"x{i}"


def to_term(m: MonitorAutomaton) -> Term:
    """Read the automaton off as a closed, guarded monitor term.

    ``rec`` binders are placed on states that are targets of back edges in
    the depth-first unfolding.  Branches of a sum follow the alphabet order,
    except that branches going straight to ``yes`` come last.
    """
    binder: dict[int, str] = {}
    on_path: set[int] = set()

    def build(s: int) -> Term:
        if s in m.verdicts:
            return _VERDICT_TERMS[m.verdicts[s]]
        if s in on_path:
            if s not in binder:
                used = set(binder.values())
                binder[s] = next(_var_name(i) for i in itertools.count() if _var_name(i) not in used)
            return Var(binder[s])
        on_path.add(s)
        branches = [(a, build(t)) for a, t in zip(m.alphabet, m.delta[s])]
        on_path.discard(s)
        branches.sort(key=lambda b: isinstance(b[1], Yes))
        body: Term = Prefix(*branches[0])
        for a, t in branches[1:]:
            body = Sum(body, Prefix(a, t))
        if s in binder:
            return Rec(binder.pop(s), body)
        return body

    return build(m.initial)


def print_term(t: Term) -> str:
    if isinstance(t, Yes):
        return "yes"
    if isinstance(t, No):
        return "no"
    if isinstance(t, End):
        return "end"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Prefix):
        cont = print_term(t.cont)
        if isinstance(t.cont, (Sum, Rec)):
            cont = f"({cont})"
        return f"{t.action}.{cont}"
    if isinstance(t, Sum):
        right = print_term(t.right)
        if isinstance(t.right, Sum):
            right = f"({right})"
        return f"{print_term(t.left)} + {right}"
    if isinstance(t, Rec):
        body = print_term(t.body)
        if isinstance(t.body, Sum):
            body = f"({body})"
        return f"rec {t.var}.{body}"
    raise TypeError(f"not a monitor term: {t!r}")


def _subst_term(t: Term, var: str, repl: Term) -> Term:
    if isinstance(t, Var):
        return repl if t.name == var else t
    if isinstance(t, Prefix):
        return Prefix(t.action, _subst_term(t.cont, var, repl))
    if isinstance(t, Sum):
        return Sum(_subst_term(t.left, var, repl), _subst_term(t.right, var, repl))
    if isinstance(t, Rec):
        return t if t.var == var else Rec(t.var, _subst_term(t.body, var, repl))
    return t


def term_step(t: Term, a: str) -> Term | None:
    """One transition of the standard regular-monitor LTS; None if blocked.

    Verdicts are persistent and absorb every action.
    """
    if isinstance(t, (Yes, No, End)):
        return t
    if isinstance(t, Prefix):
        return t.cont if t.action == a else None
    if isinstance(t, Sum):
        left = term_step(t.left, a)
        return left if left is not None else term_step(t.right, a)
    if isinstance(t, Rec):
        return term_step(_subst_term(t.body, t.var, t), a)
    raise SyntaxErr(f"free monitor variable {t.name!r}")


def term_verdict(t: Term) -> Verdict | None:
    for v, leaf in _VERDICT_TERMS.items():
        if t == leaf:
            return v
    return None
