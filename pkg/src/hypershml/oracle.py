"""Brute-force semantics of sHML and the hyper layer over lasso traces.

This module is the test oracle for the monitors and deliberately shares no
code with :mod:`hypershml.regular`, :mod:`hypershml.circuit` or
:mod:`hypershml.engine`.  Formulae are flattened into a closure graph in
which every recursion variable points back at its binder, so structurally
equal subformulae under different binders stay distinct.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    FF,
    TT,
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
)


@dataclass
class Closure:
    """Fischer-Ladner style closure: node ``i`` has a kind and child links.

    ``kind[i]`` is one of ``tt ff box and max var``; ``action[i]`` is set for
    boxes; ``kids[i]`` lists child nodes (the binder for ``var``).
    """

    kind: list[str]
    action: list[str | None]
    kids: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.kind)


def closure(f: Shml) -> Closure:
    c = Closure([], [], [])

    def add(g: Shml, env: dict[str, int]) -> int:
        i = len(c.kind)
        c.kind.append("")
        c.action.append(None)
        c.kids.append(())
        if isinstance(g, TT):
            c.kind[i] = "tt"
        elif isinstance(g, FF):
            c.kind[i] = "ff"
        elif isinstance(g, Box):
            c.kind[i], c.action[i] = "box", g.action
            c.kids[i] = (add(g.body, env),)
        elif isinstance(g, And):
            c.kind[i] = "and"
            c.kids[i] = (add(g.left, env), add(g.right, env))
        elif isinstance(g, Max):
            c.kind[i] = "max"
            c.kids[i] = (add(g.body, {**env, g.var: i}),)
        elif isinstance(g, RecVar):
            if g.name not in env:
                raise SyntaxErr(f"unbound recursion variable {g.name!r}")
            c.kind[i] = "var"
            c.kids[i] = (env[g.name],)
        else:
            raise TypeError(f"not an sHML formula: {g!r}")
        return i

    add(f, {})
    return c


def table(f: Shml, t: LassoTrace) -> list[list[bool]]:
    """Greatest solution of the local consistency equations.

    ``result[node][pos]`` tells whether the suffix of ``t`` at lasso
    position ``pos`` satisfies closure node ``node``.
    """
    c = closure(f)
    n = t.positions
    heads = [t.at(i) for i in range(n)]
    nxt = [t.successor(i) for i in range(n)]
    val = [[c.kind[j] != "ff"] * n for j in range(len(c))]
    changed = True
    while changed:
        changed = False
        for j in range(len(c)):
            kind, row = c.kind[j], val[j]
            for i in range(n):
                if not row[i]:
                    continue
                if kind == "box":
                    ok = heads[i] != c.action[j] or val[c.kids[j][0]][nxt[i]]
                elif kind == "and":
                    ok = val[c.kids[j][0]][i] and val[c.kids[j][1]][i]
                elif kind in ("max", "var"):
                    ok = val[c.kids[j][0]][i]
                else:
                    continue
                if not ok:
                    row[i] = False
                    changed = True
    return val


def eval_shml(f: Shml, t: LassoTrace, alphabet=None) -> bool:
    if alphabet is not None:
        stray = t.actions() - set(alphabet)
        if stray:
            raise SyntaxErr(f"trace uses actions outside the alphabet: {sorted(stray)}")
    return table(f, t)[0][0]


def eval_hyper(f: Hyper, suite: TraceSuite) -> bool:
    if isinstance(f, Exists):
        return any(eval_shml(f.body, t) for t in suite.traces)
    if isinstance(f, Forall):
        return all(eval_shml(f.body, t) for t in suite.traces)
    if isinstance(f, Join):
        return eval_hyper(f.left, suite) or eval_hyper(f.right, suite)
    if isinstance(f, Meet):
        return eval_hyper(f.left, suite) and eval_hyper(f.right, suite)
    raise TypeError(f"not a hyper formula: {f!r}")


# -- shortest bad prefix ------------------------------------------------------


class _Obligations:
    """Conjunctions of closure nodes, expanded down to boxes and ff.

    A set of pending obligations is satisfiable by some infinite trace over
    ``alphabet`` iff it avoids ff and some action leads to a satisfiable
    set; that greatest fixpoint is computed over the reachable sets.
    """

    FALSE = frozenset({-1})

    def __init__(self, f: Shml, alphabet):
        self.c = closure(f)
        self.alphabet = tuple(alphabet)
        self.succ: dict[frozenset, dict[str, frozenset]] = {}
        self.start = self.expand([0])
        self._explore(self.start)
        self.sat = self._greatest_sat()

    def expand(self, nodes) -> frozenset:
        c = self.c
        out, stack, seen = set(), list(nodes), set()
        while stack:
            j = stack.pop()
            if j in seen:
                continue
            seen.add(j)
            kind = c.kind[j]
            if kind == "ff":
                return self.FALSE
            if kind == "box":
                out.add(j)
            elif kind in ("and", "max", "var"):
                stack.extend(c.kids[j])
        return frozenset(out)

    def step(self, s: frozenset, a: str) -> frozenset:
        if s == self.FALSE:
            return s
        c = self.c
        return self.expand([c.kids[j][0] for j in s if c.action[j] == a])

    def _explore(self, s: frozenset) -> None:
        stack = [s]
        while stack:
            s = stack.pop()
            if s in self.succ:
                continue
            self.succ[s] = {a: self.step(s, a) for a in self.alphabet}
            stack.extend(self.succ[s].values())

    def _greatest_sat(self) -> set[frozenset]:
        sat = {s for s in self.succ if s != self.FALSE}
        changed = True
        while changed:
            changed = False
            for s in list(sat):
                if not any(n in sat for n in self.succ[s].values()):
                    sat.discard(s)
                    changed = True
        return sat


def violation_prefix(f: Shml, t: LassoTrace, alphabet=None) -> int | None:
    """Length of the shortest prefix of ``t`` all of whose extensions violate ``f``.

    Returns None when ``t`` satisfies ``f``.  The alphabet defaults to the
    actions of ``f`` and ``t``; extensions range over it.
    """
    if alphabet is None:
        alphabet = sorted(t.actions() | _box_actions(f))
    stray = t.actions() - set(alphabet)
    if stray:
        raise SyntaxErr(f"trace uses actions outside the alphabet: {sorted(stray)}")
    ob = _Obligations(f, alphabet)
    s, pos, n = ob.start, 0, 0
    seen = set()
    while (s, pos) not in seen:
        if s not in ob.sat:
            return n
        if n >= len(t.prefix):
            seen.add((s, pos))
        s = ob.succ[s][t.at(pos)]
        pos = t.successor(pos)
        n += 1
    return None


def _box_actions(f: Shml) -> set[str]:
    if isinstance(f, Box):
        return {f.action} | _box_actions(f.body)
    if isinstance(f, And):
        return _box_actions(f.left) | _box_actions(f.right)
    if isinstance(f, Max):
        return _box_actions(f.body)
    return set()
