"""Formula and trace-suite syntax: ASTs, parser, printer, well-formedness.

Concrete formula grammar::

    hyper := meet
    meet  := join ( "/\\" join )*
    join  := atom ( "\\/" atom )*
    atom  := ("A" | "E") ident "." shml | "(" hyper ")"
    shml  := unit ( "&" unit )*
    unit  := "tt" | "ff" | "[" ident "]" unit | "max" ident "." unit
           | ident | "(" shml ")"

Trace-suite files hold one ``alphabet a b ...`` line followed by
``trace <prefix actions> | <loop actions>`` lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

ACTION_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
KEYWORDS = frozenset({"tt", "ff", "max", "A", "E"})


class SyntaxErr(ValueError):
    """Parse or well-formedness error, optionally located at line/column."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


# -- sHML ---------------------------------------------------------------------


@dataclass(frozen=True)
class TT:
    pass


@dataclass(frozen=True)
class FF:
    pass


@dataclass(frozen=True)
class Box:
    action: str
    body: "Shml"


@dataclass(frozen=True)
class And:
    left: "Shml"
    right: "Shml"


@dataclass(frozen=True)
class Max:
    var: str
    body: "Shml"


@dataclass(frozen=True)
class RecVar:
    name: str


Shml = Union[TT, FF, Box, And, Max, RecVar]


# -- hyper layer --------------------------------------------------------------


@dataclass(frozen=True)
class Exists:
    trace_var: str
    body: Shml


@dataclass(frozen=True)
class Forall:
    trace_var: str
    body: Shml


@dataclass(frozen=True)
class Join:
    left: "Hyper"
    right: "Hyper"


@dataclass(frozen=True)
class Meet:
    left: "Hyper"
    right: "Hyper"


Hyper = Union[Exists, Forall, Join, Meet]


# -- traces -------------------------------------------------------------------


@dataclass(frozen=True)
class Alphabet:
    actions: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.actions:
            raise SyntaxErr("alphabet must contain at least one action")
        seen = set()
        for a in self.actions:
            if not ACTION_RE.match(a) or a in KEYWORDS:
                raise SyntaxErr(f"invalid action name {a!r}")
            if a in seen:
                raise SyntaxErr(f"duplicate action {a!r} in alphabet")
            seen.add(a)

    @classmethod
    def of(cls, text: str | Sequence[str]) -> "Alphabet":
        """Build from ``"a b c"`` or an explicit sequence."""
        if isinstance(text, str):
            text = text.replace(",", " ").split()
        return cls(tuple(text))

    def __contains__(self, action: object) -> bool:
        return action in self.actions

    def __iter__(self) -> Iterator[str]:
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def index(self, action: str) -> int:
        return self.actions.index(action)


@dataclass(frozen=True)
class LassoTrace:
    """The infinite trace ``prefix . loop . loop . ...``."""

    prefix: tuple[str, ...]
    loop: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.loop:
            raise SyntaxErr("lasso loop must be nonempty")

    @property
    def positions(self) -> int:
        """Number of distinct positions in the finite lasso graph."""
        return len(self.prefix) + len(self.loop)

    def at(self, i: int) -> str:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]

    def successor(self, i: int) -> int:
        """Next position in the lasso graph (wraps to the loop start)."""
        return i + 1 if i + 1 < self.positions else len(self.prefix)

    def take(self, n: int) -> tuple[str, ...]:
        return tuple(self.at(i) for i in range(n))

    def events(self) -> Iterator[str]:
        """Infinite event stream."""
        yield from self.prefix
        while True:
            yield from self.loop

    def prepend(self, action: str) -> "LassoTrace":
        return LassoTrace((action,) + self.prefix, self.loop)

    def actions(self) -> set[str]:
        return set(self.prefix) | set(self.loop)

    def __str__(self) -> str:
        return " ".join(self.prefix + ("|",) + self.loop)


@dataclass(frozen=True)
class TraceSuite:
    alphabet: Alphabet
    traces: tuple[LassoTrace, ...]

    def __post_init__(self) -> None:
        if not self.traces:
            raise SyntaxErr("trace suite must contain at least one trace")
        for t in self.traces:
            check_trace(t, self.alphabet)

    @property
    def k(self) -> int:
        return len(self.traces)


def check_trace(t: LassoTrace, alphabet: Alphabet) -> None:
    for a in t.prefix + t.loop:
        if a not in alphabet:
            raise SyntaxErr(f"action {a!r} not in alphabet {' '.join(alphabet)}")


# -- well-formedness ----------------------------------------------------------


def check_shml(f: Shml, alphabet: Alphabet | None = None) -> None:
    """Raise :class:`SyntaxErr` unless ``f`` is closed and guarded.

    ``guarded`` maps each bound variable to whether a box separates the
    current position from its binder.
    """

    def walk(g: Shml, guarded: dict[str, bool]) -> None:
        if isinstance(g, (TT, FF)):
            return
        if isinstance(g, RecVar):
            if g.name not in guarded:
                raise SyntaxErr(f"unbound recursion variable {g.name!r}")
            if not guarded[g.name]:
                raise SyntaxErr(f"unguarded recursion variable {g.name!r}")
            return
        if isinstance(g, Box):
            if alphabet is not None and g.action not in alphabet:
                raise SyntaxErr(f"unknown action {g.action!r}")
            walk(g.body, dict.fromkeys(guarded, True))
            return
        if isinstance(g, And):
            walk(g.left, guarded)
            walk(g.right, guarded)
            return
        if isinstance(g, Max):
            walk(g.body, {**guarded, g.var: False})
            return
        raise TypeError(f"not an sHML formula: {g!r}")

    walk(f, {})


def check_hyper(f: Hyper, alphabet: Alphabet | None = None) -> None:
    for q in quantifiers(f):
        check_shml(q.body, alphabet)


def quantifiers(f: Hyper) -> list[Exists | Forall]:
    """Quantifier atoms of ``f`` in left-to-right order."""
    if isinstance(f, (Exists, Forall)):
        return [f]
    return quantifiers(f.left) + quantifiers(f.right)


def connective_depth(f: Hyper) -> int:
    if isinstance(f, (Exists, Forall)):
        return 0
    return 1 + max(connective_depth(f.left), connective_depth(f.right))


def substitute(f: Shml, var: str, replacement: Shml) -> Shml:
    """Replace free occurrences of ``var``; ``replacement`` must be closed."""
    if isinstance(f, RecVar):
        return replacement if f.name == var else f
    if isinstance(f, Box):
        return Box(f.action, substitute(f.body, var, replacement))
    if isinstance(f, And):
        return And(substitute(f.left, var, replacement), substitute(f.right, var, replacement))
    if isinstance(f, Max):
        if f.var == var:
            return f
        return Max(f.var, substitute(f.body, var, replacement))
    return f


def unfold(f: Max) -> Shml:
    return substitute(f.body, f.var, f)


# -- lexer --------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<sym>/\\|\\/|[&\[\]().])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "sym", "ident" or "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SyntaxErr(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), line, pos - line_start + 1))
        else:
            for i, ch in enumerate(m.group()):
                if ch == "\n":
                    line, line_start = line + 1, pos + i + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet | None):
        self.tokens = tokenize(text)
        self.i = 0
        self.alphabet = alphabet

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> SyntaxErr:
        tok = tok or self.tok
        return SyntaxErr(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str) -> Token:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # hyper layer

    def hyper(self) -> Hyper:
        f = self.join()
        while self.at("/\\"):
            self.advance()
            f = Meet(f, self.join())
        return f

    def join(self) -> Hyper:
        f = self.atom()
        while self.at("\\/"):
            self.advance()
            f = Join(f, self.atom())
        return f

    def atom(self) -> Hyper:
        if self.at("("):
            self.advance()
            f = self.hyper()
            self.expect(")")
            return f
        if self.at("A") or self.at("E"):
            q = self.advance().text
            var = self.ident("trace variable").text
            self.expect(".")
            body = self.shml({})
            return Forall(var, body) if q == "A" else Exists(var, body)
        raise self.error(f"expected quantifier 'A' or 'E', found {self.tok.text or 'end of input'!r}")

    # sHML layer; ``env`` maps bound variables to guardedness

    def shml(self, env: dict[str, bool]) -> Shml:
        f = self.unit(env)
        while self.at("&"):
            self.advance()
            f = And(f, self.unit(env))
        return f

    def unit(self, env: dict[str, bool]) -> Shml:
        tok = self.tok
        if tok.kind == "ident" and tok.text in ("A", "E"):
            raise self.error("quantifier nested under quantifier is not in the fragment")
        if self.at("tt"):
            self.advance()
            return TT()
        if self.at("ff"):
            self.advance()
            return FF()
        if self.at("["):
            self.advance()
            act = self.ident("action")
            if self.alphabet is not None and act.text not in self.alphabet:
                raise self.error(f"unknown action {act.text!r}", act)
            self.expect("]")
            return Box(act.text, self.unit(dict.fromkeys(env, True)))
        if self.at("max"):
            self.advance()
            var = self.ident("recursion variable").text
            self.expect(".")
            return Max(var, self.unit({**env, var: False}))
        if self.at("("):
            self.advance()
            f = self.shml(env)
            self.expect(")")
            return f
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.advance()
            if tok.text not in env:
                raise self.error(f"unbound recursion variable {tok.text!r}", tok)
            if not env[tok.text]:
                raise self.error(f"unguarded recursion variable {tok.text!r}", tok)
            return RecVar(tok.text)
        if tok.kind == "sym" and tok.text in ("/\\", "\\/"):
            raise self.error(f"{tok.text!r} is only allowed between quantified formulae")
        raise self.error(f"expected sHML formula, found {tok.text or 'end of input'!r}")


def parse_hyper(text: str, alphabet: Alphabet | None = None) -> Hyper:
    p = _Parser(text, alphabet)
    f = p.hyper()
    p.end()
    return f


def parse_shml(text: str, alphabet: Alphabet | None = None) -> Shml:
    p = _Parser(text, alphabet)
    f = p.shml({})
    p.end()
    return f


def parse_suite(text: str) -> TraceSuite:
    alphabet = None
    traces = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split(None, 1)
        body = rest[0] if rest else ""
        try:
            if head == "alphabet":
                if alphabet is not None:
                    raise SyntaxErr("duplicate alphabet line")
                alphabet = Alphabet.of(body.split())
            elif head == "trace":
                if alphabet is None:
                    raise SyntaxErr("trace before alphabet line")
                if body.count("|") != 1:
                    raise SyntaxErr("trace needs exactly one '|' between prefix and loop")
                u, v = body.split("|")
                t = LassoTrace(tuple(u.split()), tuple(v.split()))
                if not t.loop:
                    raise SyntaxErr("empty loop")
                check_trace(t, alphabet)
                traces.append(t)
            else:
                raise SyntaxErr(f"unknown directive {head!r}")
        except SyntaxErr as e:
            raise SyntaxErr(e.message, lineno, 1) from None
    if alphabet is None:
        raise SyntaxErr("missing alphabet line")
    if not traces:
        raise SyntaxErr("suite has no traces (k = 0)")
    return TraceSuite(alphabet, tuple(traces))


def print_suite(suite: TraceSuite) -> str:
    lines = ["alphabet " + " ".join(suite.alphabet)]
    lines += [f"trace {t}" for t in suite.traces]
    return "\n".join(lines) + "\n"


# -- printer ------------------------------------------------------------------


def print_shml(f: Shml) -> str:
    if isinstance(f, TT):
        return "tt"
    if isinstance(f, FF):
        return "ff"
    if isinstance(f, RecVar):
        return f.name
    if isinstance(f, Box):
        body = _unit(f.body)
        sep = " " if isinstance(f.body, Max) else ""
        return f"[{f.action}]{sep}{body}"
    if isinstance(f, Max):
        return f"max {f.var}.{_unit(f.body)}"
    if isinstance(f, And):
        right = print_shml(f.right)
        if isinstance(f.right, And):
            right = f"({right})"
        return f"{print_shml(f.left)} & {right}"
    raise TypeError(f"not an sHML formula: {f!r}")


def _unit(f: Shml) -> str:
    s = print_shml(f)
    return f"({s})" if isinstance(f, And) else s


def print_hyper(f: Hyper) -> str:
    if isinstance(f, Forall):
        return f"A {f.trace_var}. {print_shml(f.body)}"
    if isinstance(f, Exists):
        return f"E {f.trace_var}. {print_shml(f.body)}"
    if isinstance(f, Meet):
        left = print_hyper(f.left)
        right = print_hyper(f.right)
        if isinstance(f.right, Meet):
            right = f"({right})"
        return f"{left} /\\ {right}"
    if isinstance(f, Join):
        left = print_hyper(f.left)
        right = print_hyper(f.right)
        if isinstance(f.left, Meet):
            left = f"({left})"
        if isinstance(f.right, (Meet, Join)):
            right = f"({right})"
        return f"{left} \\/ {right}"
    raise TypeError(f"not a hyper formula: {f!r}")
