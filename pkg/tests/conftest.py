from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hypershml.syntax import (
    FF,
    TT,
    Alphabet,
    And,
    Box,
    Exists,
    Forall,
    Join,
    LassoTrace,
    Max,
    Meet,
    RecVar,
    TraceSuite,
    parse_hyper,
    parse_suite,
)

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

AB = Alphabet(("a", "b"))
ABC = Alphabet(("a", "b", "c"))

NO_A_SOME_B = "A p. [a]ff /\\ E p. [b] max x.([a]ff & [b]x)"
THREE_TRACES = "alphabet a b\ntrace | a\ntrace b a | b\ntrace | b\n"


@st.composite
def shml(draw, actions=("a", "b"), depth=3, guarded=(), unguarded=()):
    """Closed, guarded sHML formulae; only guarded variables may occur."""
    if depth == 0:
        leaves = [st.just(TT()), st.just(FF())]
        if guarded:
            leaves.append(st.sampled_from(guarded).map(RecVar))
        return draw(st.one_of(leaves))
    kind = draw(st.sampled_from(["box", "box", "and", "max", "leaf"]))
    if kind == "box":
        body = draw(shml(actions, depth - 1, tuple(guarded) + tuple(unguarded), ()))
        return Box(draw(st.sampled_from(actions)), body)
    if kind == "and":
        return And(
            draw(shml(actions, depth - 1, guarded, unguarded)),
            draw(shml(actions, depth - 1, guarded, unguarded)),
        )
    if kind == "max":
        var = draw(st.sampled_from(["x", "y", "z"]))
        g = tuple(v for v in guarded if v != var)
        u = tuple(v for v in unguarded if v != var) + (var,)
        return Max(var, draw(shml(actions, depth - 1, g, u)))
    return draw(shml(actions, 0, guarded, unguarded))


@st.composite
def hyper(draw, actions=("a", "b"), depth=2, shml_depth=3):
    if depth > 0 and draw(st.booleans()):
        op = draw(st.sampled_from([Join, Meet]))
        return op(
            draw(hyper(actions, depth - 1, shml_depth)),
            draw(hyper(actions, depth - 1, shml_depth)),
        )
    q = draw(st.sampled_from([Exists, Forall]))
    return q(draw(st.sampled_from(["p", "q"])), draw(shml(actions, shml_depth)))


def lassos(actions=("a", "b"), max_prefix=3, max_loop=3):
    return st.builds(
        LassoTrace,
        st.lists(st.sampled_from(actions), max_size=max_prefix).map(tuple),
        st.lists(st.sampled_from(actions), min_size=1, max_size=max_loop).map(tuple),
    )


def suites(alphabet=AB, max_k=4):
    return st.lists(lassos(tuple(alphabet)), min_size=1, max_size=max_k).map(
        lambda ts: TraceSuite(alphabet, tuple(ts))
    )


@pytest.fixture
def no_a_some_b():
    return parse_hyper(NO_A_SOME_B, AB)


@pytest.fixture
def three_traces():
    return parse_suite(THREE_TRACES)


@pytest.fixture
def b_omega():
    return parse_suite("alphabet a b\ntrace | b\n")


# one (number, title, passed, detail) row per acceptance criterion
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}: {detail}")
