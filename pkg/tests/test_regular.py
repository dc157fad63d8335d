import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import AB, lassos, shml
from hypershml.oracle import eval_shml, violation_prefix
from hypershml.regular import (
    StateSpaceExceeded,
    Verdict,
    compile_shml,
    derivative,
    normalize,
    print_term,
    step,
    term_step,
    term_verdict,
    to_term,
)
from hypershml.syntax import FF, TT, Alphabet, And, LassoTrace, SyntaxErr, parse_shml, print_shml

PSI = parse_shml("max x.([a]ff & [b]x)")


def P(text):
    return parse_shml(text)


class TestDerivative:
    @pytest.mark.parametrize(
        "f, a, expected",
        [
            ("[a]ff", "a", "ff"),
            ("[a]ff", "b", "tt"),
            ("[b][a]ff", "b", "[a]ff"),
            ("[a]ff & [b]tt", "b", "tt"),
            ("[a]ff & [a][b]ff", "a", "ff"),
            ("max x.([a]ff & [b]x)", "b", "max x.([a]ff & [b]x)"),
            ("max x.([a]ff & [b]x)", "a", "ff"),
            ("[a][b]ff & [a][b]ff", "a", "[b]ff"),
        ],
    )
    def test_examples(self, f, a, expected):
        assert print_shml(derivative(P(f), a)) == expected

    def test_normalize_aci(self):
        f = And(P("[b]ff"), And(TT(), P("[a]ff")))
        g = And(P("[a]ff"), P("[b]ff"))
        assert normalize(f) == normalize(g) == normalize(And(g, g))
        assert normalize(And(FF(), f)) == FF()

    @given(shml(depth=4), lassos())
    def test_soundness(self, f, t):
        a = t.at(0)
        tail = LassoTrace(t.prefix[1:], t.loop) if t.prefix else LassoTrace((), t.loop[1:] + t.loop[:1])
        assert eval_shml(f, t) == eval_shml(derivative(f, a), tail)


class TestCompile:
    def test_box_ff(self):
        m = compile_shml(P("[a]ff"), AB)
        assert m.size == 3
        assert print_term(to_term(m)) == "a.no + b.yes"

    def test_psi(self):
        m = compile_shml(PSI, AB)
        assert m.size == 2
        assert m.verdict(m.initial) is None
        assert m.verdict(step(m, m.initial, "a")) is Verdict.NO
        assert step(m, m.initial, "b") == m.initial
        assert print_term(to_term(m)) == "rec x.(a.no + b.x)"

    def test_box_psi(self):
        m = compile_shml(P("[b] max x.([a]ff & [b]x)"), AB)
        assert print_term(to_term(m)) == "b.(rec x.(a.no + b.x)) + a.yes"

    def test_constants(self):
        assert compile_shml(TT(), AB).verdict(0) is Verdict.YES
        assert compile_shml(FF(), AB).verdict(0) is Verdict.NO

    def test_unsatisfiable_is_no(self):
        m = compile_shml(P("[a][a]ff"), Alphabet(("a",)))
        assert m.size == 1 and m.verdict(0) is Verdict.NO

    def test_unknown_action(self):
        with pytest.raises(SyntaxErr):
            step(compile_shml(PSI, AB), 0, "c")

    def test_state_cap(self):
        f = P("max x.([a]x & [b][a][b][a][b]ff & [b][b][b]x)")
        with pytest.raises(StateSpaceExceeded):
            compile_shml(f, AB, max_states=3)

    def test_dump(self):
        text = compile_shml(P("[a]ff"), AB).dump()
        assert "state 1 no" in text and "0 -a-> 1" in text

    @given(shml(depth=4))
    def test_sinks(self, f):
        m = compile_shml(f, AB)
        assert len(set(m.verdicts.values())) == len(m.verdicts) <= 2
        assert Verdict.END not in m.verdicts.values()
        for s in m.verdicts:
            assert set(m.delta[s]) == {s}

    @given(shml(depth=4))
    def test_total_deterministic(self, f):
        m = compile_shml(f, AB)
        assert all(len(row) == 2 and all(0 <= t < m.size for t in row) for row in m.delta)


class TestAgreement:
    @given(shml(depth=4), lassos())
    def test_first_rejection_is_shortest_bad_prefix(self, f, t):
        m = compile_shml(f, AB)
        n = violation_prefix(f, t, AB)
        horizon = len(t.prefix) + len(t.loop) * m.size
        hit = m.first_verdict(t.take(horizon))
        rejected = hit[0] if hit and hit[1] is Verdict.NO else None
        assert rejected == n

    @given(shml(depth=4), lassos())
    def test_acceptance_is_sound(self, f, t):
        m = compile_shml(f, AB)
        hit = m.first_verdict(t.take(len(t.prefix) + len(t.loop) * m.size))
        if hit and hit[1] is Verdict.YES:
            assert eval_shml(f, t)

    @given(shml(depth=4), st.lists(st.sampled_from("ab"), max_size=12))
    def test_term_lts_matches_automaton(self, f, word):
        m = compile_shml(f, AB)
        s, t = m.initial, to_term(m)
        assert term_verdict(t) == m.verdict(s)
        for a in word:
            s, t = step(m, s, a), term_step(t, a)
            assert t is not None
            assert term_verdict(t) == m.verdict(s)

    @settings(max_examples=50)
    @given(shml(actions=("a", "b", "c"), depth=4))
    def test_label_is_residual(self, f):
        m = compile_shml(f, Alphabet(("a", "b", "c")))
        for s, label in enumerate(m.labels):
            for j, a in enumerate("abc"):
                if s not in m.verdicts and m.delta[s][j] not in m.verdicts:
                    assert normalize(derivative(label, a)) == m.labels[m.delta[s][j]]
