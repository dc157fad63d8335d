"""Runtime monitoring of Hyper1-sHML properties with circuit monitors."""

from .circuit import CircuitMonitor, Configuration, apply_verdict, init_configuration, reduce, root_verdict, syn
from .engine import RunState, close_trace, execute, feed, instrument, run_suite
from .oracle import eval_hyper, eval_shml, violation_prefix
from .regular import MonitorAutomaton, Verdict, compile_shml, derivative, normalize, print_term, step, to_term
from .syntax import (
    Alphabet,
    LassoTrace,
    SyntaxErr,
    TraceSuite,
    parse_hyper,
    parse_shml,
    parse_suite,
    print_hyper,
    print_shml,
)

__all__ = [
    "Alphabet",
    "CircuitMonitor",
    "Configuration",
    "LassoTrace",
    "MonitorAutomaton",
    "RunState",
    "SyntaxErr",
    "TraceSuite",
    "Verdict",
    "apply_verdict",
    "close_trace",
    "compile_shml",
    "derivative",
    "eval_hyper",
    "eval_shml",
    "execute",
    "feed",
    "init_configuration",
    "instrument",
    "normalize",
    "parse_hyper",
    "parse_shml",
    "parse_suite",
    "print_hyper",
    "print_shml",
    "print_term",
    "reduce",
    "root_verdict",
    "run_suite",
    "step",
    "syn",
    "to_term",
    "violation_prefix",
]
