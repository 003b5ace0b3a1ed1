"""Single-use register machines over atoms: interpreters, constructions and equivalence testing."""
from .atoms import (
    ATOM, Atom, Inj, ListV, Pair, PatternFn, Perm, Unit, apply_perm, equality_type, format_value, format_word,
    least_support, parse_sort, parse_value, parse_word, pattern_apply,
)
from .equiv import Deatomisation, bounded_equiv, canonical_words, deatomise, fuzz, runner
from .machines import Kind, TwoWaySUT, accepts, audit_single_use, run, run_graph, stay_bound, validate
from .monoid import compose_profiles, minimal_support, profile_of
from .primes import as_mealy, compose_mealy, eval_pipeline, eval_prime, par, seq
from .reglist import derived, eval_rlf, typecheck
from .serialize import dump, load
from .sst import SSTMachine, adjacency_letter_check, eval_sst, post_compose_prime, register_forest

__all__ = [
    "ATOM", "Atom", "Inj", "ListV", "Pair", "PatternFn", "Perm", "Unit", "apply_perm", "equality_type",
    "format_value", "format_word", "least_support", "parse_sort", "parse_value", "parse_word", "pattern_apply",
    "Deatomisation", "bounded_equiv", "canonical_words", "deatomise", "fuzz", "runner",
    "Kind", "TwoWaySUT", "accepts", "audit_single_use", "run", "run_graph", "stay_bound", "validate",
    "compose_profiles", "minimal_support", "profile_of",
    "as_mealy", "compose_mealy", "eval_pipeline", "eval_prime", "par", "seq",
    "derived", "eval_rlf", "typecheck", "dump", "load",
    "SSTMachine", "adjacency_letter_check", "eval_sst", "post_compose_prime", "register_forest",
]
