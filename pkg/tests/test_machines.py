import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datawords import corpus
from datawords.atoms import ATOM, Perm, apply_perm, parse_word, prod, random_perm, least_support
from datawords.equiv import random_word
from datawords.errors import KindMismatch, NotAccepting
from datawords.machines import (
    ACCEPT, LEFT, NOP, RIGHT, Accepted, Kind, Loop, MachineBuilder, Output, Rejected, Store, accepts,
    audit_single_use, max_stay, run, run_graph, stay_bound, store_atom, uniform_fn, validate,
)
from datawords.primes import PROPAGATION_INPUT, SEP_SORT, AtomPropagation, as_mealy, eval_prime, separated
from datawords.atoms import Pair, Ref, either

BLOCKS = "#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9"
SEPARATED = separated(ATOM)


def word(text, sort=ATOM):
    return parse_word(text, sort)


# ---------------------------------------------------------------- validate

def test_validate_flags_left_move_in_mealy():
    assert validate(corpus.bad_mealy()) == ["state '_1': Mealy forbids previous"]


def test_validate_flags_repeated_output_register():
    b = MachineBuilder(Kind.TWO_WAY, ATOM, prod(ATOM, ATOM))
    b.reg("r")
    b.seq("q", [Store("r", store_atom(ATOM)), Output(uniform_fn(2, prod(ATOM, ATOM), Pair(Ref(1), Ref(2))), ("r", "r")),
                ACCEPT], "q")
    assert any("registers must be distinct" in v for v in validate(b.build("q")))


def test_validate_accepts_propagation():
    assert validate(as_mealy(AtomPropagation())) == []


def test_validate_one_way_left():
    b = MachineBuilder(Kind.ONE_WAY, ATOM, ATOM)
    b.step("q", LEFT, "q")
    assert any("forbid previous" in v for v in validate(b.build("q")))


# ---------------------------------------------------------------- run

def test_atom_propagation_table():
    m = corpus.load_fixture("atomprop")
    w = word("#1,#2,eps,eps,down,down,#3,eps,eps,down,eps,down", PROPAGATION_INPUT)
    r = run(m, w)
    assert isinstance(r, Accepted)
    bot = word("bot", m.output_sort)[0]
    expected = [bot] * 12
    expected[4], expected[9] = word("#2", m.output_sort)[0], word("#3", m.output_sort)[0]
    assert list(r.output) == expected


def test_mealy_on_empty_word():
    assert run(corpus.load_fixture("atomprop"), []) == Accepted(())


def test_first_letter_again():
    m = corpus.load_fixture("first-letter-again")
    assert not m.single_use
    assert isinstance(run(m, word("#1,#2,#1")), Accepted)
    assert not isinstance(run(m, word("#1,#2,#3")), Accepted)


def test_three_letters():
    m = corpus.load_fixture("three-letters")
    assert accepts(m, word("#1,#2,#1,#3"))
    assert not accepts(m, word("#1,#2,#3,#4"))
    assert accepts(m, [])
    with pytest.raises(KindMismatch):
        accepts(corpus.load_fixture("mapreverse-2w"), [])


def test_first_equals_last():
    m = corpus.load_fixture("first-equals-last")
    assert accepts(m, word("#1,#2,#3,#1"))
    assert not accepts(m, word("#1,#2,#3,#2"))


def test_loop_and_reject_outcomes():
    b = MachineBuilder(Kind.AUTOMATON_2W, ATOM, ATOM)
    b.step("q", RIGHT, "p")
    b.step("p", LEFT, "q")
    assert isinstance(run(b.build("q"), word("#1")), Loop)
    b = MachineBuilder(Kind.AUTOMATON_2W, ATOM, ATOM)
    b.step("q", RIGHT, "q")
    assert isinstance(run(b.build("q"), word("#1")), Rejected)  # walks off the right end


# ---------------------------------------------------------------- audit

def test_audit_examples():
    assert audit_single_use(corpus.load_fixture("atomprop"), word("#1,down", PROPAGATION_INPUT)).ok
    m = corpus.load_fixture("first-letter-again")
    w = word("#1,#2,#1")
    res = audit_single_use(m, w)
    assert not res.ok and res.register == "F"
    # the flagged step is the second comparison against the first letter
    tr = run(m, w, trace=True).trace
    comparisons = [st.step for st in tr if st.question[0] == 1]
    assert res.step == comparisons[1]
    b = MachineBuilder(Kind.AUTOMATON_1W, ATOM, ATOM, single_use=False)
    b.step("q", ACCEPT, "q")
    assert audit_single_use(b.build("q"), word("#1")).ok


# ---------------------------------------------------------------- run graphs

def test_one_way_run_graph_has_width_one():
    m = corpus.load_fixture("group-z2")
    g = run_graph(m, word("0,1,1,0,1", m.input_sort))
    assert g.width == 1
    assert all(len(col) == 1 for col in g.columns)


def test_map_reverse_run_graph():
    m = corpus.load_fixture("mapreverse-2w")
    g = run_graph(m, word(BLOCKS, SEPARATED))
    assert g.width <= 3
    assert g.replay() == list(run(m, word(BLOCKS, SEPARATED)).output)


def test_map_duplicate_replay():
    m = corpus.load_fixture("mapduplicate-2w")
    g = run_graph(m, word("#1,#2,sep", SEPARATED))
    assert g.replay() == word("#1,#2,#1,#2,sep", SEPARATED)


def test_run_graph_needs_acceptance():
    with pytest.raises(NotAccepting):
        run_graph(corpus.load_fixture("three-letters"), word("#1,#2,#3,#4"))


# ---------------------------------------------------------------- stay bound

def _machine(nstates, nregs, sort):
    b = MachineBuilder(Kind.ONE_WAY, sort, ATOM)
    b.reg(*[f"r{i}" for i in range(nregs)]) if nregs else None
    names = [f"q{i}" for i in range(nstates)]
    for i, q in enumerate(names):
        b.step(q, NOP, names[(i + 1) % nstates])
    return b.build("q0")


def test_stay_bound_formula():
    assert stay_bound(_machine(3, 1, ATOM)) == 9
    assert stay_bound(_machine(1, 0, ATOM)) == 1
    assert stay_bound(_machine(2, 2, prod(ATOM, ATOM))) == 32


@pytest.mark.parametrize("name", ["atomprop", "mapreverse-2w", "mapduplicate-2w", "first-equals-last",
                                  "three-letters"])
def test_stays_within_bound(name):
    m = corpus.load_fixture(name)
    rng = random.Random(21)
    bound = stay_bound(m)
    for _ in range(1000):
        w = random_word(m.input_sort, rng, 10, 4)
        assert max_stay(m, w) <= bound


# ---------------------------------------------------------------- properties

MACHINES = ["atomprop", "flipflop", "mapreverse-2w", "mapduplicate-2w", "first-equals-last", "three-letters",
            "first-letter-again"]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(MACHINES), st.randoms(use_true_random=False))
def test_run_is_equivariant(name, rng):
    m = corpus.load_fixture(name)
    w = random_word(m.input_sort, rng, 10, 5)
    p = random_perm(rng, [x for v in w for x in least_support(v)])
    r1, r2 = run(m, apply_perm(p, w)), run(m, w)
    assert r1.tag == r2.tag
    if isinstance(r1, Accepted):
        assert list(r1.output) == apply_perm(p, list(r2.output))


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_mealy_preserves_length_and_matches_prime(rng):
    m = corpus.load_fixture("atomprop")
    w = random_word(PROPAGATION_INPUT, rng, 15, 4)
    r = run(m, w)
    assert len(r.output) == len(w)
    assert list(r.output) == eval_prime(AtomPropagation(), w)
    assert run(m, w) == r


def test_perm_fixes_outside_domain():
    assert Perm({1: 2})(7) == 7
    assert either(ATOM, SEP_SORT) == SEPARATED
