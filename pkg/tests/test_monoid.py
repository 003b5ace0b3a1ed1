import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datawords import corpus
from datawords.atoms import ATOM, Perm, apply_perm, parse_word, random_perm
from datawords.equiv import random_word
from datawords.errors import KindMismatch
from datawords.machines import LEND, NOP, REND, Kind, MachineBuilder, accepts
from datawords.monoid import (
    AcceptP, ExitP, LoopP, accepts_via_profile, canonical_valuations, compose_profiles, concrete_table,
    identity_profile, minimal_support, profile_of, profile_to_json, support_bound, transport,
)


def w(text):
    return parse_word(text, ATOM)


def test_empty_word_is_identity_table():
    m = corpus.load_fixture("first-equals-last")
    p = identity_profile(m)
    for q in m.states:
        for val in canonical_valuations((), len(m.registers)):
            assert p.lookup(q, val, "L") == ExitP(q, val, "R")
            assert p.lookup(q, val, "R") == ExitP(q, val, "L")


def test_empty_word_entries_are_unconditional():
    m = corpus.load_fixture("three-letters")
    p = identity_profile(m)
    for q in m.states[:10]:
        (leaf,) = p.entry(q, "L")
        assert not leaf.when and leaf.result.state == q and leaf.result.side == "R"


def test_three_letters_single_letter_exits_right():
    m = corpus.load_fixture("three-letters")
    p = profile_of(m, w("#1"))
    out = p.lookup(m.initial, (None,) * len(m.registers), "L")
    assert isinstance(out, ExitP) and out.side == "R"


def test_accepts_via_profile_examples():
    m = corpus.load_fixture("three-letters")
    assert accepts_via_profile(m, w("#1,#2,#1,#3"))
    assert not accepts_via_profile(m, w("#1,#2,#3,#4"))
    assert accepts_via_profile(m, [])
    with pytest.raises(KindMismatch):
        accepts_via_profile(corpus.load_fixture("mapreverse-2w"), [])


def test_accepts_via_profile_agrees_with_runs():
    rng = random.Random(8)
    for name in ("three-letters", "first-equals-last"):
        m = corpus.load_fixture(name)
        for _ in range(30):
            x = random_word(ATOM, rng, 7, 5)
            assert accepts_via_profile(m, x) == accepts(m, x)


def test_one_state_machine_has_empty_support():
    b = MachineBuilder(Kind.AUTOMATON_2W, ATOM, ATOM)
    b.reg("r")
    b.step("q", NOP, "q")
    m = b.build("q")
    for x in (w("#1"), w("#1,#2,#3"), w("#4,#4")):
        p = profile_of(m, x)
        assert minimal_support(p) == ()
        assert p.lookup("q", (None,), "L") == LoopP()


def test_support_bound_formula():
    m = corpus.load_fixture("three-letters")
    assert support_bound(m) == 2 * len(m.states) * 2 ** (len(m.registers) + 1)


def test_compose_with_identity():
    m = corpus.load_fixture("first-equals-last")
    p = profile_of(m, w("#1,#2,#1"))
    e = identity_profile(m)
    assert compose_profiles(p, e) == p
    assert compose_profiles(e, p) == p


def test_accepting_entry_on_endmarked_word():
    m = corpus.load_fixture("three-letters")
    p = profile_of(m, [LEND] + w("#1,#2") + [REND])
    assert p.lookup(m.initial, (None,) * len(m.registers), "L") == AcceptP()


def test_concrete_table_and_json():
    m = corpus.load_fixture("first-equals-last")
    p = profile_of(m, w("#1,#2"))
    table = concrete_table(p)
    assert len(table) == 2 * len(m.states) * len(list(canonical_valuations(p.atoms, p.k)))
    doc = profile_to_json(p)
    assert doc["machine"] == m.name


# ---------------------------------------------------------------- properties

TWO_WAY = ["mapreverse-2w", "first-equals-last"]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TWO_WAY), st.randoms(use_true_random=False))
def test_profiles_are_equivariant(name, rng):
    m = corpus.load_fixture(name)
    x = random_word(m.input_sort, rng, 5, 4)
    perm = random_perm(rng, list(range(6)))
    assert profile_of(m, apply_perm(perm, x)) == transport(profile_of(m, x), perm)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TWO_WAY), st.randoms(use_true_random=False))
def test_homomorphism(name, rng):
    m = corpus.load_fixture(name)
    u, v = random_word(m.input_sort, rng, 4, 4), random_word(m.input_sort, rng, 4, 4)
    assert compose_profiles(profile_of(m, u), profile_of(m, v)) == profile_of(m, u + v)


def test_transport_by_identity():
    m = corpus.load_fixture("first-equals-last")
    p = profile_of(m, w("#1,#2,#3"))
    assert transport(p, Perm()) == p
    assert transport(p, Perm({1: 7, 7: 1})) != p
