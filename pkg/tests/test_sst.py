import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import words_upto
from datawords import corpus
from datawords.atoms import ATOM, Atom, apply_perm, least_support, parse_word, random_perm
from datawords.equiv import random_word
from datawords.errors import NotAccepting
from datawords.machines import Accepted
from datawords.primes import FlipFlop, MapDuplicate, MapReverse, ParWithId, eval_prime, separated
from datawords.sst import (
    adjacency_letter_check, eval_sst, post_compose_prime, register_forest, sst_output, validate_sst,
)

SEP = separated(ATOM)
BLOCKS = "#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9"


def w(text, sort=SEP):
    return parse_word(text, sort)


def test_map_reverse_sst():
    assert sst_output(corpus.map_reverse_sst(), w(BLOCKS)) == w("#2,#1,sep,sep,#5,#4,#3,sep,#8,#7,#6,sep,#9")
    r = eval_sst(corpus.map_reverse_sst(), [])
    assert isinstance(r, Accepted) and r.output == ()


def test_map_duplicate_sst():
    assert sst_output(corpus.map_duplicate_sst(), w("#1,#2,sep")) == w("#1,#2,#1,#2,sep")


def test_small_ssts():
    x = w("#1,#2,#3", ATOM)
    assert sst_output(corpus.last_letter_sst(), x) == w("#3", ATOM)
    assert sst_output(corpus.last_letter_sst(), []) == []
    assert sst_output(corpus.reverse_sst(ATOM), x) == x[::-1]
    assert sst_output(corpus.identity_sst(ATOM), x) == x


def test_copyful_doubling():
    x = w("#1,#2,#3", ATOM)
    assert sst_output(corpus.doubling_sst(), x) == w("#1", ATOM) * 4
    # without copying, reading a register empties it
    assert sst_output(corpus.doubling_sst(copyful=False), x) == w("#1", ATOM)


def test_fixtures_validate():
    for name in corpus.names("sst"):
        assert validate_sst(corpus.load_fixture(name)) == []


# ---------------------------------------------------------------- post-composition

def test_post_compose_examples():
    c = post_compose_prime(corpus.identity_sst(), MapReverse())
    assert sst_output(c, w(BLOCKS)) == eval_prime(MapReverse(), w(BLOCKS))
    c = post_compose_prime(corpus.map_reverse_sst(), MapReverse())
    assert sst_output(c, w(BLOCKS)) == w(BLOCKS)
    c = post_compose_prime(corpus.identity_sst(), MapDuplicate())
    assert sst_output(c, w("#1,#2,sep")) == w("#1,#2,#1,#2,sep")
    assert validate_sst(c) == []


def test_post_compose_par_with_id():
    g = ParWithId(FlipFlop(), ATOM)
    for m in (corpus.identity_sst(g.domain), corpus.reverse_sst(g.domain)):
        c = post_compose_prime(m, g)
        for x in words_upto(g.domain, 3):
            assert sst_output(c, x) == eval_prime(g, sst_output(m, x))


# ---------------------------------------------------------------- register forests

def test_register_forest_examples():
    f = register_forest(corpus.map_reverse_sst(), w("#1,sep,#2"))
    assert f.word() == sst_output(corpus.map_reverse_sst(), w("#1,sep,#2"))
    assert f.is_forest()
    cols = f.serialize()
    assert [c["column"] for c in cols] == sorted(c["column"] for c in cols)


def test_copyful_forest_is_a_dag():
    f = register_forest(corpus.doubling_sst(), w("#1,#2,#3,#4", ATOM))
    assert len(f.word()) == 2 ** 3
    assert not f.is_forest()
    assert len(f.nodes) < 2 ** 3 + 2 ** 3  # shared subtrees


def test_forest_needs_acceptance():
    from datawords.machines import REJECT
    from datawords.sst import SSTBuilder
    b = SSTBuilder(ATOM, ATOM)
    b.sreg("A")
    b.step("q", REJECT, "q")
    with pytest.raises(NotAccepting):
        register_forest(b.build("q", "A"), [])


# ---------------------------------------------------------------- adjacency

def test_adjacency_examples():
    a = w("#1,#2,#1,#3", ATOM)
    assert adjacency_letter_check(a, Atom(9), 0)
    assert not adjacency_letter_check(a, Atom(1), 0)
    assert adjacency_letter_check(a, Atom(1), 1)
    assert adjacency_letter_check(w("#1,#1,#1", ATOM), Atom(1), 1)


# ---------------------------------------------------------------- properties

SSTS = ["mapreverse-sst", "mapduplicate-sst", "identity-sst", "reverse-sst", "last-letter-sst", "doubling-sst"]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SSTS), st.randoms(use_true_random=False))
def test_sst_is_equivariant(name, rng):
    m = corpus.load_fixture(name)
    x = random_word(m.input_sort, rng, 8, 5)
    p = random_perm(rng, [a for v in x for a in least_support(v)])
    assert sst_output(m, apply_perm(p, x)) == apply_perm(p, sst_output(m, x))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(SSTS), st.randoms(use_true_random=False))
def test_forest_word_is_output(name, rng):
    m = corpus.load_fixture(name)
    x = random_word(m.input_sort, rng, 7, 4)
    assert register_forest(m, x).word() == sst_output(m, x)


def test_reverse_sst_twice_is_identity():
    rng = random.Random(5)
    m = corpus.reverse_sst()
    for _ in range(100):
        x = random_word(SEP, rng, 12)
        assert sst_output(m, sst_output(m, x)) == x
