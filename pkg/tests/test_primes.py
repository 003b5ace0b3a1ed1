import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import words_upto
from datawords import corpus
from datawords.atoms import ATOM, Pair, PatternFn, Unit, apply_perm, format_value, least_support, parse_word, random_perm, random_value, units
from datawords.equiv import random_word
from datawords.errors import DatawordsError, NotLengthPreserving, SortMismatch
from datawords.machines import Accepted, run
from datawords.primes import (
    FLIPFLOP_INPUT, PROPAGATION_INPUT, PROPAGATION_OUTPUT, AppendEndmark, AtomPropagation, FiniteGroup,
    FlipFlop, GroupTransducer, Hom, LpHom, MapDuplicate, MapReverse, ParWithId, as_mealy, compose_mealy,
    eval_pipeline, eval_prime, identity, par, push_parallel, separated, seq,
)

SEP = separated(ATOM)
BLOCKS = "#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9"
Z2, Z3 = FiniteGroup.cyclic(2), FiniteGroup.cyclic(3)


def w(text, sort):
    return parse_word(text, sort)


# ---------------------------------------------------------------- tables

def test_atom_propagation_table():
    out = eval_prime(AtomPropagation(), w("#1,#2,eps,eps,down,down,#3,eps,eps,down,eps,down", PROPAGATION_INPUT))
    assert out == w("bot,bot,bot,bot,#2,bot,bot,bot,bot,#3,bot,bot", PROPAGATION_OUTPUT)


def test_group_table():
    g = GroupTransducer(Z3)
    assert eval_prime(g, w("1,2,0,0,2,1,0,1,1,2,2", g.domain)) == w("1,0,0,0,2,0,0,1,2,1,0", g.domain)


def test_flipflop_table():
    out = eval_prime(FlipFlop(), w("1,1,b,1,1,b,1,1,a,b,b", FLIPFLOP_INPUT))
    assert out == w("a,a,a,b,b,b,b,b,b,a,b", FlipFlop().codomain)


def test_map_reverse_and_duplicate():
    assert eval_prime(MapReverse(), w(BLOCKS, SEP)) == w("#2,#1,sep,sep,#5,#4,#3,sep,#8,#7,#6,sep,#9", SEP)
    assert eval_prime(MapDuplicate(), w(BLOCKS, SEP)) == w(
        "#1,#2,#1,#2,sep,sep,#3,#4,#5,#3,#4,#5,sep,#6,#7,#8,#6,#7,#8,sep,#9,#9", SEP)


def test_append_endmark_and_hom():
    out = eval_prime(AppendEndmark(), w("#1,#2", ATOM))
    assert len(out) == 3 and out[-1].side == "R"
    assert eval_prime(corpus.double_letters(), w("#1,sep,#2", SEP)) == w("#1,#1,#2,#2", SEP)


def test_sort_errors():
    with pytest.raises(SortMismatch):
        eval_prime(FlipFlop(), w("#1", ATOM))
    with pytest.raises(SortMismatch):
        seq(MapReverse(), FlipFlop())
    with pytest.raises(NotLengthPreserving):
        par(MapDuplicate(), FlipFlop())
    with pytest.raises(NotLengthPreserving):
        ParWithId(MapDuplicate(), ATOM)


def test_group_table_is_checked():
    with pytest.raises(DatawordsError):
        FiniteGroup(((0, 1), (1, 1)))
    with pytest.raises(DatawordsError):
        FiniteGroup(((1, 0), (0, 1)))


# ---------------------------------------------------------------- pipelines

def test_map_reverse_involution():
    x = w("#1,#2,sep,#3,#4", SEP)
    assert eval_pipeline(seq(MapReverse(), MapReverse()), x) == x


def test_parallel_is_componentwise():
    rng = random.Random(1)
    pl = par(FlipFlop(), identity(ATOM))
    for _ in range(50):
        a = random_word(FLIPFLOP_INPUT, rng, 10)
        b = [random_value(ATOM, rng, range(6)) for _ in a]
        out = eval_pipeline(pl, [Pair(x, y) for x, y in zip(a, b)])
        assert out == [Pair(x, y) for x, y in zip(eval_prime(FlipFlop(), a), b)]


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_push_parallel_rewrite(rng):
    pl = par(AtomPropagation(), GroupTransducer(Z3))
    n = rng.randint(0, 10)
    x = [Pair(random_value(PROPAGATION_INPUT, rng, range(4)), Z3.letter(rng.randrange(3))) for _ in range(n)]
    assert eval_pipeline(push_parallel(pl), x) == eval_pipeline(pl, x)


# ---------------------------------------------------------------- Mealy machines

def test_as_mealy_shapes():
    m = as_mealy(AtomPropagation())
    assert len(m.registers) == 1
    assert run(m, w("#1,#2,eps,eps,down", PROPAGATION_INPUT)).output[-1] == w("#2", PROPAGATION_OUTPUT)[0]
    ff = as_mealy(FlipFlop())
    assert ff.registers == ()
    for p in (MapReverse(), MapDuplicate(), AppendEndmark(), corpus.double_letters()):
        with pytest.raises(NotLengthPreserving):
            as_mealy(p)


def test_z2_parity_on_all_short_words():
    m = as_mealy(GroupTransducer(Z2))
    for x in words_upto(Z2.sort, 6):
        bits = [Z2.index(v) for v in x]
        parity = [sum(bits[:i + 1]) % 2 for i in range(len(bits))]
        assert [Z2.index(v) for v in run(m, x).output] == parity


LP_PRIMES = [AtomPropagation(), GroupTransducer(Z2), GroupTransducer(Z3), FlipFlop(), corpus.mark_present(),
             ParWithId(FlipFlop(), ATOM)]


@pytest.mark.parametrize("p", LP_PRIMES, ids=lambda p: type(p).__name__)
def test_as_mealy_agrees_on_canonical_words(p):
    m = as_mealy(p)
    n = 4 if isinstance(p, ParWithId) else 6
    for x in words_upto(p.domain, n):
        assert list(run(m, x).output) == eval_prime(p, x)


def test_trivial_group_is_constant():
    z1 = GroupTransducer(FiniteGroup(((0,),)))
    x = [z1.group.letter(0)] * 4
    assert eval_prime(z1, x) == x


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_flipflop_latches_last_non_identity(rng):
    x = random_word(FLIPFLOP_INPUT, rng, 15)
    out = eval_prime(FlipFlop(), x)
    last = "a"
    for i, letter in enumerate(x):
        name = format_value(letter, FLIPFLOP_INPUT)
        assert out[i] == w(last, FlipFlop().codomain)[0]
        if name != "1":
            last = name


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_map_duplicate_length(rng):
    x = random_word(SEP, rng, 15)
    assert len(eval_prime(MapDuplicate(), x)) == len(x) + sum(v.side == "L" for v in x)
    assert len(eval_prime(MapReverse(), x)) == len(x)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([AtomPropagation(), MapReverse(), MapDuplicate(), corpus.double_letters()]),
       st.randoms(use_true_random=False))
def test_primes_are_equivariant(p, rng):
    x = random_word(p.domain, rng, 12, 5)
    perm = random_perm(rng, [a for v in x for a in least_support(v)])
    assert eval_prime(p, apply_perm(perm, x)) == apply_perm(perm, eval_prime(p, x))


# ---------------------------------------------------------------- composition

def test_compose_identity():
    i = as_mealy(identity(ATOM))
    c = compose_mealy(i, i)
    for x in words_upto(ATOM, 5):
        assert list(run(c, x).output) == x


def test_compose_propagation_with_erasure():
    erase = LpHom(PatternFn.constant(PROPAGATION_OUTPUT, units("u"), Unit("u")))
    c = compose_mealy(as_mealy(AtomPropagation()), as_mealy(erase))
    rng = random.Random(200)
    for _ in range(200):
        x = random_word(PROPAGATION_INPUT, rng, 12, 4)
        assert list(run(c, x).output) == eval_pipeline(seq(AtomPropagation(), erase), x)


def test_compose_groups_on_table_input():
    g = GroupTransducer(Z3)
    c = compose_mealy(as_mealy(g), as_mealy(g))
    x = w("1,2,0,0,2,1,0,1,1,2,2", g.domain)
    r = run(c, x)
    assert isinstance(r, Accepted)
    assert list(r.output) == eval_pipeline(seq(g, g), x)


def test_compose_sort_mismatch():
    with pytest.raises(SortMismatch):
        compose_mealy(as_mealy(FlipFlop()), as_mealy(AtomPropagation()))


def test_hom_needs_list_codomain():
    with pytest.raises(SortMismatch):
        Hom(PatternFn.from_function(ATOM, ATOM, lambda v: v))
