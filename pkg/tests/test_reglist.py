import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import words_upto
from datawords import reglist as R
from datawords.atoms import ATOM, BOOL, NO, YES, Atom, ListV, Pair, ProdSort, SumSort, format_value, parse_word, prod
from datawords.equiv import random_word
from datawords.errors import RlfTypeError, SortMismatch
from datawords.primes import FiniteGroup, GroupTransducer, MapDuplicate, MapReverse, eval_prime, separated

SEP = separated(ATOM)
BLOCKS = "#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9"


def w(text, sort=ATOM):
    return parse_word(text, sort)


def lv(text, sort=ATOM):
    return ListV(tuple(w(text, sort)))


# ---------------------------------------------------------------- typing

def test_typecheck_examples():
    assert R.typecheck(R.Eq()) == (prod(ATOM, ATOM), BOOL)
    assert R.typecheck(R.reverse(ATOM))[0] == R.typecheck(R.reverse(ATOM))[1]
    assert R.typecheck(R.map_reverse()) == (R.typecheck(R.map_reverse())[0],) * 2


@pytest.mark.parametrize("e, path", [
    (R.comp(R.reverse(ATOM), R.idf(BOOL)), ()),
    (R.comp(R.reverse(ATOM), R.pair(R.idf(ATOM), R.idf(BOOL))), ("comp.g",)),
    (R.Prim("bogus"), ()),
    (R.Const(Atom(1), ATOM, ATOM), ()),
])
def test_type_errors(e, path):
    with pytest.raises(RlfTypeError) as info:
        R.typecheck(e)
    assert info.value.path == path


def test_eval_checks_argument_sort():
    with pytest.raises(SortMismatch):
        R.eval_rlf(R.reverse(ATOM), Atom(1))


# ---------------------------------------------------------------- primes

def test_block():
    out = R.eval_rlf(R.block(ATOM, R.SEP_SORT), lv("#1,#2,sep,sep,#3", SEP))
    assert format_value(out) == "[L:[#1,#2],R:[sep,sep],L:[#3]]"


def test_append_and_coappend():
    assert R.eval_rlf(R.append(ATOM), Pair(Atom(1), lv("#2"))) == lv("#1,#2")
    assert format_value(R.eval_rlf(R.coappend(ATOM), lv("#1,#2"))) == "L:(#1,[#2])"
    assert format_value(R.eval_rlf(R.coappend(ATOM), ListV(()))) == "R:bot"


def test_group_prime_example():
    z3 = FiniteGroup.cyclic(3)
    x, y, z = Atom(1), Atom(2), Atom(3)
    g = lambda i: z3.letter(i)  # noqa: E731
    out = R.eval_rlf(R.group(z3, ATOM), ListV((Pair(g(1), x), Pair(g(2), y), Pair(g(0), z))))
    assert out == ListV((Pair(g(0), x), Pair(g(1), y), Pair(g(0), z)))


def test_group_prime_is_exclusive_prefix_product():
    """The list prime multiplies the letters before position i; the transducer includes letter i."""
    z3 = FiniteGroup.cyclic(3)
    x = w("1,2,0,0,2,1", z3.sort)
    tagged = ListV(tuple(Pair(v, Atom(i)) for i, v in enumerate(x)))
    out = R.eval_rlf(R.group(z3, ATOM), tagged).items
    assert [p.right for p in out] == [Atom(i) for i in range(len(x))]
    inclusive = eval_prime(GroupTransducer(z3), x)
    assert [p.left for p in out] == [z3.letter(0)] + inclusive[:-1]


def test_eq():
    assert R.eval_rlf(R.Eq(), Pair(Atom(3), Atom(3))) == YES
    assert R.eval_rlf(R.Eq(), Pair(Atom(3), Atom(4))) == NO


# ---------------------------------------------------------------- derived functions

def test_map_reverse_and_duplicate():
    x = w(BLOCKS, SEP)
    assert R.eval_on_word(R.map_reverse(), x) == eval_prime(MapReverse(), x)
    assert R.eval_on_word(R.map_duplicate(), x) == eval_prime(MapDuplicate(), x)


def test_windows():
    assert R.eval_on_word(R.windows(ATOM), w("#1,#2,#3")) == [Pair(Atom(1), Atom(2)), Pair(Atom(2), Atom(3))]
    assert R.eval_on_word(R.windows(ATOM), w("#1")) == []
    assert R.eval_on_word(R.windows(ATOM), []) == []


def test_compress_and_last_letter():
    assert R.eval_on_word(R.compress(), w("#1,#1,#2,#2,#2,#1")) == w("#1,#2,#1")
    assert R.eval_on_word(R.last_letter(ATOM), w("#1,#2")) == w("#2")


def test_nonempty_acceptor():
    acc = R.as_language_acceptor(R.nonempty(ATOM))
    assert not acc([])
    assert acc(w("#4"))
    with pytest.raises(RlfTypeError):
        R.as_language_acceptor(R.reverse(ATOM))


def test_three_distinct_against_brute_force():
    acc = R.as_language_acceptor(R.at_most_three_distinct())
    for x in words_upto(ATOM, 6):
        assert acc(x) == (len(set(x)) <= 3), x


def test_derived_lookup():
    assert R.derived("windows") == R.windows(ATOM)
    with pytest.raises(KeyError):
        R.derived("nope")


# ---------------------------------------------------------------- properties

@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_reverse_is_an_involution(rng):
    x = random_word(ATOM, rng, 12)
    e = R.comp(R.reverse(ATOM), R.reverse(ATOM))
    assert R.eval_on_word(e, x) == x
    assert R.eval_on_word(R.reverse(ATOM), x) == x[::-1]


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_append_then_coappend(rng):
    x = random_word(ATOM, rng, 10)
    a = Atom(rng.randrange(6))
    out = R.eval_rlf(R.comp(R.coappend(ATOM), R.append(ATOM)), Pair(a, ListV(tuple(x))))
    assert out.side == "L" and out.value == Pair(a, ListV(tuple(x)))


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_duplicate_and_filter(rng):
    x = random_word(ATOM, rng, 10, 4)
    assert R.eval_on_word(R.duplicate(ATOM), x) == x + x
    pairs = [Pair(a, b) for a, b in zip(x, x[1:])]
    assert R.eval_on_word(R.filter_(R.Eq()), pairs) == [p for p in pairs if p.left == p.right]


def test_windows_on_all_short_words():
    for n in range(5):
        for x in itertools.islice(words_upto(ATOM, n), 200):
            assert R.eval_on_word(R.windows(ATOM), x) == [Pair(a, b) for a, b in zip(x, x[1:])]


def test_map_reverse_on_random_words():
    rng = random.Random(3)
    for _ in range(100):
        x = random_word(SEP, rng, 14)
        assert R.eval_on_word(R.map_reverse(), x) == eval_prime(MapReverse(), x)


def test_projection_sorts():
    assert R.typecheck(R.coproj(0, ATOM, R.SEP_SORT))[1] == SumSort(ATOM, R.SEP_SORT)
    assert R.typecheck(R.proj(0, ATOM, BOOL))[0] == ProdSort(ATOM, BOOL)
