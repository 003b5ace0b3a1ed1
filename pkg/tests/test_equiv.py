import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datawords import corpus
from datawords import reglist as R
from datawords.atoms import ATOM, Atom, Pair, apply_perm, equality_type, parse_word, random_perm, units
from datawords.equiv import (
    CIRCLE, DIAMOND, Counterexample, Deatomisation, Equal, bounded_equiv, canonical_word_count, canonical_words,
    canonicalize_word, deatomise, function_runner, fuzz, parse_deatomised, random_word, report, runner,
)
from datawords.errors import MissingAtom, SortMismatch
from datawords.primes import (
    FLIPFLOP_INPUT, FLIPFLOP_OUTPUT, FiniteGroup, FlipFlop, GroupTransducer, MapReverse, separated, seq, unit_letter,
)

SEP = separated(ATOM)


# ---------------------------------------------------------------- canonical words

def test_canonical_word_counts():
    assert list(canonical_words(ATOM, 2)) == [parse_word("#0,#0", ATOM), parse_word("#0,#1", ATOM)]
    assert canonical_word_count(ATOM, 3) == 5
    assert canonical_word_count(units("a", "b"), 2) == 4
    assert list(canonical_words(ATOM, 0)) == [[]]
    with pytest.raises(ValueError):
        list(canonical_words(ATOM, -1))


def test_canonical_words_are_distinct_orbits():
    words = list(canonical_words(SEP, 4))
    assert len({tuple(w) for w in words}) == len(words)
    assert all(canonicalize_word(w) == w for w in words)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_canonicalize_finds_the_orbit(rng):
    w = random_word(SEP, rng, 5)
    c = canonicalize_word(w)
    assert c in list(canonical_words(SEP, len(w)))
    assert [equality_type(x) for x in c] == [equality_type(x) for x in w]
    perm = random_perm(rng, list(range(6)))
    assert canonicalize_word(apply_perm(perm, w)) == c


# ---------------------------------------------------------------- bounded equivalence

def test_rlf_and_prime_agree():
    res = bounded_equiv(R.map_reverse(), seq(MapReverse()), 6)
    assert isinstance(res, Equal) and res.lengths_checked == 7


def test_flipflop_against_constant():
    const_a = seq(unit_letter_map())
    res = bounded_equiv(seq(FlipFlop()), const_a, 4)
    assert isinstance(res, Counterexample)
    assert res.out1 != res.out2
    # the reported word really separates the two
    r1, r2 = runner(seq(FlipFlop())), runner(const_a)
    assert r1(list(res.word)) == res.out1 and r2(list(res.word)) == res.out2
    assert any(x == parse_word("b", FLIPFLOP_INPUT)[0] for x in res.word)


def unit_letter_map():
    from datawords.atoms import PatternFn
    from datawords.primes import LpHom
    return LpHom(PatternFn.constant(FLIPFLOP_INPUT, FLIPFLOP_OUTPUT, unit_letter(FLIPFLOP_OUTPUT, "a")))


def test_reflexive():
    for name in ("mapreverse-sst", "atomprop", "windows-rlf"):
        m = corpus.load_fixture(name)
        assert isinstance(bounded_equiv(m, m, 4), Equal)


def test_sort_mismatch():
    with pytest.raises(SortMismatch):
        bounded_equiv(seq(FlipFlop()), seq(MapReverse()), 2)


def test_bounded_agreement_extends_to_random_words():
    m, p = corpus.load_fixture("mapduplicate-sst"), corpus.load_fixture("mapduplicate-prime")
    assert isinstance(bounded_equiv(m, p, 5), Equal)
    rng = random.Random(77)
    r1, r2 = runner(m), runner(p)
    for _ in range(100):
        w = random_word(SEP, rng, 5, 40)
        assert r1(w) == r2(w)


def test_report_shapes():
    r = report(bounded_equiv(seq(FlipFlop()), seq(unit_letter_map()), 3), seq(FlipFlop()), seq(unit_letter_map()))
    assert r["verdict"] == "counterexample" and "counterexample" in r
    assert report(fuzz(seq(FlipFlop()), seq(FlipFlop()), 5, 5), seq(FlipFlop()), seq(FlipFlop()))["verdict"] == "pass"


# ---------------------------------------------------------------- fuzzing

def test_fuzz_sst_against_prime():
    rep = fuzz(corpus.load_fixture("mapreverse-sst"), seq(MapReverse()), 500, 12, seed=42)
    assert rep.passed and rep.trials == 500


def test_fuzz_finds_group_disagreement():
    z3, z2 = FiniteGroup.cyclic(3), FiniteGroup.cyclic(2)

    def padded(w):
        # read Z3 letters as Z2 letters (2 counts as 0) and write the Z2 prefix products back as Z3 letters
        acc, out = 0, []
        for x in w:
            acc = z2.mul(acc, z3.index(x) % 2)
            out.append(z3.letter(acc))
        return out

    r2 = function_runner(padded, z3.sort, z3.sort, "z2-padded")
    for seed in (0, 1, 2):
        rep = fuzz(seq(GroupTransducer(z3)), r2, 500, 8, seed=seed)
        assert not rep.passed and rep.out1 != rep.out2


def test_fuzz_is_deterministic():
    a = fuzz(seq(FlipFlop()), seq(unit_letter_map()), 50, 6, seed=9)
    b = fuzz(seq(FlipFlop()), seq(unit_letter_map()), 50, 6, seed=9)
    assert a == b
    with pytest.raises(ValueError):
        fuzz(seq(FlipFlop()), seq(FlipFlop()), 0, 3)


# ---------------------------------------------------------------- deatomisation

def test_deatomise_examples():
    alpha = Deatomisation({1: 1, 3: 3})
    v = Pair(Atom(3), Pair(Atom(1), Pair(Atom(1), Atom(3))))
    assert deatomise(alpha, v) == "◇◇◇∘◇∘◇∘◇◇◇∘"
    assert deatomise(alpha, parse_word("a", units("a", "b"))) == "La"
    assert DIAMOND not in deatomise(alpha, parse_word("b", units("a", "b"))[0])
    collide = Deatomisation({1: 1, 2: 1})
    assert not collide.injective
    assert deatomise(collide, parse_word("#1,#2", ATOM)) == DIAMOND + CIRCLE + DIAMOND + CIRCLE
    with pytest.raises(MissingAtom):
        deatomise(alpha, Atom(2))
    with pytest.raises(ValueError):
        Deatomisation({1: 0})


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_deatomise_round_trip(rng):
    s = corpus.FLIPFLOP_INPUT if rng.random() < 0.2 else SEP
    w = random_word(s, rng, 8, 5)
    alpha = Deatomisation({a: a + 1 for a in range(5)})
    assert parse_deatomised(alpha, deatomise(alpha, w), s) == w
