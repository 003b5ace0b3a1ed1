"""Bounded equivalence, differential fuzzing and deatomisation.

``bounded_equiv`` evaluates two models on one word per orbit of each length up
to a bound.  Because every model here is equivariant, agreement on those
words means agreement on all words up to that length.  It says nothing about
longer words: it is a bounded check, not a decision procedure.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .atoms import (
    BOOL, YES, Atom, Inj, ListSort, ListV, Pair, ProdSort, Sort, SumSort, Unit, UnitSort, AtomSort,
    fill, format_sort, format_value, leaves, random_value, restricted_growth, shapes,
)
from .errors import MissingAtom, ParseError, SortMismatch
from .machines import Accepted, Loop, TwoWaySUT, run
from .primes import Pipeline, Prime, as_pipeline, eval_pipeline
from .reglist import Rlf, eval_rlf, typecheck
from .sst import SSTMachine, eval_sst


# ---------------------------------------------------------------- runners

@dataclass(frozen=True)
class Runner:
    """A model applied to words: returns a tuple of output letters, a boolean,
    or the string "rejected"/"loop"/"error"."""
    kind: str
    model: object
    input_sort: Sort
    output_sort: Optional[Sort]   # None for language acceptors
    fn: Callable = None

    @property
    def boolean(self) -> bool:
        return self.output_sort is None

    def __call__(self, w: Sequence):
        return self.fn(list(w))

    def describe(self, outcome):
        if isinstance(outcome, bool) or isinstance(outcome, str):
            return outcome
        return [format_value(x, self.output_sort) for x in outcome]


def _machine_outcome(m):
    def go(w):
        r = run(m, w)
        if m.kind.automaton:
            return isinstance(r, Accepted)
        if isinstance(r, Accepted):
            return tuple(r.output)
        return "loop" if isinstance(r, Loop) else "rejected"
    return go


def _sst_outcome(m):
    def go(w):
        r = eval_sst(m, w)
        if isinstance(r, Accepted):
            return tuple(r.output)
        return "loop" if isinstance(r, Loop) else "rejected"
    return go


def _safe(f):
    def go(w):
        try:
            return f(w)
        except (SortMismatch, ValueError) as e:
            return f"error: {type(e).__name__}"
    return go


def runner(model, name: str = "") -> Runner:
    """Wrap a machine, SST, prime, pipeline or list-function expression."""
    if isinstance(model, Runner):
        return model
    if isinstance(model, TwoWaySUT):
        out = None if model.kind.automaton else model.output_sort
        return Runner("machine", model, model.input_sort, out, _machine_outcome(model))
    if isinstance(model, SSTMachine):
        return Runner("sst", model, model.input_sort, model.output_sort, _sst_outcome(model))
    if isinstance(model, (Prime, Pipeline)):
        pl = as_pipeline(model)
        return Runner("pipeline", model, pl.domain, pl.codomain,
                      _safe(lambda w: tuple(eval_pipeline(pl, w))))
    if isinstance(model, Rlf):
        d, c = typecheck(model)
        if not isinstance(d, ListSort):
            raise SortMismatch(f"expression domain {format_sort(d)} is not a list sort")
        if c == BOOL:
            return Runner("rlf", model, d.elem, None, lambda w: eval_rlf(model, ListV(tuple(w))) == YES)
        if not isinstance(c, ListSort):
            raise SortMismatch(f"expression codomain {format_sort(c)} is neither a list sort nor yes/no")
        return Runner("rlf", model, d.elem, c.elem, lambda w: eval_rlf(model, ListV(tuple(w))).items)
    raise TypeError(f"cannot run {type(model).__name__}")


def function_runner(fn: Callable, input_sort: Sort, output_sort: Optional[Sort], name="function") -> Runner:
    """Runner from a host function on words (for oracles in tests)."""
    return Runner(name, fn, input_sort, output_sort, lambda w: _norm(fn(w)))


def _norm(x):
    if isinstance(x, list):
        return tuple(x)
    return x


# ---------------------------------------------------------------- canonical words

def canonical_words(s: Sort, length: int) -> Iterator[list]:
    """One word per orbit of words of the given length, atoms numbered from #0 by first occurrence."""
    if length < 0:
        raise ValueError("length must be non-negative")
    shs = shapes(s)
    for combo in itertools.product(shs, repeat=length):
        d = sum(n for _sh, n in combo)
        for rg in restricted_growth(d):
            w, i = [], 0
            for sh, n in combo:
                w.append(fill(sh, rg[i:i + n]))
                i += n
            yield w


def canonical_word_count(s: Sort, length: int) -> int:
    return sum(1 for _ in canonical_words(s, length))


def canonicalize_word(w: Sequence) -> list:
    """The canonical word in the orbit of ``w``."""
    ren = {}

    def go(x):
        t = type(x)
        if t is Atom:
            if x.label not in ren:
                ren[x.label] = len(ren)
            return Atom(ren[x.label])
        if t is Pair:
            return Pair(go(x.left), go(x.right))
        if t is Inj:
            return Inj(x.side, go(x.value))
        return x
    return [go(x) for x in w]


# ---------------------------------------------------------------- bounded equivalence

@dataclass(frozen=True)
class Equal:
    lengths_checked: int
    words_checked: int
    verdict = "equal"


@dataclass(frozen=True)
class Counterexample:
    word: tuple
    out1: object
    out2: object
    length: int
    index: int
    words_checked: int
    verdict = "counterexample"


def _check_sorts(r1: Runner, r2: Runner):
    if r1.input_sort != r2.input_sort:
        raise SortMismatch(f"input sorts differ: {format_sort(r1.input_sort)} and {format_sort(r2.input_sort)}")
    if r1.boolean != r2.boolean or (not r1.boolean and r1.output_sort != r2.output_sort):
        a = "yes/no" if r1.boolean else format_sort(r1.output_sort)
        b = "yes/no" if r2.boolean else format_sort(r2.output_sort)
        raise SortMismatch(f"output sorts differ: {a} and {b}")


def bounded_equiv(r1, r2, max_len: int):
    """Compare on every canonical word of length <= max_len; the first difference in (length, index) order."""
    r1, r2 = runner(r1), runner(r2)
    _check_sorts(r1, r2)
    count = 0
    for n in range(max_len + 1):
        for i, w in enumerate(canonical_words(r1.input_sort, n)):
            count += 1
            a, b = r1(w), r2(w)
            if a != b:
                return Counterexample(tuple(w), a, b, n, i, count)
    return Equal(max_len + 1, count)


def random_word(s: Sort, rng: random.Random, max_len: int, atom_pool: int = 6) -> list:
    n = rng.randint(0, max_len)
    return [random_value(s, rng, range(atom_pool)) for _ in range(n)]


@dataclass(frozen=True)
class FuzzReport:
    passed: bool
    trials: int
    seed: int
    word: tuple = ()
    out1: object = None
    out2: object = None

    @property
    def verdict(self):
        return "pass" if self.passed else "disagreement"


def fuzz(r1, r2, trials: int, max_len: int, atom_pool: int = 6, seed: int = 0) -> FuzzReport:
    if trials < 1:
        raise ValueError("trials must be positive")
    r1, r2 = runner(r1), runner(r2)
    _check_sorts(r1, r2)
    rng = random.Random(seed)
    for t in range(trials):
        w = random_word(r1.input_sort, rng, max_len, atom_pool)
        a, b = r1(w), r2(w)
        if a != b:
            return FuzzReport(False, t + 1, seed, tuple(w), a, b)
    return FuzzReport(True, trials, seed)


def report(result, r1: Runner, r2: Runner, seed=None) -> dict:
    """JSON report of a bounded check or a fuzzing run."""
    r1, r2 = runner(r1), runner(r2)
    if isinstance(result, FuzzReport):
        out = {"verdict": result.verdict, "trials": result.trials, "seed": result.seed}
        if not result.passed:
            out["counterexample"] = {"word": [format_value(x, r1.input_sort) for x in result.word],
                                     "out1": r1.describe(result.out1), "out2": r2.describe(result.out2)}
        return out
    checked = result.lengths_checked if isinstance(result, Equal) else result.length + 1
    out = {"verdict": result.verdict, "lengths_checked": checked,
           "words_checked": result.words_checked, "seed": seed}
    if isinstance(result, Counterexample):
        out["counterexample"] = {"word": [format_value(x, r1.input_sort) for x in result.word],
                                 "out1": r1.describe(result.out1), "out2": r2.describe(result.out2)}
    return out


# ---------------------------------------------------------------- deatomisation

DIAMOND = "◇"
CIRCLE = "∘"


@dataclass(frozen=True)
class Deatomisation:
    """Atom label -> n >= 1, encoding the atom as n diamonds and a circle."""
    counts: tuple   # sorted (label, n) pairs

    def __init__(self, mapping):
        items = tuple(sorted(dict(mapping).items()))
        for a, n in items:
            if n < 1:
                raise ValueError(f"repetition count for #{a} must be positive")
        object.__setattr__(self, "counts", items)

    @property
    def mapping(self) -> dict:
        return dict(self.counts)

    @property
    def injective(self) -> bool:
        ns = [n for _a, n in self.counts]
        return len(ns) == len(set(ns))

    def code(self, a: int) -> str:
        m = self.mapping
        if a not in m:
            raise MissingAtom(f"#{a} has no deatomisation")
        return DIAMOND * m[a] + CIRCLE


def deatomise(alpha: Deatomisation, v) -> str:
    """Atoms become diamond blocks; units are written by name, injections by L/R.

    Pairs and words are written as plain concatenations: given the sort, the
    string still parses back unambiguously.
    """
    if isinstance(v, (list, tuple)):
        return "".join(deatomise(alpha, x) for x in v)
    t = type(v)
    if t is Atom:
        return alpha.code(v.label)
    if t is Unit:
        return v.name
    if t is Pair:
        return deatomise(alpha, v.left) + deatomise(alpha, v.right)
    if t is Inj:
        return v.side + deatomise(alpha, v.value)
    if t is ListV:
        return "".join(deatomise(alpha, x) for x in v.items)
    raise SortMismatch(f"cannot deatomise {v!r}")


def parse_deatomised(alpha: Deatomisation, text: str, s: Sort) -> list:
    """Inverse of ``deatomise`` on words over ``s`` (needs an injective deatomisation)."""
    if not alpha.injective:
        raise ValueError("parsing back needs an injective deatomisation")
    inverse = {n: a for a, n in alpha.counts}
    pos = 0

    def expect(lit):
        nonlocal pos
        if not text.startswith(lit, pos):
            raise ParseError(f"expected {lit!r} at offset {pos} of {text!r}")
        pos += len(lit)

    def value(srt):
        nonlocal pos
        if isinstance(srt, AtomSort):
            n = 0
            while pos < len(text) and text[pos] == DIAMOND:
                n += 1
                pos += 1
            expect(CIRCLE)
            if n not in inverse:
                raise MissingAtom(f"no atom is encoded by {n} diamonds")
            return Atom(inverse[n])
        if isinstance(srt, UnitSort):
            expect(srt.name)
            return Unit(srt.name)
        if isinstance(srt, ProdSort):
            a = value(srt.left)
            return Pair(a, value(srt.right))
        if isinstance(srt, SumSort):
            side = text[pos:pos + 1]
            if side not in ("L", "R"):
                raise ParseError(f"expected L or R at offset {pos} of {text!r}")
            pos += 1
            return Inj(side, value(srt.left if side == "L" else srt.right))
        raise SortMismatch(f"cannot parse values of sort {format_sort(srt)}")

    out = []
    while pos < len(text):
        out.append(value(s))
    return out


def atoms_needed(v) -> list:
    if isinstance(v, (list, tuple)):
        return sorted({a for x in v for a in leaves(x)})
    return sorted(set(leaves(v)))
