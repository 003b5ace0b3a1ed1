"""Regular list functions with atoms.

Expressions are built from atomless constants, the equality test on atoms,
the list primes (projections, coprojections, distribution, reverse, concat,
append, coappend, block, group, identity) and the combinators comp, pair,
cases and map.  Every prime is monomorphic: its sort parameters are given
explicitly where it is used.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .atoms import (
    ATOM, BOOL, NO, YES, Inj, ListSort, ListV, Pair, ProdSort, Sort, SumSort, Unit, UnitSort,
    format_sort, format_value, is_polynomial, leaves, typecheck as value_has_sort,
)
from .errors import RlfTypeError, SortMismatch
from .primes import FiniteGroup

SEP_SORT = UnitSort("sep")
BOT_SORT = UnitSort("bot")


class Rlf:
    pass


@dataclass(frozen=True)
class Const(Rlf):
    value: object
    dom: Sort
    cod: Sort


@dataclass(frozen=True)
class Eq(Rlf):
    pass


@dataclass(frozen=True)
class Prim(Rlf):
    """A list prime; ``sorts`` are its sort parameters (see ``PRIME_PARAMS``)."""
    name: str
    sorts: tuple = ()
    group: FiniteGroup = None


@dataclass(frozen=True)
class Comp(Rlf):
    f: Rlf  # applied second
    g: Rlf  # applied first


@dataclass(frozen=True)
class Pairing(Rlf):
    f: Rlf
    g: Rlf


@dataclass(frozen=True)
class Cases(Rlf):
    f: Rlf
    g: Rlf


@dataclass(frozen=True)
class Map(Rlf):
    f: Rlf


PRIME_PARAMS = {
    "id": ("s",),
    "project0": ("s0", "s1"),
    "project1": ("s0", "s1"),
    "coproject0": ("s0", "s1"),
    "coproject1": ("s0", "s1"),
    "distr": ("s1", "s2", "t"),
    "reverse": ("s",),
    "concat": ("s",),
    "append": ("s",),
    "coappend": ("s",),
    "block": ("s", "t"),
    "group": ("s",),
}


def _prime_sorts(p: Prim, path):
    want = PRIME_PARAMS.get(p.name)
    if want is None:
        raise RlfTypeError(path, f"unknown prime {p.name!r}")
    if len(p.sorts) != len(want):
        raise RlfTypeError(path, f"{p.name} takes {len(want)} sort parameters, got {len(p.sorts)}")
    s = p.sorts
    n = p.name
    if n == "id":
        return s[0], s[0]
    if n in ("project0", "project1"):
        return ProdSort(s[0], s[1]), s[int(n[-1])]
    if n in ("coproject0", "coproject1"):
        return s[int(n[-1])], SumSort(s[0], s[1])
    if n == "distr":
        return ProdSort(SumSort(s[0], s[1]), s[2]), SumSort(ProdSort(s[0], s[2]), ProdSort(s[1], s[2]))
    if n == "reverse":
        return ListSort(s[0]), ListSort(s[0])
    if n == "concat":
        return ListSort(ListSort(s[0])), ListSort(s[0])
    if n == "append":
        return ProdSort(s[0], ListSort(s[0])), ListSort(s[0])
    if n == "coappend":
        return ListSort(s[0]), SumSort(ProdSort(s[0], ListSort(s[0])), BOT_SORT)
    if n == "block":
        return ListSort(SumSort(s[0], s[1])), ListSort(SumSort(ListSort(s[0]), ListSort(s[1])))
    if n == "group":
        if p.group is None:
            raise RlfTypeError(path, "group needs a finite group")
        el = ListSort(ProdSort(p.group.sort, s[0]))
        return el, el


def typecheck(e: Rlf, path=()) -> tuple:
    """(domain, codomain) of a well-typed expression; raises RlfTypeError with the offending path."""
    return _typecheck(e, tuple(path))


@lru_cache(maxsize=None)
def _typecheck(e, path):
    if isinstance(e, Const):
        if leaves(e.value):
            raise RlfTypeError(path, "constants must be atomless")
        if not value_has_sort(e.value, e.cod):
            raise RlfTypeError(path, f"{format_value(e.value)} is not of sort {format_sort(e.cod)}")
        return e.dom, e.cod
    if isinstance(e, Eq):
        return ProdSort(ATOM, ATOM), BOOL
    if isinstance(e, Prim):
        return _prime_sorts(e, path)
    if isinstance(e, Comp):
        fd, fc = _typecheck(e.f, path + ("comp.f",))
        gd, gc = _typecheck(e.g, path + ("comp.g",))
        if gc != fd:
            raise RlfTypeError(path, f"comp: {format_sort(gc)} does not match {format_sort(fd)}")
        return gd, fc
    if isinstance(e, Pairing):
        fd, fc = _typecheck(e.f, path + ("pair.f",))
        gd, gc = _typecheck(e.g, path + ("pair.g",))
        if fd != gd:
            raise RlfTypeError(path, f"pair: domains {format_sort(fd)} and {format_sort(gd)} differ")
        return fd, ProdSort(fc, gc)
    if isinstance(e, Cases):
        fd, fc = _typecheck(e.f, path + ("cases.f",))
        gd, gc = _typecheck(e.g, path + ("cases.g",))
        if fc != gc:
            raise RlfTypeError(path, f"cases: codomains {format_sort(fc)} and {format_sort(gc)} differ")
        return SumSort(fd, gd), fc
    if isinstance(e, Map):
        fd, fc = _typecheck(e.f, path + ("map",))
        return ListSort(fd), ListSort(fc)
    raise RlfTypeError(path, f"unknown expression {e!r}")


def dom(e):
    return typecheck(e)[0]


def cod(e):
    return typecheck(e)[1]


# ---------------------------------------------------------------- evaluation

def _block(xs):
    out = []
    for x in xs:
        if out and out[-1][0] == x.side:
            out[-1][1].append(x.value)
        else:
            out.append((x.side, [x.value]))
    return ListV(tuple(Inj(side, ListV(tuple(b))) for side, b in out))


def _group(g, xs):
    out, acc = [], 0
    for x in xs:
        out.append(Pair(g.letter(acc), x.right))
        acc = g.mul(acc, g.index(x.left))
    return ListV(tuple(out))


@lru_cache(maxsize=None)
def _compile(e) -> Callable:
    if isinstance(e, Const):
        v = e.value
        return lambda _x: v
    if isinstance(e, Eq):
        return lambda x: YES if x.left == x.right else NO
    if isinstance(e, Prim):
        n = e.name
        if n == "id":
            return lambda x: x
        if n == "project0":
            return lambda x: x.left
        if n == "project1":
            return lambda x: x.right
        if n == "coproject0":
            return lambda x: Inj("L", x)
        if n == "coproject1":
            return lambda x: Inj("R", x)
        if n == "distr":
            return lambda x: Inj(x.left.side, Pair(x.left.value, x.right))
        if n == "reverse":
            return lambda x: ListV(x.items[::-1])
        if n == "concat":
            return lambda x: ListV(tuple(a for l in x.items for a in l.items))
        if n == "append":
            return lambda x: ListV((x.left,) + x.right.items)
        if n == "coappend":
            return lambda x: Inj("L", Pair(x.items[0], ListV(x.items[1:]))) if x.items else Inj("R", Unit("bot"))
        if n == "block":
            return lambda x: _block(x.items)
        if n == "group":
            g = e.group
            return lambda x: _group(g, x.items)
    if isinstance(e, Comp):
        f, g = _compile(e.f), _compile(e.g)
        return lambda x: f(g(x))
    if isinstance(e, Pairing):
        f, g = _compile(e.f), _compile(e.g)
        return lambda x: Pair(f(x), g(x))
    if isinstance(e, Cases):
        f, g = _compile(e.f), _compile(e.g)
        return lambda x: f(x.value) if x.side == "L" else g(x.value)
    if isinstance(e, Map):
        f = _compile(e.f)
        return lambda x: ListV(tuple(f(a) for a in x.items))
    raise RlfTypeError((), f"unknown expression {e!r}")


def eval_rlf(e: Rlf, v):
    d, _c = typecheck(e)
    if not value_has_sort(v, d):
        raise SortMismatch(f"{format_value(v)} is not of sort {format_sort(d)}")
    return _compile(e)(v)


def eval_on_word(e: Rlf, w) -> list:
    """Apply a list-to-list expression to a word, returning a word."""
    return list(eval_rlf(e, ListV(tuple(w))).items)


def as_language_acceptor(e: Rlf) -> Callable:
    """Word predicate from an expression Sigma* -> {yes,no}."""
    d, c = typecheck(e)
    if c != BOOL:
        raise RlfTypeError((), f"acceptors must return {format_sort(BOOL)}, not {format_sort(c)}")
    if not isinstance(d, ListSort) or not is_polynomial(d.elem):
        raise RlfTypeError((), f"acceptors must read words over a polynomial sort, not {format_sort(d)}")
    return lambda w: eval_rlf(e, ListV(tuple(w))) == YES


# ---------------------------------------------------------------- building blocks

def comp(*fs) -> Rlf:
    """comp(f, g, h) = f after g after h."""
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Comp(f, out)
    return out


def pair(f, g):
    return Pairing(f, g)


def cases(f, g):
    return Cases(f, g)


def rmap(f):
    return Map(f)


def idf(s):
    return Prim("id", (s,))


def proj(i, s0, s1):
    return Prim(f"project{i}", (s0, s1))


def coproj(i, s0, s1):
    return Prim(f"coproject{i}", (s0, s1))


def distr(s1, s2, t):
    return Prim("distr", (s1, s2, t))


def reverse(s):
    return Prim("reverse", (s,))


def concat(s):
    return Prim("concat", (s,))


def append(s):
    return Prim("append", (s,))


def coappend(s):
    return Prim("coappend", (s,))


def block(s, t):
    return Prim("block", (s, t))


def group(g: FiniteGroup, s):
    return Prim("group", (s,), g)


def const(value, d, c):
    return Const(value, d, c)


def empty_list(d, s):
    """The constant empty list of sort s*."""
    return Const(ListV(()), d, ListSort(s))


def singleton(s):
    """x -> [x]."""
    return comp(append(s), pair(idf(s), empty_list(s, s)))


def swap(s, t):
    return pair(proj(1, s, t), proj(0, s, t))


def concat2(s):
    """(l1, l2) -> l1 l2."""
    ls = ListSort(s)
    return comp(concat(s), append(ls), pair(proj(0, ls, ls), comp(singleton(ls), proj(1, ls, ls))))


# ---------------------------------------------------------------- derived functions

def conditional(p: Rlf, yes: Rlf, no: Rlf) -> Rlf:
    """x -> yes(x) if p(x) = yes else no(x)."""
    s, _ = typecheck(p)
    y, n = UnitSort("yes"), UnitSort("no")
    return comp(cases(comp(yes, proj(1, y, s)), comp(no, proj(1, n, s))),
                distr(y, n, s), pair(p, idf(s)))


def filter_(p: Rlf) -> Rlf:
    """Keep the list elements satisfying p."""
    s, _ = typecheck(p)
    return comp(concat(s), rmap(conditional(p, singleton(s), empty_list(s, s))))


def duplicate(s) -> Rlf:
    """w -> w w, through (w, [w]) and [w, w]."""
    ls = ListSort(s)
    return comp(concat(s), append(ls), pair(idf(ls), singleton(ls)))


def map_reverse(sigma=ATOM) -> Rlf:
    """Reverse every maximal block of non-separators."""
    return _map_blocks(sigma, lambda s: reverse(s))


def map_duplicate(sigma=ATOM) -> Rlf:
    return _map_blocks(sigma, duplicate)


def _map_blocks(sigma, per_block):
    letters = SumSort(sigma, SEP_SORT)
    back = cases(comp(rmap(coproj(0, sigma, SEP_SORT)), per_block(sigma)),
                 rmap(coproj(1, sigma, SEP_SORT)))
    return comp(concat(letters), rmap(back), block(sigma, SEP_SORT))


def drop_first(s) -> Rlf:
    """[x1, ..., xn] -> [x2, ..., xn]."""
    ls = ListSort(s)
    return comp(cases(proj(1, s, ls), empty_list(BOT_SORT, s)), coappend(s))


def _length_two_pair(s) -> Rlf:
    """[a, b] -> [(a, b)]; lists of any other length -> []."""
    ls = ListSort(s)
    ss = ProdSort(s, s)
    none = empty_list
    # ((b, l''), a)  ->  [(a, b)] if l'' is empty
    pick = pair(proj(1, ProdSort(s, ls), s), comp(proj(0, s, ls), proj(0, ProdSort(s, ls), s)))
    inner = comp(
        cases(none(ProdSort(ProdSort(s, ls), ss), ss), comp(singleton(ss), proj(1, BOT_SORT, ss))),
        distr(ProdSort(s, ls), BOT_SORT, ss),
        pair(comp(coappend(s), proj(1, s, ls), proj(0, ProdSort(s, ls), s)), pick))
    # (a, l')  ->  (coappend l', a)
    outer = comp(
        cases(inner, none(ProdSort(BOT_SORT, s), ss)),
        distr(ProdSort(s, ls), BOT_SORT, s),
        pair(comp(coappend(s), proj(1, s, ls)), proj(0, s, ls)))
    return comp(cases(outer, none(BOT_SORT, ss)), coappend(s))


def windows(s) -> Rlf:
    """[x1, ..., xn] -> [(x1, x2), (x2, x3), ..., (x(n-1), xn)].

    Duplicate every element, drop the first copy, tag positions by parity with
    the group prime over Z2, put a separator after every odd-tagged element,
    split into blocks and keep the blocks of length two.
    """
    z2 = FiniteGroup(((0, 1), (1, 0)), ("0", "1"))
    g = z2.sort
    zero, one = UnitSort("0"), UnitSort("1")
    mark = SumSort(s, SEP_SORT)
    doubled = comp(concat(s), rmap(comp(append(s), pair(idf(s), singleton(s)))))
    tagged = comp(group(z2, s), rmap(pair(const(z2.letter(1), s, g), idf(s))))
    plain = comp(singleton(mark), coproj(0, s, SEP_SORT), proj(1, zero, s))
    marked = comp(append(mark),
                  pair(comp(coproj(0, s, SEP_SORT), proj(1, one, s)),
                       comp(singleton(mark), const(Inj("R", Unit("sep")), ProdSort(one, s), mark))))
    spread = comp(concat(mark), rmap(comp(cases(plain, marked), distr(zero, one, s))))
    keep = comp(concat(ProdSort(s, s)),
                rmap(cases(_length_two_pair(s), empty_list(ListSort(SEP_SORT), ProdSort(s, s)))),
                block(s, SEP_SORT))
    return comp(keep, spread, tagged, drop_first(s), doubled)


def last_letter(s) -> Rlf:
    """[] -> []; [..., x] -> [x]."""
    ls = ListSort(s)
    return comp(cases(comp(singleton(s), proj(0, s, ls)), empty_list(BOT_SORT, s)), coappend(s), reverse(s))


def all_yes() -> Rlf:
    """A list of booleans -> yes iff no element is no."""
    noes = filter_(cases(const(NO, UnitSort("yes"), BOOL), const(YES, UnitSort("no"), BOOL)))
    return comp(cases(const(NO, ProdSort(BOOL, ListSort(BOOL)), BOOL), const(YES, BOT_SORT, BOOL)),
                coappend(BOOL), noes)


def neq() -> Rlf:
    return comp(cases(const(NO, UnitSort("yes"), BOOL), const(YES, UnitSort("no"), BOOL)), Eq())


def compress() -> Rlf:
    """Remove repeated neighbours: [1,1,2,2,2,1] -> [1,2,1]."""
    changes = comp(rmap(proj(0, ATOM, ATOM)), filter_(neq()), windows(ATOM))
    return comp(concat2(ATOM), pair(changes, last_letter(ATOM)))


def at_most_three_distinct() -> Rlf:
    """Acceptor for words over atoms with at most three distinct letters.

    After compression (b1 b2 ... with neighbours distinct) a position i >= 3 is
    a jump when b(i) differs from b(i-2); the word is accepted iff every jump j
    following a jump i has b(j) = b(i-2).
    """
    aa = ProdSort(ATOM, ATOM)
    ends = pair(comp(proj(0, ATOM, ATOM), proj(0, aa, aa)), comp(proj(1, ATOM, ATOM), proj(1, aa, aa)))
    jumps = comp(filter_(neq()), rmap(ends), windows(aa), windows(ATOM))
    # consecutive jumps ((x_i, c_i), (x_j, c_j)) must satisfy c_j = x_i
    ok = comp(Eq(), pair(comp(proj(1, ATOM, ATOM), proj(1, aa, aa)), comp(proj(0, ATOM, ATOM), proj(0, aa, aa))))
    return comp(all_yes(), rmap(ok), windows(aa), jumps, compress())


def nonempty(s) -> Rlf:
    """Acceptor for non-empty words."""
    ls = ListSort(s)
    return comp(cases(const(YES, ProdSort(s, ls), BOOL), const(NO, BOT_SORT, BOOL)), coappend(s))


DERIVED = {
    "mapReverse": map_reverse,
    "mapDuplicate": map_duplicate,
    "duplicate": duplicate,
    "windows": windows,
    "filter": filter_,
    "conditional": conditional,
}


def derived(name: str, *args) -> Rlf:
    """Derived expressions by name; sort-polymorphic ones take their sort (default: atoms)."""
    if name not in DERIVED:
        raise KeyError(f"unknown derived function {name!r}")
    if name in ("duplicate", "windows") and not args:
        args = (ATOM,)
    e = DERIVED[name](*args)
    typecheck(e)
    return e
