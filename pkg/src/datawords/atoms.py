"""Atoms, polynomial orbit-finite sorts, values, permutations and equivariant
pattern functions.

Atoms are naturals compared only by equality.  A sort is a finite tree built
from the atom sort, named unit sorts, binary products and binary sums (lists
are added for regular list functions).  Values mirror sorts.  A
``PatternFn`` is an equivariant function given by a finite table: one output
template per equality type of the domain, whose atom leaves point back at
atom positions of the argument.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _cartesian
from typing import Callable, Iterable, Sequence, Union

from .errors import NotEquivariant, ParseError, SortMismatch


# ---------------------------------------------------------------- sorts

@dataclass(frozen=True)
class AtomSort:
    def __str__(self):
        return format_sort(self)


@dataclass(frozen=True)
class UnitSort:
    name: str

    def __str__(self):
        return format_sort(self)


@dataclass(frozen=True)
class ProdSort:
    left: "Sort"
    right: "Sort"

    def __str__(self):
        return format_sort(self)


@dataclass(frozen=True)
class SumSort:
    left: "Sort"
    right: "Sort"

    def __str__(self):
        return format_sort(self)


@dataclass(frozen=True)
class ListSort:
    elem: "Sort"

    def __str__(self):
        return format_sort(self)


Sort = Union[AtomSort, UnitSort, ProdSort, SumSort, ListSort]

ATOM = AtomSort()


def unit(name: str) -> UnitSort:
    return UnitSort(name)


def prod(*sorts: Sort) -> Sort:
    """Right-nested product of one or more sorts."""
    if not sorts:
        return NIL_SORT
    out = sorts[-1]
    for s in reversed(sorts[:-1]):
        out = ProdSort(s, out)
    return out


def either(*sorts: Sort) -> Sort:
    """Right-nested sum of one or more sorts."""
    out = sorts[-1]
    for s in reversed(sorts[:-1]):
        out = SumSort(s, out)
    return out


def units(*names: str) -> Sort:
    """Finite atomless alphabet with the given letters."""
    return either(*[UnitSort(n) for n in names])


def is_polynomial(s: Sort) -> bool:
    if isinstance(s, ListSort):
        return False
    if isinstance(s, (ProdSort, SumSort)):
        return is_polynomial(s.left) and is_polynomial(s.right)
    return True


def dimension(s: Sort) -> int:
    """Largest number of atoms in a value of ``s``."""
    if isinstance(s, AtomSort):
        return 1
    if isinstance(s, UnitSort):
        return 0
    if isinstance(s, ProdSort):
        return dimension(s.left) + dimension(s.right)
    if isinstance(s, SumSort):
        return max(dimension(s.left), dimension(s.right))
    raise SortMismatch(f"list sort {format_sort(s)} has no bounded dimension")


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class Atom:
    label: int

    def __str__(self):
        return format_value(self)


@dataclass(frozen=True)
class Unit:
    name: str

    def __str__(self):
        return format_value(self)


@dataclass(frozen=True)
class Pair:
    left: "Value"
    right: "Value"

    def __str__(self):
        return format_value(self)


@dataclass(frozen=True)
class Inj:
    side: str  # "L" or "R"
    value: "Value"

    def __str__(self):
        return format_value(self)


@dataclass(frozen=True)
class ListV:
    items: tuple

    def __str__(self):
        return format_value(self)


@dataclass(frozen=True)
class Ref:
    """Template leaf: the atom at 1-based leaf position ``pos`` of the argument."""
    pos: int

    def __str__(self):
        return f"${self.pos}"


Value = Union[Atom, Unit, Pair, Inj, ListV]


def tup(*vals: Value) -> Value:
    """Right-nested tuple; the empty tuple is the unit ``nil``."""
    if not vals:
        return NIL
    out = vals[-1]
    for v in reversed(vals[:-1]):
        out = Pair(v, out)
    return out


def listv(items: Iterable[Value]) -> ListV:
    return ListV(tuple(items))


BOOL = SumSort(UnitSort("yes"), UnitSort("no"))
YES = Inj("L", Unit("yes"))
NO = Inj("R", Unit("no"))

BOT_SORT = UnitSort("bot")
MAYBE_ATOM = SumSort(ATOM, BOT_SORT)
BOT = Inj("R", Unit("bot"))

NIL_SORT = UnitSort("nil")
NIL = Unit("nil")

ENDS = SumSort(UnitSort("lend"), UnitSort("rend"))
LEND = Inj("R", Inj("L", Unit("lend")))
REND = Inj("R", Inj("R", Unit("rend")))


def ext_sort(s: Sort) -> Sort:
    """Input letters together with the two endmarkers."""
    return SumSort(s, ENDS)


def ext_letter(v: Value) -> Value:
    return Inj("L", v)


def tuple_sort(k: int) -> Sort:
    """The sort of k-tuples of atoms (register contents fed to an output function)."""
    return prod(*([ATOM] * k)) if k else NIL_SORT


def tuple_value(labels: Sequence[int]) -> Value:
    return tup(*[Atom(a) for a in labels]) if labels else NIL


def maybe_atom(label) -> Value:
    return BOT if label is None else Inj("L", Atom(label))


def typecheck(v, s: Sort) -> bool:
    if isinstance(s, AtomSort):
        return type(v) is Atom
    if isinstance(s, UnitSort):
        return type(v) is Unit and v.name == s.name
    if isinstance(s, ProdSort):
        return type(v) is Pair and typecheck(v.left, s.left) and typecheck(v.right, s.right)
    if isinstance(s, SumSort):
        if type(v) is not Inj:
            return False
        return typecheck(v.value, s.left if v.side == "L" else s.right) and v.side in ("L", "R")
    if isinstance(s, ListSort):
        return type(v) is ListV and all(typecheck(x, s.elem) for x in v.items)
    return False


def check_value(v, s: Sort) -> None:
    if not typecheck(v, s):
        raise SortMismatch(f"{format_value(v)} is not of sort {format_sort(s)}")


def check_word(w: Sequence[Value], s: Sort) -> None:
    for i, v in enumerate(w):
        if not typecheck(v, s):
            raise SortMismatch(f"letter {i} ({format_value(v)}) is not of sort {format_sort(s)}")


def leaves(v) -> list:
    """Atom labels in left-to-right leaf order, with repetitions."""
    out = []
    _leaves(v, out)
    return out


def _leaves(v, out):
    t = type(v)
    if t is Atom:
        out.append(v.label)
    elif t is Pair:
        _leaves(v.left, out)
        _leaves(v.right, out)
    elif t is Inj:
        _leaves(v.value, out)
    elif t is ListV:
        for x in v.items:
            _leaves(x, out)


def least_support(v) -> tuple:
    """Atoms of ``v`` (a value or a word) in first-occurrence order."""
    seen = {}
    if isinstance(v, (list, tuple)):
        for x in v:
            for a in leaves(x):
                seen.setdefault(a, None)
    else:
        for a in leaves(v):
            seen.setdefault(a, None)
    return tuple(seen)


def atoms_of(v) -> frozenset:
    return frozenset(least_support(v))


# ---------------------------------------------------------------- canonical forms

_ATOM_CACHE = [Atom(i) for i in range(64)]


def _atom(i: int) -> Atom:
    return _ATOM_CACHE[i] if i < 64 else Atom(i)


def _canon(v, ren: dict, out: list):
    t = type(v)
    if t is Atom:
        out.append(v.label)
        j = ren.get(v.label)
        if j is None:
            j = ren[v.label] = len(ren)
        return _atom(j)
    if t is Unit:
        return v
    if t is Pair:
        return Pair(_canon(v.left, ren, out), _canon(v.right, ren, out))
    if t is Inj:
        return Inj(v.side, _canon(v.value, ren, out))
    if t is ListV:
        return ListV(tuple(_canon(x, ren, out) for x in v.items))
    raise SortMismatch(f"not a value: {v!r}")


def canonical(v) -> Value:
    """Orbit representative of ``v``: atoms relabelled #0, #1, ... by first occurrence."""
    return _canon(v, {}, [])


class _Hole:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "_"


HOLE = _Hole()


def _skeleton(v):
    t = type(v)
    if t is Atom:
        return HOLE
    if t is Pair:
        return Pair(_skeleton(v.left), _skeleton(v.right))
    if t is Inj:
        return Inj(v.side, _skeleton(v.value))
    if t is ListV:
        return ListV(tuple(_skeleton(x) for x in v.items))
    return v


@dataclass(frozen=True)
class EqualityType:
    """Atom-free skeleton plus the partition of atom leaf positions (1-based)."""
    skeleton: object
    partition: tuple

    def __str__(self):
        blocks = ",".join("{" + ",".join(map(str, b)) + "}" for b in self.partition)
        return "{" + blocks + "}"


def equality_type(v) -> EqualityType:
    blocks: dict = {}
    for pos, a in enumerate(leaves(v), start=1):
        blocks.setdefault(a, []).append(pos)
    return EqualityType(_skeleton(v), tuple(tuple(b) for b in blocks.values()))


def shapes(s: Sort) -> list:
    """All skeletons of ``s`` paired with their number of atom leaves."""
    return list(_shapes(s))


@lru_cache(maxsize=None)
def _shapes(s: Sort) -> tuple:
    if isinstance(s, AtomSort):
        return ((HOLE, 1),)
    if isinstance(s, UnitSort):
        return ((Unit(s.name), 0),)
    if isinstance(s, ProdSort):
        return tuple((Pair(a, b), m + n) for (a, m), (b, n) in _cartesian(_shapes(s.left), _shapes(s.right)))
    if isinstance(s, SumSort):
        return tuple((Inj("L", a), n) for a, n in _shapes(s.left)) + \
            tuple((Inj("R", a), n) for a, n in _shapes(s.right))
    raise SortMismatch(f"sort {format_sort(s)} is not polynomial")


def restricted_growth(n: int):
    """Set partitions of n positions as restricted growth strings, in lexicographic order."""
    if n == 0:
        yield ()
        return

    def go(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for j in range(top + 2):
            prefix.append(j)
            yield from go(prefix, max(top, j))
            prefix.pop()

    yield from go([0], 0)


def fill(shape, labels: Sequence[int]):
    """Replace the holes of ``shape`` left to right by atoms with the given labels."""
    it = iter(labels)

    def go(x):
        if x is HOLE:
            return _atom(next(it))
        t = type(x)
        if t is Pair:
            return Pair(go(x.left), go(x.right))
        if t is Inj:
            return Inj(x.side, go(x.value))
        return x

    return go(shape)


@lru_cache(maxsize=None)
def _orbit_reps(s: Sort) -> tuple:
    out = []
    for shape, n in _shapes(s):
        for rgs in restricted_growth(n):
            out.append(fill(shape, rgs))
    return tuple(out)


def enumerate_orbit_reps(s: Sort) -> list:
    """One canonical value per orbit of ``s``."""
    return list(_orbit_reps(s))


# ---------------------------------------------------------------- permutations

class Perm:
    """A finite permutation of atoms, given as a partial injection.

    The injection is completed to a bijection by closing every chain
    a1 -> a2 -> ... -> an (an outside the domain) with an -> a1; atoms
    untouched by the completion are fixed.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping=None):
        m = dict(mapping or {})
        inv = {}
        for a, b in m.items():
            if b in inv:
                raise ValueError(f"not injective: {inv[b]} and {a} both map to {b}")
            inv[b] = a
        for b in [b for b in inv if b not in m]:
            x = b
            while x in inv:
                x = inv[x]
            m[b] = x
        self._map = {a: b for a, b in m.items() if a != b}

    def __call__(self, a: int) -> int:
        return self._map.get(a, a)

    def items(self):
        return sorted(self._map.items())

    def inverse(self) -> "Perm":
        return Perm({b: a for a, b in self._map.items()})

    def compose(self, other: "Perm") -> "Perm":
        """``self`` after ``other``."""
        keys = set(self._map) | set(other._map)
        return Perm({a: self(other(a)) for a in keys})

    def __eq__(self, other):
        return isinstance(other, Perm) and self._map == other._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __repr__(self):
        return "Perm({" + ", ".join(f"{a}: {b}" for a, b in self.items()) + "})"


def apply_perm(p: Perm, v):
    """Rename atoms of a value, a word, or a nested list/tuple of those."""
    t = type(v)
    if t is Atom:
        return Atom(p(v.label))
    if t is Unit or v is None:
        return v
    if t is Pair:
        return Pair(apply_perm(p, v.left), apply_perm(p, v.right))
    if t is Inj:
        return Inj(v.side, apply_perm(p, v.value))
    if t is ListV:
        return ListV(tuple(apply_perm(p, x) for x in v.items))
    if t is list:
        return [apply_perm(p, x) for x in v]
    if t is tuple:
        return tuple(apply_perm(p, x) for x in v)
    if t is bool or t is str:
        return v
    raise SortMismatch(f"cannot permute {v!r}")


def random_perm(rng: random.Random, atoms: Iterable[int], spread: int = 12) -> Perm:
    """A random permutation moving the given atoms into ``range(spread)`` or beyond."""
    atoms = sorted(set(atoms))
    spread = max(spread, 2 * len(atoms))
    images = rng.sample(range(spread), len(atoms))
    return Perm(dict(zip(atoms, images)))


# ---------------------------------------------------------------- pattern functions

def _template_ok(t, s: Sort, npos: int) -> bool:
    if type(t) is Ref:
        return isinstance(s, AtomSort) and 1 <= t.pos <= npos
    if isinstance(s, AtomSort):
        return False
    if isinstance(s, UnitSort):
        return type(t) is Unit and t.name == s.name
    if isinstance(s, ProdSort):
        return type(t) is Pair and _template_ok(t.left, s.left, npos) and _template_ok(t.right, s.right, npos)
    if isinstance(s, SumSort):
        return type(t) is Inj and t.side in ("L", "R") and \
            _template_ok(t.value, s.left if t.side == "L" else s.right, npos)
    if isinstance(s, ListSort):
        return type(t) is ListV and all(_template_ok(x, s.elem, npos) for x in t.items)
    return False


def instantiate(t, atoms: Sequence[int]):
    """Fill a template with the leaf atoms of an argument."""
    ty = type(t)
    if ty is Ref:
        return Atom(atoms[t.pos - 1])
    if ty is Pair:
        return Pair(instantiate(t.left, atoms), instantiate(t.right, atoms))
    if ty is Inj:
        return Inj(t.side, instantiate(t.value, atoms))
    if ty is ListV:
        return ListV(tuple(instantiate(x, atoms) for x in t.items))
    return t


def _normalize_template(t, first_pos: list):
    ty = type(t)
    if ty is Ref:
        return Ref(first_pos[t.pos - 1])
    if ty is Pair:
        return Pair(_normalize_template(t.left, first_pos), _normalize_template(t.right, first_pos))
    if ty is Inj:
        return Inj(t.side, _normalize_template(t.value, first_pos))
    if ty is ListV:
        return ListV(tuple(_normalize_template(x, first_pos) for x in t.items))
    return t


def _first_positions(guard) -> list:
    labels = leaves(guard)
    first = {}
    for pos, a in enumerate(labels, start=1):
        first.setdefault(a, pos)
    return [first[a] for a in labels]


def template_from_value(out, arg):
    """Turn a concrete output into a template over the leaf positions of ``arg``."""
    first = {}
    for pos, a in enumerate(leaves(arg), start=1):
        first.setdefault(a, pos)

    def go(x):
        ty = type(x)
        if ty is Atom:
            if x.label not in first:
                raise NotEquivariant(f"output atom #{x.label} does not occur in {format_value(arg)}")
            return Ref(first[x.label])
        if ty is Pair:
            return Pair(go(x.left), go(x.right))
        if ty is Inj:
            return Inj(x.side, go(x.value))
        if ty is ListV:
            return ListV(tuple(go(y) for y in x.items))
        return x

    return go(out)


class PatternFn:
    """Equivariant function given by one output template per equality type."""

    __slots__ = ("domain", "codomain", "cases", "_table", "_hash")

    def __init__(self, domain: Sort, codomain: Sort, cases):
        reps = _orbit_reps(domain)
        table = {}
        for guard, template in cases:
            if isinstance(guard, EqualityType):
                guard = fill(guard.skeleton, _rgs_of_partition(guard))
            guard = canonical(guard)
            if not typecheck(guard, domain):
                raise SortMismatch(f"guard {format_value(guard)} is not of sort {format_sort(domain)}")
            if guard in table:
                raise SortMismatch(f"duplicate case for {format_value(guard)}")
            npos = len(leaves(guard))
            if not _template_ok(template, codomain, npos):
                raise SortMismatch(
                    f"template {format_value(template)} does not fit {format_sort(codomain)} "
                    f"for guard {format_value(guard)}")
            table[guard] = _normalize_template(template, _first_positions(guard))
        missing = [r for r in reps if r not in table]
        if missing:
            raise SortMismatch("no case for " + ", ".join(format_value(r) for r in missing))
        self.domain = domain
        self.codomain = codomain
        self.cases = tuple((r, table[r]) for r in reps)
        self._table = table
        self._hash = None

    @classmethod
    def from_function(cls, domain: Sort, codomain: Sort, fn: Callable) -> "PatternFn":
        """Tabulate ``fn`` on one representative per orbit of ``domain``.

        Only the representatives are ever passed to ``fn``; the table is then
        extended to every value by equivariance.
        """
        cases = []
        for rep in _orbit_reps(domain):
            out = fn(rep)
            if not typecheck(out, codomain):
                raise SortMismatch(f"{format_value(out)} is not of sort {format_sort(codomain)}")
            cases.append((rep, template_from_value(out, rep)))
        return cls(domain, codomain, cases)

    @classmethod
    def constant(cls, domain: Sort, codomain: Sort, value) -> "PatternFn":
        if leaves(value):
            raise NotEquivariant("constant functions must be atomless")
        return cls.from_function(domain, codomain, lambda _v: value)

    def __call__(self, v):
        ren: dict = {}
        atoms: list = []
        key = _canon(v, ren, atoms)
        t = self._table.get(key)
        if t is None:
            raise SortMismatch(f"{format_value(v)} is not of sort {format_sort(self.domain)}")
        return instantiate(t, atoms)

    def template_for(self, v):
        """The template selected by ``v`` (over ``v``'s leaf positions)."""
        t = self._table.get(canonical(v))
        if t is None:
            raise SortMismatch(f"{format_value(v)} is not of sort {format_sort(self.domain)}")
        return t

    def __eq__(self, other):
        return isinstance(other, PatternFn) and self.domain == other.domain and \
            self.codomain == other.codomain and self.cases == other.cases

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.domain, self.codomain, self.cases))
        return self._hash

    def __repr__(self):
        return f"PatternFn({format_sort(self.domain)} -> {format_sort(self.codomain)}, {len(self.cases)} cases)"


def _rgs_of_partition(et: EqualityType) -> list:
    n = sum(len(b) for b in et.partition)
    labels = [0] * n
    for j, block in enumerate(sorted(et.partition, key=min)):
        for pos in block:
            labels[pos - 1] = j
    return labels


def pattern_apply(f: PatternFn, v):
    return f(v)


# ---------------------------------------------------------------- equivariance oracle

@dataclass
class EquivarianceReport:
    passed: bool
    checked: int
    witness: tuple = None  # (value, perm) of the first violation


def random_value(s: Sort, rng: random.Random, pool: Sequence[int] = range(6), max_list: int = 3):
    if isinstance(s, AtomSort):
        return Atom(rng.choice(pool))
    if isinstance(s, UnitSort):
        return Unit(s.name)
    if isinstance(s, ProdSort):
        return Pair(random_value(s.left, rng, pool, max_list), random_value(s.right, rng, pool, max_list))
    if isinstance(s, SumSort):
        side = rng.choice("LR")
        return Inj(side, random_value(s.left if side == "L" else s.right, rng, pool, max_list))
    if isinstance(s, ListSort):
        n = rng.randint(0, max_list)
        return ListV(tuple(random_value(s.elem, rng, pool, max_list) for _ in range(n)))
    raise SortMismatch(f"unknown sort {s!r}")


def _outcome(f, v):
    try:
        return ("ok", f(v))
    except Exception as e:  # a raised error must also be equivariant
        return ("error", type(e).__name__)


def check_equivariance(f: Callable, domain: Sort, samples: int = 1000, seed: int = 0,
                       sampler: Callable = None) -> EquivarianceReport:
    """Randomized check of f(p.v) = p.f(v).

    ``sampler(rng)`` may replace the default value sampler (words, for instance).
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = random.Random(seed)
    draw = sampler or (lambda r: random_value(domain, r))
    for i in range(samples):
        v = draw(rng)
        p = random_perm(rng, least_support(v) + (0,))
        lhs = _outcome(f, apply_perm(p, v))
        kind, out = _outcome(f, v)
        rhs = (kind, apply_perm(p, out) if kind == "ok" else out)
        if lhs != rhs:
            return EquivarianceReport(False, i + 1, (v, p))
    return EquivarianceReport(True, samples)


# ---------------------------------------------------------------- text formats

_GLYPHS = {"⊥": "bot", "ε": "eps", "↓": "down", "|": "sep", "⊢": "lend", "⊣": "rend"}
_TOKEN = re.compile(r"\s*(?:(#\d+)|(\$\d+)|([A-Za-z0-9_]+)|([(),:\[\]*+])|(\S))")


def _tokens(text: str) -> list:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        tok = m.group(0).strip()
        if m.group(5) is not None:
            if tok in _GLYPHS:
                tok = _GLYPHS[tok]
            else:
                raise ParseError(f"unexpected character {tok!r} in {text!r}")
        out.append(tok)
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            want = expected or "more input"
            raise ParseError(f"expected {want} at token {self.i} of {self.text!r}, got {tok!r}")
        self.i += 1
        return tok

    def done(self):
        if self.i != len(self.toks):
            raise ParseError(f"trailing input {self.toks[self.i:]!r} in {self.text!r}")

    # values
    def value(self):
        tok = self.take()
        if tok.startswith("#"):
            return Atom(int(tok[1:]))
        if tok.startswith("$"):
            return Ref(int(tok[1:]))
        if tok in ("L", "R") and self.peek() == ":":
            self.take(":")
            return Inj(tok, self.value())
        if tok == "(":
            items = [self.value()]
            while self.peek() == ",":
                self.take(",")
                items.append(self.value())
            self.take(")")
            return tup(*items)
        if tok == "[":
            items = []
            if self.peek() != "]":
                items.append(self.value())
                while self.peek() == ",":
                    self.take(",")
                    items.append(self.value())
            self.take("]")
            return ListV(tuple(items))
        if re.fullmatch(r"[A-Za-z0-9_]+", tok):
            return Unit(tok)
        raise ParseError(f"unexpected token {tok!r} in {self.text!r}")

    # sorts
    def sort(self):
        left = self.factor()
        if self.peek() == "+":
            self.take("+")
            return SumSort(left, self.sort())
        return left

    def factor(self):
        left = self.base()
        if self.peek() == "*":
            self.take("*")
            return ProdSort(left, self.factor())
        return left

    def base(self):
        tok = self.take()
        if tok == "A":
            return ATOM
        if tok == "unit":
            self.take("(")
            name = self.take()
            self.take(")")
            return UnitSort(name)
        if tok == "list":
            self.take("(")
            s = self.sort()
            self.take(")")
            return ListSort(s)
        if tok == "(":
            s = self.sort()
            self.take(")")
            return s
        raise ParseError(f"unexpected token {tok!r} in sort {self.text!r}")


def parse_sort(text: str) -> Sort:
    p = _Parser(text)
    s = p.sort()
    p.done()
    return s


def format_sort(s: Sort) -> str:
    if isinstance(s, AtomSort):
        return "A"
    if isinstance(s, UnitSort):
        return f"unit({s.name})"
    if isinstance(s, ListSort):
        return f"list({format_sort(s.elem)})"
    if isinstance(s, ProdSort):
        left = format_sort(s.left)
        if isinstance(s.left, (ProdSort, SumSort)):
            left = f"({left})"
        right = format_sort(s.right)
        if isinstance(s.right, SumSort):
            right = f"({right})"
        return f"{left}*{right}"
    if isinstance(s, SumSort):
        left = format_sort(s.left)
        if isinstance(s.left, SumSort):
            left = f"({left})"
        return f"{left}+{format_sort(s.right)}"
    raise SortMismatch(f"not a sort: {s!r}")


def _coerce(raw, s: Sort):
    """Resolve bare sum literals against a sort; None when impossible."""
    t = type(raw)
    if isinstance(s, AtomSort):
        return raw if t in (Atom, Ref) else None
    if isinstance(s, UnitSort):
        return raw if t is Unit and raw.name == s.name else None
    if isinstance(s, ProdSort):
        if t is not Pair:
            return None
        a = _coerce(raw.left, s.left)
        b = _coerce(raw.right, s.right) if a is not None else None
        return Pair(a, b) if b is not None else None
    if isinstance(s, ListSort):
        if t is not ListV:
            return None
        items = [_coerce(x, s.elem) for x in raw.items]
        return None if any(x is None for x in items) else ListV(tuple(items))
    if isinstance(s, SumSort):
        if t is Inj:
            inner = _coerce(raw.value, s.left if raw.side == "L" else s.right)
            if inner is not None:
                return Inj(raw.side, inner)
        left = _coerce(raw, s.left)
        right = _coerce(raw, s.right)
        if left is not None and right is None:
            return Inj("L", left)
        if right is not None and left is None:
            return Inj("R", right)
        return None
    return None


def coerce(raw, s: Sort):
    out = _coerce(raw, s)
    if out is None:
        raise SortMismatch(f"{format_value(raw)} does not denote a unique value of sort {format_sort(s)}")
    return out


def parse_value(text: str, sort: Sort = None):
    """Parse a value literal; with a sort, bare sum members are resolved."""
    p = _Parser(text)
    v = p.value()
    p.done()
    return coerce(v, sort) if sort is not None else v


def parse_template(text: str, sort: Sort):
    return parse_value(text, sort)


def split_top_level(text: str) -> list:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [x.strip() for x in parts]


def parse_word(text: str, sort: Sort = None) -> list:
    """Comma-separated letters; the empty string is the empty word."""
    if not text.strip():
        return []
    return [parse_value(part, sort) for part in split_top_level(text)]


def _raw(v, s: Sort):
    """The literal tree that will be printed: injections elided where unambiguous."""
    if s is None:
        return v
    t = type(v)
    if t is Pair and isinstance(s, ProdSort):
        return Pair(_raw(v.left, s.left), _raw(v.right, s.right))
    if t is ListV and isinstance(s, ListSort):
        return ListV(tuple(_raw(x, s.elem) for x in v.items))
    if t is Inj and isinstance(s, SumSort):
        sub, other = (s.left, s.right) if v.side == "L" else (s.right, s.left)
        inner = _raw(v.value, sub)
        if _coerce(inner, other) is None:
            return inner
        return Inj(v.side, inner)
    return v


def _fmt(v) -> str:
    t = type(v)
    if t is Atom:
        return f"#{v.label}"
    if t is Ref:
        return f"${v.pos}"
    if t is Unit:
        return v.name
    if t is Inj:
        return f"{v.side}:{_fmt(v.value)}"
    if t is Pair:
        items = [v.left]
        rest = v.right
        while type(rest) is Pair:
            items.append(rest.left)
            rest = rest.right
        items.append(rest)
        return "(" + ",".join(_fmt(x) for x in items) + ")"
    if t is ListV:
        return "[" + ",".join(_fmt(x) for x in v.items) + "]"
    if v is None:
        return "bot"
    raise SortMismatch(f"not a value: {v!r}")


def format_value(v, sort: Sort = None) -> str:
    return _fmt(_raw(v, sort))


def format_word(w: Sequence, sort: Sort = None) -> str:
    return ",".join(format_value(x, sort) for x in w)
