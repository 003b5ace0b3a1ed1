"""Prime functions, composition pipelines, and Mealy machines for them.

The length-preserving primes (homomorphisms, classical Mealy machines, atom
propagation, group transducers, the flip-flop and their products with the
identity) all have single-use Mealy machines; ``compose_mealy`` builds the
product machine of two Mealy machines.  The two-way primes (map reverse, map
duplicate, general homomorphisms, endmarker append) are evaluated directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .atoms import (
    ATOM, BOT, MAYBE_ATOM, Inj, ListSort, Pair, PatternFn, ProdSort, Sort, SumSort, Unit,
    UnitSort, canonical, check_word, dimension, either, enumerate_orbit_reps, ext_letter, ext_sort,
    format_sort, instantiate, leaves, template_from_value, tuple_sort, tuple_value, units,
)
from .errors import DatawordsError, LengthMismatch, NotAccepting, NotLengthPreserving, SortMismatch
from .machines import (
    NOP, Accepted, Kind, LetterPred, MachineBuilder, Nop, OutputMove, Store, TwoWaySUT,
    constant_output, ensure_valid, output_fn, run, stay_bound, store_leaf, untuple,
)

SEP_SORT = UnitSort("sep")
SEP = Unit("sep")

EPS = Unit("eps")
DOWN = Unit("down")
PROPAGATION_INPUT = either(ATOM, UnitSort("eps"), UnitSort("down"))
PROPAGATION_OUTPUT = MAYBE_ATOM
EPS_LETTER = Inj("R", Inj("L", EPS))
DOWN_LETTER = Inj("R", Inj("R", DOWN))

FLIPFLOP_INPUT = units("a", "b", "1")
FLIPFLOP_OUTPUT = units("a", "b")

REND_SORT = UnitSort("rend")


def separated(sigma: Sort) -> Sort:
    """The alphabet of a letter sort together with the separator."""
    return SumSort(sigma, SEP_SORT)


def sep_letter() -> Inj:
    return Inj("R", SEP)


def unit_letter(sort: Sort, name: str):
    """The value of a finite unit alphabet with the given letter name."""
    for rep in enumerate_orbit_reps(sort):
        if _unit_name(rep) == name:
            return rep
    raise SortMismatch(f"{name!r} is not a letter of {format_sort(sort)}")


def _unit_name(v):
    while isinstance(v, Inj):
        v = v.value
    return v.name if isinstance(v, Unit) else None


# ---------------------------------------------------------------- groups

@dataclass(frozen=True)
class FiniteGroup:
    """Multiplication table over element indices; element 0 is the identity."""
    table: tuple
    names: tuple = None

    def __post_init__(self):
        table = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", table)
        n = len(table)
        if self.names is None:
            object.__setattr__(self, "names", tuple(str(i) for i in range(n)))
        else:
            object.__setattr__(self, "names", tuple(self.names))
        if n == 0 or any(len(row) != n for row in table) or len(self.names) != n:
            raise DatawordsError("group table must be a non-empty square array with one name per element")
        rng = range(n)
        if any(not 0 <= table[a][b] < n for a in rng for b in rng):
            raise DatawordsError("group table entries out of range")
        if any(table[0][a] != a or table[a][0] != a for a in rng):
            raise DatawordsError("element 0 is not the identity")
        for a in rng:
            if not any(table[a][b] == 0 for b in rng):
                raise DatawordsError(f"element {a} has no inverse")
            for b in rng:
                for c in rng:
                    if table[table[a][b]][c] != table[a][table[b][c]]:
                        raise DatawordsError(f"not associative at ({a},{b},{c})")

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)))

    @property
    def order(self):
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @property
    def sort(self) -> Sort:
        return units(*self.names)

    def letter(self, i: int):
        return unit_letter(self.sort, self.names[i])

    def index(self, letter) -> int:
        return self.names.index(_unit_name(letter))


# ---------------------------------------------------------------- primes

class Prime:
    length_preserving = True

    @property
    def domain(self) -> Sort:
        raise NotImplementedError

    @property
    def codomain(self) -> Sort:
        raise NotImplementedError


@dataclass(frozen=True)
class LpHom(Prime):
    fn: PatternFn

    domain = property(lambda self: self.fn.domain)
    codomain = property(lambda self: self.fn.codomain)


@dataclass(frozen=True)
class Hom(Prime):
    fn: PatternFn  # letter -> list of letters
    length_preserving = False

    domain = property(lambda self: self.fn.domain)
    codomain = property(lambda self: self.fn.codomain.elem)

    def __post_init__(self):
        if not isinstance(self.fn.codomain, ListSort):
            raise SortMismatch("a homomorphism maps letters to lists of letters")


@dataclass(frozen=True)
class ClassicalMealy(Prime):
    machine: TwoWaySUT

    def __post_init__(self):
        if self.machine.kind is not Kind.MEALY:
            raise SortMismatch("classical Mealy prime needs a Mealy machine")
        if dimension(self.machine.input_sort) or dimension(self.machine.output_sort) or self.machine.registers:
            raise SortMismatch("classical Mealy machines are atomless")

    domain = property(lambda self: self.machine.input_sort)
    codomain = property(lambda self: self.machine.output_sort)


@dataclass(frozen=True)
class AtomPropagation(Prime):
    domain = PROPAGATION_INPUT
    codomain = PROPAGATION_OUTPUT


@dataclass(frozen=True)
class GroupTransducer(Prime):
    group: FiniteGroup

    domain = property(lambda self: self.group.sort)
    codomain = property(lambda self: self.group.sort)


@dataclass(frozen=True)
class FlipFlop(Prime):
    domain = FLIPFLOP_INPUT
    codomain = FLIPFLOP_OUTPUT


@dataclass(frozen=True)
class MapReverse(Prime):
    sigma: Sort = ATOM
    length_preserving = True  # reversing blocks keeps the length

    domain = property(lambda self: separated(self.sigma))
    codomain = property(lambda self: separated(self.sigma))


@dataclass(frozen=True)
class MapDuplicate(Prime):
    sigma: Sort = ATOM
    length_preserving = False

    domain = property(lambda self: separated(self.sigma))
    codomain = property(lambda self: separated(self.sigma))


@dataclass(frozen=True)
class AppendEndmark(Prime):
    sigma: Sort = ATOM
    length_preserving = False

    domain = property(lambda self: self.sigma)
    codomain = property(lambda self: SumSort(self.sigma, REND_SORT))


@dataclass(frozen=True)
class ParWithId(Prime):
    inner: Prime
    id_sort: Sort

    def __post_init__(self):
        if not self.inner.length_preserving:
            raise NotLengthPreserving("f|id needs a length-preserving f")

    domain = property(lambda self: ProdSort(self.inner.domain, self.id_sort))
    codomain = property(lambda self: ProdSort(self.inner.codomain, self.id_sort))


def identity(sort: Sort) -> LpHom:
    return LpHom(_identity_fn(sort))


@lru_cache(maxsize=None)
def _identity_fn(sort):
    return PatternFn.from_function(sort, sort, lambda v: v)


def _blocks(w, is_sep):
    """Split a word at separators: (blocks, separators between them)."""
    blocks, cur = [], []
    for a in w:
        if is_sep(a):
            blocks.append(cur)
            cur = []
        else:
            cur.append(a)
    blocks.append(cur)
    return blocks


def _map_blocks(w, fn):
    sep = sep_letter()
    out = []
    for i, b in enumerate(_blocks(w, lambda a: a == sep)):
        if i:
            out.append(sep)
        out.extend(fn(b))
    return out


def eval_prime(p: Prime, w: Sequence) -> list:
    w = list(w)
    check_word(w, p.domain)
    if isinstance(p, LpHom):
        return [p.fn(a) for a in w]
    if isinstance(p, Hom):
        return [x for a in w for x in p.fn(a).items]
    if isinstance(p, ClassicalMealy):
        r = run(p.machine, w)
        if not isinstance(r, Accepted):
            raise NotAccepting(f"Mealy machine run ends with {r.tag}")
        return list(r.output)
    if isinstance(p, AtomPropagation):
        out, last = [], None
        for a in w:
            if a.side == "L":
                last = a.value
                out.append(BOT)
            elif a == DOWN_LETTER and last is not None:
                out.append(Inj("L", last))
                last = None
            else:
                out.append(BOT)
        return out
    if isinstance(p, GroupTransducer):
        g = p.group
        out, acc = [], 0
        for a in w:
            acc = g.mul(acc, g.index(a))
            out.append(g.letter(acc))
        return out
    if isinstance(p, FlipFlop):
        out, state = [], "a"
        for a in w:
            out.append(unit_letter(FLIPFLOP_OUTPUT, state))
            name = _unit_name(a)
            if name != "1":
                state = name
        return out
    if isinstance(p, MapReverse):
        return _map_blocks(w, lambda b: b[::-1])
    if isinstance(p, MapDuplicate):
        return _map_blocks(w, lambda b: b + b)
    if isinstance(p, AppendEndmark):
        return [Inj("L", a) for a in w] + [Inj("R", Unit("rend"))]
    if isinstance(p, ParWithId):
        left = eval_prime(p.inner, [a.left for a in w])
        if len(left) != len(w):
            raise LengthMismatch("inner function changed the length")
        return [Pair(x, a.right) for x, a in zip(left, w)]
    raise SortMismatch(f"unknown prime {p!r}")


# ---------------------------------------------------------------- pipelines

class Pipeline:
    pass


@dataclass(frozen=True)
class PrimeStep(Pipeline):
    prime: Prime

    domain = property(lambda self: self.prime.domain)
    codomain = property(lambda self: self.prime.codomain)
    length_preserving = property(lambda self: self.prime.length_preserving)


@dataclass(frozen=True)
class Seq(Pipeline):
    first: Pipeline
    second: Pipeline

    def __post_init__(self):
        if self.first.codomain != self.second.domain:
            raise SortMismatch(f"cannot feed {format_sort(self.first.codomain)} "
                               f"into {format_sort(self.second.domain)}")

    domain = property(lambda self: self.first.domain)
    codomain = property(lambda self: self.second.codomain)
    length_preserving = property(lambda self: self.first.length_preserving and self.second.length_preserving)


@dataclass(frozen=True)
class Par(Pipeline):
    left: Pipeline
    right: Pipeline

    def __post_init__(self):
        if not (self.left.length_preserving and self.right.length_preserving):
            raise NotLengthPreserving("parallel composition needs length-preserving operands")

    domain = property(lambda self: ProdSort(self.left.domain, self.right.domain))
    codomain = property(lambda self: ProdSort(self.left.codomain, self.right.codomain))
    length_preserving = True


def as_pipeline(x) -> Pipeline:
    return x if isinstance(x, Pipeline) else PrimeStep(x)


def seq(*parts) -> Pipeline:
    parts = [as_pipeline(p) for p in parts]
    out = parts[0]
    for p in parts[1:]:
        out = Seq(out, p)
    return out


def par(a, b) -> Pipeline:
    return Par(as_pipeline(a), as_pipeline(b))


def eval_pipeline(pl, w: Sequence) -> list:
    pl = as_pipeline(pl)
    w = list(w)
    check_word(w, pl.domain)
    if isinstance(pl, PrimeStep):
        return eval_prime(pl.prime, w)
    if isinstance(pl, Seq):
        return eval_pipeline(pl.second, eval_pipeline(pl.first, w))
    if isinstance(pl, Par):
        a = eval_pipeline(pl.left, [x.left for x in w])
        b = eval_pipeline(pl.right, [x.right for x in w])
        if len(a) != len(w) or len(b) != len(w):
            raise LengthMismatch("parallel operand changed the length")
        return [Pair(x, y) for x, y in zip(a, b)]
    raise SortMismatch(f"unknown pipeline node {pl!r}")


def push_parallel(pl) -> Pipeline:
    """Rewrite every (f|g) into (f|id);(id|g)."""
    pl = as_pipeline(pl)
    if isinstance(pl, PrimeStep):
        return pl
    if isinstance(pl, Seq):
        return Seq(push_parallel(pl.first), push_parallel(pl.second))
    left, right = push_parallel(pl.left), push_parallel(pl.right)
    return Seq(Par(left, PrimeStep(identity(pl.right.domain))),
               Par(PrimeStep(identity(pl.left.codomain)), right))


# ---------------------------------------------------------------- Mealy machines for primes

def as_mealy(p: Prime) -> TwoWaySUT:
    """A single-use Mealy machine computing a length-preserving prime."""
    if isinstance(p, (MapReverse, MapDuplicate, Hom, AppendEndmark)):
        raise NotLengthPreserving(f"{type(p).__name__} has no Mealy machine")
    if isinstance(p, ClassicalMealy):
        return p.machine
    if isinstance(p, LpHom):
        return _lphom_mealy(p)
    if isinstance(p, AtomPropagation):
        return _propagation_mealy()
    if isinstance(p, GroupTransducer):
        return _group_mealy(p.group)
    if isinstance(p, FlipFlop):
        return _flipflop_mealy()
    if isinstance(p, ParWithId):
        return _par_with_id(as_mealy(p.inner), p.id_sort)
    raise NotLengthPreserving(f"no Mealy machine for {p!r}")


def _lphom_mealy(p):
    b = MachineBuilder(Kind.MEALY, p.domain, p.codomain, name="hom")
    reps = enumerate_orbit_reps(p.domain)
    targets = [b.state() for _ in reps]
    b.classify("q", reps, targets)
    for rep, t in zip(reps, targets):
        b.emit(t, rep, p.fn, "q", move=True)
    return ensure_valid(b.build("q"))


def _propagation_mealy():
    b = MachineBuilder(Kind.MEALY, PROPAGATION_INPUT, PROPAGATION_OUTPUT, name="atom-propagation")
    b.reg("r")
    reps = enumerate_orbit_reps(PROPAGATION_INPUT)  # atom, eps, down
    bot = constant_output(PROPAGATION_OUTPUT, BOT)
    give = output_fn(1, PROPAGATION_OUTPUT, lambda xs: Inj("L", xs[0]))
    for q in ("empty", "full"):
        t_atom, t_eps, t_down = b.state(), b.state(), b.state()
        b.classify(q, reps, [t_atom, t_eps, t_down])
        b.seq(t_atom, [Store("r", store_leaf(PROPAGATION_INPUT, 1)), OutputMove(bot, ())], "full")
        b.step(t_eps, OutputMove(bot, ()), q)
        if q == "full":
            b.step(t_down, OutputMove(give, ("r",)), "empty")
        else:
            b.step(t_down, OutputMove(bot, ()), "empty")
    return ensure_valid(b.build("empty"))


def _group_mealy(g: FiniteGroup):
    b = MachineBuilder(Kind.MEALY, g.sort, g.sort, name="group")
    reps = [g.letter(i) for i in range(g.order)]
    for q in range(g.order):
        targets = [b.state() for _ in reps]
        b.classify(g.names[q], reps, targets)
        for x, t in enumerate(targets):
            nq = g.mul(q, x)
            b.step(t, OutputMove(constant_output(g.sort, g.letter(nq)), ()), g.names[nq])
    return ensure_valid(b.build(g.names[0]))


def _flipflop_mealy():
    b = MachineBuilder(Kind.MEALY, FLIPFLOP_INPUT, FLIPFLOP_OUTPUT, name="flip-flop")
    reps = [unit_letter(FLIPFLOP_INPUT, n) for n in ("a", "b", "1")]
    for q in ("a", "b"):
        out = OutputMove(constant_output(FLIPFLOP_OUTPUT, unit_letter(FLIPFLOP_OUTPUT, q)), ())
        ta, tb, t1 = b.state(), b.state(), b.state()
        b.classify(q, reps, [ta, tb, t1])
        b.step(ta, out, "a")
        b.step(tb, out, "b")
        b.step(t1, out, q)
    return ensure_valid(b.build("a"))


def _lift_letter_fn(fn: PatternFn, insort: Sort, codomain: Sort) -> PatternFn:
    """Precompose a function on extended letters with the first projection."""
    def go(v):
        return fn(Inj("L", v.value.left) if v.side == "L" else v)
    return PatternFn.from_function(ext_sort(insort), codomain, go)


def _right_part(x):
    return x.right


def _par_with_id(m: TwoWaySUT, id_sort: Sort) -> TwoWaySUT:
    insort = ProdSort(m.input_sort, id_sort)
    outsort = ProdSort(m.output_sort, id_sort)
    b = MachineBuilder(Kind.MEALY, insort, outsort, single_use=m.single_use, name=f"{m.name}|id")
    b.reg(*m.registers)
    yreps = enumerate_orbit_reps(id_sort)
    ydim = dimension(id_sort)
    yregs = [f"_y{i}" for i in range(1, ydim + 1)]
    for q in m.states:
        b.state(q)  # reserve names before fresh ones are drawn
    for q in m.states:
        t = m.delta[q]
        qu = t.question
        if isinstance(qu, LetterPred):
            qu = LetterPred(_lift_letter_fn(qu.fn, insort, qu.fn.codomain))
        branches = []
        for br in (t.yes, t.no):
            a = br.action
            if isinstance(a, Store):
                branches.append((br.state, Store(a.reg, _lift_letter_fn(a.fn, insort, MAYBE_ATOM))))
            elif isinstance(a, OutputMove):
                k = len(a.regs)
                mid = b.state()
                targets = [b.state() for _ in yreps]
                b.classify(mid, yreps, targets, key=_right_part)
                for yrep, tgt in zip(yreps, targets):
                    n = len(leaves(yrep))
                    regs = tuple(yregs[:n])
                    b.reg(*regs) if regs else None
                    ytpl = template_from_value(yrep, yrep)
                    fn = _paired_output(a.fn, k, n, ytpl, outsort)
                    acts = [Store(r, store_leaf(insort, i, _right_part)) for i, r in enumerate(regs, 1)]
                    acts.append(OutputMove(fn, tuple(a.regs) + regs))
                    b.seq(tgt, acts, br.state)
                branches.append((mid, NOP))
            else:
                branches.append((br.state, a))
        b.on(q, qu, branches[0], branches[1])
    return ensure_valid(b.build(m.initial))


def _paired_output(fn, k, n, ytpl, outsort):
    def go(v):
        xs = untuple(v, k + n)
        left = fn(tuple_value([a.label for a in xs[:k]]))
        return Pair(left, instantiate(ytpl, [a.label for a in xs[k:]]))
    return PatternFn.from_function(tuple_sort(k + n), outsort, go)


# ---------------------------------------------------------------- Mealy composition

def _stores_per_position(m) -> float:
    """Most Store actions a Mealy machine can perform without advancing.

    Paths between head moves are followed through the transition graph; if
    that graph has a cycle the answer is infinite and the caller falls back
    to the stay-in-place bound.
    """
    memo, active = {}, set()

    def go(q):
        if q in memo:
            return memo[q]
        if q in active:
            return float("inf")
        active.add(q)
        best = 0
        t = m.delta[q]
        for br in (t.yes, t.no):
            a = br.action
            if isinstance(a, OutputMove):
                continue
            best = max(best, (1 if isinstance(a, Store) else 0) + go(br.state))
        active.discard(q)
        memo[q] = best
        return best
    return max(go(q) for q in m.states)


class _Names:
    def __init__(self):
        self.ids = {}

    def __call__(self, key):
        if key not in self.ids:
            self.ids[key] = f"c{len(self.ids)}"
        return self.ids[key]


def _free(used, n=1):
    out, i = [], 0
    while len(out) < n:
        if i not in used:
            out.append(i)
        i += 1
    return out


def compose_mealy(f: TwoWaySUT, g: TwoWaySUT) -> TwoWaySUT:
    """A single-use Mealy machine for ``g`` after ``f``.

    Each register of ``f`` is kept in several copies, enough to classify the
    letter ``f`` outputs and to serve every read ``g`` makes at one position
    (bounded by ``stay_bound(g)``).  Questions ``g`` asks about that letter are
    answered in the control state once its equality type is known, and the
    registers ``g`` loads from it are the copies themselves, renamed.
    """
    for m in (f, g):
        if m.kind is not Kind.MEALY:
            raise SortMismatch("compose_mealy needs Mealy machines")
        if not m.single_use:
            raise SortMismatch("compose_mealy needs single-use machines")
    if f.output_sort != g.input_sort:
        raise SortMismatch(f"cannot feed {format_sort(f.output_sort)} into {format_sort(g.input_sort)}")
    return _Composer(f, g).build()


class _Composer:
    def __init__(self, f, g):
        self.f, self.g = f, g
        self.fidx = {r: i for i, r in enumerate(f.registers)}
        self.gidx = {r: i for i, r in enumerate(g.registers)}
        kmax = max([len(a.regs) for t in f.delta.values() for a in (t.yes.action, t.no.action)
                    if isinstance(a, OutputMove)] + [1])
        self.copies = max(1, kmax - 1 + min(stay_bound(g), _stores_per_position(g)))
        self.in_reps = enumerate_orbit_reps(f.input_sort)
        self.b = MachineBuilder(Kind.MEALY, f.input_sort, g.output_sort, name=f"{g.name}.{f.name}")
        self.names = _Names()

    # abstract states:
    #   ("enter", fq, gq, falloc, galloc)
    #   ("f", fq, pending, rep, gq, falloc, galloc)
    #   ("cls", fq, gq, fn, groups, answers, falloc, galloc)
    #   ("g", fq, gq, pending, mrep, slots, falloc, galloc)
    # falloc: per f register a tuple of physical copies; galloc: per g register a physical or None

    def build(self):
        b = self.b
        start = ("enter", self.f.initial, self.g.initial,
                 tuple(() for _ in self.f.registers), tuple(None for _ in self.g.registers))
        todo, seen = [start], {start}
        while todo:
            s = todo.pop()
            for nxt in self.expand(s):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        b.reg("_dead0", "_dead1")
        m = b.build(self.names(start))
        return ensure_valid(m)

    def phys(self, i):
        r = f"p{i}"
        self.b.reg(r)
        return r

    def expand(self, s):
        kind = s[0]
        name = self.names(s)
        b = self.b
        if kind == "enter":
            _, fq, gq, fa, ga = s
            nxts = [("f", fq, None, rep, gq, fa, ga) for rep in self.in_reps]
            b.classify(name, self.in_reps, [self.names(x) for x in nxts])
            return nxts
        if kind == "f":
            res = self.run_f(s)
        elif kind == "cls":
            res = self.run_cls(s)
        else:
            res = self.run_g(s)
        tag = res[0]
        if tag == "question":
            _, r1, r2, yes, no = res
            b.eq(name, self.phys(r1), self.phys(r2), (self.names(yes), NOP), (self.names(no), NOP))
            return [yes, no]
        if tag == "actions":
            _, acts, nxt = res
            b.seq(name, acts, self.names(nxt))
            return [nxt]
        if tag == "goto":
            nxt = res[1]
            b.step(name, NOP, self.names(nxt))
            return [nxt]
        if tag == "reject":
            b.eq(name, "_dead0", "_dead1", (name, NOP), (name, NOP))
            return []
        b.step(name, NOP, name)  # loop
        return []

    @staticmethod
    def used(fa, ga, extra=()):
        u = {p for cs in fa for p in cs}
        u |= {p for p in ga if p is not None}
        for cs in extra:
            u |= set(cs)
        return u

    def run_f(self, s):
        _, fq, pending, rep, gq, fa, ga = s
        f = self.f
        letter = ext_letter(rep)
        seen = set()
        while True:
            if pending is not None and not isinstance(pending, Nop):
                a = pending
                if isinstance(a, Store):
                    i = self.fidx[a.reg]
                    x = a.fn(letter)
                    fa = list(fa)
                    fa[i] = ()
                    if x == BOT:
                        return ("goto", ("f", fq, None, rep, gq, tuple(fa), ga))
                    pos = leaves(rep).index(x.value.label) + 1
                    copies = tuple(_free(self.used(fa, ga), self.copies))
                    fa[i] = copies
                    acts = [Store(self.phys(c), store_leaf(f.input_sort, pos)) for c in copies]
                    return ("actions", acts, ("f", fq, None, rep, gq, tuple(fa), ga))
                if isinstance(a, OutputMove):
                    groups = []
                    for r in a.regs:
                        cs = fa[self.fidx[r]]
                        if not cs:
                            return ("reject",)
                        groups.append(cs)
                    fa = list(fa)
                    for r in a.regs:
                        fa[self.fidx[r]] = ()
                    return ("goto", ("cls", fq, gq, a.fn, tuple(groups), (), tuple(fa), ga))
                raise SortMismatch(f"unexpected action {a!r} in a Mealy machine")
            key = fq
            if key in seen:
                return ("loop",)
            seen.add(key)
            t = f.delta[fq]
            qu = t.question
            if isinstance(qu, LetterPred):
                br = t.yes if qu.fn(letter).side == "L" else t.no
                fq, pending = br.state, br.action
                continue
            i, j = self.fidx[qu.r1], self.fidx[qu.r2]
            if not fa[i] or not fa[j]:
                return ("reject",)
            p1, p2 = fa[i][0], fa[j][0]
            fa2 = list(fa)
            fa2[i] = fa2[j] = ()
            fa2 = tuple(fa2)
            yes = ("f", t.yes.state, t.yes.action, rep, gq, fa2, ga)
            no = ("f", t.no.state, t.no.action, rep, gq, fa2, ga)
            return ("question", p1, p2, yes, no)

    def run_cls(self, s):
        _, fq, gq, fn, groups, answers, fa, ga = s
        k = len(groups)
        # union-find over positions from the equal answers
        parent = list(range(k))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x
        for i, j, same in answers:
            if same:
                parent[find(i)] = find(j)
        diff = {(find(i), find(j)) for i, j, same in answers if not same}
        diff |= {(y, x) for x, y in diff}
        for i in range(k):
            for j in range(i + 1, k):
                ri, rj = find(i), find(j)
                if ri == rj or (ri, rj) in diff:
                    continue
                gi, gj = list(groups[i]), list(groups[j])
                p1, p2 = gi.pop(0), gj.pop(0)
                ng = list(groups)
                ng[i], ng[j] = tuple(gi), tuple(gj)
                ng = tuple(ng)
                yes = ("cls", fq, gq, fn, ng, answers + ((i, j, True),), fa, ga)
                no = ("cls", fq, gq, fn, ng, answers + ((i, j, False),), fa, ga)
                return ("question", p1, p2, yes, no)
        # equality type known: label each position by its class
        classes = {}
        labels = [classes.setdefault(find(i), len(classes)) for i in range(k)]
        letter = fn(tuple_value(labels))
        ren, order = {}, []
        for a in leaves(letter):
            if a not in ren:
                ren[a] = len(ren)
                order.append(a)
        mrep = canonical(letter)
        slots = []
        for cls in order:
            pool = []
            for i in range(k):
                if labels[i] == cls:
                    pool.extend(groups[i])
            slots.append(tuple(pool))
        return ("goto", ("g", fq, gq, None, mrep, tuple(slots), fa, ga))

    def run_g(self, s):
        _, fq, gq, pending, mrep, slots, fa, ga = s
        g = self.g
        letter = ext_letter(mrep)
        seen = set()
        slots = list(slots)
        ga = list(ga)
        slot_of = {}  # physical -> slot index, for loop detection
        for j, cs in enumerate(slots):
            for c in cs:
                slot_of[c] = j
        while True:
            if pending is not None and not isinstance(pending, Nop):
                a = pending
                pending = None
                if isinstance(a, Store):
                    i = self.gidx[a.reg]
                    x = a.fn(letter)
                    if x == BOT:
                        ga[i] = None
                    else:
                        j = x.value.label  # canonical letters number atoms by first occurrence
                        if not slots[j]:
                            return ("loop",)  # more reads than a non-looping run can make
                        ga[i] = slots[j][0]
                        slots[j] = slots[j][1:]
                    continue
                if isinstance(a, OutputMove):
                    regs = []
                    for r in a.regs:
                        p = ga[self.gidx[r]]
                        if p is None:
                            return ("reject",)
                        regs.append(p)
                    acts = [OutputMove(a.fn, tuple(self.phys(p) for p in regs))]
                    for r in a.regs:
                        ga[self.gidx[r]] = None
                    return ("actions", acts, ("enter", fq, gq, fa, tuple(ga)))
                raise SortMismatch(f"unexpected action {a!r} in a Mealy machine")
            key = (gq, tuple(("s", slot_of[p]) if p in slot_of else p for p in ga))
            if key in seen:
                return ("loop",)
            seen.add(key)
            t = g.delta[gq]
            qu = t.question
            if isinstance(qu, LetterPred):
                br = t.yes if qu.fn(letter).side == "L" else t.no
                gq, pending = br.state, br.action
                continue
            i, j = self.gidx[qu.r1], self.gidx[qu.r2]
            if ga[i] is None or ga[j] is None:
                return ("reject",)
            p1, p2 = ga[i], ga[j]
            ga2 = list(ga)
            ga2[i] = ga2[j] = None
            yes = ("g", fq, t.yes.state, t.yes.action, mrep, tuple(slots), fa, tuple(ga2))
            no = ("g", fq, t.no.state, t.no.action, mrep, tuple(slots), fa, tuple(ga2))
            return ("question", p1, p2, yes, no)
