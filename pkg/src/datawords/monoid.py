"""Shepherdson profiles of two-way single-use machines.

A profile records, for every state q, entry side and register valuation, how
the machine leaves a word: it accepts, loops (rejection folds into looping),
or exits on some side in some state with some valuation.

Valuations are handled symbolically.  The entry valuation is a tuple of
variables x0, x1, ...; whenever the run compares a variable with something
whose relation to it is not yet known, the simulation branches.  The profile
for an entry (q, side) is then a finite list of leaves, each a set of
(dis)equality constraints on the variables together with the outcome.  Leaves
of one entry partition all valuations, so the concrete table entry for any
valuation is found by evaluating the leaves, and two profiles can be compared
exactly without enumerating valuations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from .atoms import LEND, REND, YES, Perm, ext_letter, format_value, ext_sort, least_support
from .errors import KindMismatch, MachineMismatch
from .machines import TwoWaySUT, _compile, _store_value


@dataclass(frozen=True, order=True)
class Var:
    """Entry value of register ``index``."""
    index: int

    def __repr__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class AcceptP:
    def describe(self):
        return {"result": "accept"}


@dataclass(frozen=True)
class LoopP:
    def describe(self):
        return {"result": "loop"}


@dataclass(frozen=True)
class ExitP:
    state: str
    val: tuple
    side: str  # "L" or "R"

    def describe(self):
        return {"result": "exit", "state": self.state, "side": self.side, "valuation": [_fmt(t) for t in self.val]}


@dataclass(frozen=True)
class Leaf:
    when: frozenset   # literals (t1, t2, equal?)
    result: object


# ---------------------------------------------------------------- constraints

def _is_var(t):
    return type(t) is Var


def _tkey(t):
    if t is None:
        return (0, 0)
    if _is_var(t):
        return (2, t.index)
    return (1, t)


def _lit(a, b, eq):
    """A literal, or True/False when it is decided by constants alone."""
    if not _is_var(a) and not _is_var(b):
        return (a == b) == eq
    if a == b:
        return eq
    if _tkey(b) < _tkey(a):
        a, b = b, a
    return (a, b, eq)


class _Solution:
    __slots__ = ("rep", "diseq")

    def __init__(self, rep, diseq):
        self.rep = rep
        self.diseq = diseq

    def find(self, t):
        return self.rep.get(t, t)

    def decide(self, a, b) -> Optional[bool]:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return True
        if not _is_var(ra) and not _is_var(rb):
            return False
        if (ra, rb) in self.diseq or (rb, ra) in self.diseq:
            return False
        return None


@lru_cache(maxsize=200000)
def _solve(lits: frozenset) -> Optional[_Solution]:
    parent = {}

    def find(t):
        while parent.get(t, t) != t:
            t = parent[t]
        return t

    for a, b, eq in lits:
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        if eq:
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            if not _is_var(ra) and not _is_var(rb):
                return None  # two distinct constants
            # keep a constant, or else the smallest variable, as the representative
            if not _is_var(rb) or (_is_var(ra) and rb.index < ra.index):
                ra, rb = rb, ra
            parent[rb] = ra
    rep = {t: find(t) for t in parent}
    diseq = set()
    for a, b, eq in lits:
        if not eq:
            ra, rb = rep[a], rep[b]
            if ra == rb:
                return None
            diseq.add((ra, rb))
    return _Solution(rep, frozenset(diseq))


def _add(lits, a, b, eq):
    """lits plus one literal; None when unsatisfiable."""
    lit = _lit(a, b, eq)
    if lit is True:
        return lits
    if lit is False:
        return None
    new = lits | {lit}
    return new if _solve(new) is not None else None


def _fmt(t):
    if t is None:
        return "bot"
    if _is_var(t):
        return repr(t)
    return f"#{t}"


# ---------------------------------------------------------------- symbolic simulation

def _branches(lits, a, b):
    """Split on a = b: list of (lits, answer)."""
    sol = _solve(lits)
    d = sol.decide(a, b)
    if d is not None:
        return [(lits, d)]
    out = []
    for ans in (True, False):
        nl = _add(lits, a, b, ans)
        if nl is not None:
            out.append((nl, ans))
    return out


def _nonbot(lits, regs_vals):
    """Split on whether every listed term is defined: (lits, all defined?)."""
    out = []
    work = [(lits, list(regs_vals))]
    while work:
        ls, rest = work.pop()
        if not rest:
            out.append((ls, True))
            continue
        t, tail = rest[0], rest[1:]
        for nl, is_bot in _branches(ls, t, None):
            if is_bot:
                out.append((nl, False))
            else:
                work.append((nl, tail))
    return out


def _normal(lits, val):
    sol = _solve(lits)
    return tuple(sol.find(t) for t in val)


def symbolic_run(m: TwoWaySUT, tape: Sequence, state: str, side: str, single_use=None) -> tuple:
    """Leaves for entering ``tape`` from ``side`` in ``state`` with a symbolic valuation."""
    comp = _compile(m)
    su = m.single_use if single_use is None else single_use
    n = len(tape)
    start = 0 if side == "L" else n - 1
    leaves = []
    work = [(start, state, tuple(Var(i) for i in range(len(m.registers))), frozenset(), frozenset())]
    while work:
        pos, q, val, lits, seen = work.pop()
        if pos < 0 or pos >= n:
            leaves.append(Leaf(lits, ExitP(q, val, "L" if pos < 0 else "R")))
            continue
        key = (pos, q, _normal(lits, val))
        if key in seen:
            leaves.append(Leaf(lits, LoopP()))
            continue
        seen = seen | {key}
        (qk, qa, qb), yes, no = comp[q]
        letter = tape[pos]
        if qk == 0:
            splits = [(lits, qa(letter) == YES)]
        else:
            splits = []
            for ls, ok in _nonbot(lits, (val[qa], val[qb])):
                if ok:
                    splits.extend(_branches(ls, val[qa], val[qb]))
                else:
                    leaves.append(Leaf(ls, LoopP()))
            if su:
                v2 = list(val)
                v2[qa] = v2[qb] = None
                val = tuple(v2)
        for ls, ans in splits:
            nxt, act = yes if ans else no
            work.extend(_after(pos, nxt, act, letter, val, ls, seen, su, leaves))
    return tuple(leaves)


def _after(pos, nxt, act, letter, val, lits, seen, su, leaves) -> list:
    """Successor configurations of an action (leaves are recorded directly)."""
    op = act[0]
    if op == "store":
        v = list(val)
        v[act[1]] = _store_value(act[2], letter)
        return [(pos, nxt, tuple(v), lits, seen)]
    if op in ("out", "outmove"):
        outs = []
        for ls, ok in _nonbot(lits, [val[i] for i in act[1]]):
            if not ok:
                leaves.append(Leaf(ls, LoopP()))
                continue
            v = list(val)
            if su:
                for i in act[1]:
                    v[i] = None
            outs.append((pos + 1 if op == "outmove" else pos, nxt, tuple(v), ls, seen))
        return outs
    if op == "left":
        return [(pos - 1, nxt, val, lits, seen)]
    if op == "right":
        return [(pos + 1, nxt, val, lits, seen)]
    if op == "accept":
        leaves.append(Leaf(lits, AcceptP()))
        return []
    if op == "reject":
        leaves.append(Leaf(lits, LoopP()))
        return []
    return [(pos, nxt, val, lits, seen)]


# ---------------------------------------------------------------- profiles

@dataclass(eq=False)
class ShepherdsonProfile:
    machine: TwoWaySUT
    word: tuple           # tape letters (endmarkers allowed)
    atoms: tuple          # atoms of the word, first-occurrence order
    source: object = field(repr=False, default=None)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return len(self.machine.registers)

    def entry(self, state: str, side: str) -> tuple:
        key = (state, side)
        if key not in self._cache:
            self._cache[key] = self.source(state, side)
        return self._cache[key]

    def keys(self):
        return [(q, s) for q in self.machine.states for s in ("L", "R")]

    def table(self) -> dict:
        return {key: self.entry(*key) for key in self.keys()}

    def lookup(self, state: str, val: Sequence, side: str):
        """Outcome for a concrete valuation (atom labels or None)."""
        val = tuple(val)
        for leaf in self.entry(state, side):
            if _holds(leaf.when, val):
                return _instantiate(leaf.result, val)
        raise AssertionError("profile leaves do not cover the valuation")

    def __eq__(self, other):
        return isinstance(other, ShepherdsonProfile) and profiles_equal(self, other)

    __hash__ = object.__hash__


def _subst_term(t, val):
    return val[t.index] if _is_var(t) else t


def _holds(lits, val) -> bool:
    ls = frozenset()
    for a, b, eq in lits:
        ls = _add(ls, _subst_term(a, val), _subst_term(b, val), eq)
        if ls is None:
            return False
    return True


def _instantiate(result, val):
    if isinstance(result, ExitP):
        return ExitP(result.state, tuple(_subst_term(t, val) for t in result.val), result.side)
    return result


def tape_of(m: TwoWaySUT, w: Sequence) -> tuple:
    """Tape letters of a word; endmarkers may already be present."""
    return tuple(a if a in (LEND, REND) else ext_letter(a) for a in w)


def profile_of(m: TwoWaySUT, w: Sequence) -> ShepherdsonProfile:
    tape = tape_of(m, w)
    return ShepherdsonProfile(m, tape, least_support(list(tape)),
                              lambda q, side: symbolic_run(m, tape, q, side))


def compose_profiles(pu: ShepherdsonProfile, pv: ShepherdsonProfile) -> ShepherdsonProfile:
    """Profile of the concatenated word, by simulating the crossings of the boundary."""
    if pu.machine is not pv.machine:
        raise MachineMismatch("profiles of different machines")
    m = pu.machine
    atoms = tuple(dict.fromkeys(pu.atoms + pv.atoms))
    return ShepherdsonProfile(m, pu.word + pv.word, atoms, lambda q, side: _crossings(pu, pv, q, side))


def _crossings(pu, pv, q, side):
    k = pu.k
    parts = {"u": pu, "v": pv}
    leaves = []
    work = [("u" if side == "L" else "v", q, side, tuple(Var(i) for i in range(k)), frozenset(), frozenset())]
    while work:
        part, st, sd, val, lits, seen = work.pop()
        key = (part, st, sd, _normal(lits, val))
        if key in seen:
            leaves.append(Leaf(lits, LoopP()))
            continue
        seen = seen | {key}
        for leaf in parts[part].entry(st, sd):
            ls = lits
            for a, b, eq in leaf.when:
                ls = _add(ls, _subst_term(a, val), _subst_term(b, val), eq)
                if ls is None:
                    break
            if ls is None:
                continue
            res = _instantiate(leaf.result, val)
            if not isinstance(res, ExitP):
                leaves.append(Leaf(ls, res))
            elif (part, res.side) in (("u", "L"), ("v", "R")):
                leaves.append(Leaf(ls, res))
            elif part == "u":
                work.append(("v", res.state, "L", res.val, ls, seen))
            else:
                work.append(("u", res.state, "R", res.val, ls, seen))
    return tuple(leaves)


def identity_profile(m: TwoWaySUT) -> ShepherdsonProfile:
    return profile_of(m, [])


def _normal_result(sol, r):
    if isinstance(r, ExitP):
        return ExitP(r.state, tuple(sol.find(t) for t in r.val), r.side)
    return r


def _entries_equal(l1, l2) -> bool:
    # leaves of one entry partition the valuations, so cells present on both
    # sides cover the same region and only the remaining cells need comparing
    s1, s2 = set(l1), set(l2)
    rest1 = [a for a in l1 if a not in s2]
    rest2 = [b for b in l2 if b not in s1]
    for a in rest1:
        for b in rest2:
            both = a.when | b.when
            sol = _solve(both)
            if sol is None:
                continue
            if _normal_result(sol, a.result) != _normal_result(sol, b.result):
                return False
    return True


def profiles_equal(p1: ShepherdsonProfile, p2: ShepherdsonProfile) -> bool:
    """Equality of the represented tables over all valuations."""
    if p1.machine is not p2.machine:
        return False
    return all(_entries_equal(p1.entry(*key), p2.entry(*key)) for key in p1.keys())


def differing_entry(p1, p2):
    """First (state, side) whose tables differ, or None."""
    for key in p1.keys():
        if not _entries_equal(p1.entry(*key), p2.entry(*key)):
            return key
    return None


# ---------------------------------------------------------------- permutations and supports

def _perm_term(p, t):
    return t if t is None or _is_var(t) else p(t)


def _perm_leaf(p, leaf):
    when = frozenset(_lit(_perm_term(p, a), _perm_term(p, b), eq) for a, b, eq in leaf.when)
    r = leaf.result
    if isinstance(r, ExitP):
        r = ExitP(r.state, tuple(_perm_term(p, t) for t in r.val), r.side)
    return Leaf(when, r)


def transport(profile: ShepherdsonProfile, p: Perm) -> ShepherdsonProfile:
    """The profile with every atom renamed by p."""
    from .atoms import apply_perm
    return ShepherdsonProfile(profile.machine, tuple(apply_perm(p, a) for a in profile.word),
                              tuple(p(a) for a in profile.atoms),
                              lambda q, side: tuple(_perm_leaf(p, l) for l in profile.entry(q, side)))


def minimal_support(profile: ShepherdsonProfile) -> tuple:
    """Word atoms a such that swapping a with a fresh atom changes the table."""
    fresh = max(profile.atoms, default=-1) + 1
    keep = []
    for a in profile.atoms:
        if not profiles_equal(profile, transport(profile, Perm({a: fresh, fresh: a}))):
            keep.append(a)
    return tuple(keep)


def support_bound(m: TwoWaySUT) -> int:
    """2 |Q| 2^(k+1)."""
    return 2 * len(m.states) * 2 ** (len(m.registers) + 1)


def accepts_via_profile(m: TwoWaySUT, w: Sequence) -> bool:
    if not m.kind.automaton:
        raise KindMismatch(f"{m.kind.value} machine is not an automaton")
    p = profile_of(m, [LEND] + list(w) + [REND])
    return p.lookup(m.initial, (None,) * len(m.registers), "L") == AcceptP()


# ---------------------------------------------------------------- concrete keys and export

def canonical_valuations(atoms: Sequence[int], k: int):
    """Each register gets bot, a word atom, or a fresh atom; fresh atoms are numbered by first use.

    Fresh atoms are represented by labels above every word atom.
    """
    base = max(atoms, default=-1) + 1

    def go(i, nfresh):
        if i == k:
            yield ()
            return
        for choice in itertools.chain([None], atoms, range(base, base + nfresh + 1)):
            nf = nfresh + 1 if choice is not None and choice == base + nfresh else nfresh
            for rest in go(i + 1, nf):
                yield (choice,) + rest
    yield from go(0, 0)


def concrete_table(profile: ShepherdsonProfile) -> dict:
    """Table over canonical keys; exponential in the number of registers."""
    out = {}
    for q, side in profile.keys():
        for val in canonical_valuations(profile.atoms, profile.k):
            out[(q, val, side)] = profile.lookup(q, val, side)
    return out


def profile_to_json(profile: ShepherdsonProfile) -> dict:
    m = profile.machine
    es = ext_sort(m.input_sort)
    rows = []
    for q, side in profile.keys():
        cases = []
        for leaf in sorted(profile.entry(q, side), key=lambda l: repr(sorted(l.when, key=repr))):
            when = [[_fmt(a), "=" if eq else "!=", _fmt(b)] for a, b, eq in
                    sorted(leaf.when, key=lambda t: (_tkey(t[0]), _tkey(t[1]), t[2]))]
            cases.append({"when": when, **leaf.result.describe()})
        rows.append({"state": q, "side": side, "cases": cases})
    return {
        "machine": m.name,
        "word": [format_value(a, es) for a in profile.word],
        "atoms": [f"#{a}" for a in profile.atoms],
        "registers": list(m.registers),
        "table": rows,
    }
