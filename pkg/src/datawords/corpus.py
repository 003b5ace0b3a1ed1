"""Builders for the bundled example machines, pipelines, SSTs and expressions.

The JSON files under ``fixtures/`` are generated from these builders
(``python3 -m datawords.corpus``) and loaded back by the CLI and the tests.
``DATAWORDS_CORPUS`` points the loader at another directory.
"""
from __future__ import annotations

import itertools
import os
import sys
from dataclasses import replace
from functools import lru_cache
from pathlib import Path

from . import reglist, serialize
from .atoms import ATOM, Atom, Inj, ListSort, ListV, PatternFn, Ref, Unit, enumerate_orbit_reps
from .machines import (
    ACCEPT, LEFT, NOP, REJECT, RIGHT, Kind, MachineBuilder, OutputMove, Store, ensure_valid, is_rend,
    letter_test, store_atom, uniform_fn,
)
from .primes import (
    DOWN_LETTER, FLIPFLOP_INPUT, PROPAGATION_INPUT, PROPAGATION_OUTPUT, AtomPropagation, FiniteGroup,
    FlipFlop, GroupTransducer, Hom, LpHom, MapDuplicate, MapReverse, as_mealy, identity, sep_letter,
    separated, seq, unit_letter,
)
from .sst import Concat, SSTBuilder, ensure_valid_sst

SEPARATED = separated(ATOM)
Z2 = FiniteGroup.cyclic(2)
Z3 = FiniteGroup.cyclic(3)


def _is_sep(sigma):
    return letter_test(separated(sigma), lambda v: v.side == "L" and v.value == sep_letter())


# ---------------------------------------------------------------- streaming string transducers

def _letter_loop(b, read, on_letter, on_end):
    """Common skeleton: step past the left endmarker, then handle letters until the right one."""
    b.step("start", RIGHT, read)
    b.ask(read, is_rend(b.input_sort), (on_end, NOP), (on_letter, NOP))


def identity_sst(sort=SEPARATED, name="identity"):
    """A := A a for every letter a."""
    b = SSTBuilder(sort, sort, name=name)
    b.sreg("A", "T")
    _letter_loop(b, "read", "cls", "end")
    b.step("end", ACCEPT, "end")
    reps = enumerate_orbit_reps(sort)
    targets = [b.state() for _ in reps]
    b.classify("cls", reps, targets)
    for rep, t in zip(reps, targets):
        b.set_letter(t, "T", rep, lambda v: v, "cat")
    b.seq("cat", [Concat("A", "A", "T"), RIGHT], "read")
    return ensure_valid_sst(b.build("start", "A"))


def reverse_sst(sort=SEPARATED, name="reverse"):
    """A := a A for every letter a."""
    b = SSTBuilder(sort, sort, name=name)
    b.sreg("A", "T")
    _letter_loop(b, "read", "cls", "end")
    b.step("end", ACCEPT, "end")
    reps = enumerate_orbit_reps(sort)
    targets = [b.state() for _ in reps]
    b.classify("cls", reps, targets)
    for rep, t in zip(reps, targets):
        b.set_letter(t, "T", rep, lambda v: v, "cat")
    b.seq("cat", [Concat("A", "T", "A"), RIGHT], "read")
    return ensure_valid_sst(b.build("start", "A"))


def map_reverse_sst(sigma=ATOM):
    """A := a A on letters; B := B A | on separators; output B A."""
    sort = separated(sigma)
    b = SSTBuilder(sort, sort, name="map-reverse")
    b.sreg("A", "B", "T")
    _letter_loop(b, "read", "kind", "end")
    b.seq("end", [Concat("B", "B", "A"), ACCEPT], "end")
    sep = Inj("R", Unit("sep"))
    b.ask("kind", _is_sep(sigma), ("sep", NOP), ("cls", NOP))
    b.set_letter("sep", "T", sep, lambda v: v, "sep2")
    b.seq("sep2", [Concat("B", "B", "A"), Concat("B", "B", "T"), RIGHT], "read")
    reps = [r for r in enumerate_orbit_reps(sort) if r != sep]
    targets = [b.state() for _ in reps]
    b.classify("cls", reps, targets)
    for rep, t in zip(reps, targets):
        b.set_letter(t, "T", rep, lambda v: v, "cat")
    b.seq("cat", [Concat("A", "T", "A"), RIGHT], "read")
    return ensure_valid_sst(b.build("start", "B"))


def map_duplicate_sst(sigma=ATOM):
    """Two copies A1, A2 of the current block; B := B A1 A2 | on separators."""
    sort = separated(sigma)
    b = SSTBuilder(sort, sort, name="map-duplicate")
    b.sreg("A1", "A2", "B", "T")
    _letter_loop(b, "read", "kind", "end")
    b.seq("end", [Concat("B", "B", "A1"), Concat("B", "B", "A2"), ACCEPT], "end")
    sep = Inj("R", Unit("sep"))
    b.ask("kind", _is_sep(sigma), ("sep", NOP), ("cls", NOP))
    b.set_letter("sep", "T", sep, lambda v: v, "sep2")
    b.seq("sep2", [Concat("B", "B", "A1"), Concat("B", "B", "A2"), Concat("B", "B", "T"), RIGHT], "read")
    reps = [r for r in enumerate_orbit_reps(sort) if r != sep]
    targets = [b.state() for _ in reps]
    b.classify("cls", reps, targets)
    for rep, t in zip(reps, targets):
        mid = b.state()
        b.set_letter(t, "T", rep, lambda v: v, mid, prefix="x")
        mid2 = b.state()
        b.seq(mid, [Concat("A1", "A1", "T")], mid2)
        b.set_letter(mid2, "T", rep, lambda v: v, "cat2", prefix="y")
    b.seq("cat2", [Concat("A2", "A2", "T"), RIGHT], "read")
    return ensure_valid_sst(b.build("start", "B"))


def doubling_sst(copyful=True):
    """Writes the first letter, then doubles the output register at every further position."""
    b = SSTBuilder(ATOM, ATOM, copyful=copyful, name="doubling")
    b.sreg("A", "B", "E")
    b.step("start", RIGHT, "first")
    b.ask("first", is_rend(ATOM), ("end", NOP), ("one", NOP))
    b.set_letter("one", "A", Atom(0), lambda v: v, "mv")
    b.step("mv", RIGHT, "read")
    b.ask("read", is_rend(ATOM), ("end", NOP), ("dup", NOP))
    b.seq("dup", [Concat("B", "A", "E"), Concat("A", "A", "B"), RIGHT], "read")
    b.step("end", ACCEPT, "end")
    return ensure_valid_sst(b.build("start", "A"))


def last_letter_sst():
    """Writes only the last letter of a non-empty word."""
    b = SSTBuilder(ATOM, ATOM, name="last-letter")
    b.sreg("A")
    b.step("start", RIGHT, "read")
    b.ask("read", is_rend(ATOM), ("end", NOP), ("set", NOP))
    b.set_letter("set", "A", Atom(0), lambda v: v, "mv")
    b.step("mv", RIGHT, "read")
    b.step("end", ACCEPT, "end")
    return ensure_valid_sst(b.build("start", "A"))


# ---------------------------------------------------------------- two-way machines and automata

SEP_REP = Inj("R", Unit("sep"))
ATOM_REP = Inj("L", Atom(0))


def _is_atom_letter(sort=SEPARATED):
    return letter_test(sort, lambda v: v.side == "L" and v.value.side == "L")


def map_reverse_2w(sigma=ATOM):
    """Per block: run to its end, write it backwards, walk back to the end, copy the separator."""
    sort = separated(sigma)
    b = MachineBuilder(Kind.TWO_WAY, sort, sort, name="map-reverse-2w")
    is_atom = _is_atom_letter(sort)
    b.step("start", RIGHT, "scan")
    b.ask("scan", is_atom, ("scan_r", NOP), ("back", LEFT))
    b.step("scan_r", RIGHT, "scan")
    b.ask("back", is_atom, ("emit", NOP), ("fwd", RIGHT))
    _emit_each(b, "emit", sigma, "emit_l")
    b.step("emit_l", LEFT, "back")
    b.ask("fwd", is_atom, ("fwd_r", NOP), ("fwd_end", NOP))
    b.step("fwd_r", RIGHT, "fwd")
    b.ask("fwd_end", is_rend(sort), ("done", ACCEPT), ("sep", NOP))
    b.emit("sep", SEP_REP, lambda v: v, "sep_r")
    b.step("sep_r", RIGHT, "scan")
    b.step("done", ACCEPT, "done")
    return ensure_valid(b.build("start"))


def map_duplicate_2w(sigma=ATOM):
    """Per block: copy it, rewind, copy it again, then copy the separator."""
    sort = separated(sigma)
    b = MachineBuilder(Kind.TWO_WAY, sort, sort, name="map-duplicate-2w")
    is_atom = _is_atom_letter(sort)
    b.step("start", RIGHT, "first")
    b.ask("first", is_atom, ("emit1", NOP), ("rewind", LEFT))
    _emit_each(b, "emit1", sigma, "first_r")
    b.step("first_r", RIGHT, "first")
    b.ask("rewind", is_atom, ("rewind_l", NOP), ("second", RIGHT))
    b.step("rewind_l", LEFT, "rewind")
    b.ask("second", is_atom, ("emit2", NOP), ("end", NOP))
    _emit_each(b, "emit2", sigma, "second_r")
    b.step("second_r", RIGHT, "second")
    b.ask("end", is_rend(sort), ("done", ACCEPT), ("sep", NOP))
    b.emit("sep", SEP_REP, lambda v: v, "sep_r")
    b.step("sep_r", RIGHT, "first")
    b.step("done", ACCEPT, "done")
    return ensure_valid(b.build("start"))


def _emit_each(b, q, sigma, nxt):
    """Copy the current non-separator letter to the output."""
    reps = [Inj("L", r) for r in enumerate_orbit_reps(sigma)]
    if len(reps) == 1:
        b.emit(q, reps[0], lambda v: v, nxt)
        return
    targets = [b.state() for _ in reps]
    b.classify(q, reps, targets)
    for rep, t in zip(reps, targets):
        b.emit(t, rep, lambda v: v, nxt)


def first_equals_last():
    """Two-way automaton: the word is non-empty and its first and last letters agree."""
    b = MachineBuilder(Kind.AUTOMATON_2W, ATOM, ATOM, name="first-equals-last")
    b.reg("F", "E")
    b.step("start", RIGHT, "first")
    b.ask("first", is_rend(ATOM), ("no", REJECT), ("keep", NOP))
    b.seq("keep", [Store("F", store_atom(ATOM)), RIGHT], "run")
    b.ask("run", is_rend(ATOM), ("last", LEFT), ("run", RIGHT))
    b.step("last", Store("E", store_atom(ATOM)), "cmp")
    b.eq("cmp", "F", "E", ("yes", ACCEPT), ("no", REJECT))
    b.step("yes", ACCEPT, "yes")
    b.step("no", REJECT, "no")
    return ensure_valid(b.build("start"))


def first_letter_again():
    """Multiple-use one-way automaton: the first letter appears again later."""
    b = MachineBuilder(Kind.AUTOMATON_1W, ATOM, ATOM, single_use=False, name="first-letter-again")
    b.reg("F", "D")
    b.step("start", RIGHT, "first")
    b.ask("first", is_rend(ATOM), ("no", REJECT), ("keep", NOP))
    b.seq("keep", [Store("F", store_atom(ATOM)), RIGHT], "read")
    b.ask("read", is_rend(ATOM), ("no", REJECT), ("load", NOP))
    b.step("load", Store("D", store_atom(ATOM)), "cmp")
    b.eq("cmp", "F", "D", ("yes", ACCEPT), ("read", RIGHT))
    b.step("yes", ACCEPT, "yes")
    b.step("no", REJECT, "no")
    return ensure_valid(b.build("start"))


def three_letters():
    """Single-use one-way automaton for words with at most three distinct letters.

    Three register slots X, Y, Z with three copies each.  The state orders the
    slots as (last letter, the one before, the oldest); the last letter keeps
    three live copies, the next one two and the oldest one.  A new letter is
    compared with the slots in that order, and every failed comparison costs
    the compared slot one copy, which the invariant always has to spare.  The
    slot matching the letter is reloaded from the tape.
    """
    b = MachineBuilder(Kind.AUTOMATON_1W, ATOM, ATOM, name="three-letters")
    slots = "XYZ"
    for s in slots:
        b.reg(f"{s}1", f"{s}2", f"{s}3")
    b.reg("D")
    def load(slot):
        return [Store(f"{slot}{i}", store_atom(ATOM)) for i in (1, 2, 3)]

    take = Store("D", store_atom(ATOM))

    def name(order):
        return "read_" + ("".join(order) or "0")

    b.step("start", RIGHT, name(()))
    b.step("done", ACCEPT, "done")
    orders = [()] + [p for n in (1, 2, 3) for p in itertools.permutations(slots, n)]
    for order in orders:
        q = name(order)
        tag = "".join(order) or "0"
        b.ask(q, is_rend(ATOM), ("done", NOP), (f"new_{tag}", NOP))
        if not order:
            b.seq(f"new_{tag}", load("X") + [RIGHT], name(("X",)))
            continue
        l = order[0]
        free = [s for s in slots if s not in order]
        # compare with the last letter
        b.step(f"new_{tag}", take, f"cl_{tag}")
        b.eq(f"cl_{tag}", "D", f"{l}3", (f"rl_{tag}", NOP), (f"s_{tag}", NOP))
        b.seq(f"rl_{tag}", [Store(f"{l}3", store_atom(ATOM)), RIGHT], q)
        if len(order) == 1:
            b.seq(f"s_{tag}", load(free[0]) + [RIGHT], name((free[0], l)))
            continue
        s = order[1]
        b.step(f"s_{tag}", take, f"cs_{tag}")
        b.eq(f"cs_{tag}", "D", f"{s}2", (f"rs_{tag}", NOP), (f"t_{tag}", NOP))
        b.seq(f"rs_{tag}", load(s) + [RIGHT], name((s, l) + order[2:]))
        if len(order) == 2:
            b.seq(f"t_{tag}", load(free[0]) + [RIGHT], name((free[0], l, s)))
            continue
        t = order[2]
        b.step(f"t_{tag}", take, f"ct_{tag}")
        b.eq(f"ct_{tag}", "D", f"{t}1", (f"rt_{tag}", NOP), ("reject", REJECT))
        b.seq(f"rt_{tag}", load(t) + [RIGHT], name((t, l, s)))
    b.step("reject", REJECT, "reject")
    m = b.build("start")
    return ensure_valid(_prune(m))


def _prune(m):
    """Drop unreachable states."""
    seen, todo = {m.initial}, [m.initial]
    while todo:
        t = m.delta.get(todo.pop())
        if t is None:
            continue
        for br in (t.yes, t.no):
            if br.state not in seen:
                seen.add(br.state)
                todo.append(br.state)
    states = tuple(q for q in m.states if q in seen)
    return replace(m, states=states, delta={q: m.delta[q] for q in states if q in m.delta})


# ---------------------------------------------------------------- Mealy machines and pipelines

def _lphom(dom, cod, f, name=""):
    return LpHom(PatternFn.from_function(dom, cod, f))


def mark_present():
    """Maybe-atom to flip-flop letters: an atom sets ``a``, bottom leaves the latch alone."""
    return _lphom(PROPAGATION_OUTPUT, FLIPFLOP_INPUT,
                  lambda v: unit_letter(FLIPFLOP_INPUT, "a" if v.side == "L" else "1"))


def bot_to_down():
    """Maybe-atom back to propagation letters: atoms stay, bottom becomes a down arrow."""
    return _lphom(PROPAGATION_OUTPUT, PROPAGATION_INPUT, lambda v: v if v.side == "L" else DOWN_LETTER)


def double_letters():
    """Homomorphism writing every atom twice and dropping separators."""
    return Hom(PatternFn.from_function(SEPARATED, ListSort(SEPARATED),
                                       lambda v: ListV((v, v)) if v.side == "L" else ListV(())))


def bad_mealy():
    """A Mealy machine that moves its head left; it must fail validation."""
    b = MachineBuilder(Kind.MEALY, ATOM, ATOM, name="bad-mealy")
    b.reg("r")
    b.seq("q", [Store("r", store_atom(ATOM)), OutputMove(uniform_fn(1, ATOM, Ref(1)), ("r",)), LEFT], "q")
    return b.build("q")


def compose_pairs():
    """Pairs of length-preserving primes whose Mealy machines are composed in the tests."""
    g3 = GroupTransducer(Z3)
    return {
        "z3-z3": (g3, g3),
        "propagation-mark": (AtomPropagation(), mark_present()),
        "propagation-relabel": (AtomPropagation(), bot_to_down()),
    }


def post_compose_cases():
    """(SST, prime) pairs: every supported prime against two input SSTs."""
    out = []
    for g in (MapReverse(), MapDuplicate(), identity(SEPARATED), double_letters()):
        out += [(identity_sst(), g), (map_reverse_sst(), g)]
    out += [(identity_sst(PROPAGATION_INPUT), AtomPropagation()), (reverse_sst(PROPAGATION_INPUT), AtomPropagation())]
    out += [(identity_sst(Z2.sort), GroupTransducer(Z2)), (reverse_sst(Z2.sort), GroupTransducer(Z2))]
    out += [(identity_sst(FLIPFLOP_INPUT), FlipFlop()), (reverse_sst(FLIPFLOP_INPUT), FlipFlop())]
    return out


# ---------------------------------------------------------------- registry

# name -> (file name, builder, role); role is one of machine, mealy, sst, pipeline, rlf
FIXTURES = {
    "atomprop": ("atomprop.json", lambda: as_mealy(AtomPropagation()), "mealy"),
    "group-z2": ("group_z2.json", lambda: as_mealy(GroupTransducer(Z2)), "mealy"),
    "group-z3": ("group_z3.json", lambda: as_mealy(GroupTransducer(Z3)), "mealy"),
    "flipflop": ("flipflop.json", lambda: as_mealy(FlipFlop()), "mealy"),
    "mark-present": ("mark_present.json", lambda: as_mealy(mark_present()), "mealy"),
    "bad-mealy": ("bad_mealy.json", bad_mealy, "mealy"),
    "mapreverse-2w": ("mapreverse.2w.json", map_reverse_2w, "machine"),
    "mapduplicate-2w": ("mapduplicate.2w.json", map_duplicate_2w, "machine"),
    "first-equals-last": ("first_equals_last.json", first_equals_last, "machine"),
    "three-letters": ("three_letters.json", three_letters, "machine"),
    "first-letter-again": ("first_letter_again.json", first_letter_again, "machine"),
    "mapreverse-sst": ("mapreverse.sst.json", map_reverse_sst, "sst"),
    "mapduplicate-sst": ("mapduplicate.sst.json", map_duplicate_sst, "sst"),
    "identity-sst": ("identity.sst.json", identity_sst, "sst"),
    "reverse-sst": ("reverse.sst.json", reverse_sst, "sst"),
    "last-letter-sst": ("last_letter.sst.json", last_letter_sst, "sst"),
    "doubling-sst": ("doubling.sst.json", doubling_sst, "sst"),
    "mapreverse-prime": ("mapreverse.prime.json", lambda: seq(MapReverse()), "pipeline"),
    "mapduplicate-prime": ("mapduplicate.prime.json", lambda: seq(MapDuplicate()), "pipeline"),
    "propagation-pipeline": ("propagation.pipeline.json",
                             lambda: seq(AtomPropagation(), mark_present(), FlipFlop()), "pipeline"),
    "mapreverse-rlf": ("mapreverse.rlf.json", lambda: reglist.derived("mapReverse"), "rlf"),
    "mapduplicate-rlf": ("mapduplicate.rlf.json", lambda: reglist.derived("mapDuplicate"), "rlf"),
    "windows-rlf": ("windows.rlf.json", lambda: reglist.derived("windows"), "rlf"),
    "three-distinct-rlf": ("three_distinct.rlf.json", reglist.at_most_three_distinct, "rlf"),
}

# fixtures that deliberately break a rule
INVALID = {"bad-mealy"}
# fixtures that read a register twice without overwriting it
MULTIPLE_USE = {"first-letter-again"}
# SSTs that copy string registers
COPYFUL = {"doubling-sst"}


def corpus_dir() -> Path:
    env = os.environ.get("DATAWORDS_CORPUS")
    return Path(env) if env else Path(__file__).with_name("fixtures")


def fixture_path(name: str) -> Path:
    return corpus_dir() / FIXTURES[name][0]


def load_fixture(name: str):
    """Load a bundled fixture; models are immutable, so loads are cached per file."""
    return _load(str(fixture_path(name)))


@lru_cache(maxsize=None)
def _load(path):
    return serialize.load(path)


def build_fixture(name: str):
    return FIXTURES[name][1]()


def names(role=None, valid_only=True) -> list:
    return [n for n, (_f, _b, r) in FIXTURES.items()
            if (role is None or r == role) and not (valid_only and n in INVALID)]


def write_corpus(directory=None) -> list:
    d = Path(directory) if directory else Path(__file__).with_name("fixtures")
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (fname, build, _role) in FIXTURES.items():
        serialize.dump(build(), d / fname, name=name)
        written.append(fname)
    return written


if __name__ == "__main__":
    for f in write_corpus(*sys.argv[1:2]):
        print(f)
