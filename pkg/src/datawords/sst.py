"""Streaming string transducers with atoms.

A one-way single-use machine whose output actions are replaced by actions on
string registers: ``SetLetter`` overwrites a string register with one letter
built from atom registers, ``Concat`` puts the concatenation of two string
registers into a third.  In the default (copyless) mode every read resets the
register read, string registers to the empty string and atom registers to
undefined; the copyful mode skips all resets.

``post_compose_prime`` turns an SST for f into an SST for g after f, for each
prime g, by splitting every string register into a few registers that
summarise how g acts on its contents.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .atoms import (
    BOOL, BOT, LEND, MAYBE_ATOM, REND, YES, Atom, Inj, Pair, PatternFn, Ref, Sort, check_word,
    dimension, enumerate_orbit_reps, ext_letter, ext_sort, format_sort, format_value, leaves,
    template_from_value, tuple_sort, tuple_value,
)
from .errors import InvalidMachine, NotAccepting, SortMismatch, UnsupportedPrime
from .machines import (
    NOP, Accept, Accepted, Kind, LetterPred, Loop, MachineBuilder, MoveLeft, MoveRight, Nop, RegEq,
    Reject, Rejected, Store, referenced, rename_refs, store_leaf, uniform_fn,
)
from .primes import (
    AtomPropagation, FlipFlop, GroupTransducer, Hom, LpHom, MapDuplicate, MapReverse, ParWithId,
    Prime, sep_letter, unit_letter, FLIPFLOP_OUTPUT, _unit_name,
)


# ---------------------------------------------------------------- syntax

@dataclass(frozen=True)
class SetLetter:
    reg: str
    fn: PatternFn  # A^k -> output letter
    regs: tuple


@dataclass(frozen=True)
class Concat:
    dst: str
    a: str
    b: str


@dataclass(frozen=True)
class Move:
    """Atom register transfer dst := src (src becomes undefined in copyless mode)."""
    dst: str
    src: str


@dataclass(frozen=True)
class Letter:
    """An update item: one letter built from atom registers."""
    fn: PatternFn
    regs: tuple


@dataclass(frozen=True)
class Update:
    """Simultaneous assignment to string registers.

    ``assign`` is a tuple of (target, items) where items are string register
    names or ``Letter``s; every right-hand side reads the old contents.  The
    registers in ``clear`` become empty.  Sugar for ``SetLetter``/``Concat``
    sequences, see ``desugar``.
    """
    assign: tuple
    clear: tuple = ()


@dataclass(frozen=True)
class SSTMachine:
    input_sort: Sort
    output_sort: Sort
    states: tuple
    initial: str
    registers: tuple          # atom registers
    string_registers: tuple
    output_register: str
    delta: dict
    copyful: bool = False
    name: str = ""

    __hash__ = object.__hash__

    @property
    def single_use(self):
        return not self.copyful

    @property
    def kind(self):
        return Kind.ONE_WAY


# ---------------------------------------------------------------- validation

def validate_sst(m: SSTMachine) -> list:
    out = []
    states, regs, sregs = set(m.states), set(m.registers), set(m.string_registers)
    ext = ext_sort(m.input_sort)
    if len(states) != len(m.states):
        out.append("duplicate state names")
    if regs & sregs:
        out.append("atom and string registers share names")
    if m.initial not in states:
        out.append(f"initial state {m.initial!r} is not a state")
    if m.output_register not in sregs:
        out.append(f"output register {m.output_register!r} is not a string register")
    for q in m.states:
        if q not in m.delta:
            out.append(f"state {q!r} has no transition")
    for q, t in m.delta.items():
        where = f"state {q!r}"
        qu = t.question
        if isinstance(qu, LetterPred):
            if qu.fn.domain != ext or qu.fn.codomain != BOOL:
                out.append(f"{where}: letter predicate must map {format_sort(ext)} to {format_sort(BOOL)}")
        elif isinstance(qu, RegEq):
            if qu.r1 == qu.r2:
                out.append(f"{where}: registers must be distinct")
            out.extend(f"{where}: unknown register {r!r}" for r in (qu.r1, qu.r2) if r not in regs)
        else:
            out.append(f"{where}: questions must be letter predicates or register equality tests")
        for b in (t.yes, t.no):
            if b.state not in states:
                out.append(f"{where}: unknown target state {b.state!r}")
            out.extend(f"{where}: {msg}" for msg in _sst_action_violations(m, b.action))
    return out


def _letter_violations(m, fn, rs):
    out = []
    if len(set(rs)) != len(rs):
        out.append("registers must be distinct")
    out.extend(f"unknown register {r!r}" for r in rs if r not in m.registers)
    if fn.domain != tuple_sort(len(rs)) or fn.codomain != m.output_sort:
        out.append(f"letter function must map {format_sort(tuple_sort(len(rs)))} to {format_sort(m.output_sort)}")
    return out


def _sst_action_violations(m, a):
    regs, sregs = set(m.registers), set(m.string_registers)
    out = []
    if isinstance(a, Store):
        if a.reg not in regs:
            out.append(f"unknown register {a.reg!r}")
        if a.fn.domain != ext_sort(m.input_sort) or a.fn.codomain != MAYBE_ATOM:
            out.append("store function has the wrong sorts")
    elif isinstance(a, SetLetter):
        if a.reg not in sregs:
            out.append(f"unknown string register {a.reg!r}")
        out.extend(_letter_violations(m, a.fn, a.regs))
    elif isinstance(a, Concat):
        if a.a == a.b:
            out.append("concatenated registers must be distinct")
        out.extend(f"unknown string register {r!r}" for r in (a.dst, a.a, a.b) if r not in sregs)
    elif isinstance(a, Move):
        out.extend(f"unknown register {r!r}" for r in (a.dst, a.src) if r not in regs)
    elif isinstance(a, Update):
        reads = []
        for dst, items in a.assign:
            if dst not in sregs:
                out.append(f"unknown string register {dst!r}")
            for it in items:
                if isinstance(it, Letter):
                    out.extend(_letter_violations(m, it.fn, it.regs))
                    reads.extend(it.regs)
                elif it in sregs:
                    reads.append(it)
                else:
                    out.append(f"unknown string register {it!r}")
        if len({d for d, _ in a.assign}) != len(a.assign):
            out.append("update assigns a register twice")
        out.extend(f"unknown string register {r!r}" for r in a.clear if r not in sregs)
        if not m.copyful and len(set(reads)) != len(reads):
            out.append("copyless update reads a register twice")
    elif isinstance(a, MoveLeft):
        out.append("streaming transducers are one-way")
    elif not isinstance(a, (MoveRight, Accept, Reject, Nop)):
        out.append(f"action {a!r} is not allowed in streaming transducers")
    return out


def ensure_valid_sst(m):
    errs = validate_sst(m)
    if errs:
        raise InvalidMachine(errs)
    return m


# ---------------------------------------------------------------- interpreter

@dataclass(frozen=True)
class Node:
    """Register forest node: a letter leaf or a concatenation of two (possibly empty) subtrees."""
    id: int
    column: int
    letter: object = None
    children: tuple = ()


def _tape(w):
    return [LEND] + [ext_letter(a) for a in w] + [REND]


def eval_sst(m: SSTMachine, w: Sequence, *, forest: bool = False):
    """Run on ``w``; returns Accepted(output word), Rejected or Loop.

    With ``forest=True`` string registers hold register-forest nodes instead
    of words and an accepting run returns ``(Accepted, root, nodes)``.
    """
    if forest:
        m = desugar(m)
    check_word(w, m.input_sort)
    tape = _tape(w)
    aidx = {r: i for i, r in enumerate(m.registers)}
    val = [None] * len(m.registers)
    strs = {r: (None if forest else ()) for r in m.string_registers}
    nodes = []
    su = not m.copyful
    pos, state, steps = 0, m.initial, 0
    seen = set()

    def node(letter=None, children=()):
        n = Node(len(nodes), pos, letter, children)
        nodes.append(n)
        return n

    def cat(x, y):
        return node(children=(x, y)) if forest else x + y

    def letter_of(fn, rs):
        labels = [val[aidx[r]] for r in rs]
        if None in labels:
            return None
        if su:
            for r in rs:
                val[aidx[r]] = None
        x = fn(tuple_value(labels))
        return node(letter=x) if forest else (x,)

    def empty():
        return None if forest else ()

    while True:
        if pos < 0 or pos >= len(tape):
            return Rejected(steps, "head left the tape")
        key = (pos, state, tuple(val))
        if key in seen:
            return Loop(steps)
        seen.add(key)
        t = m.delta[state]
        qu = t.question
        letter = tape[pos]
        if isinstance(qu, LetterPred):
            ans = qu.fn(letter) == YES
        else:
            a, b = val[aidx[qu.r1]], val[aidx[qu.r2]]
            if a is None or b is None:
                return Rejected(steps, "undefined register")
            ans = a == b
            if su:
                val[aidx[qu.r1]] = val[aidx[qu.r2]] = None
        br = t.yes if ans else t.no
        act = br.action
        steps += 1
        state = br.state
        if isinstance(act, Store):
            x = act.fn(letter)
            val[aidx[act.reg]] = None if x == BOT else x.value.label
        elif isinstance(act, SetLetter):
            x = letter_of(act.fn, act.regs)
            if x is None:
                return Rejected(steps, "undefined register")
            strs[act.reg] = x
        elif isinstance(act, Concat):
            x = cat(strs[act.a], strs[act.b])
            if su:
                strs[act.a] = strs[act.b] = empty()
            strs[act.dst] = x
        elif isinstance(act, Update):
            new = {}
            for dst, items in act.assign:
                acc = ()
                for it in items:
                    if isinstance(it, Letter):
                        x = letter_of(it.fn, it.regs)
                        if x is None:
                            return Rejected(steps, "undefined register")
                    else:
                        x = strs[it]
                    acc = acc + x
                new[dst] = acc
            if su:
                for _dst, items in act.assign:
                    for it in items:
                        if not isinstance(it, Letter):
                            strs[it] = empty()
            for r in act.clear:
                strs[r] = empty()
            strs.update(new)
        elif isinstance(act, Move):
            v = val[aidx[act.src]]
            if su:
                val[aidx[act.src]] = None
            val[aidx[act.dst]] = v
        elif isinstance(act, MoveRight):
            pos += 1
        elif isinstance(act, Accept):
            out = strs[m.output_register]
            if forest:
                return Accepted(tuple(forest_word(out)), steps), out, nodes
            return Accepted(tuple(out), steps)
        elif isinstance(act, Reject):
            return Rejected(steps, "reject")
        elif isinstance(act, Nop):
            pass
        else:
            raise InvalidMachine([f"action {act!r} is not allowed in streaming transducers"])


def sst_output(m, w):
    r = eval_sst(m, w)
    return list(r.output) if isinstance(r, Accepted) else None


# ---------------------------------------------------------------- register forests

def forest_word(root) -> list:
    """Leaves of a register-forest node, depth-first and left to right."""
    out, stack = [], [root]
    while stack:
        n = stack.pop()
        if n is None:
            continue
        if n.letter is not None:
            out.append(n.letter)
        else:
            stack.extend(reversed(n.children))
    return out


@dataclass(frozen=True)
class RegisterForest:
    nodes: tuple
    root: Optional[int]

    @property
    def columns(self) -> dict:
        cols = {}
        for n in self.nodes:
            cols.setdefault(n.column, []).append(n.id)
        return cols

    def is_forest(self) -> bool:
        """No node is a child of two nodes."""
        seen = set()
        for n in self.nodes:
            for c in n.children:
                if c is None:
                    continue
                if c.id in seen:
                    return False
                seen.add(c.id)
        return True

    def word(self) -> list:
        return forest_word(self.nodes[self.root]) if self.root is not None else []

    def serialize(self) -> list:
        """Column-wise list of nodes; children refer to node ids."""
        cols = []
        for col, ids in sorted(self.columns.items()):
            row = []
            for i in ids:
                n = self.nodes[i]
                if n.letter is not None:
                    row.append({"id": i, "letter": format_value(n.letter)})
                else:
                    row.append({"id": i, "children": [c.id if c is not None else None for c in n.children]})
            cols.append({"column": col, "nodes": row})
        return cols


def register_forest(m: SSTMachine, w: Sequence) -> RegisterForest:
    r = eval_sst(m, w, forest=True)
    if not isinstance(r, tuple):
        raise NotAccepting(f"run ends with {r.tag}")
    _acc, root, nodes = r
    return RegisterForest(tuple(nodes), root.id if root is not None else None)


def adjacency_letter_check(output: Sequence, last_input_letter, k: int) -> bool:
    """Are at most 2k distinct letters adjacent to occurrences of ``last_input_letter``?"""
    near = set()
    out = list(output)
    for i, x in enumerate(out):
        if x == last_input_letter:
            if i > 0:
                near.add(out[i - 1])
            if i + 1 < len(out):
                near.add(out[i + 1])
    return len(near) <= 2 * k


# ---------------------------------------------------------------- desugaring

def desugar(m: SSTMachine) -> SSTMachine:
    """Replace ``Update`` actions by SetLetter/Concat sequences through auxiliary registers."""
    if not any(isinstance(b.action, Update) for t in m.delta.values() for b in (t.yes, t.no)):
        return m
    b = SSTBuilder(m.input_sort, m.output_sort, copyful=m.copyful, name=m.name)
    b.reg(*m.registers)
    b.sreg(*m.string_registers)
    for q in m.states:
        b.state(q)
    for q in m.states:
        t = m.delta[q]
        branches = []
        for br in (t.yes, t.no):
            if isinstance(br.action, Update):
                mid = b.state()
                b.seq(mid, b.expand_update(br.action), br.state)
                branches.append((mid, NOP))
            else:
                branches.append((br.state, br.action))
        b.on(q, t.question, branches[0], branches[1])
    return b.build(m.initial, m.output_register)


class SSTBuilder(MachineBuilder):
    EMPTY = ("_e0", "_e1")

    def __init__(self, input_sort, output_sort, copyful=False, name=""):
        super().__init__(Kind.ONE_WAY, input_sort, output_sort, not copyful, name)
        self.copyful = copyful
        self.string_registers = []

    def sreg(self, *names):
        for r in names:
            if r not in self.string_registers:
                self.string_registers.append(r)
        return names[0] if len(names) == 1 else names

    def set_letter(self, q, sreg, rep, out_value, nxt, key=None, prefix="x"):
        """Store the atoms ``out_value(rep)`` needs, then write that one letter to ``sreg``."""
        tpl = template_from_value(out_value(rep), rep)
        used = referenced(tpl)
        regs = tuple(f"{prefix}{i}" for i in range(1, len(used) + 1))
        if regs:
            self.reg(*regs)
        self.sreg(sreg)
        fn = uniform_fn(len(used), self.output_sort, rename_refs(tpl, {p: i for i, p in enumerate(used, 1)}))
        acts = [Store(r, store_leaf(self.input_sort, p, key)) for r, p in zip(regs, used)]
        acts.append(SetLetter(sreg, fn, regs))
        return self.seq(q, acts, nxt)

    def expand_update(self, u: Update) -> list:
        """Primitive actions with the effect of ``u``."""
        e0, e1 = self.sreg(*self.EMPTY)
        acts = []
        temps = []
        for i, (_dst, items) in enumerate(u.assign):
            tmp = self.sreg(f"_u{i}")
            temps.append(tmp)
            if not items:
                acts.append(Concat(tmp, e0, e1))
            for j, it in enumerate(items):
                if isinstance(it, Letter):
                    if j == 0:
                        acts.append(SetLetter(tmp, it.fn, it.regs))
                        continue
                    lt = self.sreg("_ul")
                    acts.append(SetLetter(lt, it.fn, it.regs))
                    src = lt
                else:
                    src = it
                acts.append(Concat(tmp, src, e0) if j == 0 else Concat(tmp, tmp, src))
        targets = {d for d, _ in u.assign}
        for r in u.clear:
            if r not in targets:
                acts.append(Concat(r, e0, e1))
        for (dst, _items), tmp in zip(u.assign, temps):
            acts.append(Concat(dst, tmp, e0))
        return acts

    def build(self, initial, output_register="A") -> SSTMachine:
        self.sreg(output_register)
        return SSTMachine(self.input_sort, self.output_sort, tuple(self.order), initial,
                          tuple(self.registers), tuple(self.string_registers), output_register,
                          dict(self.delta), self.copyful, self.name)


# ---------------------------------------------------------------- prime summaries
#
# A summary describes, for one prime g, how the contents s of a string register
# are kept: a tuple of part registers, a few atom registers, and a finite meta
# value living in the control state.  Items in assignments are
#   ("part", side, name)    part ``name`` of the register on ``side`` (B first, D second)
#   ("letter", value, srcs) an output letter whose atom with label i comes from srcs[i]
# where a source is ("pos", label) for the atoms of the letter being written, or
# ("atom", side, name) for an atom part.

def _letter(value, srcs):
    return ("letter", value, tuple(srcs))


def _label_letter(value):
    """Letter built from the atoms of the input letter (labels name them)."""
    labels = list(dict.fromkeys(leaves(value)))
    ren = {a: i for i, a in enumerate(labels)}
    return _letter(_relabel(value, ren), [("pos", a) for a in labels])


def _relabel(v, ren):
    t = type(v)
    if t is Atom:
        return Atom(ren[v.label])
    if t is Pair:
        return Pair(_relabel(v.left, ren), _relabel(v.right, ren))
    if t is Inj:
        return Inj(v.side, _relabel(v.value, ren))
    return v


def _P(side, name):
    return ("part", side, name)


class _Summary:
    parts: tuple = ()
    atom_parts: tuple = ()
    empty = None
    concat_letters = False  # does concat create letters?

    def set_letter(self, letter):
        raise NotImplementedError

    def concat(self, mb, md):
        raise NotImplementedError

    def finalize(self, mo):
        raise NotImplementedError


class _HomSummary(_Summary):
    parts = ("h",)

    def __init__(self, image):
        self.image = image  # letter -> list of letters

    def set_letter(self, letter):
        return None, {"h": [_label_letter(x) for x in self.image(letter)]}, {}

    def concat(self, mb, md):
        return None, {"h": [_P("B", "h"), _P("D", "h")]}, {}

    def finalize(self, mo):
        return [_P("O", "h")]


class _MapReverseSummary(_Summary):
    parts = ("1", "2", "3")
    empty = False  # contains a separator?

    def set_letter(self, letter):
        if letter == sep_letter():
            return True, {"2": [_label_letter(letter)]}, {}
        return False, {"1": [_label_letter(letter)]}, {}

    def concat(self, b, d):
        B, D = (lambda n: _P("B", n)), (lambda n: _P("D", n))
        if b and d:
            return True, {"1": [B("1")], "2": [B("2"), D("1"), B("3"), D("2")], "3": [D("3")]}, {}
        if b:
            return True, {"1": [B("1")], "2": [B("2")], "3": [D("1"), B("3")]}, {}
        if d:
            return True, {"1": [D("1"), B("1")], "2": [D("2")], "3": [D("3")]}, {}
        return False, {"1": [D("1"), B("1")]}, {}

    def finalize(self, mo):
        return [_P("O", "1"), _P("O", "2"), _P("O", "3")]


class _MapDuplicateSummary(_Summary):
    parts = ("1a", "1b", "2", "3a", "3b")
    empty = False

    def set_letter(self, letter):
        x = _label_letter(letter)
        if letter == sep_letter():
            return True, {"2": [x]}, {}
        return False, {"1a": [x], "1b": [x]}, {}

    def concat(self, b, d):
        B, D = (lambda n: _P("B", n)), (lambda n: _P("D", n))
        if b and d:
            return True, {"1a": [B("1a")], "1b": [B("1b")],
                          "2": [B("2"), B("3a"), D("1a"), B("3b"), D("1b"), D("2")],
                          "3a": [D("3a")], "3b": [D("3b")]}, {}
        if b:
            return True, {"1a": [B("1a")], "1b": [B("1b")], "2": [B("2")],
                          "3a": [B("3a"), D("1a")], "3b": [B("3b"), D("1b")]}, {}
        if d:
            return True, {"1a": [B("1a"), D("1a")], "1b": [B("1b"), D("1b")], "2": [D("2")],
                          "3a": [D("3a")], "3b": [D("3b")]}, {}
        return False, {"1a": [B("1a"), D("1a")], "1b": [B("1b"), D("1b")]}, {}

    def finalize(self, mo):
        return [_P("O", n) for n in self.parts]


class _GroupSummary(_Summary):
    """Part q holds the output when the incoming product is q; meta is the product of the contents."""

    def __init__(self, group, wrap):
        self.g = group
        self.wrap = wrap
        self.parts = tuple(f"q{i}" for i in range(group.order))
        self.empty = 0

    def set_letter(self, letter):
        x = self.g.index(self.wrap.inner(letter))
        return x, {f"q{q}": [self.wrap.item(letter, self.g.letter(self.g.mul(q, x)))]
                   for q in range(self.g.order)}, {}

    def concat(self, pb, pd):
        g = self.g
        return g.mul(pb, pd), {f"q{q}": [_P("B", f"q{q}"), _P("D", f"q{g.mul(q, pb)}")]
                               for q in range(g.order)}, {}

    def finalize(self, mo):
        return [_P("O", "q0")]


class _FlipFlopSummary(_Summary):
    """Parts a/b: output of the leading run of 1s and the first other letter, for incoming a/b;
    part r: the rest.  Meta: (only 1s so far, last letter other than 1)."""
    parts = ("a", "b", "r")
    empty = (True, None)

    def __init__(self, wrap):
        self.wrap = wrap

    def set_letter(self, letter):
        name = _unit_name(self.wrap.inner(letter))
        assign = {s: [self.wrap.item(letter, unit_letter(FLIPFLOP_OUTPUT, s))] for s in ("a", "b")}
        return ((True, None) if name == "1" else (False, name)), assign, {}

    def concat(self, mb, md):
        B, D = (lambda n: _P("B", n)), (lambda n: _P("D", n))
        if mb[0]:
            return md, {"a": [B("a"), D("a")], "b": [B("b"), D("b")], "r": [D("r")]}, {}
        last = mb[1]
        meta = (False, md[1] if not md[0] else last)
        return meta, {"a": [B("a")], "b": [B("b")], "r": [B("r"), D(last), D("r")]}, {}

    def finalize(self, mo):
        return [_P("O", "a"), _P("O", "r")]


class _AtomPropagationSummary(_Summary):
    """Meta (mode, pending, y): mode N has no down-arrow, I has its first down-arrow
    resolved inside, E has it waiting for the atom coming from the left.  Part 1 holds
    the output up to (excluding, in mode E) the first down-arrow, part 2 the rest;
    atom part p is the atom passed to the right, parts y* the paired data of the
    waiting down-arrow."""
    parts = ("1", "2")
    empty = ("N", False, None)
    concat_letters = True

    def __init__(self, wrap, ydim=0):
        self.wrap = wrap
        self.atom_parts = ("p",) + tuple(f"y{i}" for i in range(ydim))

    def set_letter(self, letter):
        x = self.wrap.inner(letter)
        bot = self.wrap.item(letter, BOT)
        if x.side == "L":
            return ("N", True, None), {"1": [bot]}, {"p": ("pos", x.value.label)}
        if x.value.side == "L":  # eps
            return ("N", False, None), {"1": [bot]}, {}
        y = self.wrap.y(letter)
        if y is None:
            return ("E", False, None), {}, {}
        labels = list(dict.fromkeys(leaves(y)))
        ytpl = _relabel(y, {a: i for i, a in enumerate(labels)})
        return ("E", False, ytpl), {}, {f"y{i}": ("pos", a) for i, a in enumerate(labels)}

    def _waiting(self, ytpl, atom_src):
        """The letter output at D's waiting down-arrow given the incoming atom source."""
        x = Inj("L", Atom(0)) if atom_src else BOT
        srcs = [atom_src] if atom_src else []
        if ytpl is None:
            return _letter(x, srcs)
        off = len(srcs)
        ny = len(set(leaves(ytpl)))
        ysh = _relabel(ytpl, {i: i + off for i in range(ny)})
        return _letter(Pair(x, ysh), srcs + [("atom", "D", f"y{i}") for i in range(ny)])

    def concat(self, mb, md):
        (b, pb, yb), (d, pd, yd) = mb, md
        B, D = (lambda n: _P("B", n)), (lambda n: _P("D", n))
        moves = {}

        def keep_y(side, ytpl):
            if ytpl is not None:
                for i in range(len(set(leaves(ytpl)))):
                    moves[f"y{i}"] = ("atom", side, f"y{i}")

        if d == "N":
            p = pd or pb
            if pd:
                moves["p"] = ("atom", "D", "p")
            elif pb:
                moves["p"] = ("atom", "B", "p")
            if b == "E":
                keep_y("B", yb)
                return ("E", p, yb), {"1": [B("1")], "2": [B("2"), D("1")]}, moves
            return (b, p, None), {"1": [B("1"), D("1")]}, moves
        if pd:
            moves["p"] = ("atom", "D", "p")
        if d == "I":
            if b == "E":
                keep_y("B", yb)
                return ("E", pd, yb), {"1": [B("1")], "2": [B("2"), D("1")]}, moves
            return ("I", pd, None), {"1": [B("1"), D("1")]}, moves
        # d == "E": D's waiting arrow receives B's outgoing atom
        if b == "N" and not pb:
            keep_y("D", yd)
            return ("E", pd, yd), {"1": [B("1"), D("1")], "2": [D("2")]}, moves
        w = self._waiting(yd, ("atom", "B", "p") if pb else None)
        if b == "E":
            keep_y("B", yb)
            return ("E", pd, yb), {"1": [B("1")], "2": [B("2"), D("1"), w, D("2")]}, moves
        return ("I", pd, None), {"1": [B("1"), D("1"), w, D("2")]}, moves

    def finalize(self, mo):
        mode, _p, ytpl = mo
        if mode != "E":
            return [_P("O", "1")]
        w = self._waiting(ytpl, None)
        w = ("letter", w[1], tuple(("atom", "O", s[2]) for s in w[2]))
        return [_P("O", "1"), w, _P("O", "2")]


class _Plain:
    """Letters are the prime's own letters."""

    @staticmethod
    def inner(letter):
        return letter

    @staticmethod
    def y(letter):
        return None

    @staticmethod
    def item(letter, out):
        return _label_letter(out)


class _Paired:
    """Letters are pairs (x, y); outputs are paired with the same y."""

    @staticmethod
    def inner(letter):
        return letter.left

    @staticmethod
    def y(letter):
        return letter.right

    @staticmethod
    def item(letter, out):
        return _label_letter(Pair(out, letter.right))


def _summary(g: Prime) -> _Summary:
    wrap = _Plain
    inner = g
    if isinstance(g, ParWithId):
        wrap, inner = _Paired, g.inner
        if isinstance(inner, LpHom):
            f = inner.fn
            return _HomSummary(lambda v: [Pair(f(v.left), v.right)])
        if isinstance(inner, ParWithId) or not isinstance(inner, (AtomPropagation, GroupTransducer, FlipFlop)):
            raise UnsupportedPrime(f"no post-composition for {type(inner).__name__} in parallel with the identity")
    if isinstance(inner, Hom):
        return _HomSummary(lambda v: list(inner.fn(v).items))
    if isinstance(inner, LpHom):
        return _HomSummary(lambda v: [inner.fn(v)])
    if isinstance(inner, MapReverse):
        return _MapReverseSummary()
    if isinstance(inner, MapDuplicate):
        return _MapDuplicateSummary()
    if isinstance(inner, GroupTransducer):
        return _GroupSummary(inner.group, wrap)
    if isinstance(inner, FlipFlop):
        return _FlipFlopSummary(wrap)
    if isinstance(inner, AtomPropagation):
        return _AtomPropagationSummary(wrap, dimension(g.id_sort) if wrap is _Paired else 0)
    raise UnsupportedPrime(f"no post-composition for {type(g).__name__}")


# ---------------------------------------------------------------- post-composition

def post_compose_prime(m: SSTMachine, g: Prime) -> SSTMachine:
    """An SST computing ``g`` after the function of ``m``."""
    if m.output_sort != g.domain:
        raise SortMismatch(f"cannot feed {format_sort(m.output_sort)} into {format_sort(g.domain)}")
    return _PostComposer(desugar(m), g).build()


def _uses(set_letter_result) -> dict:
    """How many times each input-letter label is read by the items and moves."""
    _meta, assign, moves = set_letter_result
    count = {}
    for items in assign.values():
        for it in items:
            for s in it[2]:
                if s[0] == "pos":
                    count[s[1]] = count.get(s[1], 0) + 1
    for s in moves.values():
        if s[0] == "pos":
            count[s[1]] = count.get(s[1], 0) + 1
    return count


class _PostComposer:
    def __init__(self, m: SSTMachine, g: Prime):
        self.m, self.g = m, g
        self.S = _summary(g)
        self.su = not m.copyful
        uses = max([max(_uses(self.S.set_letter(rep)).values(), default=0)
                    for rep in enumerate_orbit_reps(g.domain)] + [0])
        arity = max([len(b.action.regs) for t in m.delta.values() for b in (t.yes, t.no)
                     if isinstance(b.action, SetLetter)] + [1])
        self.ncopies = max(arity - 1, 2) + uses
        self.b = SSTBuilder(m.input_sort, g.codomain, copyful=m.copyful, name=f"{m.name};{type(g).__name__}")
        self.names = {}
        for r in m.registers:
            self.b.reg(*self.copies(r))
        for a in m.string_registers:
            self.b.sreg(*(self.part(a, p) for p in self.S.parts))
            if self.S.atom_parts:
                self.b.reg(*(self.apart(a, p) for p in self.S.atom_parts))
        self.b.sreg(*SSTBuilder.EMPTY)

    def copies(self, r):
        return [f"{r}#{i}" for i in range(self.ncopies)]

    @staticmethod
    def part(a, p):
        return f"{a}.{p}"

    @staticmethod
    def apart(a, p):
        return f"{a}.@{p}"

    def name(self, s):
        if s not in self.names:
            self.names[s] = self.b.state()
        return self.names[s]

    def build(self):
        m = self.m
        metas = tuple(self.S.empty for _ in m.string_registers)
        kb = frozenset(m.registers) if self.su else frozenset()
        start = (m.initial, kb, metas)
        todo, seen = [start], {start}
        self.reject = self.b.state("_reject")
        self.b.step(self.reject, Reject(), self.reject)
        while todo:
            s = todo.pop()
            for nxt in self.expand(s):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        out = desugar(self.b.build(self.name(start), "_out"))
        return ensure_valid_sst(out)

    def expand(self, s):
        q, kb, metas = s
        b = self.b
        t = self.m.delta[q]
        qu = t.question
        name = self.name(s)
        kb2 = kb
        if isinstance(qu, RegEq):
            if qu.r1 in kb or qu.r2 in kb:
                b.step(name, NOP, self.reject)
                return []
            if self.su:
                kb2 = kb | {qu.r1, qu.r2}
            qu = RegEq(self.copies(qu.r1)[0], self.copies(qu.r2)[0])
        nexts = []
        branches = []
        for br in (t.yes, t.no):
            mid = b.state()
            nexts.extend(self.action(mid, br.action, br.state, kb2, metas))
            branches.append((mid, NOP))
        b.on(name, qu, branches[0], branches[1])
        return nexts

    def goto(self, cur, acts, target):
        self.b.seq(cur, acts, self.name(target))
        return [target]

    def action(self, cur, a, nq, kb, metas):
        m = self.m
        sidx = {r: i for i, r in enumerate(m.string_registers)}
        if isinstance(a, Store):
            kb = kb - {a.reg}
            return self.goto(cur, [Store(c, a.fn) for c in self.copies(a.reg)], (nq, kb, metas))
        if isinstance(a, Move):
            acts = [Move(d, s) for d, s in zip(self.copies(a.dst), self.copies(a.src))]
            if self.su:
                kb = (kb - {a.dst}) | ({a.dst} if a.src in kb else set()) | {a.src}
            return self.goto(cur, acts, (nq, kb, metas))
        if isinstance(a, (MoveRight, Nop, Reject)):
            return self.goto(cur, [a], (nq, kb, metas))
        if isinstance(a, Accept):
            o = m.output_register
            items = self.S.finalize(metas[sidx[o]])
            acts, _ = self.assignment({"_out": items}, {"O": o}, {}, set())
            self.b.seq(cur, acts + [a], self.name((nq, kb, metas)))
            return [(nq, kb, metas)]
        if isinstance(a, Concat):
            meta, assign, moves = self.S.concat(metas[sidx[a.a]], metas[sidx[a.b]])
            sides = {"B": a.a, "D": a.b}
            targets = {self.part(a.dst, p): items for p, items in assign.items()}
            clear = {self.part(a.dst, p) for p in self.S.parts}
            if self.su:
                clear |= {self.part(x, p) for x in (a.a, a.b) for p in self.S.parts}
            acts, _ = self.assignment(targets, sides, {}, clear)
            acts += self.moves({self.apart(a.dst, p): src for p, src in moves.items()}, sides, {})
            metas = list(metas)
            if self.su:
                metas[sidx[a.a]] = metas[sidx[a.b]] = self.S.empty
            metas[sidx[a.dst]] = meta
            return self.goto(cur, acts, (nq, kb, tuple(metas)))
        if isinstance(a, SetLetter):
            if self.su and any(r in kb for r in a.regs):
                self.b.step(cur, NOP, self.reject)
                return []
            kb2 = kb | set(a.regs) if self.su else kb
            return self.classify(cur, a, nq, kb2, metas, sidx, [], {r: 0 for r in a.regs})
        raise InvalidMachine([f"action {a!r} is not allowed in streaming transducers"])

    def classify(self, cur, a, nq, kb, metas, sidx, answers, used):
        """Find the equality type of the registers read by a SetLetter, one test at a time."""
        regs = a.regs
        k = len(regs)
        parent = list(range(k))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x
        for i, j, same in answers:
            if same:
                parent[find(i)] = find(j)
        diff = {frozenset((find(i), find(j))) for i, j, same in answers if not same}
        for i in range(k):
            for j in range(i + 1, k):
                if find(i) == find(j) or frozenset((find(i), find(j))) in diff:
                    continue
                u2 = dict(used)
                c1, c2 = self.copies(regs[i])[u2[regs[i]]], self.copies(regs[j])[u2[regs[j]]]
                u2[regs[i]] += 1
                u2[regs[j]] += 1
                yes, no = self.b.state(), self.b.state()
                self.b.eq(cur, c1, c2, (yes, NOP), (no, NOP))
                return (self.classify(yes, a, nq, kb, metas, sidx, answers + [(i, j, True)], u2)
                        + self.classify(no, a, nq, kb, metas, sidx, answers + [(i, j, False)], u2))
        read = {regs[i] for i, j, _s in answers} | {regs[j] for i, j, _s in answers}
        acts = []
        used = dict(used)
        for r in regs:
            if r not in read:  # make an undefined register reject, as the original does
                c1, c2 = self.copies(r)[used[r]], self.copies(r)[used[r] + 1]
                used[r] += 2
                nxt = self.b.state()
                self.b.eq(cur, c1, c2, (nxt, NOP), (nxt, NOP))
                cur = nxt
        classes = {}
        labels = [classes.setdefault(find(i), len(classes)) for i in range(k)]
        letter = a.fn(tuple_value(labels))
        meta, assign, moves = self.S.set_letter(letter)
        # label -> a register holding it, with its next unused copy
        holder = {lab: regs[labels.index(lab)] for lab in set(labels)}
        pos = {"holder": holder, "used": used}
        targets = {self.part(a.reg, p): items for p, items in assign.items()}
        clear = {self.part(a.reg, p) for p in self.S.parts}
        acts, _ = self.assignment(targets, {}, pos, clear)
        acts += self.moves({self.apart(a.reg, p): src for p, src in moves.items()}, {}, pos)
        metas = list(metas)
        metas[sidx[a.reg]] = meta
        return self.goto(cur, acts, (nq, kb, tuple(metas)))

    def source(self, s, sides, pos):
        if s[0] == "pos":
            r = pos["holder"][s[1]]
            c = self.copies(r)[pos["used"][r]]
            pos["used"][r] += 1
            return c
        _tag, side, p = s
        return self.apart(sides[side], p)

    def assignment(self, targets, sides, pos, clear):
        assign = []
        for dst, items in targets.items():
            out = []
            for it in items:
                if it[0] == "part":
                    out.append(self.part(sides[it[1]], it[2]))
                else:
                    _tag, value, srcs = it
                    regs = tuple(self.source(s, sides, pos) for s in srcs)
                    tpl = _to_template(value)
                    out.append(Letter(uniform_fn(len(regs), self.g.codomain, tpl), regs))
            assign.append((dst, tuple(out)))
        for dst, _ in assign:
            self.b.sreg(dst)
        u = Update(tuple(assign), tuple(sorted(clear - set(targets))))
        return [u], None

    def moves(self, moves, sides, pos):
        if not moves:
            return []
        srcs = [(dst, self.source(s, sides, pos)) for dst, s in moves.items()]
        srcs = [(d, s) for d, s in srcs if d != s]
        temps = [self.b.reg(f"_m{i}") for i in range(len(srcs))]
        return [Move(t, s) for t, (_d, s) in zip(temps, srcs)] + \
            [Move(d, t) for t, (d, _s) in zip(temps, srcs)]


def _to_template(v):
    t = type(v)
    if t is Atom:
        return Ref(v.label + 1)
    if t is Pair:
        return Pair(_to_template(v.left), _to_template(v.right))
    if t is Inj:
        return Inj(v.side, _to_template(v.value))
    return v
