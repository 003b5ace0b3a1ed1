"""Two-way single-use transducers and their special cases.

A machine has finitely many control states and atom registers.  In each
state it asks one question (a predicate on the letter under the head, or an
equality test between two registers) and, depending on the answer, performs
one action and moves to the next state.  Under the single-use discipline a
register becomes undefined as soon as it is read.

Kinds: ``TwoWay`` and ``OneWay`` transducers, two-way and one-way automata,
and ``Mealy`` machines (no endmarkers, output action advances the head).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .atoms import (
    BOOL, BOT, LEND, MAYBE_ATOM, NO, REND, YES, Atom, Inj, ListV, PatternFn, Pair, Ref, Sort,
    canonical, check_word, enumerate_orbit_reps, template_from_value, dimension, ext_letter, ext_sort, format_sort, format_value, leaves,
    tuple_sort, tuple_value,
)
from .errors import InvalidMachine, KindMismatch, NotAccepting


class Kind(str, Enum):
    TWO_WAY = "TwoWay"
    ONE_WAY = "OneWay"
    AUTOMATON_2W = "Automaton2W"
    AUTOMATON_1W = "Automaton1W"
    MEALY = "Mealy"

    @property
    def one_way(self):
        return self in (Kind.ONE_WAY, Kind.AUTOMATON_1W, Kind.MEALY)

    @property
    def automaton(self):
        return self in (Kind.AUTOMATON_1W, Kind.AUTOMATON_2W)


# ---------------------------------------------------------------- syntax

@dataclass(frozen=True)
class LetterPred:
    fn: PatternFn  # ext(input) -> yes/no


@dataclass(frozen=True)
class RegEq:
    r1: str
    r2: str


@dataclass(frozen=True)
class Store:
    reg: str
    fn: PatternFn  # ext(input) -> A + bot


@dataclass(frozen=True)
class Output:
    fn: PatternFn  # A^k -> output
    regs: tuple


@dataclass(frozen=True)
class OutputMove:
    fn: PatternFn
    regs: tuple


@dataclass(frozen=True)
class MoveLeft:
    pass


@dataclass(frozen=True)
class MoveRight:
    pass


@dataclass(frozen=True)
class Accept:
    pass


@dataclass(frozen=True)
class Reject:
    pass


@dataclass(frozen=True)
class Nop:
    pass


LEFT, RIGHT, ACCEPT, REJECT, NOP = MoveLeft(), MoveRight(), Accept(), Reject(), Nop()


@dataclass(frozen=True)
class Branch:
    state: str
    action: object


@dataclass(frozen=True)
class Transition:
    question: object
    yes: Branch
    no: Branch


@dataclass(frozen=True)
class TwoWaySUT:
    kind: Kind
    input_sort: Sort
    output_sort: Sort
    states: tuple
    initial: str
    registers: tuple
    delta: dict
    single_use: bool = True
    name: str = ""

    __hash__ = object.__hash__

    @property
    def is_mealy(self):
        return self.kind is Kind.MEALY


MealySUT = TwoWaySUT


# ---------------------------------------------------------------- validation

def _reachable(m) -> list:
    seen, todo = {m.initial}, [m.initial]
    while todo:
        q = todo.pop()
        t = m.delta.get(q)
        if t is None:
            continue
        for b in (t.yes, t.no):
            if b.state not in seen and b.state in m.delta:
                seen.add(b.state)
                todo.append(b.state)
    return [q for q in m.states if q in seen]


def validate(m: TwoWaySUT) -> list:
    """Static side conditions; returns a list of violation messages."""
    out = []
    states = set(m.states)
    regs = set(m.registers)
    ext = ext_sort(m.input_sort)
    if len(states) != len(m.states):
        out.append("duplicate state names")
    if len(regs) != len(m.registers):
        out.append("duplicate register names")
    if m.initial not in states:
        out.append(f"initial state {m.initial!r} is not a state")
    for q in m.states:
        if q not in m.delta:
            out.append(f"state {q!r} has no transition")
    for q in m.delta:
        if q not in states:
            out.append(f"transition from unknown state {q!r}")
    reachable = set(_reachable(m)) if m.initial in states else set()
    for q, t in m.delta.items():
        where = f"state {q!r}"
        qu = t.question
        if isinstance(qu, LetterPred):
            if qu.fn.domain != ext or qu.fn.codomain != BOOL:
                out.append(f"{where}: letter predicate must map {format_sort(ext)} to {format_sort(BOOL)}")
        elif isinstance(qu, RegEq):
            if qu.r1 == qu.r2:
                out.append(f"{where}: registers must be distinct")
            for r in (qu.r1, qu.r2):
                if r not in regs:
                    out.append(f"{where}: unknown register {r!r}")
        else:
            out.append(f"{where}: unknown question {qu!r}")
        for b in (t.yes, t.no):
            if b.state not in states:
                out.append(f"{where}: unknown target state {b.state!r}")
            out.extend(f"{where}: {msg}" for msg in _action_violations(m, b.action, q in reachable))
    return list(dict.fromkeys(out))


def _action_violations(m, a, reachable):
    out = []
    regs = set(m.registers)
    kind = m.kind
    ext = ext_sort(m.input_sort)
    if isinstance(a, Store):
        if a.reg not in regs:
            out.append(f"unknown register {a.reg!r}")
        if a.fn.domain != ext or a.fn.codomain != MAYBE_ATOM:
            out.append(f"store function must map {format_sort(ext)} to {format_sort(MAYBE_ATOM)}")
    elif isinstance(a, (Output, OutputMove)):
        if len(set(a.regs)) != len(a.regs):
            out.append("registers must be distinct")
        for r in a.regs:
            if r not in regs:
                out.append(f"unknown register {r!r}")
        if a.fn.domain != tuple_sort(len(a.regs)) or a.fn.codomain != m.output_sort:
            out.append(f"output function must map {format_sort(tuple_sort(len(a.regs)))} "
                       f"to {format_sort(m.output_sort)}")
        if reachable:
            if kind.automaton:
                out.append("automata have no output")
            elif isinstance(a, OutputMove) and kind is not Kind.MEALY:
                out.append("output-and-move is only for Mealy machines")
            elif isinstance(a, Output) and kind is Kind.MEALY:
                out.append("Mealy output must advance the head")
    elif isinstance(a, MoveLeft):
        if reachable and kind is Kind.MEALY:
            out.append("Mealy forbids previous")
        elif reachable and kind.one_way:
            out.append("one-way machines forbid previous")
    elif isinstance(a, MoveRight):
        if reachable and kind is Kind.MEALY:
            out.append("Mealy moves only by output")
    elif isinstance(a, (Accept, Reject)):
        if reachable and kind is Kind.MEALY:
            out.append("Mealy machines have no accept/reject")
    elif isinstance(a, Nop):
        pass
    else:
        out.append(f"unknown action {a!r}")
    return out


def ensure_valid(m):
    errs = validate(m)
    if errs:
        raise InvalidMachine(errs)
    return m


# ---------------------------------------------------------------- outcomes

@dataclass(frozen=True)
class Accepted:
    output: tuple
    steps: int = 0
    trace: tuple = field(default=(), compare=False, repr=False)
    tag = "accepted"


@dataclass(frozen=True)
class Rejected:
    step: int = 0
    reason: str = ""
    trace: tuple = field(default=(), compare=False, repr=False)
    tag = "rejected"


@dataclass(frozen=True)
class Loop:
    step: int = 0
    trace: tuple = field(default=(), compare=False, repr=False)
    tag = "loop"


@dataclass(frozen=True)
class SingleUseViolation:
    step: int
    register: str = ""
    tag = "single_use_violation"


@dataclass(frozen=True)
class TraceStep:
    step: int
    pos: int
    state: str
    before: tuple
    question: object
    answer: bool
    action: object
    after: tuple
    next_state: str
    emitted: object = None  # output letter, or None


# ---------------------------------------------------------------- interpreter

@lru_cache(maxsize=None)
def _compile(m):
    idx = {r: i for i, r in enumerate(m.registers)}
    comp = {}
    for q, t in m.delta.items():
        qu = t.question
        if isinstance(qu, LetterPred):
            qc = (0, qu.fn, None)
        else:
            qc = (1, idx[qu.r1], idx[qu.r2])
        comp[q] = (qc, (t.yes.state, _compile_action(t.yes.action, idx)),
                   (t.no.state, _compile_action(t.no.action, idx)))
    return comp


def _compile_action(a, idx):
    if isinstance(a, Store):
        return ("store", idx[a.reg], a.fn)
    if isinstance(a, Output):
        return ("out", tuple(idx[r] for r in a.regs), a.fn)
    if isinstance(a, OutputMove):
        return ("outmove", tuple(idx[r] for r in a.regs), a.fn)
    if isinstance(a, MoveLeft):
        return ("left",)
    if isinstance(a, MoveRight):
        return ("right",)
    if isinstance(a, Accept):
        return ("accept",)
    if isinstance(a, Reject):
        return ("reject",)
    if isinstance(a, Nop):
        return ("nop",)
    return ("other", a)


def _store_value(fn, letter):
    x = fn(letter)
    return None if x == BOT else x.value.label


def simulate(m, tape, pos, state, val, *, boundary="reject", out=None, trace=None, single_use=None):
    """Run from an arbitrary configuration.

    ``boundary`` says what happens when the head leaves ``tape``: "reject"
    (two-way semantics on a full tape), "accept_right" (Mealy), or "exit"
    (profiles: report the side).  Returns (result, pos, state, valuation, steps)
    with result in accept/reject/loop/exit_left/exit_right.
    """
    comp = _compile(m)
    su = m.single_use if single_use is None else single_use
    val = list(val)
    n = len(tape)
    seen = set()
    steps = 0
    while True:
        if pos < 0 or pos >= n:
            if boundary == "exit":
                return ("exit_left" if pos < 0 else "exit_right", pos, state, tuple(val), steps)
            if boundary == "accept_right" and pos >= n:
                return ("accept", pos, state, tuple(val), steps)
            return ("reject", pos, state, tuple(val), steps)
        key = (pos, state, tuple(val))
        if key in seen:
            return ("loop", pos, state, tuple(val), steps)
        seen.add(key)
        (qk, qa, qb), yes, no = comp[state]
        letter = tape[pos]
        before = key[2]
        if qk == 0:
            ans = qa(letter) == YES
        else:
            a, b = val[qa], val[qb]
            if a is None or b is None:
                return ("reject", pos, state, tuple(val), steps)
            ans = a == b
            if su:
                val[qa] = val[qb] = None
        nxt, act = yes if ans else no
        op = act[0]
        emitted = None
        result = None
        at = pos
        if op == "store":
            val[act[1]] = _store_value(act[2], letter)
        elif op == "out" or op == "outmove":
            labels = [val[i] for i in act[1]]
            if None in labels:
                result = "reject"
            else:
                emitted = act[2](tuple_value(labels))
                if out is not None:
                    out.append(emitted)
                if su:
                    for i in act[1]:
                        val[i] = None
                if op == "outmove":
                    pos += 1
        elif op == "left":
            pos -= 1
        elif op == "right":
            pos += 1
        elif op == "accept":
            result = "accept"
        elif op == "reject":
            result = "reject"
        elif op == "nop":
            pass
        else:
            raise InvalidMachine([f"action {act[1]!r} is not allowed in {m.kind.value} machines"])
        if trace is not None:
            trace.append(TraceStep(steps, at, state, before, (qk, qa, qb), ans, act, tuple(val), nxt, emitted))
        steps += 1
        state = nxt
        if result is not None:
            return (result, pos, state, tuple(val), steps)


def _tape(m, w):
    if m.kind is Kind.MEALY:
        return [ext_letter(a) for a in w]
    return [LEND] + [ext_letter(a) for a in w] + [REND]


def run(m: TwoWaySUT, w: Sequence, trace: bool = False, single_use: Optional[bool] = None):
    """Deterministic run from the initial configuration."""
    check_word(w, m.input_sort)
    tape = _tape(m, w)
    out = []
    tr = [] if trace else None
    boundary = "accept_right" if m.kind is Kind.MEALY else "reject"
    val = (None,) * len(m.registers)
    result, _pos, _q, _val, steps = simulate(m, tape, 0, m.initial, val, boundary=boundary,
                                             out=out, trace=tr, single_use=single_use)
    tr = tuple(tr) if trace else ()
    if result == "accept":
        return Accepted(tuple(out), steps, tr)
    if result == "loop":
        return Loop(steps, tr)
    return Rejected(steps, "", tr)


def accepts(m: TwoWaySUT, w: Sequence) -> bool:
    if not m.kind.automaton:
        raise KindMismatch(f"{m.kind.value} machine is not an automaton")
    return isinstance(run(m, w), Accepted)


def output_of(m, w):
    """Output word of an accepting run, or None."""
    r = run(m, w)
    return list(r.output) if isinstance(r, Accepted) else None


# ---------------------------------------------------------------- single use audit

@dataclass(frozen=True)
class AuditResult:
    ok: bool
    step: int = -1
    register: str = ""


def audit_single_use(m: TwoWaySUT, w: Sequence) -> AuditResult:
    """Replay a run and check that every register read follows a fresh write."""
    if m.single_use:
        return AuditResult(True)
    r = run(m, w, trace=True)
    consumed = [True] * len(m.registers)
    for st in r.trace:
        qk, qa, qb = st.question
        reads = [qa, qb] if qk == 1 else []
        op = st.action[0]
        if op in ("out", "outmove"):
            reads += list(st.action[1])
        for i in reads:
            if consumed[i]:
                return AuditResult(False, st.step, m.registers[i])
        for i in reads:
            consumed[i] = True
        if op == "store":
            consumed[st.action[1]] = False
    return AuditResult(True)


# ---------------------------------------------------------------- stays and run graphs

def stay_bound(m: TwoWaySUT) -> int:
    """States times (2 + atoms per letter) to the number of registers."""
    return len(m.states) * (2 + dimension(m.input_sort)) ** len(m.registers)


def visits(trace) -> list:
    """Group trace steps into maximal stretches at one head position."""
    out = []
    for st in trace:
        if out and out[-1][0] == st.pos:
            out[-1][1].append(st)
        else:
            out.append((st.pos, [st]))
    return out


def max_stay(m, w) -> int:
    r = run(m, w, trace=True)
    return max((len(steps) for _p, steps in visits(r.trace)), default=0)


@dataclass(frozen=True)
class Row:
    emitted: tuple            # output letters written during the visit
    next: Optional[tuple]     # (column offset, 1-based row) or None for the last visit


@dataclass(frozen=True)
class RunGraph:
    columns: tuple            # one tuple of Rows per tape position

    @property
    def width(self) -> int:
        return max((len(c) for c in self.columns), default=0)

    def serialize(self) -> list:
        return [[{"emit": list(r.emitted), "next": list(r.next) if r.next else None} for r in col]
                for col in self.columns]

    def replay(self) -> list:
        return replay_run_graph(self.columns)


def run_graph(m: TwoWaySUT, w: Sequence) -> RunGraph:
    """One row per visit of each input column in the accepting run."""
    r = run(m, w, trace=True)
    if not isinstance(r, Accepted):
        raise NotAccepting(f"run ends with {r.tag}")
    ncols = len(_tape(m, w))
    vs = visits(r.trace)
    rows_per_col = [0] * ncols
    ids = []
    for pos, _steps in vs:
        rows_per_col[pos] += 1
        ids.append((pos, rows_per_col[pos]))
    cols = [[] for _ in range(ncols)]
    for i, (pos, steps) in enumerate(vs):
        emitted = tuple(st.emitted for st in steps if st.emitted is not None)
        nxt = None
        if i + 1 < len(vs):
            npos, nrow = ids[i + 1]
            nxt = (npos - pos, nrow)
        cols[pos].append(Row(emitted, nxt))
    return RunGraph(tuple(tuple(c) for c in cols))


def replay_run_graph(columns) -> list:
    """Depth-first traversal from the unique row without predecessors."""
    def rows(col):
        return [(r["emit"], tuple(r["next"]) if r["next"] else None) if isinstance(r, dict)
                else (list(r.emitted), r.next) for r in col]

    table = [rows(c) for c in columns]
    if not any(table):
        return []
    targets = set()
    for c, col in enumerate(table):
        for _emit, nxt in col:
            if nxt is not None:
                targets.add((c + nxt[0], nxt[1]))
    starts = [(c, i + 1) for c, col in enumerate(table) for i in range(len(col)) if (c, i + 1) not in targets]
    if len(starts) != 1:
        raise NotAccepting(f"run graph has {len(starts)} initial rows")
    out, stack, seen = [], [starts[0]], set()
    while stack:
        c, r = stack.pop()
        if (c, r) in seen:
            raise NotAccepting("run graph has a cycle")
        seen.add((c, r))
        emit, nxt = table[c][r - 1]
        out.extend(emit)
        if nxt is not None:
            stack.append((c + nxt[0], nxt[1]))
    return out


# ---------------------------------------------------------------- building machines

@lru_cache(maxsize=None)
def always(input_sort: Sort) -> PatternFn:
    """Letter predicate answering yes everywhere (used for unconditional steps)."""
    return PatternFn.constant(ext_sort(input_sort), BOOL, YES)


def letter_test(input_sort: Sort, pred: Callable) -> PatternFn:
    """Letter predicate from a host predicate on extended letters (tabulated on orbit representatives)."""
    return PatternFn.from_function(ext_sort(input_sort), BOOL, lambda v: YES if pred(v) else NO)


@lru_cache(maxsize=None)
def is_rend(input_sort: Sort) -> PatternFn:
    return letter_test(input_sort, lambda v: v == REND)


@lru_cache(maxsize=None)
def is_lend(input_sort: Sort) -> PatternFn:
    return letter_test(input_sort, lambda v: v == LEND)


@lru_cache(maxsize=None)
def is_letter_in(input_sort: Sort, side: str) -> PatternFn:
    """For a sum input sort: is the letter in the given summand?"""
    return letter_test(input_sort, lambda v: v.side == "L" and v.value.side == side)


def store_fn(input_sort: Sort, fn: Callable) -> PatternFn:
    """Store function from a host function letter -> atom label or None (endmarkers give None)."""
    def go(v):
        if v.side != "L":
            return BOT
        a = fn(v.value)
        return BOT if a is None else Inj("L", a if isinstance(a, Atom) else Atom(a))
    return PatternFn.from_function(ext_sort(input_sort), MAYBE_ATOM, go)


@lru_cache(maxsize=None)
def store_atom(input_sort: Sort, position: int = 1) -> PatternFn:
    """Store the atom at the given leaf position of the letter (None if there is none)."""
    def pick(letter):
        ls = leaves(letter)
        return Atom(ls[position - 1]) if len(ls) >= position else None
    return store_fn(input_sort, pick)


def output_fn(k: int, output_sort: Sort, fn: Callable) -> PatternFn:
    """Output function from a host function on a list of k atoms."""
    def go(v):
        return fn(untuple(v, k))
    return PatternFn.from_function(tuple_sort(k), output_sort, go)


def untuple(v, k: int) -> list:
    if k == 0:
        return []
    out = []
    for _ in range(k - 1):
        out.append(v.left)
        v = v.right
    out.append(v)
    return out


def constant_output(output_sort: Sort, value) -> PatternFn:
    return PatternFn.constant(tuple_sort(0), output_sort, value)


def uniform_fn(k: int, codomain: Sort, template) -> PatternFn:
    """Function on k-tuples of atoms given by one template over tuple positions."""
    return _uniform_fn(k, codomain, template)


@lru_cache(maxsize=None)
def _uniform_fn(k, codomain, template):
    return PatternFn(tuple_sort(k), codomain, [(r, template) for r in enumerate_orbit_reps(tuple_sort(k))])


@lru_cache(maxsize=None)
def orbit_test(input_sort: Sort, rep, key=None) -> PatternFn:
    """Is the (viewed) letter under the head in the orbit of ``rep``?"""
    view = key or (lambda x: x)
    return letter_test(input_sort, lambda v: v.side == "L" and canonical(view(v.value)) == rep)


@lru_cache(maxsize=None)
def store_leaf(input_sort: Sort, pos: int, key=None) -> PatternFn:
    """Store the atom at leaf position ``pos`` of the (viewed) letter."""
    view = key or (lambda x: x)

    def pick(letter):
        ls = leaves(view(letter))
        return Atom(ls[pos - 1]) if len(ls) >= pos else None
    return store_fn(input_sort, pick)


def rename_refs(template, mapping):
    t = type(template)
    if t is Ref:
        return Ref(mapping[template.pos])
    if t is Pair:
        return Pair(rename_refs(template.left, mapping), rename_refs(template.right, mapping))
    if t is Inj:
        return Inj(template.side, rename_refs(template.value, mapping))
    if t is ListV:
        return ListV(tuple(rename_refs(x, mapping) for x in template.items))
    return template


def referenced(template) -> list:
    """Distinct Ref positions of a template in first-occurrence order."""
    out = []

    def go(t):
        ty = type(t)
        if ty is Ref:
            if t.pos not in out:
                out.append(t.pos)
        elif ty is Pair:
            go(t.left)
            go(t.right)
        elif ty is Inj:
            go(t.value)
        elif hasattr(t, "items"):
            for x in t.items:
                go(x)
    go(template)
    return out


class MachineBuilder:
    """Incremental construction with automatic intermediate states."""

    def __init__(self, kind: Kind, input_sort: Sort, output_sort: Sort, single_use: bool = True, name: str = ""):
        self.kind = Kind(kind)
        self.input_sort = input_sort
        self.output_sort = output_sort
        self.single_use = single_use
        self.name = name
        self.delta = {}
        self.order = []
        self.registers = []
        self._fresh = itertools.count()

    def reg(self, *names):
        for r in names:
            if r not in self.registers:
                self.registers.append(r)
        return names[0] if len(names) == 1 else names

    def state(self, name=None):
        if name is None:
            name = f"_{next(self._fresh)}"
            while name in self.delta or name in self.order:
                name = f"_{next(self._fresh)}"
        if name not in self.order:
            self.order.append(name)
        return name

    def on(self, q, question, yes, no):
        """``yes``/``no`` are (next_state, action) pairs."""
        self.state(q)
        if q in self.delta:
            raise InvalidMachine([f"state {q!r} defined twice"])
        self.delta[q] = Transition(question, Branch(*yes), Branch(*no))
        for st, _a in (yes, no):
            self.state(st)
        return q

    def ask(self, q, pred: PatternFn, yes, no):
        return self.on(q, LetterPred(pred), yes, no)

    def eq(self, q, r1, r2, yes, no):
        return self.on(q, RegEq(r1, r2), yes, no)

    def step(self, q, action, nxt):
        """Unconditional single action."""
        return self.on(q, LetterPred(always(self.input_sort)), (nxt, action), (nxt, action))

    def seq(self, q, actions, nxt):
        """Perform several actions in a row from ``q``, ending in ``nxt``."""
        actions = list(actions)
        if not actions:
            return self.step(q, NOP, nxt)
        cur = q
        for i, a in enumerate(actions):
            target = nxt if i == len(actions) - 1 else self.state()
            self.step(cur, a, target)
            cur = target
        return q

    def classify(self, q, reps, targets, key=None):
        """Branch to ``targets[i]`` when the (viewed) letter is in the orbit of ``reps[i]``.

        The last target is the default, so endmarkers must be handled first.
        """
        n = len(reps)
        if n == 1:
            return self.step(q, NOP, targets[0])
        cur = q
        for i in range(n - 1):
            nxt = targets[n - 1] if i == n - 2 else self.state()
            self.ask(cur, orbit_test(self.input_sort, reps[i], key), (targets[i], NOP), (nxt, NOP))
            cur = nxt
        return q

    def emit(self, q, rep, out_value, nxt, *, move=False, key=None, prefix="x"):
        """Output a letter computed from the current letter, known to lie in the orbit of ``rep``.

        ``out_value(rep)`` gives the output on the representative; the atoms it
        uses are stored into registers first and then written out.
        """
        tpl = template_from_value(out_value(rep), rep)
        used = referenced(tpl)
        regs = tuple(f"{prefix}{i}" for i in range(1, len(used) + 1))
        self.reg(*regs) if regs else None
        fn = uniform_fn(len(used), self.output_sort, rename_refs(tpl, {p: i for i, p in enumerate(used, 1)}))
        acts = [Store(r, store_leaf(self.input_sort, p, key)) for r, p in zip(regs, used)]
        acts.append(OutputMove(fn, regs) if move else Output(fn, regs))
        return self.seq(q, acts, nxt)

    def build(self, initial) -> TwoWaySUT:
        states = tuple(self.order)
        m = TwoWaySUT(self.kind, self.input_sort, self.output_sort, states, initial,
                      tuple(self.registers), dict(self.delta), self.single_use, self.name)
        return m


def describe_outcome(r, output_sort: Sort = None) -> dict:
    if isinstance(r, Accepted):
        return {"outcome": "accepted", "output": [format_value(x, output_sort) for x in r.output]}
    if isinstance(r, Loop):
        return {"outcome": "loop", "step": r.step}
    return {"outcome": "rejected", "step": r.step}
