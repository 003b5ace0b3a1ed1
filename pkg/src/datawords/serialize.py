"""JSON formats for machines, streaming transducers, pipelines and list-function expressions.

Sorts and values are written in the text grammar of ``atoms`` (values in full
form, with explicit injections); pattern functions as
``{"domain", "codomain", "cases": [{"guard", "template"}]}``.  Every top-level
document carries a ``format`` tag: machine, sst, pipeline or rlf.
"""
from __future__ import annotations

import json
from pathlib import Path

from .atoms import PatternFn, format_sort, format_value, parse_sort, parse_value
from .errors import ParseError
from .machines import (
    Accept, Branch, Kind, LetterPred, MoveLeft, MoveRight, Nop, Output, OutputMove, RegEq, Reject, Store,
    Transition, TwoWaySUT,
)
from .primes import (
    AppendEndmark, AtomPropagation, ClassicalMealy, FiniteGroup, FlipFlop, GroupTransducer, Hom, LpHom,
    MapDuplicate, MapReverse, ParWithId, Par, Pipeline, PrimeStep, Prime, Seq,
)
from .reglist import Cases, Comp, Const, Eq, Map, Pairing, Prim, Rlf
from .sst import Concat, Letter, Move, SetLetter, SSTMachine, Update


# ---------------------------------------------------------------- basics

def sort_to_json(s):
    return format_sort(s)


def sort_from_json(x):
    return parse_sort(x)


def value_to_json(v):
    return format_value(v)


def value_from_json(x, sort=None):
    return parse_value(x, sort)


def fn_to_json(f: PatternFn) -> dict:
    return {"domain": format_sort(f.domain), "codomain": format_sort(f.codomain),
            "cases": [{"guard": format_value(g), "template": format_value(t)} for g, t in f.cases]}


def fn_from_json(x: dict) -> PatternFn:
    dom, cod = parse_sort(x["domain"]), parse_sort(x["codomain"])
    return PatternFn(dom, cod, [(parse_value(c["guard"], dom), parse_value(c["template"], cod))
                                for c in x["cases"]])


# ---------------------------------------------------------------- machines

_SIMPLE = {MoveLeft: "left", MoveRight: "right", Accept: "accept", Reject: "reject", Nop: "nop"}
_SIMPLE_BACK = {v: k for k, v in _SIMPLE.items()}


def _regs(x):
    return list(x)


def action_to_json(a) -> dict:
    t = type(a)
    if t in _SIMPLE:
        return {"type": _SIMPLE[t]}
    if t is Store:
        return {"type": "store", "reg": a.reg, "fn": fn_to_json(a.fn)}
    if t is Output:
        return {"type": "output", "regs": _regs(a.regs), "fn": fn_to_json(a.fn)}
    if t is OutputMove:
        return {"type": "output_move", "regs": _regs(a.regs), "fn": fn_to_json(a.fn)}
    if t is SetLetter:
        return {"type": "set_letter", "reg": a.reg, "regs": _regs(a.regs), "fn": fn_to_json(a.fn)}
    if t is Concat:
        return {"type": "concat", "dst": a.dst, "a": a.a, "b": a.b}
    if t is Move:
        return {"type": "move", "dst": a.dst, "src": a.src}
    if t is Update:
        return {"type": "update", "clear": list(a.clear),
                "assign": [[dst, [i if isinstance(i, str) else {"fn": fn_to_json(i.fn), "regs": _regs(i.regs)}
                                  for i in items]] for dst, items in a.assign]}
    raise ParseError(f"cannot serialize action {a!r}")


def action_from_json(x: dict):
    t = x.get("type")
    if t in _SIMPLE_BACK:
        return _SIMPLE_BACK[t]()
    if t == "store":
        return Store(x["reg"], fn_from_json(x["fn"]))
    if t == "output":
        return Output(fn_from_json(x["fn"]), tuple(x["regs"]))
    if t == "output_move":
        return OutputMove(fn_from_json(x["fn"]), tuple(x["regs"]))
    if t == "set_letter":
        return SetLetter(x["reg"], fn_from_json(x["fn"]), tuple(x["regs"]))
    if t == "concat":
        return Concat(x["dst"], x["a"], x["b"])
    if t == "move":
        return Move(x["dst"], x["src"])
    if t == "update":
        assign = tuple((dst, tuple(i if isinstance(i, str) else Letter(fn_from_json(i["fn"]), tuple(i["regs"]))
                                   for i in items)) for dst, items in x["assign"])
        return Update(assign, tuple(x.get("clear", ())))
    raise ParseError(f"unknown action type {t!r}")


def question_to_json(q) -> dict:
    if isinstance(q, RegEq):
        return {"type": "eq", "r1": q.r1, "r2": q.r2}
    return {"type": "letter", "fn": fn_to_json(q.fn)}


def question_from_json(x: dict):
    if x.get("type") == "eq":
        return RegEq(x["r1"], x["r2"])
    if x.get("type") == "letter":
        return LetterPred(fn_from_json(x["fn"]))
    raise ParseError(f"unknown question type {x.get('type')!r}")


def _delta_to_json(delta, states):
    return {q: {"question": question_to_json(t.question),
                "yes": {"state": t.yes.state, "action": action_to_json(t.yes.action)},
                "no": {"state": t.no.state, "action": action_to_json(t.no.action)}}
            for q in states if q in delta for t in [delta[q]]}


def _delta_from_json(x):
    return {q: Transition(question_from_json(t["question"]),
                          Branch(t["yes"]["state"], action_from_json(t["yes"]["action"])),
                          Branch(t["no"]["state"], action_from_json(t["no"]["action"])))
            for q, t in x.items()}


def machine_to_json(m: TwoWaySUT) -> dict:
    return {"format": "machine", "name": m.name, "kind": m.kind.value,
            "input_sort": format_sort(m.input_sort), "output_sort": format_sort(m.output_sort),
            "states": list(m.states), "initial": m.initial, "registers": list(m.registers),
            "single_use": m.single_use, "transitions": _delta_to_json(m.delta, m.states)}


def machine_from_json(x: dict) -> TwoWaySUT:
    return TwoWaySUT(Kind(x["kind"]), parse_sort(x["input_sort"]), parse_sort(x["output_sort"]),
                     tuple(x["states"]), x["initial"], tuple(x["registers"]),
                     _delta_from_json(x["transitions"]), x.get("single_use", True), x.get("name", ""))


def sst_to_json(m: SSTMachine) -> dict:
    return {"format": "sst", "name": m.name, "input_sort": format_sort(m.input_sort),
            "output_sort": format_sort(m.output_sort), "states": list(m.states), "initial": m.initial,
            "registers": list(m.registers), "string_registers": list(m.string_registers),
            "output_register": m.output_register, "copyful": m.copyful,
            "transitions": _delta_to_json(m.delta, m.states)}


def sst_from_json(x: dict) -> SSTMachine:
    return SSTMachine(parse_sort(x["input_sort"]), parse_sort(x["output_sort"]), tuple(x["states"]),
                      x["initial"], tuple(x["registers"]), tuple(x["string_registers"]),
                      x["output_register"], _delta_from_json(x["transitions"]), x.get("copyful", False),
                      x.get("name", ""))


# ---------------------------------------------------------------- primes and pipelines

def group_to_json(g: FiniteGroup) -> dict:
    return {"table": [list(r) for r in g.table], "names": list(g.names)}


def group_from_json(x: dict) -> FiniteGroup:
    return FiniteGroup(tuple(tuple(r) for r in x["table"]), tuple(x["names"]) if "names" in x else None)


def prime_to_json(p: Prime) -> dict:
    if isinstance(p, LpHom):
        return {"prime": "lphom", "fn": fn_to_json(p.fn)}
    if isinstance(p, Hom):
        return {"prime": "hom", "fn": fn_to_json(p.fn)}
    if isinstance(p, ClassicalMealy):
        return {"prime": "classical_mealy", "machine": machine_to_json(p.machine)}
    if isinstance(p, AtomPropagation):
        return {"prime": "atom_propagation"}
    if isinstance(p, GroupTransducer):
        return {"prime": "group", "group": group_to_json(p.group)}
    if isinstance(p, FlipFlop):
        return {"prime": "flipflop"}
    if isinstance(p, MapReverse):
        return {"prime": "map_reverse", "sigma": format_sort(p.sigma)}
    if isinstance(p, MapDuplicate):
        return {"prime": "map_duplicate", "sigma": format_sort(p.sigma)}
    if isinstance(p, AppendEndmark):
        return {"prime": "append_endmark", "sigma": format_sort(p.sigma)}
    if isinstance(p, ParWithId):
        return {"prime": "par_with_id", "inner": prime_to_json(p.inner), "id_sort": format_sort(p.id_sort)}
    raise ParseError(f"cannot serialize prime {p!r}")


def prime_from_json(x: dict) -> Prime:
    t = x.get("prime")
    if t == "lphom":
        return LpHom(fn_from_json(x["fn"]))
    if t == "hom":
        return Hom(fn_from_json(x["fn"]))
    if t == "classical_mealy":
        return ClassicalMealy(machine_from_json(x["machine"]))
    if t == "atom_propagation":
        return AtomPropagation()
    if t == "group":
        return GroupTransducer(group_from_json(x["group"]))
    if t == "flipflop":
        return FlipFlop()
    if t == "map_reverse":
        return MapReverse(parse_sort(x.get("sigma", "A")))
    if t == "map_duplicate":
        return MapDuplicate(parse_sort(x.get("sigma", "A")))
    if t == "append_endmark":
        return AppendEndmark(parse_sort(x.get("sigma", "A")))
    if t == "par_with_id":
        return ParWithId(prime_from_json(x["inner"]), parse_sort(x["id_sort"]))
    raise ParseError(f"unknown prime {t!r}")


def pipeline_node_to_json(pl) -> dict:
    if isinstance(pl, Prime):
        return prime_to_json(pl)
    if isinstance(pl, PrimeStep):
        return prime_to_json(pl.prime)
    if isinstance(pl, Seq):
        return {"seq": [pipeline_node_to_json(pl.first), pipeline_node_to_json(pl.second)]}
    if isinstance(pl, Par):
        return {"par": [pipeline_node_to_json(pl.left), pipeline_node_to_json(pl.right)]}
    raise ParseError(f"cannot serialize pipeline {pl!r}")


def pipeline_node_from_json(x: dict) -> Pipeline:
    if "seq" in x:
        parts = [pipeline_node_from_json(p) for p in x["seq"]]
        out = parts[0]
        for p in parts[1:]:
            out = Seq(out, p)
        return out
    if "par" in x:
        a, b = x["par"]
        return Par(pipeline_node_from_json(a), pipeline_node_from_json(b))
    return PrimeStep(prime_from_json(x))


def pipeline_to_json(pl, name="") -> dict:
    return {"format": "pipeline", "name": name, "pipeline": pipeline_node_to_json(pl)}


def pipeline_from_json(x: dict) -> Pipeline:
    return pipeline_node_from_json(x["pipeline"])


# ---------------------------------------------------------------- list-function expressions

def rlf_node_to_json(e: Rlf) -> dict:
    if isinstance(e, Const):
        return {"node": "const", "value": format_value(e.value), "dom": format_sort(e.dom),
                "cod": format_sort(e.cod)}
    if isinstance(e, Eq):
        return {"node": "eq"}
    if isinstance(e, Prim):
        out = {"node": "prime", "name": e.name, "sorts": [format_sort(s) for s in e.sorts]}
        if e.group is not None:
            out["group"] = group_to_json(e.group)
        return out
    if isinstance(e, Comp):
        return {"node": "comp", "f": rlf_node_to_json(e.f), "g": rlf_node_to_json(e.g)}
    if isinstance(e, Pairing):
        return {"node": "pair", "f": rlf_node_to_json(e.f), "g": rlf_node_to_json(e.g)}
    if isinstance(e, Cases):
        return {"node": "cases", "f": rlf_node_to_json(e.f), "g": rlf_node_to_json(e.g)}
    if isinstance(e, Map):
        return {"node": "map", "f": rlf_node_to_json(e.f)}
    raise ParseError(f"cannot serialize expression {e!r}")


def rlf_node_from_json(x: dict) -> Rlf:
    t = x.get("node")
    if t == "const":
        cod = parse_sort(x["cod"])
        return Const(parse_value(x["value"], cod), parse_sort(x["dom"]), cod)
    if t == "eq":
        return Eq()
    if t == "prime":
        g = group_from_json(x["group"]) if "group" in x else None
        return Prim(x["name"], tuple(parse_sort(s) for s in x.get("sorts", ())), g)
    if t in ("comp", "pair", "cases"):
        cls = {"comp": Comp, "pair": Pairing, "cases": Cases}[t]
        return cls(rlf_node_from_json(x["f"]), rlf_node_from_json(x["g"]))
    if t == "map":
        return Map(rlf_node_from_json(x["f"]))
    raise ParseError(f"unknown expression node {t!r}")


def rlf_to_json(e: Rlf, name="") -> dict:
    return {"format": "rlf", "name": name, "expr": rlf_node_to_json(e)}


def rlf_from_json(x: dict) -> Rlf:
    return rlf_node_from_json(x["expr"])


# ---------------------------------------------------------------- documents

def to_json(obj, name="") -> dict:
    if isinstance(obj, TwoWaySUT):
        return machine_to_json(obj)
    if isinstance(obj, SSTMachine):
        return sst_to_json(obj)
    if isinstance(obj, (Prime, Pipeline)):
        return pipeline_to_json(obj, name)
    if isinstance(obj, Rlf):
        return rlf_to_json(obj, name)
    raise ParseError(f"cannot serialize {type(obj).__name__}")


def from_json(x: dict):
    fmt = x.get("format")
    if fmt == "machine":
        return machine_from_json(x)
    if fmt == "sst":
        return sst_from_json(x)
    if fmt == "pipeline":
        return pipeline_from_json(x)
    if fmt == "rlf":
        return rlf_from_json(x)
    raise ParseError(f"unknown document format {fmt!r}")


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    return from_json(doc)


def dumps(obj, name="") -> str:
    return json.dumps(to_json(obj, name), indent=1, ensure_ascii=False, sort_keys=False) + "\n"


def dump(obj, path, name=""):
    Path(path).write_text(dumps(obj, name), encoding="utf-8")
