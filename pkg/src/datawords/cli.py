"""Command-line front end.  Every command prints one JSON document on stdout.

Exit codes: 0 on success (rejection and looping are reported as data), 1 on a
model error or failed validation, 2 on a usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus, serialize
from .atoms import ListSort, format_sort, format_value, parse_sort, parse_value, parse_word
from .equiv import Deatomisation, bounded_equiv, deatomise, fuzz, report, runner
from .errors import DatawordsError, ParseError, SortMismatch
from .machines import Accepted, TwoWaySUT, describe_outcome, ensure_valid, run, run_graph, validate
from .monoid import minimal_support, profile_of, profile_to_json, support_bound
from .primes import Pipeline, Prime, PrimeStep, as_pipeline, compose_mealy, eval_pipeline
from .reglist import Rlf, eval_rlf, typecheck
from .sst import SSTMachine, ensure_valid_sst, eval_sst, post_compose_prime, register_forest, validate_sst

log = logging.getLogger("datawords")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- loading

def resolve(path: str) -> Path:
    """A path as given, or else a file (or fixture name) in the corpus directory."""
    p = Path(path)
    if p.exists():
        return p
    if path in corpus.FIXTURES:
        return corpus.fixture_path(path)
    q = corpus.corpus_dir() / path
    if q.exists():
        return q
    raise UsageError(f"no such file: {path}")


def load_model(path: str, want=None):
    p = resolve(path)
    log.info("loading %s", p)
    model = serialize.load(p)
    if want is not None and not isinstance(model, want):
        raise UsageError(f"{path} holds a {type(model).__name__}, expected {want.__name__ if isinstance(want, type) else 'another model'}")
    return model


def _need(args, *flags):
    for f in flags:
        if getattr(args, f) is None:
            raise UsageError(f"--{f.replace('_', '-')} is required")


def _word(text: str, sort):
    try:
        return parse_word(text, sort)
    except (ParseError, SortMismatch) as e:
        raise UsageError(f"bad input word: {e}") from e


def _fmt_word(w, sort):
    return [format_value(x, sort) for x in w]


def _sst_outcome(r, sort):
    if isinstance(r, Accepted):
        return {"outcome": "accepted", "output": _fmt_word(r.output, sort)}
    return {"outcome": r.tag}


# ---------------------------------------------------------------- commands

def cmd_run(args):
    _need(args, "machine", "input")
    m = load_model(args.machine, TwoWaySUT)
    ensure_valid(m)
    w = _word(args.input, m.input_sort)
    r = run(m, w)
    out = {"machine": m.name, "input": _fmt_word(w, m.input_sort), **describe_outcome(r, m.output_sort)}
    if m.kind.automaton:
        out["accepted"] = isinstance(r, Accepted)
        out.pop("output", None)
    return out


def cmd_eval_pipeline(args):
    _need(args, "pipeline", "input")
    pl = as_pipeline(load_model(args.pipeline, (Prime, Pipeline)))
    w = _word(args.input, pl.domain)
    return {"input": _fmt_word(w, pl.domain), "output": _fmt_word(eval_pipeline(pl, w), pl.codomain)}


def cmd_eval_rlf(args):
    _need(args, "rlf", "input")
    e = load_model(args.rlf, Rlf)
    dom, cod = typecheck(e)
    try:
        v = parse_value("[" + args.input + "]", dom) if isinstance(dom, ListSort) else parse_value(args.input, dom)
    except (ParseError, SortMismatch) as err:
        raise UsageError(f"bad input value: {err}") from err
    res = eval_rlf(e, v)
    out = res.items if isinstance(cod, ListSort) else res
    return {"domain": format_sort(dom), "codomain": format_sort(cod),
            "output": _fmt_word(out, cod.elem) if isinstance(cod, ListSort) else format_value(out, cod)}


def cmd_sst_run(args):
    _need(args, "sst", "input")
    m = load_model(args.sst, SSTMachine)
    ensure_valid_sst(m)
    w = _word(args.input, m.input_sort)
    return {"sst": m.name, "input": _fmt_word(w, m.input_sort), **_sst_outcome(eval_sst(m, w), m.output_sort)}


def _single_prime(model):
    if isinstance(model, Prime):
        return model
    if isinstance(model, PrimeStep):
        return model.prime
    raise UsageError("post-composition needs a pipeline holding a single prime")


def _write(obj, path, name):
    serialize.dump(obj, path, name=name)
    log.info("wrote %s", path)


def cmd_sst_compose(args):
    _need(args, "sst", "pipeline")
    m = load_model(args.sst, SSTMachine)
    ensure_valid_sst(m)
    g = _single_prime(load_model(args.pipeline, (Prime, Pipeline)))
    c = post_compose_prime(m, g)
    out = {"states": len(c.states), "registers": len(c.registers),
           "string_registers": len(c.string_registers), "copyful": c.copyful}
    if args.out:
        _write(c, args.out, f"{m.name}-then-{type(g).__name__}")
        out["written"] = args.out
    if args.input is not None:
        w = _word(args.input, c.input_sort)
        out.update(_sst_outcome(eval_sst(c, w), c.output_sort))
    return out


def cmd_mealy_compose(args):
    _need(args, "a", "b")
    f, g = load_model(args.a, TwoWaySUT), load_model(args.b, TwoWaySUT)
    c = compose_mealy(f, g)
    out = {"states": len(c.states), "registers": len(c.registers)}
    if args.out:
        _write(c, args.out, c.name)
        out["written"] = args.out
    if args.input is not None:
        w = _word(args.input, c.input_sort)
        out.update(describe_outcome(run(c, w), c.output_sort))
    return out


def _machine_and_word(args):
    _need(args, "machine", "input")
    m = load_model(args.machine, TwoWaySUT)
    ensure_valid(m)
    return m, _word(args.input, m.input_sort)


def cmd_profile(args):
    m, w = _machine_and_word(args)
    return profile_to_json(profile_of(m, w))


def cmd_support(args):
    m, w = _machine_and_word(args)
    s = minimal_support(profile_of(m, w))
    return {"machine": m.name, "support": [f"#{a}" for a in s], "size": len(s), "bound": support_bound(m)}


def cmd_rungraph(args):
    m, w = _machine_and_word(args)
    g = run_graph(m, w)
    return {"machine": m.name, "width": g.width, "columns": _graph_json(g.serialize(), m.output_sort),
            "replay": _fmt_word(g.replay(), m.output_sort)}


def _graph_json(cols, sort):
    return [[{"emit": _fmt_word(r["emit"], sort), "next": r["next"]} for r in col] for col in cols]


def cmd_forest(args):
    _need(args, "sst", "input")
    m = load_model(args.sst, SSTMachine)
    ensure_valid_sst(m)
    f = register_forest(m, _word(args.input, m.input_sort))
    return {"sst": m.name, "forest": f.is_forest(), "columns": f.serialize(),
            "output": _fmt_word(f.word(), m.output_sort)}


def _pair(args):
    _need(args, "a", "b")
    return runner(load_model(args.a)), runner(load_model(args.b))


def cmd_equiv(args):
    r1, r2 = _pair(args)
    n = 6 if args.max_len is None else args.max_len
    return report(bounded_equiv(r1, r2, n), r1, r2, seed=args.seed)


def cmd_fuzz(args):
    r1, r2 = _pair(args)
    n = 20 if args.max_len is None else args.max_len
    seed = 0 if args.seed is None else args.seed
    trials = 500 if args.trials is None else args.trials
    res = fuzz(r1, r2, trials, n, atom_pool=args.pool, seed=seed)
    return {**report(res, r1, r2), "max_len": n}


def parse_alpha(text: str) -> Deatomisation:
    try:
        pairs = [p.split(":") for p in text.split(",") if p.strip()]
        return Deatomisation({int(a.strip().lstrip("#")): int(n) for a, n in pairs})
    except ValueError as e:
        raise UsageError(f"bad --alpha {text!r}; expected e.g. 1:1,3:3") from e


def cmd_deatomise(args):
    _need(args, "alpha", "input")
    alpha = parse_alpha(args.alpha)
    try:
        if args.sort:
            s = parse_sort(args.sort)
            v = parse_value(args.input, s) if args.value else parse_word(args.input, s)
        else:
            v = parse_value(args.input) if args.value else parse_word(args.input)
    except (ParseError, SortMismatch) as e:
        raise UsageError(f"bad input: {e}") from e
    return {"output": deatomise(alpha, v), "injective": alpha.injective}


def cmd_validate(args):
    given = [f for f in ("machine", "sst", "pipeline", "rlf") if getattr(args, f)]
    if len(given) != 1:
        raise UsageError("validate needs exactly one of --machine/--sst/--pipeline/--rlf")
    path = getattr(args, given[0])
    try:
        model = load_model(path)
    except DatawordsError as e:
        return {"valid": False, "violations": [str(e)]}, 1
    if isinstance(model, TwoWaySUT):
        v = validate(model)
    elif isinstance(model, SSTMachine):
        v = validate_sst(model)
    elif isinstance(model, Rlf):
        try:
            typecheck(model)
            v = []
        except DatawordsError as e:
            v = [str(e)]
    else:
        v = []
    kind = model.kind.value if isinstance(model, TwoWaySUT) else type(model).__name__
    return {"valid": not v, "kind": kind, "violations": v}, (1 if v else 0)


COMMANDS = {
    "run": (cmd_run, "run a two-way, one-way or Mealy machine on a word"),
    "eval-pipeline": (cmd_eval_pipeline, "evaluate a pipeline of primes"),
    "eval-rlf": (cmd_eval_rlf, "evaluate a list-function expression"),
    "sst-run": (cmd_sst_run, "run a streaming string transducer"),
    "sst-compose": (cmd_sst_compose, "post-compose an SST with a prime"),
    "mealy-compose": (cmd_mealy_compose, "compose two Mealy machines (--a first)"),
    "profile": (cmd_profile, "boundary profile of a machine on a word"),
    "support": (cmd_support, "least support of a profile"),
    "rungraph": (cmd_rungraph, "run graph of an accepting run"),
    "forest": (cmd_forest, "register forest of an SST run"),
    "equiv": (cmd_equiv, "bounded equivalence over all canonical words"),
    "fuzz": (cmd_fuzz, "random differential testing"),
    "deatomise": (cmd_deatomise, "encode atoms as diamond blocks"),
    "validate": (cmd_validate, "check the static side conditions of a model"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="datawords", description="Single-use machines over atoms.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_fn, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        for flag in ("machine", "pipeline", "rlf", "sst", "a", "b", "out"):
            p.add_argument(f"--{flag}", metavar="PATH")
        p.add_argument("--input", metavar="WORD", help="comma-separated letters, e.g. '#1,#2,sep'")
        p.add_argument("--max-len", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--pool", type=int, default=6, help="atom pool size for fuzz")
        p.add_argument("--alpha", help="deatomisation, e.g. 1:1,3:3")
        p.add_argument("--sort", help="sort of the input letters (deatomise)")
        p.add_argument("--value", action="store_true", help="read the input as one value, not a word")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    fn = COMMANDS[args.command][0]
    code = 0
    try:
        res = fn(args)
        if isinstance(res, tuple):
            res, code = res
        res = {"command": args.command, **res}
    except (UsageError, ParseError, FileNotFoundError, json.JSONDecodeError) as e:
        log.error("%s", e)
        res, code = {"command": args.command, "error": str(e), "kind": "usage"}, 2
    except DatawordsError as e:
        log.error("%s", e)
        res, code = {"command": args.command, "error": str(e), "kind": type(e).__name__}, 1
        if hasattr(e, "violations"):
            res["violations"] = e.violations
    sys.stdout.write(json.dumps(res, ensure_ascii=False) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
