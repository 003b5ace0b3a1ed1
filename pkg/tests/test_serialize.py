import json

import pytest

from datawords import corpus, serialize
from datawords.atoms import ATOM, parse_word
from datawords.errors import ParseError
from datawords.equiv import Equal, bounded_equiv
from datawords.primes import FiniteGroup, FlipFlop, GroupTransducer, ParWithId, identity, par, seq


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_fixture_round_trip(name):
    path = corpus.fixture_path(name)
    doc = json.loads(path.read_text(encoding="utf-8"))
    model = serialize.load(path)
    assert serialize.to_json(model, name=doc["name"]) == doc


@pytest.mark.parametrize("name", sorted(corpus.names(valid_only=True)))
def test_fixture_matches_builder(name):
    built = corpus.build_fixture(name)
    loaded = corpus.load_fixture(name)
    assert serialize.to_json(built, name="x") == serialize.to_json(loaded, name="x")


def test_pipeline_round_trip():
    for pl in (seq(par(FlipFlop(), identity(ATOM))), seq(ParWithId(FlipFlop(), ATOM))):
        back = serialize.from_json(serialize.to_json(pl, name="p"))
        assert isinstance(bounded_equiv(pl, back, 3), Equal)


def test_group_names_survive():
    g = FiniteGroup(((0, 1), (1, 0)), ("e", "s"))
    back = serialize.from_json(serialize.to_json(seq(GroupTransducer(g)), name="g"))
    assert back.prime.group.names == ("e", "s")


def test_bad_documents(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        serialize.load(bad)
    with pytest.raises(ParseError):
        serialize.from_json({"format": "nonsense"})


def test_write_corpus_and_env_override(tmp_path, monkeypatch):
    corpus.write_corpus(tmp_path)
    assert sorted(p.name for p in tmp_path.glob("*.json")) == sorted(f for f, _b, _r in corpus.FIXTURES.values())
    monkeypatch.setenv("DATAWORDS_CORPUS", str(tmp_path))
    assert corpus.corpus_dir() == tmp_path
    m = serialize.load(corpus.fixture_path("mapreverse-sst"))
    from datawords.sst import sst_output
    w = parse_word("#1,#2,sep", corpus.SEPARATED)
    assert sst_output(m, w) == parse_word("#2,#1,sep", corpus.SEPARATED)
