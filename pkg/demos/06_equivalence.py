"""Checking that different models compute the same function, and deatomisation."""
from datawords import Deatomisation, bounded_equiv, deatomise, format_word, fuzz, parse_value, seq
from datawords.corpus import SEPARATED, load_fixture
from datawords.equiv import canonical_word_count
from datawords.atoms import ATOM
from datawords.primes import MapReverse

# one word per orbit suffices, since every model only compares atoms
print("canonical words of length 3 over atoms:", canonical_word_count(ATOM, 3))

models = {name: load_fixture(name) for name in ("mapreverse-sst", "mapreverse-2w", "mapreverse-rlf")}
for name, model in models.items():
    res = bounded_equiv(model, seq(MapReverse()), 5)
    print("%-15s vs prime: %s on %d words" % (name, res.verdict, res.words_checked))

rep = fuzz(models["mapreverse-sst"], load_fixture("mapduplicate-sst"), trials=200, max_len=8, seed=1)
print("map reverse vs map duplicate:", rep.verdict, "on", format_word(rep.word, SEPARATED))

alpha = Deatomisation({1: 1, 3: 3})
print("\ndeatomised (#3,#1,#1,#3):", deatomise(alpha, parse_value("(#3,#1,#1,#3)")))
