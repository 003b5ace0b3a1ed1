"""Streaming string transducers: one left-to-right pass, string registers, no copying."""
from datawords import eval_sst, format_word, parse_word, post_compose_prime, register_forest
from datawords.corpus import SEPARATED, doubling_sst, identity_sst, map_reverse_sst
from datawords.primes import MapDuplicate, MapReverse

m = map_reverse_sst()
x = parse_word("#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9", SEPARATED)
print("map reverse SST:", format_word(eval_sst(m, x).output, SEPARATED))

# post-composition folds a prime into the transducer
for g in (MapReverse(), MapDuplicate()):
    c = post_compose_prime(identity_sst(), g)
    print("identity then %-13s %3d states, %2d string registers: %s" % (
        type(g).__name__, len(c.states), len(c.string_registers), format_word(eval_sst(c, x).output, SEPARATED)))

# register forests record how the output string was assembled
f = register_forest(m, parse_word("#1,#2,sep,#3", SEPARATED))
print("\nforest of map reverse on #1,#2,sep,#3 is a forest:", f.is_forest(), "with", len(f.nodes), "nodes")

# with copying allowed the same structure is a DAG and the output can double at every step
d = doubling_sst()
w = parse_word("#1,#2,#3,#4,#5", d.input_sort)
fd = register_forest(d, w)
print("doubling SST output length:", len(fd.word()), "from", len(fd.nodes), "nodes; forest:", fd.is_forest())
