"""Prime functions, pipelines and the Mealy product construction."""
from datawords import as_mealy, compose_mealy, eval_pipeline, eval_prime, format_word, parse_word, run, seq
from datawords.primes import FiniteGroup, FlipFlop, GroupTransducer, MapDuplicate, MapReverse, separated
from datawords.atoms import ATOM

z3 = GroupTransducer(FiniteGroup.cyclic(3))
w = parse_word("1,2,0,0,2,1,0,1,1,2,2", z3.domain)
print("Z3 prefix products:", format_word(eval_prime(z3, w), z3.codomain))

ff = FlipFlop()
w = parse_word("1,1,b,1,1,b,1,1,a,b,b", ff.domain)
print("flip-flop         :", format_word(eval_prime(ff, w), ff.codomain))

sep = separated(ATOM)
x = parse_word("#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9", sep)
print("map reverse       :", format_word(eval_prime(MapReverse(), x), sep))
print("map duplicate     :", format_word(eval_prime(MapDuplicate(), x), sep))
print("reverse twice     :", format_word(eval_pipeline(seq(MapReverse(), MapReverse()), x), sep))

# length-preserving primes become single-use Mealy machines, and two of those compose into one
m = as_mealy(z3)
c = compose_mealy(m, m)
w = parse_word("1,2,0,0,2,1", z3.domain)
print("\ncomposed Mealy machine: %d states, %d registers" % (len(c.states), len(c.registers)))
print("  product run :", format_word(run(c, w).output, z3.codomain))
print("  pipeline    :", format_word(eval_pipeline(seq(z3, z3), w), z3.codomain))
