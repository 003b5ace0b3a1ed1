"""Running single-use machines on words of atoms.

Atoms are written ``#n``. A machine only ever compares atoms for equality,
so renaming the atoms of an input renames the atoms of its output.
"""
from datawords import apply_perm, audit_single_use, format_word, parse_word, run, validate
from datawords.atoms import Perm
from datawords.corpus import load_fixture

prop = load_fixture("atomprop")
w = parse_word("#1,#2,eps,eps,down,down,#3,eps,eps,down,eps,down", prop.input_sort)
out = run(prop, w).output
print("atom propagation")
print("  in :", format_word(w, prop.input_sort))
print("  out:", format_word(out, prop.output_sort))

# renaming the input atoms renames the output atoms the same way
p = Perm({2: 7, 7: 2})
assert list(run(prop, apply_perm(p, w)).output) == apply_perm(p, list(out))
print("  renaming #2 <-> #7 commutes with the run")

# two-way machines read the word back and forth
rev = load_fixture("mapreverse-2w")
x = parse_word("#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9", rev.input_sort)
print("\nmap reverse (two-way)")
print("  in :", format_word(x, rev.input_sort))
print("  out:", format_word(run(rev, x).output, rev.output_sort))

# a machine that compares against the first letter more than once is not single-use
again = load_fixture("first-letter-again")
res = audit_single_use(again, parse_word("#1,#2,#1", again.input_sort))
print("\nfirst letter appears again: single-use audit ok =", res.ok, "register", res.register)

bad = load_fixture("bad-mealy")
print("static check of a Mealy machine that moves left:", validate(bad))
