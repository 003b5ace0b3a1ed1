"""Regular list functions: combinators over lists of atoms."""
from datawords import derived, eval_rlf, format_value, parse_word
from datawords import reglist as R
from datawords.atoms import ATOM, ListV
from datawords.primes import separated

sep = separated(ATOM)
x = parse_word("#1,#2,sep,sep,#3,#4,#5,sep,#6,#7,#8,sep,#9", sep)
print("block      :", format_value(eval_rlf(R.block(ATOM, R.SEP_SORT), ListV(tuple(x)))))
print("mapReverse :", format_value(eval_rlf(derived("mapReverse"), ListV(tuple(x)))))
print("windows    :", format_value(eval_rlf(derived("windows"), ListV(tuple(parse_word("#1,#2,#3,#1"))))))
print("compress   :", format_value(eval_rlf(R.compress(), ListV(tuple(parse_word("#1,#1,#2,#2,#2,#1"))))))

# an expression into yes/no is a language acceptor
acc = R.as_language_acceptor(R.at_most_three_distinct())
for text in ("#1,#2,#1,#3", "#1,#2,#3,#4"):
    print("at most three distinct letters in %-12s %s" % (text + ":", acc(parse_word(text))))

try:
    R.typecheck(R.comp(R.reverse(ATOM), R.pair(R.idf(ATOM), R.idf(R.BOOL))))
except R.RlfTypeError as e:
    print("type error:", e)
