"""Boundary profiles: what a two-way machine does when it enters a factor from either side.

Profiles of factors compose, so the profile of a word is the product of the
profiles of its pieces. For single-use machines a profile mentions only a
bounded number of atoms, whatever the length of the word.
"""
from datawords import compose_profiles, minimal_support, parse_word, profile_of
from datawords.corpus import load_fixture
from datawords.monoid import accepts_via_profile, support_bound

m = load_fixture("first-equals-last")
u, v = parse_word("#1,#2", m.input_sort), parse_word("#3,#1", m.input_sort)
print("profile(u) * profile(v) == profile(uv):", compose_profiles(profile_of(m, u), profile_of(m, v)) == profile_of(m, u + v))

t = load_fixture("three-letters")
for text in ("#1,#2,#1,#3", "#1,#2,#3,#4"):
    print("three-letters accepts %s via its profile: %s" % (text, accepts_via_profile(t, parse_word(text))))

w = parse_word("#1,#2,#3,#4,#5,#6")
print("\nsupport of three-letters on six distinct letters:", len(minimal_support(profile_of(t, w))),
      "(bound %d)" % support_bound(t))

# without single use the support keeps growing
again = load_fixture("first-letter-again")
for d in range(1, 6):
    w = parse_word(",".join(f"#{i}" for i in range(1, d + 1)))
    print("first-letter-again, %d distinct letters -> support size %d" % (d, len(minimal_support(profile_of(again, w)))))
