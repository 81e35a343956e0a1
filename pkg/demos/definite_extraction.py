"""When every long enough word contracts below half the gap, the last letters decide."""

from markovcs.dfa import dfa_equiv
from markovcs.extraction import definite_language_table, definite_order, extract_dfa
from markovcs.systems import gaussian_two_map

M = gaussian_two_map()
cert = definite_order(M, 8)
print(f"gap {cert.gap:.2f}: all words of length {cert.r_star} have delta <= {cert.worst_delta:.4f}")
table = definite_language_table(M, cert)
for w, acc in zip(table.representatives, table.accepting):
    print(f"  suffix {w or 'ε':<3} -> {'accept' if acc else 'reject'}")
print("equal to the Rabin extraction:", dfa_equiv(table, extract_dfa(M)) is None)
