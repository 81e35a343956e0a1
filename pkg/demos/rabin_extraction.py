"""Recover a DFA from a recognizer system by merging close word distributions."""

from markovcs.dfa import format_dfa, is_isomorphic, minimize_dfa
from markovcs.extraction import extract_dfa
from markovcs.recognition import enumerate_classify
from markovcs.systems import contains_ab_dfa, contains_ab_redundant_dfa, embed_dfa, random_weakly_ergodic

M = embed_dfa(contains_ab_redundant_dfa())
d = extract_dfa(M)
print(f"embedded four-state 'contains ab' automaton: extracted {d.n_states} states,"
      f" minimal form isomorphic to the 3-state DFA: {is_isomorphic(minimize_dfa(d), contains_ab_dfa())}")
print(format_dfa(minimize_dfa(d)))

M = random_weakly_ergodic(0)
d = extract_dfa(M)
oracle = enumerate_classify(M, 12)
bad = sum(d.accepts(w) != (v.value == "Accept") for w, v in oracle.items())
print(f"random weakly ergodic system (seed 0): gap {M.gap:.4f}, merge radius {d.merge_radius:.4f}")
print(f"  {d.n_states} states, {minimize_dfa(d).n_states} after minimization")
print(f"  disagreements with the oracle over {len(oracle)} words: {bad}")
