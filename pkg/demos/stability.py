"""Small perturbations of a weakly ergodic recognizer keep its language."""

from markovcs import io
from markovcs.stability import collapse_perturbation, perturb, stability_margin, verify_stability

M = io.load_bundled("weakly_ergodic").mcs
beta = float(M.recognizer.isolation)
m = stability_margin(M, beta, 10)
print(f"beta = {beta}, r = {m.r}, per-letter budget eps = {m.epsilon:.5f}")
for seed in range(5):
    rep = verify_stability(M, perturb(M.system, m.epsilon, seed=seed), 12, beta=beta, r=m.r)
    print(f"  seed {seed}: letter distance {rep.letter_distance:.5f}, max word distance "
          f"{rep.max_word_distance:.5f}, disagreements {rep.disagreements}, same DFA {rep.dfa_equal}")

reject_cell = next(x for x in range(M.system.n) if x not in M.recognizer.accepting)
rep = verify_stability(M, collapse_perturbation(M.system, reject_cell), 12, extract=False)
print(f"collapse onto cell {reject_cell}: letter distance {rep.letter_distance:.3f}, "
      f"{rep.disagreements} disagreements, first at {rep.disagreement_witness!r}")
