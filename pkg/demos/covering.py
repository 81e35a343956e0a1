"""Greedy epsilon-nets over reachable distributions and over word operators."""

from markovcs.extraction import operator_cover, orbit_cover
from markovcs.systems import gaussian_two_map

M = gaussian_two_map()
eps = M.gap / 4
for cover in (orbit_cover, operator_cover):
    rep = cover(M, eps, 12)
    counts = " ".join(str(rep.counts[L]) for L in range(13))
    print(f"{cover.__name__:<15} eps {eps:.2f}: counts by length {counts}; stable from {rep.stabilized_at}")
    print(f"{'':<15} centers {', '.join(w or 'ε' for w in rep.center_words)}")
