"""Discretizing noisy interval maps and checking that the grid is fine enough."""

from markovcs.discretize import KernelSpec, build_system, refinement_check
from markovcs.ergodicity import d0_certificate, dobrushin
from markovcs.systems import GAUSSIAN_RECOGNIZER, gaussian_two_map_spec

spec = gaussian_two_map_spec(grid_n=32)
for sigma in (0.1, 0.3, 0.5, 1.0):
    T = build_system(spec.with_sigma(sigma))
    a = T.operators["a"]
    print(f"sigma {sigma:<4} delta(a) {dobrushin(a):.4f}  c_star(a) {d0_certificate(a).c_star:.4f}"
          f"  K_hat {T.metadata['K_hat']:.2f}")

rep = refinement_check(spec, 0.5, GAUSSIAN_RECOGNIZER)
print("\n32 vs 64 cells, sigma 0.3:", "pass" if rep.passed else "FLAGGED", rep.deviations)

tent = KernelSpec((0, 1), {"a": ((0, 0.5, 1), (0, 1, 0)), "b": ((0, 1), (0, 1))}, 0.01, grid_n=32)
rep = refinement_check(tent, 0.3, GAUSSIAN_RECOGNIZER)
print("tent map, sigma 0.01:", "pass" if rep.passed else "FLAGGED",
      f"acceptance deviation {rep.deviations['acceptance']:.3f}, {rep.verdict_mismatches} verdict changes")
