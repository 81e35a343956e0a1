"""Dobrushin coefficients, the D0 constant and weak-ergodicity certificates."""

from markovcs import io
from markovcs.ergodicity import (
    certify_weak_ergodicity,
    d0_certificate,
    decay_bound,
    dobrushin,
    dobrushin_batch,
)
from markovcs.measures import compose_word, iter_level_kernels

three = io.load_bundled("three_state").system
P = three.operators["a"]
print("three-cell kernel")
print("  delta(P)   =", dobrushin(P))
print("  c_star(P)  =", d0_certificate(P).c_star, "(no column is positive everywhere)")
for n in range(1, 5):
    exact = compose_word(three, "a" * n).exact
    print(f"  P^{n}(0,0)   = {exact[0, 0]}   delta = {dobrushin(compose_word(three, 'a' * n))}")

T = io.load_bundled("weakly_ergodic").system
cert = certify_weak_ergodicity(T, 8)
print("\nbundled weakly ergodic system")
print(f"  certified with r = {cert.r}, max delta over words of that length = {cert.delta_bar:.4f}")
print("  length  max measured delta  decay bound")
for length, ks in iter_level_kernels(T, 3 * cert.r):
    if length:
        print(f"  {length:>6}  {dobrushin_batch(ks).max():>19.3e}  {decay_bound(cert, length):.3e}")
