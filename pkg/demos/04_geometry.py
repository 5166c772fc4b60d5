"""Degree of the double cover, linking numbers and the extended direction map.

Run: python3 demos/04_geometry.py
"""
import numpy as np

from kktz import geometry as G

for name in ("rho", "rho2", "identity", "square"):
    f, target = G.MAPS[name]
    out = G.map_degree(f, 200_000, seed=1, target=target)
    print(f"deg {name:8s} = {out['estimate']:+.4f} +- {out['stderr']:.4f}")

K1, K2 = G.hopf_pair()
print("\nHopf link:", G.gauss_linking(K1, K2))
print("K2 traversed twice:", G.gauss_linking(K1, K2.traversed(2))["estimate"])
print("split pair:", G.gauss_linking(*G.split_pair())["estimate"])

rng = np.random.default_rng(3)
for k in (-2, 1, 3):
    L1, L2 = G.random_link(rng, k)
    print(f"winding {k:+d}: Gauss {G.gauss_linking(L1, L2)['integer']:+d}, "
          f"crossings {G.crossing_linking_number(L1, L2, rng):+.0f}")

qs = G.random_unit_quaternions(rng, 500)
print("\ng3 conjugator:", G.resolve_g3_conjugator(qs))
final, _ = G.propagator_limit_residuals(rng)
print("propagator boundary residuals:", final)
