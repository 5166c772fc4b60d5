"""Walk through trivalent diagrams, their symmetries and the relation algebra.

Run: python3 demos/01_diagrams_and_algebra.py
"""
from fractions import Fraction

from kktz import algebra as A
from kktz import diagrams as D

print("Connected trivalent diagrams by degree:")
for n in range(1, 4):
    gs = D.generate_diagrams(n)
    auts = [D.count_automorphisms(g) for g in gs]
    print(f"  degree {n}: {len(gs)} shapes, automorphism counts {auts}")

print("\nLabelled, edge-oriented diagrams (enumerated vs closed form):")
for n in (1, 2):
    print(f"  degree {n}: {len(D.enumerate_labelled(n))} vs {D.labelled_count_formula(n)}")

print("\nDimensions of the quotient by AS and IHX:")
for n in range(4):
    b = A.reduction_basis(n)
    print(f"  degree {n}: {len(b.columns)} oriented generators, rank {b.rank}, dimension {b.dimension}")

th = A.theta_class(3)
x = th * Fraction(1, 2)
print("\nexp(theta/2) up to degree 3:")
for n, part in enumerate(A.exp_truncated(x).degree_part(k) for k in range(4)):
    print(f"  degree {n}: {part}")
