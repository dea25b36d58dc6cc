"""Contractible is not the same as collapsible.

The dunce hat and Bing's house are contractible 2-complexes with no free
face at all, so not a single elementary collapse can start.  Exhaustive
search proves this instantly, and every star-minimal function leaves at
least three critical cells (one vertex, one edge, one triangle is the best a
discrete gradient can do).  A boundary of a simplex fails for a different
reason: its Euler characteristic is not 1.
"""
from collections import Counter

from arborescence import VertexFunction, exhaustive_collapsibility, free_faces
from arborescence.generators import bing_house, boundary_simplex, dunce_hat
from arborescence.morse import gradient_with_retry

for name, C in [("dunce hat", dunce_hat()), ("Bing's house", bing_house()),
                ("boundary of the triangle", boundary_simplex(2)),
                ("boundary of the tetrahedron", boundary_simplex(3))]:
    r = exhaustive_collapsibility(C)
    print(f"{name:28s} f={C.f_vector}  euler={C.euler_characteristic}  "
          f"free faces={len(free_faces(C))}  search: {r.status} ({r.reason})")

D = dunce_hat()
counts = Counter()
for seed in range(32):
    M, _, _ = gradient_with_retry(D, VertexFunction.random(D, seed), seed)
    counts[M.counts()] += 1
print("\ncritical cells by dimension over 32 random vertex functions on the dunce hat:")
for c, n in sorted(counts.items(), key=lambda t: sum(t[0])):
    print(f"  {c} (total {sum(c)}): {n} functions")
