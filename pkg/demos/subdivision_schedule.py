"""Collapsing the barycentric subdivision of a convex polygon, one star at a time.

Every face of the polygon becomes a vertex of the subdivision.  The distance
to a generic basepoint orders those vertices; walking the order from the top,
each vertex's link in what is left is collapsed (as a cone when it has an
apex, otherwise by search) and the collapse is lifted to the star.  Each step
is labelled with its case: whether the face attains its own minimum in its
interior, and whether it lies on the boundary.
"""
from collections import Counter

from arborescence import generic_distance, sd_collapse_schedule, verify_certificate
from arborescence.generators import polygon_triangulation
from arborescence.scheduler import write_schedule

C = polygon_triangulation(3)
print(f"polygon: f-vector {C.f_vector}")
cert = sd_collapse_schedule(C, generic_distance(C, 0))
sd = cert.complex
print(f"subdivision: f-vector {sd.f_vector}, {len(sd)} faces")
print(f"certificate: {len(cert)} elementary collapses, verifies {bool(verify_certificate(cert))}")
print(f"ends at {cert.end_faces()}")

log = cert.meta["schedule"]
print("\ncases:", dict(sorted(Counter(e["case"] for e in log).items())))
print("link collapses:", dict(Counter(e["method"] for e in log)))
print("\nfirst schedule lines:")
for line in write_schedule(cert).splitlines()[:6]:
    print(" ", line)
