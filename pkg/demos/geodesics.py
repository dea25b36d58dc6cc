"""Distances inside a complex: straight lines, shortened curves and lattice paths.

On a convex complex the intrinsic distance is the straight-line distance.  On
an L-shaped complex the straight segment leaves the space, and the geodesic
bends around the inner corner.  Lattice shortest paths give upper bounds that
improve with every subdivision of the lattice.
"""
import numpy as np

from arborescence import geodesic_distance
from arborescence.generators import grid, staircase

C = grid(3, 2)
p, q = [0.2, 0.1], [2.7, 1.9]
print("convex 3x2 grid:")
print(f"  straight line   {geodesic_distance(p, q, C, mode='euclidean-embedded'):.10f}")
print(f"  curve-shortened {geodesic_distance(p, q, C):.10f}")
for depth in range(1, 7):
    d = geodesic_distance(p, q, C, mode="skeleton-dijkstra", depth=depth)
    print(f"  lattice bound at depth {depth} {d:.10f}")

L = staircase([2, 1])
p, q = [0.5, 1.9], [1.9, 0.5]
print("\nL-shaped staircase, points on the two arms:")
corner = np.array([1.0, 1.0])
via_corner = np.linalg.norm(p - corner) + np.linalg.norm(q - corner)
print(f"  straight line (leaves the space) {np.linalg.norm(np.subtract(p, q)):.6f}")
print(f"  curve-shortened geodesic         {geodesic_distance(p, q, L):.6f}")
print(f"  two segments via the corner      {via_corner:.6f}")
