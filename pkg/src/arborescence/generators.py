"""Generators for the test corpus.

Every generator returns a :class:`~arborescence.complex.Complex` with a
``meta`` dict: ``family``, ``size``, ``cat0`` (known CAT(0) by construction,
or ``None`` when not claimed), ``collapsible`` when known, and for cube
down-sets ``basepoint_cells`` (cells from which the Euclidean distance equals
the intrinsic one).
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import Delaunay

from .complex import CUBE, Complex, Face, build_complex, cube, simplex


def _tag(C: Complex, **meta) -> Complex:
    C.meta = meta
    return C


def cube_union(cells, dim: int | None = None) -> Complex:
    """Union of unit cubes of Z^n with lower corners at ``cells``."""
    cells = sorted({tuple(c) for c in cells})
    n = len(cells[0]) if dim is None else dim
    ids: dict[tuple, int] = {}
    coords = {}

    def vid(p):
        if p not in ids:
            ids[p] = len(ids)
            coords[ids[p]] = p
        return ids[p]

    # number vertices lexicographically for stable ids
    for p in sorted({tuple(a + b for a, b in zip(c, bits))
                     for c in cells for bits in itertools.product((0, 1), repeat=n)}):
        vid(p)
    facets = []
    for c in cells:
        corners = []
        for j in range(1 << n):
            corners.append(ids[tuple(c[i] + (j >> i & 1) for i in range(n))])
        facets.append(Face(CUBE, tuple(corners)))
    return build_complex(facets, {v: np.array(p, float) for v, p in coords.items()})


def grid(n: int, m: int, k: int | None = None) -> Complex:
    """n x m (x k) grid of unit squares (cubes)."""
    dims = (n, m) if k is None else (n, m, k)
    C = cube_union(itertools.product(*(range(d) for d in dims)))
    return _tag(C, family="grid", size=dims, cat0=True, collapsible=True, convex=True,
                basepoint_cells=None)


def _origin_cell(C):
    o = C.embedding
    best = min(C.maximal, key=lambda i: max(np.abs(o[v]).max() for v in C.faces[i].verts))
    return [C.faces[best]]


def staircase(heights) -> Complex:
    """Young-diagram staircase: column i has ``heights[i]`` squares (non-increasing)."""
    heights = list(heights)
    if any(a < b for a, b in zip(heights, heights[1:])) or min(heights) < 1:
        raise ValueError("staircase heights must be positive and non-increasing")
    C = cube_union((i, j) for i, h in enumerate(heights) for j in range(h))
    return _tag(C, family="staircase", size=tuple(heights), cat0=True, collapsible=True,
                convex=all(h == heights[0] for h in heights), basepoint_cells=_origin_cell(C))


def staircase3(heights) -> Complex:
    """3-d Young-diagram stack: ``heights[i][j]`` unit cubes over cell (i, j).

    Unlike the planar case these need not be CAT(0): a 2×2×2 block missing
    its top corner cube has a vertex link that is not flag.  The ``cat0``
    tag is therefore left undecided.
    """
    cells = [(i, j, k) for i, row in enumerate(heights) for j, h in enumerate(row) for k in range(h)]
    C = cube_union(cells)
    return _tag(C, family="staircase3", size=tuple(map(tuple, heights)), cat0=None,
                collapsible=True, convex=False, basepoint_cells=_origin_cell(C))


def tree_of_cubes(a: int, b: int, c: int) -> Complex:
    """Three arms of unit cubes along the coordinate axes sharing the origin cube.

    The dual graph (cubes adjacent along squares) is a tree.
    """
    cells = {(0, 0, 0)}
    cells |= {(i, 0, 0) for i in range(a + 1)}
    cells |= {(0, j, 0) for j in range(b + 1)}
    cells |= {(0, 0, k) for k in range(c + 1)}
    C = cube_union(cells)
    return _tag(C, family="tree-of-cubes", size=(a, b, c), cat0=True, collapsible=True,
                convex=False, basepoint_cells=_origin_cell(C))


def cube_corner(filled: bool = False) -> Complex:
    """The three squares of the unit cube meeting at the origin (optionally the cube)."""
    ids = {p: i for i, p in enumerate(itertools.product((0, 1), repeat=3))}
    emb = {i: np.array(p, float) for p, i in ids.items()}
    sq = []
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        corners = []
        for j in range(4):
            p = [0, 0, 0]
            p[others[0]] = j & 1
            p[others[1]] = j >> 1 & 1
            corners.append(ids[tuple(p)])
        sq.append(Face(CUBE, tuple(corners)))
    if filled:
        sq.append(Face(CUBE, tuple(ids[(j & 1, j >> 1 & 1, j >> 2 & 1)] for j in range(8))))
    C = build_complex(sq, emb)
    return _tag(C, family="cube-corner", size=int(filled), cat0=None if not filled else True,
                collapsible=True)


def cubical_annulus(n: int = 3) -> Complex:
    """Lateral squares of a prism over an n-gon: a cubical annulus."""
    emb = {}
    for i in range(n):
        a = 2 * np.pi * i / n
        emb[i] = np.array([np.cos(a), np.sin(a), 0.0])
        emb[n + i] = np.array([np.cos(a), np.sin(a), 1.0])
    facets = [cube(i, (i + 1) % n, n + i, n + (i + 1) % n) for i in range(n)]
    C = build_complex(facets, emb)
    return _tag(C, family="cubical-annulus", size=n, cat0=False, collapsible=False)


def grid_ring(n: int = 3) -> Complex:
    """n x n grid with the centre square removed (n odd)."""
    c = n // 2
    C = cube_union((i, j) for i in range(n) for j in range(n) if (i, j) != (c, c))
    return _tag(C, family="grid-ring", size=n, cat0=False, collapsible=False)


def simplex_complex(d: int) -> Complex:
    """Standard d-simplex with vertices 0, e_1, ..., e_d."""
    emb = {0: np.zeros(max(d, 1))}
    for i in range(1, d + 1):
        emb[i] = np.eye(d)[i - 1]
    C = build_complex([simplex(*range(d + 1))], emb)
    return _tag(C, family="simplex", size=d, cat0=True, collapsible=True, convex=True)


def boundary_simplex(d: int) -> Complex:
    """Boundary of the d-simplex (a (d-1)-sphere)."""
    full = simplex_complex(d)
    facets = [f for f in full.faces if f.dim == d - 1]
    C = build_complex(facets, full.embedding)
    return _tag(C, family="boundary-simplex", size=d, cat0=False, collapsible=False)


DUNCE_HAT = [
    (1, 2, 4), (1, 2, 5), (1, 2, 7), (1, 3, 4), (1, 3, 6), (1, 3, 8), (1, 5, 7), (1, 6, 8),
    (2, 3, 5), (2, 3, 7), (2, 3, 8), (2, 4, 8), (3, 4, 5), (3, 6, 7), (4, 5, 7), (4, 6, 7),
    (4, 6, 8),
]


def dunce_hat() -> Complex:
    """8-vertex triangulation of the dunce hat (contractible, no free faces)."""
    C = build_complex([simplex(*(v - 1 for v in t)) for t in DUNCE_HAT])
    return _tag(C, family="dunce-hat", size=8, cat0=False, collapsible=False)


def _bing_squares():
    """Unit squares of Bing's house with two rooms inside the box [0,5]x[0,3]x[0,2]."""
    sq = set()
    X, Y, Z = 5, 3, 2
    tube_up = (1, 1)    # from the bottom face into the upper room, through the lower room
    tube_down = (3, 1)  # from the top face into the lower room, through the upper room

    def add(axis, level, a, b):
        sq.add((axis, level, a, b))

    # outer walls
    for a in range(Y):
        for b in range(Z):
            add(0, 0, a, b)
            add(0, X, a, b)
    for a in range(X):
        for b in range(Z):
            add(1, 0, a, b)
            add(1, Y, a, b)
    for a in range(X):
        for b in range(Y):
            if (a, b) != tube_up:
                add(2, 0, a, b)
            if (a, b) != tube_down:
                add(2, Z, a, b)
            if (a, b) not in (tube_up, tube_down):
                add(2, 1, a, b)
    # tube walls
    for (cx, cy), z in ((tube_up, 0), (tube_down, 1)):
        add(0, cx, cy, z)
        add(0, cx + 1, cy, z)
        add(1, cy, cx, z)
        add(1, cy + 1, cx, z)
    # supporting walls joining each tube to an outer wall
    add(1, 1, 0, 0)
    add(1, 1, 4, 1)
    return sq


def bing_house() -> Complex:
    """Triangulated Bing's house (contractible, no free faces)."""
    pts: dict[tuple, int] = {}
    tris = []

    def vid(p):
        if p not in pts:
            pts[p] = len(pts)
        return pts[p]

    for axis, level, a, b in sorted(_bing_squares()):
        others = [i for i in range(3) if i != axis]

        def P(u, v):
            p = [0, 0, 0]
            p[axis] = level
            p[others[0]] = u
            p[others[1]] = v
            return vid(tuple(p))

        p00, p10, p01, p11 = P(a, b), P(a + 1, b), P(a, b + 1), P(a + 1, b + 1)
        if (a + b) % 2:
            tris += [simplex(p00, p10, p11), simplex(p00, p01, p11)]
        else:
            tris += [simplex(p00, p10, p01), simplex(p10, p01, p11)]
    C = build_complex(tris, {i: np.array(p, float) for p, i in pts.items()})
    return _tag(C, family="bing-house", size=2, cat0=False, collapsible=False)


def polygon_triangulation(seed: int, n_boundary: int = 7, n_interior: int = 4) -> Complex:
    """Delaunay triangulation of a convex polygon with random interior points."""
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, n_boundary))
    bd = np.c_[np.cos(ang), np.sin(ang)]
    inner = []
    while len(inner) < n_interior:
        p = rng.uniform(-0.7, 0.7, 2)
        if np.linalg.norm(p) < 0.7:
            inner.append(p)
    pts = np.vstack([bd, np.array(inner).reshape(-1, 2)])
    tri = Delaunay(pts)
    facets = [simplex(*map(int, t)) for t in tri.simplices]
    used = {v for f in facets for v in f.verts}
    C = build_complex(facets, {i: pts[i] for i in used})
    return _tag(C, family="polygon", size=(seed, n_boundary, n_interior), cat0=True,
                collapsible=True, convex=True)


def fan_triangulation(n: int) -> Complex:
    """Regular n-gon triangulated from vertex 0."""
    pts = {i: np.array([np.cos(2 * np.pi * i / n), np.sin(2 * np.pi * i / n)]) for i in range(n)}
    C = build_complex([simplex(0, i, i + 1) for i in range(1, n - 1)], pts)
    return _tag(C, family="fan", size=n, cat0=True, collapsible=True, convex=True)


def equilateral_disk() -> Complex:
    """Hexagon of six equilateral triangles around a centre vertex."""
    pts = {0: np.zeros(2)}
    for i in range(6):
        pts[i + 1] = np.array([np.cos(np.pi * i / 3), np.sin(np.pi * i / 3)])
    C = build_complex([simplex(0, i + 1, (i + 1) % 6 + 1) for i in range(6)], pts)
    return _tag(C, family="equilateral-disk", size=6, cat0=True, collapsible=True, convex=True)


def triangulated_grid(n: int, m: int) -> Complex:
    """n x m grid with each square cut along a diagonal (right isoceles triangles)."""
    vid = {(i, j): i * (m + 1) + j for i in range(n + 1) for j in range(m + 1)}
    tris = []
    for i in range(n):
        for j in range(m):
            a, b, c, d = vid[i, j], vid[i + 1, j], vid[i, j + 1], vid[i + 1, j + 1]
            tris += [simplex(a, b, d), simplex(a, c, d)]
    C = build_complex(tris, {v: np.array(p, float) for p, v in vid.items()})
    return _tag(C, family="triangulated-grid", size=(n, m), cat0=True, collapsible=True,
                convex=True)


def path_complex(n: int) -> Complex:
    """Path v0 - v1 - ... - vn on the real line."""
    C = build_complex([simplex(i, i + 1) for i in range(n)], {i: np.array([float(i)]) for i in range(n + 1)})
    return _tag(C, family="path", size=n, cat0=True, collapsible=True, convex=True)


# -- pure 2-complexes on few vertices ------------------------------------------------

def pure_2_complexes(n: int = 6, min_triangles: int = 1):
    """All pure 2-dimensional complexes on at most ``n`` vertices, up to isomorphism.

    Yields triangle lists (tuples of vertex triples).  Orderly growth by adding
    one triangle at a time with canonical forms taken over all vertex
    permutations.
    """
    tri = list(itertools.combinations(range(n), 3))
    pos = {t: i for i, t in enumerate(tri)}
    perms = np.array(list(itertools.permutations(range(n))))
    table = np.array([[pos[tuple(sorted(p[list(t)]))] for t in tri] for p in perms])
    weights = 1 << np.arange(len(tri), dtype=np.int64)

    def canon(mask: np.ndarray) -> int:
        idx = np.nonzero(mask)[0]
        return int(weights[table[:, idx]].sum(axis=1).min())

    level = {0: np.zeros(len(tri), bool)}
    while level:
        nxt = {}
        for mask in level.values():
            for k in np.nonzero(~mask)[0]:
                m2 = mask.copy()
                m2[k] = True
                key = canon(m2)
                if key not in nxt:
                    nxt[key] = m2
        for key in sorted(nxt):
            m = nxt[key]
            if m.sum() >= min_triangles:
                yield tuple(tri[i] for i in np.nonzero(m)[0])
        level = nxt


def two_complex(triangles) -> Complex:
    return _tag(build_complex([simplex(*t) for t in triangles]), family="pure-2", size=len(triangles),
                cat0=None, collapsible=None)


def cat0_cube_corpus(max_faces: int = 500) -> list[Complex]:
    """CAT(0) cube complexes: grids, staircases, trees of cubes, and the 3-d
    stacks that pass :func:`cat0_cube_check`."""
    out = []
    for n in range(1, 6):
        for m in range(n, 6):
            out.append(grid(n, m))
    for n, m, k in [(2, 2, 2), (3, 2, 2), (3, 3, 2), (4, 3, 2), (5, 5, 2), (4, 4, 2)]:
        out.append(grid(n, m, k))
    for h in [(2, 1), (3, 2, 1), (4, 2, 2, 1), (5, 4, 2, 1, 1), (3, 3, 1), (4, 4, 3, 1), (6, 3, 1)]:
        out.append(staircase(h))
    from .catzero import CAT0, cat0_cube_check

    for h in [[[2, 1], [1]], [[3, 1], [1]], [[2, 1], [1, 1]], [[3, 2], [1]], [[2, 2, 1], [1]],
              [[3, 2, 1], [2, 1], [1]], [[2, 2], [2, 1]]]:
        S = staircase3(h)
        if cat0_cube_check(S).verdict == CAT0:
            S.meta["cat0"] = True
            out.append(S)
    for a, b, c in [(1, 1, 1), (2, 1, 1), (2, 2, 1), (3, 1, 2), (3, 3, 3)]:
        out.append(tree_of_cubes(a, b, c))
    return [C for C in out if len(C) <= max_faces]
