"""Piecewise-Euclidean geometry on embedded complexes.

Cells are flat: simplices are convex hulls of their embedded vertices and
cubes are parallelepipeds with orthogonal axes spanned from corner 0.
Comparisons between minima on different cells use an absolute gap
``DELTA`` on squared distances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .complex import CUBE, SIMPLEX, Complex, ComplexError, Face, star

DELTA = 1e-9
CURVE_TOL = 1e-8
CURVE_MAX_ITER = 100_000
PERTURB_SCALE = 1e-6
PERTURB_RETRIES = 8


class UniquenessViolation(ArithmeticError):
    """Two distinct minima within the uniqueness gap; the function is not generic here."""


class DegenerateSimplex(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Point:
    """A point of |C| given by its carrier and convex coordinates in it.

    ``coords`` are barycentric (simplices, in ``carrier.corners`` order) or
    unit-box coordinates (cubes, one per axis).  ``x`` is the ambient position.
    """

    carrier: Face
    coords: tuple[float, ...]
    x: np.ndarray

    def __repr__(self):
        return f"Point({self.carrier}, x={np.round(self.x, 6).tolist()})"


# -- projections ---------------------------------------------------------------

def _cube_frame(X: np.ndarray):
    d = X.shape[0].bit_length() - 1
    origin = X[0]
    axes = np.array([X[1 << i] - origin for i in range(d)]).reshape(d, X.shape[1])
    return origin, axes


def _project_cube(p, face: Face, X: np.ndarray):
    origin, axes = _cube_frame(X)
    if face.dim == 0:
        return face, (), origin.copy()
    g = axes @ axes.T
    if np.abs(g - np.diag(np.diag(g))).max() > 1e-9 * np.diag(g).max():
        raise ComplexError(f"cube {face} has non-orthogonal axes in the embedding")
    t = np.clip((axes @ (p - origin)) / np.diag(g), 0.0, 1.0)
    x = origin + t @ axes
    free = [i for i in range(face.dim) if 0.0 < t[i] < 1.0]
    j0 = sum(1 << i for i in range(face.dim) if t[i] == 1.0)
    corners = [face.corners[j0 | sum(((k >> a) & 1) << ax for a, ax in enumerate(free))]
               for k in range(1 << len(free))]
    return Face(CUBE, tuple(corners)), tuple(float(t[i]) for i in free), x


def _project_simplex(p, face: Face, X: np.ndarray):
    best = None
    n = len(face.corners)
    for k in range(n, 0, -1):
        for sub in itertools.combinations(range(n), k):
            Y = X[list(sub)]
            if k == 1:
                lam = np.array([1.0])
            else:
                A = (Y[1:] - Y[0]).T
                sol, *_ = np.linalg.lstsq(A, p - Y[0], rcond=None)
                lam = np.concatenate([[1.0 - sol.sum()], sol])
                if lam.min() <= 0.0:
                    continue
            x = lam @ Y
            d2 = float(np.dot(x - p, x - p))
            if best is None or d2 < best[0] - 1e-15:
                best = (d2, sub, lam, x)
    _, sub, lam, x = best
    carrier = Face(SIMPLEX, tuple(face.corners[i] for i in sub))
    order = np.argsort([face.corners[i] for i in sub])
    return carrier, tuple(float(lam[i]) for i in order), x


def project_to_face(p: Sequence[float], F: Face, C: Complex) -> Point:
    """Nearest point of the closed cell ``F`` to ambient point ``p``.

    Cubes clamp per axis; simplices run an exact search over the affine hulls
    of all subfaces (small dimensions only).  The returned carrier is the
    inclusion-minimal face containing the nearest point.
    """
    if C.embedding is None:
        raise ComplexError("complex has no embedding")
    p = np.asarray(p, dtype=float)
    X = C.coords(F)
    if F.kind == CUBE:
        carrier, coords, x = _project_cube(p, F, X)
    else:
        carrier, coords, x = _project_simplex(p, F, X)
    return Point(carrier, coords, x)


def nearest_point(p: Sequence[float], C: Complex) -> Point:
    """Nearest point of |C| to ``p`` (minimum over maximal faces)."""
    best = None
    for i in C.maximal:
        q = project_to_face(p, C.faces[i], C)
        d = float(np.sum((q.x - p) ** 2))
        if best is None or d < best[0]:
            best = (d, q)
    return best[1]


def locate(x: Sequence[float], C: Complex, tol: float = 1e-9) -> Point:
    """The point of |C| at ambient position ``x`` (must lie on |C|)."""
    x = np.asarray(x, dtype=float)
    q = nearest_point(x, C)
    if np.linalg.norm(q.x - x) > tol * max(1.0, mesh_size(C)):
        raise ComplexError(f"{x} does not lie on the complex")
    return q


def mesh_size(C: Complex) -> float:
    edges = [f for f in C.faces if f.dim == 1]
    if not edges or C.embedding is None:
        return 1.0
    return float(np.mean([np.linalg.norm(C.embedding[e.corners[0]] - C.embedding[e.corners[1]])
                          for e in edges]))


# -- star-minimal functions -------------------------------------------------------

class MetricEvaluator:
    """Continuous function on |C| evaluated through per-cell minimisation.

    Subclasses implement :meth:`face_min` returning ``(value, point, carrier)``
    for the closed cell with canonical index ``i``; ``value`` is the quantity
    compared (squared distance for distance functions).
    """

    complex: Complex

    def face_min(self, i: int) -> tuple[float, np.ndarray | None, Face]:
        raise NotImplementedError

    def vertex_value(self, v: int) -> float:
        raise NotImplementedError


class DistanceFunction(MetricEvaluator):
    """Euclidean distance from ``basepoint`` in the embedding.

    This is the intrinsic distance only when the relevant stars and the
    segments to the basepoint lie in |C| (e.g. convex |C|, or down-sets of a
    lattice with the basepoint in the origin cell).
    """

    mode = "euclidean-embedded"

    def __init__(self, C: Complex, basepoint: Sequence[float]):
        if C.embedding is None:
            raise ComplexError("distance functions need an embedded complex")
        self.complex = C
        self.basepoint = np.asarray(basepoint, dtype=float)
        self._cache: dict[int, tuple] = {}

    def face_min(self, i):
        hit = self._cache.get(i)
        if hit is None:
            q = project_to_face(self.basepoint, self.complex.faces[i], self.complex)
            d = q.x - self.basepoint
            hit = self._cache[i] = (float(d @ d), q.x, q.carrier)
        return hit

    def vertex_value(self, v):
        d = self.complex.embedding[v] - self.basepoint
        return float(d @ d)

    def value(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x) - self.basepoint))

    def perturbed(self, attempt: int, seed: int = 0) -> DistanceFunction:
        rng = np.random.default_rng([seed, attempt])
        # the offset grows 4x per attempt so persistent near-ties get resolved
        scale = PERTURB_SCALE * 4.0 ** attempt * mesh_size(self.complex)
        off = rng.uniform(-1.0, 1.0, self.basepoint.shape) * scale
        return DistanceFunction(self.complex, self.basepoint + off)


class VertexFunction(MetricEvaluator):
    """Piecewise-linear extension of vertex values; each cell attains its
    minimum at its lowest vertex."""

    mode = "vertex-pl"

    def __init__(self, C: Complex, values):
        self.complex = C
        self.values = {int(v): float(values[v]) for v in C.vertices}
        if len(set(self.values.values())) != len(self.values):
            raise UniquenessViolation("two vertices share a value")

    @classmethod
    def random(cls, C: Complex, seed: int) -> VertexFunction:
        rng = np.random.default_rng(seed)
        while True:
            vals = rng.uniform(0.0, 1.0, len(C.vertices))
            if len(np.unique(vals)) == len(vals):
                return cls(C, dict(zip(C.vertices, vals)))

    def face_min(self, i):
        f = self.complex.faces[i]
        v = min(f.verts, key=self.values.__getitem__)
        return self.values[v], None, self.complex.vertex_face(v)

    def vertex_value(self, v):
        return self.values[v]


@dataclass(frozen=True)
class StarMinRecord:
    """Minimum of f on the star of ``face``: value, carrier ``mu``, pointer vertex."""

    face: Face
    min_value: float
    min_point: np.ndarray | None
    mu: Face
    pointer: int


def star_min(sigma: Face | int, C: Complex, f: MetricEvaluator) -> StarMinRecord:
    """Minimise ``f`` over the closed cells of st(sigma, C).

    Raises :class:`UniquenessViolation` when two different points come within
    ``DELTA`` of the minimum value, or when the carrier's lowest vertex is
    not unique.
    """
    i = C.index[sigma] if isinstance(sigma, Face) else int(sigma)
    tops = [j for j in C.cofaces(i, strict=False) if not C.cofacets_of[j]]
    cands = [f.face_min(j) for j in tops]
    k = int(np.argmin([c[0] for c in cands]))
    val, x, mu = cands[k]
    for v2, x2, mu2 in cands:
        if v2 - val < DELTA and mu2 != mu:
            if x is None or x2 is None or np.linalg.norm(x2 - x) > np.sqrt(DELTA):
                raise UniquenessViolation(f"two minima on the star of {C.faces[i]}")
    vals = sorted((f.vertex_value(v), v) for v in mu.verts)
    if len(vals) > 1 and vals[1][0] - vals[0][0] < DELTA:
        raise UniquenessViolation(f"tied vertex values on {mu}")
    return StarMinRecord(C.faces[i], val, x, mu, vals[0][1])


# -- non-obtuse simplices -----------------------------------------------------------

@dataclass(frozen=True)
class NonObtuseResult:
    accept: bool
    witness: Face | None = None
    angles_agree: bool = True

    def __bool__(self):
        return self.accept


def non_obtuse_check(delta: Face, C: Complex, tol: float = 1e-12) -> NonObtuseResult:
    """Accept iff every vertex projects into the opposite facet's closed hull.

    The dihedral-angle test (inner products of inward facet normals) is run
    as a cross-check and reported in ``angles_agree``.
    """
    if delta.kind != SIMPLEX:
        raise ComplexError("non-obtuse test applies to simplices")
    X = C.coords(delta)
    d = delta.dim
    if d <= 1:
        return NonObtuseResult(True)
    if np.linalg.matrix_rank(X[1:] - X[0], tol=1e-12 * max(1.0, np.abs(X).max())) < d:
        raise DegenerateSimplex(f"{delta} has zero volume")
    witness = None
    normals = []
    for k in range(d + 1):
        rest = [j for j in range(d + 1) if j != k]
        Y = X[rest]
        A = (Y[1:] - Y[0]).T
        sol, *_ = np.linalg.lstsq(A, X[k] - Y[0], rcond=None)
        lam = np.concatenate([[1.0 - sol.sum()], sol])
        normals.append(X[k] - lam @ Y)
        if witness is None and lam.min() < -tol:
            witness = Face(SIMPLEX, tuple(delta.corners[j] for j in rest))
    N = np.array(normals)
    G = N @ N.T
    scale = np.sqrt(np.outer(np.diag(G), np.diag(G)))
    off = (G / scale)[~np.eye(d + 1, dtype=bool)]
    angle_ok = bool(off.max() <= 1e-12)
    return NonObtuseResult(witness is None, witness, angle_ok == (witness is None))


# -- geodesic distance ----------------------------------------------------------------

def _as_x(p, C):
    if isinstance(p, Point):
        return p.x
    return np.asarray(p, dtype=float)


def _cells(C):
    return [C.faces[i] for i in C.maximal]


def _lattice(C: Complex, n: int):
    """Nodes and edges of the n-fold lattice subdivision of every maximal cell."""
    keys: dict[tuple, int] = {}
    pts = []
    rows, cols = [], []
    cell_nodes = []

    def node(x):
        k = tuple(np.round(x, 9))
        j = keys.get(k)
        if j is None:
            j = keys[k] = len(pts)
            pts.append(x)
        return j

    for F in _cells(C):
        X = C.coords(F)
        ids = {}
        if F.kind == CUBE:
            origin, axes = _cube_frame(X)
            for k in itertools.product(range(n + 1), repeat=F.dim):
                ids[k] = node(origin + (np.array(k) / n) @ axes)
            for k in itertools.product(range(n), repeat=F.dim):
                corners = [ids[tuple(a + b for a, b in zip(k, bits))]
                           for bits in itertools.product((0, 1), repeat=F.dim)]
                for a, b in itertools.combinations(corners, 2):
                    rows.append(a)
                    cols.append(b)
        else:
            m = F.dim + 1
            for k in itertools.product(range(n + 1), repeat=m):
                if sum(k) == n:
                    ids[k] = node((np.array(k) / n) @ X)
            for k, a in ids.items():
                for s, t in itertools.permutations(range(m), 2):
                    if k[s] > 0:
                        kk = list(k)
                        kk[s] -= 1
                        kk[t] += 1
                        rows.append(a)
                        cols.append(ids[tuple(kk)])
        cell_nodes.append((F, sorted(set(ids.values()))))
    return np.array(pts), rows, cols, cell_nodes


def _dijkstra(C: Complex, p, q, depth: int, want_path=False):
    n = 2 ** depth
    pts, rows, cols, cell_nodes = _lattice(C, n)
    extra = [p, q]
    base = len(pts)
    for e, x in enumerate(extra):
        loc = nearest_point(x, C)
        for F, ids in cell_nodes:
            if loc.carrier.verts and set(loc.carrier.verts) <= set(F.verts):
                for j in ids:
                    rows.append(base + e)
                    cols.append(j)
    allpts = np.vstack([pts, np.array(extra)])
    rows = np.array(rows)
    cols = np.array(cols)
    w = np.linalg.norm(allpts[rows] - allpts[cols], axis=1)
    if (np.linalg.norm(p - q) > 0 and cell_nodes and
            any(set(nearest_point(p, C).carrier.verts) <= set(F.verts)
                and set(nearest_point(q, C).carrier.verts) <= set(F.verts) for F, _ in cell_nodes)):
        rows = np.append(rows, base)
        cols = np.append(cols, base + 1)
        w = np.append(w, np.linalg.norm(p - q))
    N = len(allpts)
    G = coo_matrix((np.maximum(w, 1e-300), (rows, cols)), shape=(N, N)).tocsr()
    dist, pred = dijkstra(G, directed=False, indices=base, return_predecessors=True)
    d = float(dist[base + 1])
    if not np.isfinite(d):
        raise ComplexError("endpoints lie in different components")
    if not want_path:
        return d
    path = [base + 1]
    while path[-1] != base:
        path.append(pred[path[-1]])
    return d, allpts[path[::-1]]


class _Segments:
    """Exact test whether a straight segment lies in |C|.

    Each maximal cell is an affine image of a simplex or a unit cube, so the
    part of a segment inside one cell is a parameter interval read off from
    linear coordinate constraints; the segment lies in |C| when those
    intervals cover [0, 1].
    """

    def __init__(self, C: Complex, tol: float = 1e-10):
        self.tol = tol
        self.cells = []
        for F in _cells(C):
            X = C.coords(F)
            if F.kind == CUBE:
                origin, A = _cube_frame(X)
            else:
                origin, A = X[0], X[1:] - X[0]
            P = np.linalg.pinv(A.T) if len(A) else np.zeros((0, X.shape[1]))
            self.cells.append((F.kind, origin, A, P))

    def _interval(self, cell, a, d):
        kind, origin, A, P = cell
        ma, md = P @ (a - origin), P @ d
        scale = 1.0 + float(np.abs(a).max()) + float(np.abs(d).max())
        if (np.linalg.norm(a - origin - A.T @ ma) > self.tol * scale
                or np.linalg.norm(d - A.T @ md) > self.tol * scale):
            return None
        # constraints alpha + beta t >= 0
        rows = [(ma, md)]
        if kind == CUBE:
            rows.append((1.0 - ma, -md))
        else:
            rows.append((np.array([1.0 - ma.sum()]), np.array([-md.sum()])))
        lo, hi = 0.0, 1.0
        for alpha, beta in rows:
            for al, be in zip(alpha, beta):
                if abs(be) < 1e-15:
                    if al < -self.tol:
                        return None
                elif be > 0:
                    lo = max(lo, (-self.tol - al) / be)
                else:
                    hi = min(hi, (-self.tol - al) / be)
        return (lo, hi) if lo <= hi else None

    def inside(self, a, b) -> bool:
        d = b - a
        spans = sorted(iv for cell in self.cells
                       if (iv := self._interval(cell, a, d)) is not None)
        reach = 0.0
        for lo, hi in spans:
            if lo > reach + 1e-12:
                return False
            reach = max(reach, hi)
        return reach >= 1.0 - 1e-12


def _length(ns) -> float:
    return float(np.linalg.norm(np.diff(np.asarray(ns), axis=0), axis=1).sum())


def _pull_taut(seg: _Segments, path) -> list:
    """Drop lattice nodes while the shortcut stays in |C| (string pulling)."""
    out = [path[0]]
    i = 0
    while i < len(path) - 1:
        j = i + 1
        while j + 1 < len(path) and seg.inside(path[i], path[j + 1]):
            j += 1
        out.append(path[j])
        i = j
    return out


def _shorten(C: Complex, nodes, tol: float, max_iter: int):
    """Midpoint-projection shortening that never lets a segment leave |C|.

    Each sweep visits the interior nodes: a node whose neighbours see each
    other is dropped; otherwise it moves to the projection of its
    neighbours' midpoint, or to a vertex of the cells around it, or part
    of the way toward the projection, whichever is admissible and shortest.
    Bends of a shortest path in a piecewise-flat complex sit on lower
    faces, which is why vertices are offered as targets.  Stops when a
    sweep shortens the path by less than ``tol`` relative.
    """
    seg = _Segments(C)
    nodes = _pull_taut(seg, [np.asarray(x, float) for x in nodes])
    length = _length(nodes)
    for sweep in range(1, max_iter + 1):
        dropped = False
        i = 1
        while i < len(nodes) - 1:
            a, x, c = nodes[i - 1], nodes[i], nodes[i + 1]
            if seg.inside(a, c):
                del nodes[i]
                dropped = True
                continue
            here = np.linalg.norm(x - a) + np.linalg.norm(c - x)
            loc = nearest_point(0.5 * (a + c), C)
            cands = [loc.x]
            around = nearest_point(x, C).carrier
            verts = {v for j in star(around, C).members for v in C.faces[j].verts}
            cands += [np.asarray(C.embedding[v], float) for v in sorted(verts)]
            cands += [x + 0.5 ** k * (loc.x - x) for k in range(1, 12)]
            best, best_len = x, here
            for y in cands:
                L = np.linalg.norm(y - a) + np.linalg.norm(c - y)
                if L < best_len - 1e-15 and seg.inside(a, y) and seg.inside(y, c):
                    best, best_len = y, L
            nodes[i] = best
            i += 1
        new = _length(nodes)
        if not dropped and length - new <= tol * new:
            return new, np.array(nodes), sweep
        length = new
    raise ConvergenceError(f"curve shortening did not converge in {max_iter} sweeps")


def geodesic_distance(p, q, C: Complex, mode: str = "curve-shortening", depth: int = 4,
                      tol: float = CURVE_TOL, max_iter: int = CURVE_MAX_ITER) -> float:
    """Distance between two points of |C|.

    ``euclidean-embedded`` is the straight-line distance (only valid for
    convex |C|); ``curve-shortening`` starts from the lattice path at
    ``depth`` 1 and shortens it; ``skeleton-dijkstra`` is the shortest path
    in the ``2**depth``-fold lattice subdivision (an upper bound).
    """
    if C.embedding is None:
        raise ComplexError("complex has no embedding")
    x, y = _as_x(p, C), _as_x(q, C)
    if mode == "euclidean-embedded":
        return float(np.linalg.norm(x - y))
    if mode == "skeleton-dijkstra":
        return _dijkstra(C, x, y, depth)
    if mode == "curve-shortening":
        if np.array_equal(x, y):
            return 0.0
        _, path = _dijkstra(C, x, y, depth, want_path=True)
        length, _, _ = _shorten(C, list(path), tol, max_iter)
        return length
    raise ValueError(f"unknown mode {mode!r}")


# -- basepoints ---------------------------------------------------------------------

def sample_point(C: Complex, rng: np.random.Generator, cells: Sequence[Face] | None = None) -> np.ndarray:
    """Uniformly random point in a random cell (among ``cells`` or the maximal cells)."""
    cells = list(cells) if cells else _cells(C)
    F = cells[int(rng.integers(len(cells)))]
    X = C.coords(F)
    if F.kind == CUBE:
        origin, axes = _cube_frame(X)
        return origin + rng.uniform(0.02, 0.98, F.dim) @ axes
    lam = rng.dirichlet(np.ones(F.dim + 1))
    return lam @ X


def generic_distance(C: Complex, seed: int, cells: Sequence[Face] | None = None) -> DistanceFunction:
    """Distance from a seeded random basepoint, checked star-minimal on every face.

    Retries with a fresh perturbation up to ``PERTURB_RETRIES`` times.
    """
    rng = np.random.default_rng(seed)
    f = DistanceFunction(C, sample_point(C, rng, cells))
    for attempt in range(PERTURB_RETRIES + 1):
        try:
            for i in range(len(C)):
                star_min(i, C, f)
            return f
        except UniquenessViolation:
            if attempt == PERTURB_RETRIES:
                raise
            f = f.perturbed(attempt, seed)
    return f


__all__ = [
    "DELTA", "Point", "UniquenessViolation", "DegenerateSimplex", "ConvergenceError",
    "project_to_face", "nearest_point", "locate", "mesh_size", "MetricEvaluator",
    "DistanceFunction", "VertexFunction", "StarMinRecord", "star_min", "NonObtuseResult",
    "non_obtuse_check", "geodesic_distance", "sample_point", "generic_distance", "star",
]
