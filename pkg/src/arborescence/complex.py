"""Face posets of simplicial and cubical complexes.

A :class:`Complex` is an immutable, closed collection of faces together with
its Hasse diagram (codimension-one incidences).  Faces are enumerated in a
canonical order (lexicographic on sorted vertex tuples, then dimension) and
every downstream artifact refers to faces by that canonical index.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

SIMPLEX = "simplex"
CUBE = "cube"


class ComplexError(ValueError):
    """Malformed faces or a collection that is not a complex."""


def _canonical_corners(corners: Sequence[int]) -> tuple[int, ...]:
    """Relabel a cube's bit-ordered corner list canonically.

    Corner 0 becomes the smallest vertex id and the axes are sorted by the id
    of the neighbour of corner 0 along each axis.
    """
    n = len(corners)
    d = n.bit_length() - 1
    b0 = corners.index(min(corners))
    axes = sorted(range(d), key=lambda i: corners[b0 ^ (1 << i)])
    out = []
    for j in range(n):
        old = b0
        for new_axis, old_axis in enumerate(axes):
            if j >> new_axis & 1:
                old ^= 1 << old_axis
        out.append(corners[old])
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Face:
    """A simplex or a cube given by its vertices.

    For cubes ``corners`` lists the ``2**dim`` vertices in bit order: corner
    ``j`` differs from corner ``j ^ (1 << i)`` along axis ``i``.  Identity is
    the (kind, vertex set) pair.
    """

    kind: str
    corners: tuple[int, ...]
    verts: tuple[int, ...] = field(init=False)
    dim: int = field(init=False)

    def __post_init__(self):
        corners = tuple(int(v) for v in self.corners)
        if not corners:
            raise ComplexError("empty face")
        if any(v < 0 for v in corners):
            raise ComplexError(f"negative vertex id in {corners}")
        if len(set(corners)) != len(corners):
            raise ComplexError(f"duplicate vertices in {corners}")
        n = len(corners)
        if self.kind == SIMPLEX:
            corners = tuple(sorted(corners))
            dim = n - 1
        elif self.kind == CUBE:
            if n & (n - 1):
                raise ComplexError(f"cube with {n} corners (not a power of two)")
            corners = _canonical_corners(corners)
            dim = n.bit_length() - 1
        else:
            raise ComplexError(f"unknown face kind {self.kind!r}")
        object.__setattr__(self, "corners", corners)
        object.__setattr__(self, "verts", tuple(sorted(corners)))
        object.__setattr__(self, "dim", dim)

    def __eq__(self, other):
        return isinstance(other, Face) and self.verts == other.verts and self.kind == other.kind

    def __hash__(self):
        return hash(self.verts)

    def __lt__(self, other: Face):
        return (self.verts, self.dim) < (other.verts, other.dim)

    def __repr__(self):
        return f"Face({''.join('s' if self.kind == SIMPLEX else 'c')}{list(self.corners)})"

    def facets(self) -> list[Face]:
        """Codimension-one faces."""
        if self.dim == 0:
            return []
        if self.kind == SIMPLEX:
            return [Face(SIMPLEX, c) for c in combinations(self.verts, self.dim)]
        return [Face(CUBE, _drop_axis(self.corners, axis, bit))
                for axis in range(self.dim) for bit in (0, 1)]

    def subfaces(self) -> set[Face]:
        """All faces of the closure, including the face itself."""
        seen = {self}
        stack = [self]
        while stack:
            for g in stack.pop().facets():
                if g not in seen:
                    seen.add(g)
                    stack.append(g)
        return seen

    def line(self) -> str:
        return f"{self.kind} {self.dim} " + " ".join(map(str, self.corners))


def _drop_axis(corners, axis, bit):
    return tuple(c for j, c in enumerate(corners) if (j >> axis & 1) == bit)


def simplex(*verts: int) -> Face:
    return Face(SIMPLEX, tuple(verts))


def cube(*corners: int) -> Face:
    return Face(CUBE, tuple(corners))


def face_set_hash(faces: Iterable[Face]) -> str:
    lines = sorted(f.line() for f in faces)
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


class Complex:
    """Closed face poset with Hasse diagram and optional vertex embedding.

    Build with :func:`build_complex`.  ``faces`` is in canonical order and
    ``index[face]`` is the canonical index.  ``facets_of[i]`` and
    ``cofacets_of[i]`` give codimension-one neighbours as index tuples.
    """

    def __init__(self, faces: Iterable[Face], embedding: Mapping[int, Sequence[float]] | None = None,
                 carrier: Mapping[Face, Face] | None = None, parent: Complex | None = None):
        faces = sorted(set(faces))
        kinds = {f.kind for f in faces if f.dim >= 2}
        if len(kinds) > 1:
            raise ComplexError("mixed simplex and cube faces")
        if kinds:
            self.kind = kinds.pop()
        else:  # low-dimensional: keep the kind only when every face agrees
            self.kind = CUBE if faces and all(f.kind == CUBE for f in faces) else SIMPLEX
        if self.kind == CUBE:
            # edges and vertices are cubes too; normalise the low-dimensional kinds
            faces = sorted({Face(CUBE, f.corners) if f.kind != CUBE else f for f in faces})
        elif any(f.kind == CUBE for f in faces):
            faces = sorted({Face(SIMPLEX, f.corners) for f in faces})
        self.faces: tuple[Face, ...] = tuple(faces)
        self.index: dict[Face, int] = {f: i for i, f in enumerate(self.faces)}
        self.dims = np.array([f.dim for f in self.faces], dtype=int)
        facets_of = []
        cofacets: list[list[int]] = [[] for _ in self.faces]
        for i, f in enumerate(self.faces):
            idx = []
            for g in f.facets():
                j = self.index.get(g)
                if j is None:
                    raise ComplexError(f"{f} is missing its face {g}")
                idx.append(j)
                cofacets[j].append(i)
            facets_of.append(tuple(sorted(idx)))
        self.facets_of: tuple[tuple[int, ...], ...] = tuple(facets_of)
        self.cofacets_of: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(c)) for c in cofacets)
        self.embedding = None
        if embedding is not None:
            self.embedding = {int(v): np.asarray(x, dtype=float) for v, x in embedding.items()}
            missing = [v for v in self.vertices if v not in self.embedding]
            if missing:
                raise ComplexError(f"embedding misses vertices {missing[:5]}")
        self.carrier = dict(carrier) if carrier else None
        self.parent = parent

    # -- basic queries -------------------------------------------------
    def __len__(self):
        return len(self.faces)

    def __contains__(self, face: Face):
        return face in self.index

    def __iter__(self):
        return iter(self.faces)

    def __repr__(self):
        return f"<Complex {self.kind} f={self.f_vector}>"

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(f.verts[0] for f in self.faces if f.dim == 0))

    @cached_property
    def dim(self) -> int:
        return int(self.dims.max()) if len(self.faces) else -1

    @cached_property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.dims, minlength=self.dim + 1))

    @cached_property
    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.f_vector))

    @cached_property
    def maximal(self) -> tuple[int, ...]:
        """Indices of facets (faces with no coface)."""
        return tuple(i for i in range(len(self.faces)) if not self.cofacets_of[i])

    @cached_property
    def hash(self) -> str:
        return face_set_hash(self.faces)

    def vertex_face(self, v: int) -> Face:
        return Face(self.kind, (v,))

    def faces_of_dim(self, d: int) -> list[int]:
        return [i for i in range(len(self.faces)) if self.dims[i] == d]

    def cofaces(self, i: int, strict: bool = True) -> set[int]:
        """All faces containing face ``i`` (upward closure in the Hasse diagram)."""
        out = set() if strict else {i}
        stack = list(self.cofacets_of[i])
        while stack:
            j = stack.pop()
            if j not in out:
                out.add(j)
                stack.extend(self.cofacets_of[j])
        return out

    def closure(self, indices: Iterable[int]) -> set[int]:
        out = set()
        stack = list(indices)
        while stack:
            j = stack.pop()
            if j not in out:
                out.add(j)
                stack.extend(self.facets_of[j])
        return out

    def coords(self, face: Face) -> np.ndarray:
        """Corner coordinates of an embedded face, in corner order."""
        if self.embedding is None:
            raise ComplexError("complex has no embedding")
        return np.array([self.embedding[v] for v in face.corners])

    def barycenter(self, face: Face) -> np.ndarray:
        return self.coords(face).mean(axis=0)

    def facet_faces(self) -> list[Face]:
        return [self.faces[i] for i in self.maximal]

    def sub(self, indices: Iterable[int]) -> Subcomplex:
        return Subcomplex(self, frozenset(indices))

    def whole(self) -> Subcomplex:
        return Subcomplex(self, frozenset(range(len(self.faces))))

    def restrict(self, faces: Iterable[Face]) -> Complex:
        """Standalone complex on the given (closed) face set, keeping embedding."""
        faces = list(faces)
        emb = None
        if self.embedding is not None:
            vs = {v for f in faces for v in f.verts}
            emb = {v: self.embedding[v] for v in vs}
        car = None
        if self.carrier is not None:
            car = {f: self.carrier[f] for f in faces}
        return Complex(faces, emb, car, self.parent)


@dataclass(frozen=True)
class Subcomplex:
    """A face subset of ``parent``, referenced by canonical indices."""

    parent: Complex
    members: frozenset[int]

    def __post_init__(self):
        for i in self.members:
            for j in self.parent.facets_of[i]:
                if j not in self.members:
                    raise ComplexError(
                        f"subcomplex not closed: {self.parent.faces[i]} lacks {self.parent.faces[j]}")

    def __len__(self):
        return len(self.members)

    def __contains__(self, face):
        if isinstance(face, Face):
            i = self.parent.index.get(face)
            return i is not None and i in self.members
        return face in self.members

    @property
    def faces(self) -> list[Face]:
        return [self.parent.faces[i] for i in sorted(self.members)]

    def to_complex(self) -> Complex:
        return self.parent.restrict(self.faces)

    @property
    def hash(self) -> str:
        return face_set_hash(self.faces)


def build_complex(facets: Iterable[Face], embedding: Mapping[int, Sequence[float]] | None = None) -> Complex:
    """Closure of ``facets`` under taking faces.

    Raises :class:`ComplexError` on mixed kinds, malformed cubes or facets
    whose intersection is not a common face.
    """
    facets = list(facets)
    kinds = {f.kind for f in facets if f.dim >= 2}
    if len(kinds) > 1:
        raise ComplexError("mixed simplex and cube facets")
    kind = kinds.pop() if kinds else (facets[0].kind if facets else SIMPLEX)
    facets = [f if f.kind == kind else Face(kind, f.corners) for f in facets]
    faces: set[Face] = set()
    by_verts: dict[tuple[int, ...], Face] = {}
    for f in facets:
        for g in f.subfaces():
            other = by_verts.get(g.verts)
            if other is not None and other.corners != g.corners:
                raise ComplexError(f"two different cells on vertex set {g.verts}")
            by_verts[g.verts] = g
            faces.add(g)
    if kind == CUBE:
        _check_cube_intersections(facets, by_verts)
    return Complex(faces, embedding)


def _check_cube_intersections(facets: list[Face], by_verts: dict) -> None:
    # vertex sets of simplices are automatically faces of both; cubes need a check
    containing: dict[int, list[int]] = {}
    for i, f in enumerate(facets):
        for v in f.verts:
            containing.setdefault(v, []).append(i)
    checked = set()
    for idx in containing.values():
        for a, b in combinations(idx, 2):
            if (a, b) in checked:
                continue
            checked.add((a, b))
            common = tuple(sorted(set(facets[a].verts) & set(facets[b].verts)))
            g = by_verts.get(common)
            if g is None or common not in {h.verts for h in facets[a].subfaces()} \
                    or common not in {h.verts for h in facets[b].subfaces()}:
                raise ComplexError(f"{facets[a]} and {facets[b]} meet in a non-face {common}")


# -- local subcomplexes ------------------------------------------------------

def _face_index(face: Face | int, C: Complex) -> int:
    if isinstance(face, Face):
        i = C.index.get(face)
        if i is None:
            raise ComplexError(f"{face} is not a face of the complex")
        return i
    if not 0 <= face < len(C):
        raise ComplexError(f"face index {face} out of range")
    return int(face)


def star(sigma: Face | int, C: Complex) -> Subcomplex:
    """Closure of all faces containing ``sigma``."""
    i = _face_index(sigma, C)
    return C.sub(C.closure(C.cofaces(i, strict=False)))


def link(sigma: Face | int, C: Complex) -> Complex:
    """Link of ``sigma`` as a simplicial complex.

    Simplicial complexes: ``{tau : tau and sigma disjoint, tau * sigma in C}``
    on the original vertex ids.  Cube complexes: one link vertex per
    ``(dim sigma + 1)``-cube containing ``sigma`` (labelled by its canonical
    index in ``C``); each cube containing ``sigma`` spans the simplex of its
    such faces.
    """
    i = _face_index(sigma, C)
    s = C.faces[i]
    up = C.cofaces(i)
    if C.kind == SIMPLEX:
        sv = set(s.verts)
        faces = [Face(SIMPLEX, tuple(v for v in C.faces[j].verts if v not in sv)) for j in up]
        faces = set(faces)
        emb = None
        if C.embedding is not None:
            emb = {v: C.embedding[v] for f in faces for v in f.verts}
        return Complex(faces, emb)
    faces = set()
    for j in up:
        rays = [k for k in C.closure([j]) if C.dims[k] == s.dim + 1 and i in C.facets_of[k]]
        faces.add(Face(SIMPLEX, tuple(rays)))
    out = set()
    for f in faces:
        out |= f.subfaces()
    return Complex(out)


def link_vertex_faces(sigma: Face | int, C: Complex) -> dict[Face, int]:
    """For a simplicial ``C``, map each link face to the coface ``sigma * link_face``."""
    i = _face_index(sigma, C)
    sv = set(C.faces[i].verts)
    return {Face(SIMPLEX, tuple(v for v in C.faces[j].verts if v not in sv)): j for j in C.cofaces(i)}


def free_faces(C: Complex, members: Iterable[int] | None = None) -> list[tuple[Face, Face]]:
    """Pairs ``(sigma, Sigma)`` with ``Sigma`` the unique strict coface of ``sigma``."""
    alive = set(range(len(C))) if members is None else set(members)
    out = []
    for i in sorted(alive):
        up = [j for j in C.cofacets_of[i] if j in alive]
        if len(up) == 1 and not any(k in alive for k in C.cofacets_of[up[0]]):
            out.append((C.faces[i], C.faces[up[0]]))
    return out


# -- subdivisions --------------------------------------------------------------

def derived_subdivision(C: Complex) -> Complex:
    """Barycentric subdivision: one vertex per face, simplices are chains.

    The vertex standing for face ``i`` of ``C`` gets id ``i``.  The result
    carries ``carrier`` (sd face -> top face of its chain) and ``parent = C``;
    embedded complexes get barycentric coordinates.
    """
    chains: list[list[tuple[int, ...]]] = [[] for _ in range(len(C))]
    for i in np.argsort(C.dims, kind="stable"):
        i = int(i)
        cs = [(i,)]
        for j in sorted(C.closure(C.facets_of[i])):
            cs.extend(ch + (i,) for ch in chains[j])
        chains[i] = cs
    faces = []
    carrier = {}
    for i in range(len(C)):
        for ch in chains[i]:
            f = Face(SIMPLEX, ch)
            faces.append(f)
            carrier[f] = C.faces[i]
    emb = None
    if C.embedding is not None:
        emb = {i: C.barycenter(C.faces[i]) for i in range(len(C))}
    return Complex(faces, emb, carrier, parent=C)


def sd_face(chain: Iterable[int]) -> Face:
    """The simplex of sd C spanned by a chain of face indices of C."""
    return Face(SIMPLEX, tuple(chain))


def derived_neighborhood(D: Subcomplex | Iterable[int], C: Complex, sdC: Complex | None = None) -> Subcomplex:
    """Union of the stars in sd C of the faces of sd D.

    Equals the closure of all chains meeting D.  ``sdC`` may be passed to
    reuse an existing subdivision (it must be ``derived_subdivision(C)``).
    """
    if isinstance(D, Subcomplex):
        if D.parent is not C:
            raise ComplexError("D is not a subcomplex of C")
        members = D.members
    else:
        members = frozenset(D)
        C.sub(members)  # closure check
    if sdC is None:
        sdC = derived_subdivision(C)
    hit = [k for k, f in enumerate(sdC.faces) if any(v in members for v in f.verts)]
    return sdC.sub(sdC.closure(hit))


def sd_subcomplex(D: Subcomplex, sdC: Complex) -> Subcomplex:
    """sd D as a subcomplex of sd C."""
    members = D.members
    return sdC.sub(k for k, f in enumerate(sdC.faces) if all(v in members for v in f.verts))


# -- text format ---------------------------------------------------------------

def write_complex(C: Complex, all_faces: bool = False) -> str:
    """Canonical text: sorted ``kind dim v0 v1 ...`` lines then ``coord`` lines."""
    faces = C.faces if all_faces else C.facet_faces()
    lines = sorted(f.line() for f in faces)
    if C.embedding is not None:
        for v in C.vertices:
            lines.append("coord %d %s" % (v, " ".join(repr(float(x)) for x in C.embedding[v])))
    return "\n".join(lines) + "\n"


def read_complex(text: str) -> Complex:
    facets = []
    emb = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "coord":
                emb[int(tok[1])] = [float(x) for x in tok[2:]]
            elif tok[0] in (SIMPLEX, CUBE):
                dim = int(tok[1])
                f = Face(tok[0], tuple(int(x) for x in tok[2:]))
                if f.dim != dim:
                    raise ComplexError(f"declared dim {dim} but {len(tok) - 2} vertices")
                facets.append(f)
            else:
                raise ComplexError(f"unknown record {tok[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ComplexError(f"line {lineno}: {exc}") from exc
    return build_complex(facets, emb or None)


def boundary_matrix(C: Complex, k: int) -> np.ndarray:
    """Unsigned-orientation-free Z/Q boundary matrix from k-faces to (k-1)-faces.

    Simplices use the alternating sign convention; cubes use the standard
    (-1)^axis * (top - bottom) convention.
    """
    rows = {i: r for r, i in enumerate(C.faces_of_dim(k - 1))}
    cols = C.faces_of_dim(k)
    M = np.zeros((len(rows), len(cols)))
    for c, i in enumerate(cols):
        f = C.faces[i]
        if f.kind == SIMPLEX:
            for pos, v in enumerate(f.verts):
                g = Face(SIMPLEX, tuple(w for w in f.verts if w != v))
                M[rows[C.index[g]], c] += (-1) ** pos
        else:
            for axis in range(f.dim):
                for bit in (0, 1):
                    g = Face(CUBE, _drop_axis(f.corners, axis, bit))
                    M[rows[C.index[g]], c] += (-1) ** axis * (1 if bit else -1)
    return M


def betti_numbers(C: Complex) -> tuple[int, ...]:
    """Rational Betti numbers."""
    ranks = [0] * (C.dim + 2)
    for k in range(1, C.dim + 1):
        M = boundary_matrix(C, k)
        ranks[k] = int(np.linalg.matrix_rank(M)) if M.size else 0
    return tuple(C.f_vector[k] - ranks[k] - ranks[k + 1] for k in range(C.dim + 1))
