"""Collapsing barycentric subdivisions vertex by vertex along a derived order."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from .certificate import CertificateError, CollapseCertificate, Replay, certify, certify_faces
from .collapse import (DEFAULT_BUDGET, collapse_onto, cone_collapse, link_collapse_lift)
from .complex import (SIMPLEX, Complex, ComplexError, Face, Subcomplex, derived_neighborhood,
                      derived_subdivision, link)
from . import geometry
from .geometry import (PERTURB_RETRIES, DistanceFunction, MetricEvaluator,
                       UniquenessViolation)


class OrderCycle(ValueError):
    def __init__(self, cycle):
        super().__init__(f"derived-order relation has a cycle: {cycle}")
        self.cycle = cycle


class ScheduleError(RuntimeError):
    """A vertex link failed to collapse; carries the offending face of C."""

    def __init__(self, message: str, face: Face | None = None, case: int | None = None):
        super().__init__(message)
        self.face = face
        self.case = case


class AngleTie(ArithmeticError):
    pass


# -- derived orders ---------------------------------------------------------------------

@dataclass
class DerivedOrder:
    """Linear order on the vertices of sd C (= faces of C, by canonical index)."""

    complex: Complex
    seeds: list[Face]
    order: list[int]
    relation: nx.DiGraph

    @property
    def position(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.order)}

    def faces(self) -> list[Face]:
        return [self.complex.faces[i] for i in self.order]


def chain_order(S: Sequence[Face]) -> Callable[[Face, Face], bool]:
    """The total order in which ``S`` is listed."""
    rank = {F: k for k, F in enumerate(S)}
    return lambda a, b: rank[a] < rank[b]


def derived_order(C: Complex, S: Sequence[Face], prec: Callable[[Face, Face], bool] | None = None
                  ) -> DerivedOrder:
    """Extend a partial order on seed faces to all faces of C.

    For every face σ: the ≺-least seed among the faces of σ (if unique and
    not σ itself) comes before σ, and σ comes before all of its other strict
    faces.  Seeds keep their order.  The relation's transitive closure must
    be acyclic; the linear extension is Kahn's, smallest canonical index
    first.
    """
    prec = prec or (lambda a, b: False)
    seeds = [C.index[F] for F in S]
    seedset = set(seeds)
    G = nx.DiGraph()
    G.add_nodes_from(range(len(C)))
    for a in seeds:
        for b in seeds:
            if a != b and prec(C.faces[a], C.faces[b]):
                G.add_edge(a, b)
    for s in range(len(C)):
        below = C.closure(C.facets_of[s])
        cand = [t for t in below if t in seedset]
        if s in seedset:
            cand.append(s)
        least = None
        if cand:
            mins = [t for t in cand if not any(prec(C.faces[u], C.faces[t]) for u in cand if u != t)]
            # a seed below all of its seed faces is its own least seed
            if len(mins) == 1 and mins[0] != s:
                least = mins[0]
        for t in below:
            if t == least:
                G.add_edge(t, s)
            else:
                G.add_edge(s, t)
    if not nx.is_directed_acyclic_graph(G):
        raise OrderCycle([(C.faces[a], C.faces[b]) for a, b in nx.find_cycle(G)])
    order = list(nx.lexicographical_topological_sort(G))
    return DerivedOrder(C, list(S), order, G)


# -- M-set ----------------------------------------------------------------------------

@dataclass
class MSet:
    faces: list[Face]
    values: list[float]

    def __contains__(self, F):
        return F in set(self.faces)

    def __len__(self):
        return len(self.faces)


def m_set(C: Complex, f: MetricEvaluator, region: Callable[[Face], bool] | None = None) -> MSet:
    """Faces (inside ``region``) whose own minimum of f lies in their relative interior.

    Every vertex qualifies; a higher face qualifies when the nearest point
    is not on its boundary.  Sorted by minimum value; ties within δ raise
    :class:`UniquenessViolation`.
    """
    out = []
    for i, F in enumerate(C.faces):
        if region is not None and not region(F):
            continue
        val, _, carrier = f.face_min(i)
        if carrier == F:
            out.append((val, F))
    out.sort(key=lambda t: (t[0], t[1]))
    for (a, F), (b, G) in zip(out, out[1:]):
        if b - a < geometry.DELTA:
            raise UniquenessViolation(f"{F} and {G} have equal minima")
    return MSet([F for _, F in out], [v for v, _ in out])


# -- descending links --------------------------------------------------------------------

@dataclass
class DescendingLink:
    vertex: int
    direction: np.ndarray
    faces: Complex
    edges: dict[int, Face] = field(default_factory=dict)


def descending_link(v: int, C: Complex, direction) -> DescendingLink:
    """Full subcomplex of lk(v, C) on the edges at v at angle < π/2 to ``direction``."""
    if C.embedding is None:
        raise ComplexError("descending links need an embedding")
    nu = np.asarray(direction, dtype=float)
    if np.linalg.norm(nu) == 0:
        raise ValueError("direction must be nonzero")
    nu = nu / np.linalg.norm(nu)
    vf = C.vertex_face(v)
    L = link(vf, C)
    x = C.embedding[v]
    keep = set()
    ends = {}
    for w in L.vertices:
        if C.kind == SIMPLEX:
            end, edge = w, Face(SIMPLEX, tuple(sorted((v, w))))
        else:
            edge = C.faces[w]
            end = edge.verts[0] if edge.verts[1] == v else edge.verts[1]
        u = C.embedding[end] - x
        c = float(u @ nu) / float(np.linalg.norm(u))
        if abs(c) < geometry.DELTA:
            raise AngleTie(f"edge {edge} is orthogonal to the direction")
        if c > 0:
            keep.add(w)
            ends[w] = edge
    faces = [F for F in L.faces if set(F.verts) <= keep]
    return DescendingLink(v, nu, Complex(faces), ends)


# -- the scheduler ---------------------------------------------------------------------------

def _boundary_faces(C: Complex) -> set[int]:
    """Faces of the boundary: the closure of all faces with exactly one cofacet."""
    ridges = [i for i in range(len(C)) if len(C.cofacets_of[i]) == 1]
    return C.closure(ridges)


def _cone_apex(L: Complex, prefer: int | None) -> int | None:
    tops = [L.faces[i].verts for i in L.maximal]
    if prefer is not None and all(prefer in t for t in tops):
        return prefer
    common = set(tops[0]).intersection(*map(set, tops[1:])) if tops else set()
    return min(common) if common else None


def _link_in(alive: set[int], v: int, sd: Complex) -> tuple[Complex, list[Face]]:
    """lk(v) inside the alive part of sd C, plus the closed star faces."""
    vf = sd.index[Face(SIMPLEX, (v,))]
    up = [j for j in sd.cofaces(vf) if j in alive]
    star_faces = set()
    link_faces = set()
    for j in up:
        F = sd.faces[j]
        star_faces |= F.subfaces()
        link_faces.add(Face(SIMPLEX, tuple(u for u in F.verts if u != v)))
    closed = set()
    for G in link_faces:
        closed |= G.subfaces()
    return Complex(closed), sorted(star_faces | {Face(SIMPLEX, (v,))})


def sd_collapse_schedule(C: Complex, f: MetricEvaluator, boundary: Subcomplex | None = None,
                         budget: int = DEFAULT_BUDGET, sdC: Complex | None = None,
                         region: Subcomplex | None = None) -> CollapseCertificate:
    """Certificate sd C ↘ v_0 by deleting sd vertices from the top of a derived order.

    The seeds are the M-set ordered by minimum value.  For each vertex v_i
    (a face τ of C) the link in the current complex is collapsed: faces
    outside the M-set (and positive-dimensional ones inside it) see a cone
    whose apex is the least seed of τ, handled by the cone lemma; M-set
    vertices see the order complex of their upper faces not minimised at
    them, collapsed by greedy and then exhaustive search.  Each link
    collapse is lifted to sd C.

    Near-ties in the M-set perturb a distance basepoint (as for matchings);
    the function actually used is returned in ``meta["function"]``.

    ``region`` (a subcomplex R of C, default all of C) restricts the start
    to its derived neighbourhood N(R, C).  ``boundary`` (a subcomplex of the
    boundary of C, normally R restricted to the boundary) is kept: its
    derived neighbourhood in the subdivided boundary becomes the collapse
    target.  With ``boundary=None`` steps at boundary faces are only
    labelled (cases 3/4).
    """
    sd = derived_subdivision(C) if sdC is None else sdC
    for attempt in range(PERTURB_RETRIES + 1):
        try:
            M = m_set(C, f)
            break
        except UniquenessViolation:
            if attempt == PERTURB_RETRIES or not isinstance(f, DistanceFunction):
                raise
            f = f.perturbed(attempt)
    mset = set(M.faces)
    D = derived_order(C, M.faces, chain_order(M.faces))
    bd = _boundary_faces(C)
    keep: set[int] = set()
    if boundary is not None:
        bmem = boundary.members if boundary.parent is C else {C.index[F] for F in boundary.faces}
        for k, F in enumerate(sd.faces):
            if all(u in bd for u in F.verts) and any(u in bmem for u in F.verts):
                keep |= sd.closure([k])
    if region is not None:
        start = derived_neighborhood(region, C, sd).members
    else:
        start = frozenset(range(len(sd)))
    order = [t for t in D.order if sd.index[Face(SIMPLEX, (t,))] in start]
    r = Replay(sd, start)
    steps: list[tuple[int, int]] = []
    log = []
    for pos in range(len(order) - 1, 0, -1):
        t = order[pos]
        tau = C.faces[t]
        case = (1 if tau in mset else 2) + (2 if t in bd else 0)
        L, star_faces = _link_in(r.alive, t, sd)
        if not L.faces:
            raise ScheduleError(f"vertex for {tau} is isolated", tau, case)
        S_faces = [G for G in L.faces
                   if sd.index[Face(SIMPLEX, tuple(sorted(G.verts + (t,))))] in keep]
        seeds_below = [u for u in D.relation.predecessors(t) if u in C.closure(C.facets_of[t])]
        apex = _cone_apex(L, seeds_below[0] if seeds_below else None) if not S_faces else None
        if apex is not None:
            base = L.restrict(G for G in L.faces if apex not in G.verts)
            if len(base) == 0:
                lc = certify(L, [])
            else:
                cc = cone_collapse(base, base.sub([]), apex)
                lc = certify_faces(L, cc.face_steps())
            method = "cone"
        else:
            target = L.sub(L.index[G] for G in S_faces) if S_faces else None
            res = collapse_onto(L, target, budget=budget)
            if not res:
                raise ScheduleError(f"link of {tau} (case {case}): {res.status}", tau, case)
            lc = res.certificate
            method = "search"
        Kstar = Complex(star_faces)
        lifted = link_collapse_lift(t, Kstar, S_faces or None, lc)
        for a, b in lifted.face_steps():
            ia, ib = sd.index[a], sd.index[b]
            why = r.check(ia, ib)
            if why:
                raise ScheduleError(f"lifted step at {tau}: {why}", tau, case)
            r.remove(ia, ib)
            steps.append((ia, ib))
        entry = {"vertex": t, "case": case, "face": tau, "method": method, "steps": len(lifted)}
        if boundary is None and case >= 3:
            entry["note"] = "boundary case"
        log.append(entry)
    expected = keep | sd.closure([sd.index[Face(SIMPLEX, (order[0],))]]) if not keep else keep
    if r.alive != expected:
        extra = sorted(r.alive - expected); missing = sorted(expected - r.alive)
        raise ScheduleError(f"schedule did not end at the expected complex: "
                            f"{len(extra)} extra, {len(missing)} missing faces {[sd.faces[i] for i in missing][:6]}", C.faces[order[0]])
    return certify(sd, steps, start if region is not None else None, method="sd-schedule",
                   schedule=log, first=order[0], function=f)


def write_schedule(cert: CollapseCertificate) -> str:
    lines = [f"schedule {e['vertex']} {e['case']} {e['method']} {e['face'].line()}"
             for e in cert.meta.get("schedule", [])]
    return "\n".join(lines) + ("\n" if lines else "")


# -- Hudson lifting -------------------------------------------------------------------------

def _carrier_map(D: Complex, C: Complex) -> dict[Face, Face]:
    if D.carrier is not None:
        car = dict(D.carrier)
    elif set(D.faces) == set(C.faces):
        car = {F: F for F in D.faces}
    else:
        raise ComplexError("D carries no carrier map into C")
    for F in D.faces:
        c = car.get(F)
        if c is None or c not in C:
            raise ComplexError(f"carrier of {F} is not a face of C")
        cf = c.subfaces()
        for G in F.facets():
            if car[G] not in cf:
                raise ComplexError(f"carrier map is not monotone at {G} ⊂ {F}")
    return car


def hudson_lift(C: Complex, cert: CollapseCertificate, D: Complex, budget: int = DEFAULT_BUDGET
                ) -> CollapseCertificate:
    """sd D ↘ sd R(D, C') from a certificate C ↘ C' and a subdivision D of C.

    Each elementary collapse of C removes two open cells; the sd faces whose
    carrier chain touches them are collapsed away by greedy, then exhaustive,
    search from the current stage onto the next.
    """
    if cert.complex.hash != C.hash:
        raise CertificateError("certificate belongs to a different complex")
    car = _carrier_map(D, C)
    sdD = derived_subdivision(D)
    alive_C = cert.start_members()

    def stage(members):
        names = {C.faces[i] for i in members}
        okD = {j for j, F in enumerate(D.faces) if car[F] in names}
        return frozenset(k for k, F in enumerate(sdD.faces) if all(u in okD for u in F.verts))

    current = stage(alive_C)
    steps: list[tuple[int, int]] = []
    for a, b in cert.steps:
        alive_C = alive_C - {a, b}
        nxt = stage(alive_C)
        res = collapse_onto(sdD, nxt, start=current, budget=budget)
        if not res:
            raise CertificateError(f"lift of ({C.faces[a]}, {C.faces[b]}): {res.status}")
        steps += res.certificate.steps
        current = nxt
    return certify(sdD, steps, stage(cert.start_members()), method="hudson")
