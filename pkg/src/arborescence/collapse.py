"""Collapse search, the constructive collapse lemmas, and filtrations."""
from __future__ import annotations

import heapq
import sys
import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .certificate import (CertificateError, CollapseCertificate, Replay, certify,
                          certify_faces, set_hash, transfer, verify_certificate)
from .complex import (CUBE, SIMPLEX, Complex, ComplexError, Face, Subcomplex,
                      derived_neighborhood, derived_subdivision, link)
from . import geometry
from .geometry import MetricEvaluator

DEFAULT_BUDGET = 10_000_000

CERTIFICATE = "certificate"
IMPOSSIBLE = "impossible"
BUDGET_EXCEEDED = "budget-exceeded"


class UnsupportedCell(ValueError):
    pass


class JoinNotRealizable(ValueError):
    pass


class HypothesisFailure(RuntimeError):
    """A precondition of a constructive collapse fails on the given input."""


class FiltrationStuck(RuntimeError):
    def __init__(self, stage: int, status: str, stuck: frozenset[int] | None = None):
        super().__init__(f"stage {stage} -> {stage - 1}: {status}")
        self.stage = stage
        self.status = status
        self.stuck = stuck


def _members(C: Complex, sub) -> frozenset[int] | None:
    """Normalise a subcomplex argument to an index set (``None`` stays ``None``)."""
    if sub is None:
        return None
    if isinstance(sub, Subcomplex):
        if sub.parent is not C:
            return frozenset(C.index[F] for F in sub.faces)
        return sub.members
    out = []
    for s in sub:
        out.append(C.index[s] if isinstance(s, Face) else int(s))
    members = frozenset(out)
    C.sub(members)  # closure check
    return members


def _reached(alive: set[int], target: frozenset[int] | None, C: Complex) -> bool:
    if target is None:
        return len(alive) == 1 and C.dims[next(iter(alive))] == 0
    return alive == target


# -- greedy ------------------------------------------------------------------------

@dataclass
class GreedyResult:
    certificate: CollapseCertificate | None
    stuck: frozenset[int] | None
    ops: int

    @property
    def ok(self) -> bool:
        return self.certificate is not None


def greedy_collapse(C: Complex, target=None, tie_break: int | None = None, start=None) -> GreedyResult:
    """Remove free pairs outside ``target`` until none is left.

    ``target=None`` asks for a single vertex.  Free faces are taken highest
    dimension first, then by canonical index (or by a seeded random priority
    when ``tie_break`` is given).  The work is proportional to the number of
    faces outside the target, not to the size of the complex.
    """
    tgt = _members(C, target)
    st = _members(C, start)
    r = Replay(C, st)
    if tgt is not None and not tgt <= r.alive:
        raise ComplexError("target is not contained in the start complex")
    removable = r.alive - tgt if tgt is not None else r.alive
    if tie_break is None:
        key = lambda i: (-int(C.dims[i]), i)  # noqa: E731
    else:
        prio = np.random.default_rng(tie_break).random(len(C))
        key = lambda i: (-int(C.dims[i]), prio[i], i)  # noqa: E731
    heap = [key(i) + (i,) for i in removable]
    heapq.heapify(heap)
    steps = []
    while heap:
        i = heapq.heappop(heap)[-1]
        if i not in r.alive:
            continue
        j = r.coface_if_free(i)
        if j is None or (tgt is not None and j in tgt):
            continue
        steps.append((i, j))
        r.remove(i, j)
        # freeness can only change for faces one or two dimensions below
        for x in (i, j):
            for g in C.facets_of[x]:
                for h in (g, *C.facets_of[g]):
                    if h in r.alive and (tgt is None or h not in tgt):
                        heapq.heappush(heap, key(h) + (h,))
    if _reached(r.alive, tgt, C):
        return GreedyResult(certify(C, steps, st, method="greedy"), None, r.ops)
    return GreedyResult(None, frozenset(r.alive), r.ops)


# -- exhaustive search ---------------------------------------------------------------

@dataclass
class SearchResult:
    status: str
    certificate: CollapseCertificate | None = None
    nodes: int = 0
    reason: str = ""

    def __bool__(self):
        return self.status == CERTIFICATE


class _Budget(Exception):
    pass


def _euler(C: Complex, members: Iterable[int]) -> int:
    return int(sum((-1) ** int(C.dims[i]) for i in members))


def exhaustive_collapsibility(C: Complex, target=None, budget: int = DEFAULT_BUDGET,
                              start=None) -> SearchResult:
    """Decide whether ``start`` (default all of C) collapses onto ``target``.

    Depth-first search over free-pair choices, moves ordered by (dimension
    descending, canonical index), with failed face sets memoised as bitsets.
    ``impossible`` is exact: the reachable state space was exhausted (or an
    invariant rules the target out).  ``target=None`` means some vertex.
    """
    tgt = _members(C, target)
    st = _members(C, start)
    r = Replay(C, st)
    if tgt is not None and not tgt <= r.alive:
        raise ComplexError("target is not contained in the start complex")
    goal_chi = 1 if tgt is None else _euler(C, tgt)
    if _euler(C, r.alive) != goal_chi:
        return SearchResult(IMPOSSIBLE, reason="Euler characteristic differs from the target's")
    if _reached(r.alive, tgt, C):
        return SearchResult(CERTIFICATE, certify(C, [], st, method="exhaustive"))
    order = sorted(r.alive - (tgt or frozenset()), key=lambda i: (-int(C.dims[i]), i))
    failed: set[int] = set()
    steps: list[tuple[int, int]] = []
    nodes = 0
    mask = 0
    for i in r.alive:
        mask |= 1 << i

    def moves():
        out = []
        for i in order:
            if i in r.alive:
                j = r.coface_if_free(i)
                if j is not None and (tgt is None or j not in tgt):
                    out.append((i, j))
        return out

    def search() -> bool:
        nonlocal nodes, mask
        nodes += 1
        if nodes > budget:
            raise _Budget
        if _reached(r.alive, tgt, C):
            return True
        if mask in failed:
            return False
        for i, j in moves():
            r.remove(i, j)
            bit = (1 << i) | (1 << j)
            mask ^= bit
            steps.append((i, j))
            if search():
                return True
            steps.pop()
            mask ^= bit
            r.alive.add(i)
            r.alive.add(j)
        failed.add(mask)
        return False

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, len(C) + 1000))
    try:
        found = search()
    except _Budget:
        return SearchResult(BUDGET_EXCEEDED, nodes=nodes)
    finally:
        sys.setrecursionlimit(limit)
    if found:
        return SearchResult(CERTIFICATE, certify(C, steps, st, method="exhaustive"), nodes)
    return SearchResult(IMPOSSIBLE, nodes=nodes, reason="search space exhausted")


def collapse_onto(C: Complex, target=None, start=None, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """Greedy first, exhaustive search if greedy gets stuck."""
    g = greedy_collapse(C, target, start=start)
    if g.ok:
        return SearchResult(CERTIFICATE, g.certificate, 0)
    return exhaustive_collapsibility(C, target, budget, start)


# -- constructive lemmas ---------------------------------------------------------------

def cone(C: Complex, apex: int) -> Complex:
    """The simplicial cone ``apex * C``."""
    if C.kind != SIMPLEX or any(F.kind == CUBE and F.dim >= 2 for F in C.faces):
        raise JoinNotRealizable("cones are built over simplicial complexes only")
    if apex in C.vertices:
        raise JoinNotRealizable(f"apex {apex} is already a vertex")
    faces = set(C.faces) | {Face(SIMPLEX, (apex,))}
    faces |= {Face(SIMPLEX, F.verts + (apex,)) for F in C.faces}
    return Complex(faces)


def cone_collapse(C: Complex, C_sub, apex: int) -> CollapseCertificate:
    """Certificate ``apex*C`` ↘ ``apex*C'``: pair each face outside C' with its cone.

    Faces are removed by decreasing dimension, so every coface of a removed
    face inside C is already gone.  The certificate lives on ``cone(C, apex)``.
    """
    K = cone(C, apex)
    keep = _members(C, C_sub)
    out = [i for i in range(len(C)) if i not in keep]
    out.sort(key=lambda i: (-int(C.dims[i]), i))
    steps = [(C.faces[i], Face(SIMPLEX, C.faces[i].verts + (apex,))) for i in out]
    return certify_faces(K, steps, method="cone")


def link_collapse_lift(v: int, C: Complex, S=None, link_cert: CollapseCertificate | None = None
                       ) -> CollapseCertificate:
    """Lift ``lk(v,C)`` ↘ S to ``C`` ↘ ``(C - v) ∪ v*S``.

    Each link step ``(s, S')`` becomes ``(v*s, v*S')``.  When S is a single
    vertex ``w`` and no explicit ``S`` was given, the step ``(v, vw)`` is
    appended, giving ``C`` ↘ ``C - v``.
    """
    if C.kind != SIMPLEX:
        raise JoinNotRealizable("vertex links are lifted in simplicial complexes only")
    L = link(Face(SIMPLEX, (v,)), C)
    if link_cert is None:
        link_cert = certify(L, [])
    if not verify_certificate(link_cert):
        raise CertificateError("link certificate does not replay")
    if link_cert.complex.hash != L.hash or (link_cert.start is not None
                                           and len(link_cert.start) != len(link_cert.complex)):
        raise CertificateError("certificate is not a collapse of the whole link")
    end = link_cert.end_faces()
    if S is not None:
        want = set(S.faces if isinstance(S, Subcomplex) else S)
        if want != set(end):
            raise CertificateError("link certificate does not end at S")

    def j(F: Face) -> Face:
        return Face(SIMPLEX, tuple(sorted(F.verts + (v,))))

    steps = [(j(a), j(b)) for a, b in link_cert.face_steps()]
    if S is None and len(end) == 1 and end[0].dim == 0:
        steps.append((Face(SIMPLEX, (v,)), j(end[0])))
    return certify_faces(C, steps, method="link-lift")


def union_collapse(D: Complex, C: Complex, C_sub, cert: CollapseCertificate) -> CollapseCertificate:
    """Replay ``cert`` (C ↘ C') inside D ∪ C, giving D ∪ C ↘ D ∪ C'.

    Requires D ∩ C ⊆ C'; when C' ⊆ D the result ends at D.
    """
    keep = {C.faces[i] for i in _members(C, C_sub)}
    common = set(D.faces) & set(C.faces)
    if not common <= keep:
        raise HypothesisFailure(f"D ∩ C is not inside C': {sorted(common - keep)[:3]}")
    emb = None
    if D.embedding is not None and C.embedding is not None:
        emb = {**C.embedding, **D.embedding}
    U = Complex(set(D.faces) | set(C.faces), emb)
    if set(cert.end_faces()) != keep:
        raise CertificateError("certificate does not end at C'")
    return transfer(cert, U, method="union")


# -- polytope boundary shellings -------------------------------------------------------

def _cube_positions(P: Face) -> dict[int, int]:
    return {v: k for k, v in enumerate(P.corners)}


def _toggle(P: Face, G: Face, gen, pos) -> Face | None:
    """Partner of ``G`` under a toggle generator (a vertex for simplices, an axis for cubes)."""
    if P.kind == SIMPLEX:
        vs = set(G.verts) ^ {gen}
        return Face(SIMPLEX, tuple(sorted(vs))) if vs else None
    idx = {pos[v] for v in G.verts}
    bits = {k >> gen & 1 for k in idx}
    if len(bits) == 2:  # free along the axis: fix it at the value opposite the earlier side
        return None
    grown = idx | {k ^ (1 << gen) for k in idx}
    return _cube_from_positions(P, grown)


def _cube_from_positions(P: Face, idx: set[int]) -> Face:
    verts = sorted(P.corners[k] for k in idx)
    if len(verts) == 1:
        return Face(CUBE, tuple(verts))
    lo = min(idx)
    axes = [a for a in range(P.dim) if any((k ^ lo) >> a & 1 for k in idx)]
    corners = []
    for m in range(1 << len(axes)):
        k = lo
        for t, a in enumerate(axes):
            if m >> t & 1:
                k |= 1 << a
        corners.append(P.corners[k])
    return Face(CUBE, tuple(corners))


def _facet_order(P: Face, mu: Face) -> tuple[list[Face], list[Face]]:
    """Star facets of ``mu`` in ∂P, then the remaining facets ending at τ."""
    mv = set(mu.verts)
    facets = sorted(P.facets())
    star_f = [F for F in facets if mv <= set(F.verts)]
    if P.kind == SIMPLEX:
        rest = [F for F in facets if F not in star_f]
        return star_f, rest
    pos = _cube_positions(P)
    midx = {pos[v] for v in mu.verts}
    fixed = [a for a in range(P.dim) if len({k >> a & 1 for k in midx}) == 1]
    val = {a: next(iter(midx)) >> a & 1 for a in fixed}

    def facet(a, b):
        return _cube_from_positions(P, {k for k in range(1 << P.dim) if (k >> a & 1) == b})

    star_f = [facet(a, val[a]) for a in fixed]
    rest = [facet(a, b) for a in range(P.dim) if a not in val for b in (0, 1)]
    rest += [facet(a, 1 - val[a]) for a in fixed]
    return star_f, rest


def _new_face_pairs(P: Face, F: Face, earlier: list[Face]) -> list[tuple[Face, Face]]:
    """Match the faces of F lying in no earlier facet by a single toggle."""
    earlier_sets = [set(E.verts) for E in earlier]
    new = [G for G in F.subfaces() if not any(set(G.verts) <= E for E in earlier_sets)]
    newset = set(new)
    pos = _cube_positions(P) if P.kind == CUBE else None
    gens = sorted(F.verts) if P.kind == SIMPLEX else range(P.dim)
    for g in gens:
        pairs = []
        ok = True
        for G in new:
            H = _toggle(P, G, g, pos)
            if P.kind == SIMPLEX:
                if g in G.verts:
                    continue  # G is the upper member of its pair
            elif H is None:
                continue
            if H is None or H not in newset or H.dim != G.dim + 1:
                ok = False
                break
            pairs.append((G, H))
        if ok and 2 * len(pairs) == len(new):
            return pairs
    raise UnsupportedCell(f"no toggle matches the new faces of {F}")


def polytope_to_boundary_star(P: Face, mu: Face) -> CollapseCertificate:
    """Certificate P ↘ st(mu, ∂P) read off a shelling of ∂P.

    The shelling lists the facets of ∂P containing mu first and ends at a
    facet τ; the collapse removes (τ, P) and then, in reverse shelling order,
    the faces each non-star facet adds to its predecessors.  The
    continuation st(mu, ∂P) ↘ vertex is stored in ``meta["continuation"]``.
    """
    if P.kind not in (SIMPLEX, CUBE) or P.dim < 1:
        raise UnsupportedCell(f"cannot shell the boundary of {P}")
    if mu.kind != P.kind and mu.dim <= 1:
        mu = Face(P.kind, mu.corners)
    if mu == P or not set(mu.verts) < set(P.verts) or mu not in P.subfaces():
        raise ValueError(f"{mu} is not a strict face of {P}")
    K = Complex(P.subfaces())
    star_f, rest = _facet_order(P, mu)
    order = star_f + rest
    steps = [(rest[-1], P)]
    for k in range(len(order) - 2, len(star_f) - 1, -1):
        pairs = _new_face_pairs(P, order[k], order[:k])
        pairs.sort(key=lambda p: (-p[1].dim, p[1]))
        steps += pairs
    cert = certify_faces(K, steps, method="boundary-star")
    remaining = cert.end_members()
    cont = collapse_onto(K, None, start=remaining)
    if not cont:
        raise HypothesisFailure("boundary star did not collapse to a vertex")
    cert.meta["continuation"] = cont.certificate
    return cert


# -- polytopal gradient collapse ---------------------------------------------------------

def polytopal_gradient_collapse(C: Complex, f: MetricEvaluator) -> CollapseCertificate:
    """Collapse C to its f-minimal vertex one batch of maximal cells at a time.

    Each round takes a maximal cell σ maximising min f (ties within δ broken
    canonically), lets μ be the cell where that minimum is attained and
    collapses every maximal cell with minimum on μ onto its boundary star of
    μ.  A cell whose faces shared with the rest of the complex leave that
    star violates the hypothesis and raises :class:`HypothesisFailure`.
    """
    r = Replay(C)
    steps: list[tuple[int, int]] = []
    rounds = 0
    while len(r.alive) > 1:
        rounds += 1
        facets = sorted(i for i in r.alive if not any(j in r.alive for j in C.cofacets_of[i]))
        mins = {i: f.face_min(i) for i in facets}
        top = max(mins[i][0] for i in facets)
        sigma = min(i for i in facets if mins[i][0] > top - geometry.DELTA)
        mu = mins[sigma][2]
        if C.dims[sigma] == 0:
            raise HypothesisFailure(f"isolated vertex {C.faces[sigma]} left next to other faces")
        if mu == C.faces[sigma]:
            v = min(mu.verts, key=f.vertex_value)
            mu = Face(mu.kind, (v,))
        batch = [i for i in facets if mins[i][2] == mu] or [sigma]
        for P in batch:
            PF = C.faces[P]
            local = polytope_to_boundary_star(PF, mu)
            starset = set(local.end_faces())
            inside = PF.subfaces()
            for G in inside:
                if G == PF or G in starset:
                    continue
                if _has_outside_coface(C.index[G], inside, r, C):
                    raise HypothesisFailure(
                        f"{G} is shared with the rest of the complex but not in st({mu}, ∂{PF})")
            for a, b in local.face_steps():
                ia, ib = C.index[a], C.index[b]
                why = r.check(ia, ib)
                if why:
                    raise HypothesisFailure(why)
                r.remove(ia, ib)
                steps.append((ia, ib))
    return certify(C, steps, method="polytopal-gradient", rounds=rounds)


def _has_outside_coface(i: int, inside: set[Face], r: Replay, C: Complex) -> bool:
    stack = [i]
    seen = {i}
    while stack:
        for j in C.cofacets_of[stack.pop()]:
            if j in r.alive and j not in seen:
                if C.faces[j] not in inside:
                    return True
                seen.add(j)
                stack.append(j)
    return False


# -- filtrations --------------------------------------------------------------------------

@dataclass
class Filtration:
    """Ascending stages of one complex with certificates ``stages[i+1]`` ↘ ``stages[i]``."""

    complex: Complex
    stages: list[Subcomplex]
    certificates: list[CollapseCertificate] = field(default_factory=list)
    stats: list[dict] = field(default_factory=list)

    def verify(self) -> bool:
        if len(self.certificates) != len(self.stages) - 1:
            return False
        for k, cert in enumerate(self.certificates):
            lo, hi = self.stages[k], self.stages[k + 1]
            if not lo.members <= hi.members:
                return False
            if cert.source != set_hash(self.complex, hi.members):
                return False
            if cert.target != set_hash(self.complex, lo.members):
                return False
            if not verify_certificate(cert, self.complex, hi.members):
                return False
        return True


def certify_stages(C: Complex, stages: list[Subcomplex], budget: int = DEFAULT_BUDGET) -> Filtration:
    """Certificates for consecutive stages: greedy, then exhaustive search."""
    filt = Filtration(C, stages)
    for k in range(1, len(stages)):
        t0 = time.perf_counter()
        g = greedy_collapse(C, stages[k - 1], start=stages[k])
        cert = g.certificate
        ops = g.ops
        method = "greedy"
        if cert is None:
            res = exhaustive_collapsibility(C, stages[k - 1], budget, start=stages[k])
            if not res:
                raise FiltrationStuck(k, res.status, g.stuck)
            cert, ops, method = res.certificate, ops + res.nodes, "exhaustive"
        filt.certificates.append(cert)
        filt.stats.append({"stage": k, "added": len(stages[k]) - len(stages[k - 1]),
                           "faces": len(stages[k]), "ops": ops, "steps": len(cert),
                           "millis": 1000 * (time.perf_counter() - t0), "method": method})
    return filt


def sublevel_filtration(C: Complex, f: MetricEvaluator, radii, sdC: Complex | None = None,
                        budget: int = DEFAULT_BUDGET) -> Filtration:
    """Derived neighbourhoods of the sub-level sets ``{f <= r}`` in sd C.

    Stage ``i`` is N(R(C, B_{r_i}), C), with R the faces whose vertices all
    lie in the closed ball.  Stage 0 is the sd vertex of the f-nearest
    vertex of C when the first ball contains no face.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must increase")
    sdC = derived_subdivision(C) if sdC is None else sdC
    vals = {v: f.vertex_value(v) for v in C.vertices}
    if hasattr(f, "basepoint"):
        vals = {v: float(np.sqrt(x)) for v, x in vals.items()}
    stages = []
    for r in radii:
        R = [i for i, F in enumerate(C.faces) if all(vals[v] <= r for v in F.verts)]
        if not R:
            continue
        stages.append(derived_neighborhood(C.sub(R), C, sdC))
    v0 = min(C.vertices, key=lambda v: (vals[v], v))
    base = sdC.sub([sdC.index[Face(SIMPLEX, (C.index[C.vertex_face(v0)],))]])
    if not stages or stages[0].members != base.members:
        stages.insert(0, base)
    if set(stages[-1].members) != set(range(len(sdC))):
        raise ValueError("the last radius must cover the complex")
    return certify_stages(sdC, stages, budget)


def grid_filtration(n: int = 6, budget: int = DEFAULT_BUDGET) -> Filtration:
    """Stages [0,k]² of the n×n square grid, k = 0..n, certified stage to stage."""
    from .generators import grid

    C = grid(n, n)
    stages = []
    for k in range(n + 1):
        keep = [i for i, F in enumerate(C.faces)
                if all(max(C.embedding[v]) <= k + 1e-9 for v in F.verts)]
        stages.append(C.sub(keep))
    return certify_stages(C, stages, budget)
