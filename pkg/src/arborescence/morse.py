"""Discrete gradient matchings induced by star-minimal functions."""
from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field

from .certificate import CollapseCertificate, certify
from .complex import SIMPLEX, Complex, Face
from .geometry import (PERTURB_RETRIES, DistanceFunction, MetricEvaluator, StarMinRecord,
                       UniquenessViolation, VertexFunction, star_min)


class JoinMissing(LookupError):
    """No face of the complex contains both a face and its pointer vertex."""


class MatchingConflict(RuntimeError):
    """Two faces were assigned the same coface (internal invariant violation)."""


class CriterionMismatch(RuntimeError):
    """Fixed faces of the recursion differ from the pointer criterion."""


class MoreThanOneCritical(ValueError):
    pass


class NotAcyclic(ValueError):
    pass


class UnsupportedFunction(ValueError):
    """Vertex-valued functions cannot orient steps inside squares and higher cubes."""


@dataclass
class Matching:
    """Pairs ``(lower, upper)`` and critical faces, as canonical indices of ``complex``.

    ``function`` is the evaluator the matching was built from (after any
    tie-breaking perturbation), when known.
    """

    complex: Complex
    pairs: list[tuple[int, int]] = field(default_factory=list)
    critical: list[int] = field(default_factory=list)
    function: MetricEvaluator | None = field(default=None, compare=False, repr=False)

    def face_pairs(self) -> set[tuple[Face, Face]]:
        F = self.complex.faces
        return {(F[a], F[b]) for a, b in self.pairs}

    def critical_faces(self) -> set[Face]:
        return {self.complex.faces[i] for i in self.critical}

    def partner(self) -> dict[int, int]:
        out = {}
        for a, b in self.pairs:
            out[a] = b
            out[b] = a
        return out

    def counts(self) -> tuple[int, ...]:
        c = Counter(int(self.complex.dims[i]) for i in self.critical)
        return tuple(c.get(d, 0) for d in range(max(self.complex.dim, 0) + 1))

    def validate(self) -> None:
        """Partition and pairing-skew invariants."""
        C = self.complex
        seen = Counter(i for p in self.pairs for i in p) + Counter(self.critical)
        if any(n != 1 for n in seen.values()) or len(seen) != len(C):
            raise MatchingConflict("pairs and critical faces do not partition the faces")
        for a, b in self.pairs:
            if a not in C.facets_of[b]:
                raise MatchingConflict(f"pair ({C.faces[a]}, {C.faces[b]}) is not a facet pair")


@dataclass(frozen=True)
class GradientPath:
    """Alternating sequence of matched pairs; ``steps[k+1][0]`` is a facet of ``steps[k][1]``."""

    steps: tuple[tuple[Face, Face], ...]

    @property
    def closed(self) -> bool:
        return len(self.steps) > 0 and self.steps[0][0] in self.steps[-1][1].facets()

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class AcyclicityResult:
    acyclic: bool
    cycle: GradientPath | None = None

    def __bool__(self):
        return self.acyclic


@dataclass(frozen=True)
class CriticalReport:
    faces: frozenset[Face]
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return len(self.faces)


def join(sigma: int, v: int, C: Complex) -> int:
    """Index of the minimal face containing face ``sigma`` and vertex ``v``."""
    if v in C.faces[sigma].verts:
        return sigma
    best = None
    for j in C.cofaces(sigma):
        if v in C.faces[j].verts and (best is None or C.dims[j] < C.dims[best]
                                       or (C.dims[j] == C.dims[best] and j < best)):
            best = j
    if best is None:
        raise JoinMissing(f"{C.faces[sigma]} and vertex {v} span no face")
    return best


def pointer_records(C: Complex, f: MetricEvaluator) -> dict[Face, StarMinRecord]:
    return {F: star_min(i, C, f) for i, F in enumerate(C.faces)}


def build_gradient_matching(C: Complex, f: MetricEvaluator,
                            records: dict[Face, StarMinRecord] | None = None
                            ) -> tuple[Matching, dict[Face, StarMinRecord]]:
    """Match each face not yet matched from below with its step toward the pointer vertex.

    Faces are visited by ascending dimension, then canonical order.  A face
    whose pointer vertex lies in it is fixed (critical).  Otherwise it is
    paired with ``y * sigma`` when that join is one dimension up; in a cube
    complex the join may be larger, and the face is then paired with the
    coface of ``sigma`` inside the join whose minimum of ``f`` is smallest
    (this is the first cell of the join met along the descent toward ``y``).
    """
    if isinstance(f, VertexFunction) and any(F.kind != SIMPLEX and F.dim >= 2 for F in C.faces):
        # all cofacets inside a larger join tie at the same lowest vertex, so
        # the step toward the pointer is undetermined; use a distance function
        raise UnsupportedFunction("vertex functions need a simplicial complex; "
                                  "cube complexes take a distance function")
    if records is None:
        records = pointer_records(C, f)
    M = Matching(C, function=f)
    upper: set[int] = set()
    order = sorted(range(len(C)), key=lambda i: (C.dims[i], i))
    for i in order:
        if i in upper:
            continue
        y = records[C.faces[i]].pointer
        J = join(i, y, C)
        if J == i:
            M.critical.append(i)
            continue
        if C.dims[J] == C.dims[i] + 1:
            up = J
        else:
            inside = C.closure([J])
            cands = [j for j in C.cofacets_of[i] if j in inside]
            up = min(cands, key=lambda j: (f.face_min(j)[0], j))
        if up in upper:
            raise MatchingConflict(f"{C.faces[up]} claimed twice")
        upper.add(up)
        M.pairs.append((i, up))
    M.critical.sort()
    # faces met as upper partners are never processed again; anything left
    # over would break the partition
    M.validate()
    return M, records


def critical_cells(C: Complex, records: dict[Face, StarMinRecord]) -> CriticalReport:
    """Faces ``tau`` with pointer ``v`` in ``tau`` and no facet of ``tau`` avoiding ``v`` pointing to ``v``.

    For a simplex the only facet avoiding ``v`` is ``tau - v``; the empty face
    points nowhere, so every pointer-fixed vertex is critical.
    """
    crit = set()
    for i, tau in enumerate(C.faces):
        v = records[tau].pointer
        if v not in tau.verts:
            continue
        if any(v not in C.faces[r].verts and records[C.faces[r]].pointer == v
               for r in C.facets_of[i]):
            continue
        crit.add(tau)
    c = Counter(F.dim for F in crit)
    return CriticalReport(frozenset(crit), tuple(c.get(d, 0) for d in range(max(C.dim, 0) + 1)))


def check_agreement(M: Matching, report: CriticalReport) -> None:
    if M.critical_faces() != report.faces:
        raise CriterionMismatch(
            f"recursion fixed {sorted(M.critical_faces())}, criterion gives {sorted(report.faces)}")


def _digraph(M: Matching):
    """Modified Hasse diagram: matched arcs point up, all others down."""
    C = M.complex
    up = dict(M.pairs)
    succ = [[] for _ in range(len(C))]
    for t in range(len(C)):
        for r in C.facets_of[t]:
            if up.get(r) == t:
                succ[r].append(t)
            else:
                succ[t].append(r)
    return succ


def check_acyclic(M: Matching, C: Complex | None = None) -> AcyclicityResult:
    """Search for a closed gradient path; returns one as witness if found."""
    C = M.complex if C is None else C
    succ = _digraph(M)
    color = [0] * len(C)
    for root in range(len(C)):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        path = [root]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                path.pop()
            elif color[nxt] == 1:
                cyc = path[path.index(nxt):]
                return AcyclicityResult(False, _as_gradient_path(cyc, M))
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
                path.append(nxt)
    return AcyclicityResult(True)


def _as_gradient_path(cycle: list[int], M: Matching) -> GradientPath:
    C = M.complex
    up = dict(M.pairs)
    # rotate so the cycle starts with an upward (matched) arc
    n = len(cycle)
    k = next(k for k in range(n) if up.get(cycle[k]) == cycle[(k + 1) % n])
    cyc = cycle[k:] + cycle[:k]
    steps = tuple((C.faces[cyc[j]], C.faces[cyc[j + 1]]) for j in range(0, n, 2))
    return GradientPath(steps)


def matching_to_collapse(M: Matching, C: Complex | None = None) -> CollapseCertificate:
    """Collapse sequence down to the single critical vertex of an acyclic matching.

    A pair becomes removable once every other coface of both members is gone;
    ready pairs are taken highest dimension first, then by canonical index.
    """
    C = M.complex if C is None else C
    if len(M.critical) != 1 or C.dims[M.critical[0]] != 0:
        raise MoreThanOneCritical(f"critical faces: {sorted(M.critical_faces())}")
    unit = {}
    for k, (a, b) in enumerate(M.pairs):
        unit[a] = unit[b] = k
    waiting = [0] * len(M.pairs)
    blockers: list[list[int]] = [[] for _ in M.pairs]
    for k, (a, b) in enumerate(M.pairs):
        for face in (a, b):
            for c in C.cofacets_of[face]:
                if c == b:
                    continue
                u = unit.get(c)
                if u is None:  # only the critical vertex is unmatched; it has no cofaces here
                    raise NotAcyclic("matched face below a critical face")
                waiting[k] += 1
                blockers[u].append(k)
    heap = [(-int(C.dims[b]), b, k) for k, (a, b) in enumerate(M.pairs) if waiting[k] == 0]
    heapq.heapify(heap)
    steps = []
    while heap:
        _, _, k = heapq.heappop(heap)
        steps.append(M.pairs[k])
        for u in blockers[k]:
            waiting[u] -= 1
            if waiting[u] == 0:
                a, b = M.pairs[u]
                heapq.heappush(heap, (-int(C.dims[b]), b, u))
    if len(steps) != len(M.pairs):
        raise NotAcyclic("gradient paths form a cycle")
    return certify(C, steps, source="gradient-matching")


def gradient_with_retry(C: Complex, f: MetricEvaluator, seed: int = 0,
                        retries: int = PERTURB_RETRIES
                        ) -> tuple[Matching, dict[Face, StarMinRecord], MetricEvaluator]:
    """:func:`build_gradient_matching`, perturbing a distance basepoint on ties."""
    for attempt in range(retries + 1):
        try:
            M, rec = build_gradient_matching(C, f)
            return M, rec, f
        except UniquenessViolation:
            if attempt == retries or not isinstance(f, DistanceFunction):
                raise
            f = f.perturbed(attempt, seed)
    raise AssertionError("unreachable")


def analyse(C: Complex, f: MetricEvaluator, seed: int = 0):
    """Matching, agreement check and acyclicity in one call (raises on any violation)."""
    M, rec, f = gradient_with_retry(C, f, seed)
    check_agreement(M, critical_cells(C, rec))
    acyc = check_acyclic(M)
    return M, rec, acyc


def write_matching(M: Matching) -> str:
    lines = [f"pair {a} {b}" for a, b in sorted(M.pairs)]
    lines += [f"critical {i}" for i in M.critical]
    return "\n".join(lines) + "\n"


def read_matching(text: str, C: Complex) -> Matching:
    M = Matching(C)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "pair" and len(tok) == 3:
            M.pairs.append((int(tok[1]), int(tok[2])))
        elif tok[0] == "critical" and len(tok) == 2:
            M.critical.append(int(tok[1]))
        else:
            raise ValueError(f"line {lineno}: unrecognised record {line!r}")
    M.validate()
    return M
