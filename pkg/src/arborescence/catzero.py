"""Checks of the nonpositive-curvature hypotheses for cube and simplicial complexes."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx
import numpy as np

from .complex import CUBE, SIMPLEX, Complex, ComplexError, Face, link
from .geometry import non_obtuse_check

TIETZE_BUDGET = 10_000

PASS, FAIL = "pass", "fail"
YES, NO, UNKNOWN = "yes", "no", "unknown"
CAT0, NOT_NPC, NOT_CAT0, INCONCLUSIVE = "cat0", "not-npc", "not-cat0", "inconclusive"


@dataclass(frozen=True)
class FlagResult:
    """Outcome for one vertex; ``witness`` lists the far endpoints of edges at the
    vertex forming a clique of the link that spans no simplex."""

    vertex: int
    passed: bool
    witness: tuple[int, ...] = ()

    def __bool__(self):
        return self.passed


@dataclass
class Cat0Report:
    links: dict[int, FlagResult] = field(default_factory=dict)
    simply_connected: str = UNKNOWN
    loop: tuple[int, ...] = ()
    verdict: str = INCONCLUSIVE

    @property
    def failures(self) -> list[FlagResult]:
        return [r for r in self.links.values() if not r.passed]


def _require_cube(C: Complex) -> None:
    if C.kind != CUBE:
        raise ComplexError("flag condition is checked on cube complexes")


def _far_end(edge: Face, v: int) -> int:
    a, b = edge.verts
    return b if a == v else a


def flag_link_check(v: int, C: Complex) -> FlagResult:
    """Every clique of the link's 1-skeleton must span a simplex of the link."""
    _require_cube(C)
    L = link(C.vertex_face(v), C)
    G = nx.Graph()
    G.add_nodes_from(L.vertices)
    G.add_edges_from(F.verts for F in L.faces if F.dim == 1)
    bad = None
    for clique in sorted(sorted(c) for c in nx.find_cliques(G)):
        if len(clique) >= 3 and Face(SIMPLEX, tuple(clique)) not in L:
            bad = clique
            break
    if bad is None:
        return FlagResult(v, True)
    # shrink to a minimal empty simplex: all of its proper subsets span simplices
    for k in range(3, len(bad) + 1):
        for sub in combinations(bad, k):
            if Face(SIMPLEX, sub) not in L:
                ends = tuple(sorted(_far_end(C.faces[e], v) for e in sub))
                return FlagResult(v, False, ends)
    raise AssertionError("unreachable")


def witness_is_empty_clique(v: int, witness, C: Complex) -> bool:
    """Replay a flag failure: the edges from ``v`` to ``witness`` pairwise span
    squares but no cube at ``v`` contains them all."""
    edges = [C.index.get(Face(CUBE, tuple(sorted((v, w))))) for w in witness]
    if any(e is None for e in edges):
        return False
    vf = C.index[C.vertex_face(v)]
    cubes = [C.closure([j]) for j in C.cofaces(vf)]
    for a, b in combinations(edges, 2):
        if not any(a in K and b in K and C.dims[j] >= 2 for j, K in zip(C.cofaces(vf), cubes)):
            return False
    return not any(all(e in K for e in edges) for K in cubes)


# -- fundamental group -------------------------------------------------------------

def _presentation(C: Complex):
    """Spanning-tree presentation of pi_1 of the 2-skeleton.

    Generators are non-tree edges; each square gives one relator, a word of
    signed generator ids (1-based, negative for inverse).
    """
    verts = C.vertices
    edges = [F for F in C.faces if F.dim == 1]
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for e in edges:
        a, b = e.verts
        adj[a].append(b)
        adj[b].append(a)
    parent = {verts[0]: None}
    dq = deque([verts[0]])
    while dq:
        u = dq.popleft()
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                dq.append(w)
    connected = len(parent) == len(verts)
    tree = {tuple(sorted((u, p))) for u, p in parent.items() if p is not None}
    gens = [e.verts for e in edges if e.verts not in tree]
    gid = {g: k + 1 for k, g in enumerate(gens)}

    def letter(a, b):
        k = gid.get((min(a, b), max(a, b)))
        if k is None:
            return None
        return k if a < b else -k

    relators = []
    for F in C.faces:
        if F.dim != 2:
            continue
        if F.kind == CUBE:
            c = F.corners
            cyc = [c[0], c[1], c[3], c[2]]
        else:
            cyc = list(F.verts)
        word = [letter(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]
        relators.append([x for x in word if x is not None])
    return gens, relators, parent, connected


def _reduce(word: list[int]) -> list[int]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    while len(out) >= 2 and out[0] == -out[-1]:
        out = out[1:-1]
    return out


def _tietze(ngens: int, relators: list[list[int]], budget: int):
    """Eliminate generators occurring exactly once in some relator.

    Returns the surviving generators and relators, and whether the budget ran out.
    """
    alive = set(range(1, ngens + 1))
    rels = [_reduce(r) for r in relators]
    rels = [r for r in rels if r]
    moves = 0
    changed = True
    while changed and alive:
        changed = False
        for k, r in enumerate(rels):
            counts: dict[int, int] = {}
            for x in r:
                counts[abs(x)] = counts.get(abs(x), 0) + 1
            solo = next((g for g in sorted(counts) if counts[g] == 1), None)
            if solo is None:
                continue
            moves += 1
            if moves > budget:
                return alive, rels, True
            pos = next(p for p, x in enumerate(r) if abs(x) == solo)
            rot = r[pos:] + r[:pos]
            rest = rot[1:]
            # rot[0] * rest = 1  =>  rot[0] = rest^-1
            value = [-x for x in reversed(rest)]
            if rot[0] < 0:
                value = [-x for x in reversed(value)]
            inv = [-x for x in reversed(value)]
            new = []
            for j, s in enumerate(rels):
                if j == k:
                    continue
                w = []
                for x in s:
                    if x == solo:
                        w.extend(value)
                    elif x == -solo:
                        w.extend(inv)
                    else:
                        w.append(x)
                w = _reduce(w)
                if w:
                    new.append(w)
            rels = new
            alive.discard(solo)
            changed = True
            break
    return alive, rels, False


def _h1_witness(gens, relators) -> int | None:
    """A generator whose loop has infinite order in H_1, if the rational rank is positive."""
    n = len(gens)
    if n == 0:
        return None
    R = np.zeros((len(relators), n))
    for i, r in enumerate(relators):
        for x in r:
            R[i, abs(x) - 1] += np.sign(x)
    rank = np.linalg.matrix_rank(R) if len(relators) else 0
    if rank == n:
        return None
    for g in range(n):
        e = np.zeros((1, n))
        e[0, g] = 1
        if np.linalg.matrix_rank(np.vstack([R, e])) > rank:
            return g
    return None


def _tree_path(parent, v):
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path


def simple_connectivity(C: Complex, budget: int = TIETZE_BUDGET) -> tuple[str, tuple[int, ...]]:
    """``yes`` when Tietze moves kill all generators, ``no`` with a vertex loop when
    the loop has infinite order in H_1, ``unknown`` otherwise."""
    gens, relators, parent, connected = _presentation(C)
    if not connected:
        return NO, ()
    alive, rels, _ = _tietze(len(gens), relators, budget)
    if not alive:
        return YES, ()
    g = _h1_witness(gens, relators)
    if g is None:
        return UNKNOWN, ()
    a, b = gens[g]
    up = _tree_path(parent, a)[::-1]
    down = _tree_path(parent, b)
    loop = up + down
    # trim the common tree prefix so the loop is a simple cycle through the edge
    while len(loop) >= 3 and loop[0] == loop[-1] and loop[1] == loop[-2]:
        loop = loop[1:-1]
    return NO, tuple(loop)


def cat0_cube_check(C: Complex, budget: int = TIETZE_BUDGET) -> Cat0Report:
    """Flag links at every vertex plus simple connectivity.

    ``cat0`` needs both; a failing link gives ``not-npc``; passing links with
    a non-simply-connected space give ``not-cat0``; otherwise ``inconclusive``.
    """
    _require_cube(C)
    rep = Cat0Report()
    for v in C.vertices:
        rep.links[v] = flag_link_check(v, C)
    rep.simply_connected, rep.loop = simple_connectivity(C, budget)
    if rep.failures:
        rep.verdict = NOT_NPC
    elif rep.simply_connected == YES:
        rep.verdict = CAT0
    elif rep.simply_connected == NO:
        rep.verdict = NOT_CAT0
    else:
        rep.verdict = INCONCLUSIVE
    return rep


@dataclass(frozen=True)
class ConvexityVerdict:
    accept: bool
    witness: Face | None = None
    obtuse_facet: Face | None = None

    def __bool__(self):
        return self.accept


def ridge_star_convexity_nonobtuse(C: Complex) -> ConvexityVerdict:
    """Sufficient test for convex ridge stars: every simplex is non-obtuse.

    A rejection does not mean some star is non-convex; it only means this
    sufficient condition does not apply.
    """
    if C.kind != SIMPLEX:
        raise ComplexError("the non-obtuse test applies to simplicial complexes")
    if C.embedding is None:
        raise ComplexError("the non-obtuse test needs an embedding")
    for F in C.faces:
        if F.dim >= 2:
            res = non_obtuse_check(F, C)
            if not res:
                return ConvexityVerdict(False, F, res.witness)
    return ConvexityVerdict(True)


def write_report(rep: Cat0Report) -> str:
    lines = []
    for v in sorted(rep.links):
        r = rep.links[v]
        lines.append(f"link {v} pass" if r.passed else f"link {v} fail " + " ".join(map(str, r.witness)))
    sc = f"simply-connected {rep.simply_connected}"
    if rep.loop:
        sc += " " + " ".join(map(str, rep.loop))
    lines.append(sc)
    lines.append(f"verdict {rep.verdict}")
    return "\n".join(lines) + "\n"


def read_report(text: str) -> Cat0Report:
    rep = Cat0Report()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "link" and len(tok) >= 3 and tok[2] in (PASS, FAIL):
            v = int(tok[1])
            rep.links[v] = FlagResult(v, tok[2] == PASS, tuple(int(x) for x in tok[3:]))
        elif tok[0] == "simply-connected" and len(tok) >= 2:
            rep.simply_connected = tok[1]
            rep.loop = tuple(int(x) for x in tok[2:])
        elif tok[0] == "verdict" and len(tok) == 2:
            rep.verdict = tok[1]
        else:
            raise ValueError(f"line {lineno}: unrecognised record {line!r}")
    return rep
