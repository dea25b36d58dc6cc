"""Derived orders, M-sets, descending links and subdivision collapse schedules."""
import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arborescence.certificate import read_certificate, verify_certificate, write_certificate
from arborescence.collapse import greedy_collapse
from arborescence.complex import SIMPLEX, Face, build_complex, cube, derived_subdivision, simplex
from arborescence.generators import (fan_triangulation, grid, path_complex,
                                     polygon_triangulation, simplex_complex, triangulated_grid)
from arborescence.geometry import DistanceFunction, UniquenessViolation, generic_distance
from arborescence.scheduler import (AngleTie, OrderCycle, ScheduleError, _boundary_faces,
                                    chain_order, derived_order, descending_link, hudson_lift,
                                    m_set, sd_collapse_schedule, write_schedule)


# -- derived orders -----------------------------------------------------------------

def test_edge_with_seed_at_one_end():
    C = build_complex([simplex(0, 1)])
    D = derived_order(C, [simplex(0)])
    assert D.faces() == [simplex(0), simplex(0, 1), simplex(1)]


def test_no_seeds_puts_faces_before_their_faces():
    C = build_complex([simplex(0, 1, 2)])
    D = derived_order(C, [])
    pos = D.position
    for i, F in enumerate(C.faces):
        for j in C.closure(C.facets_of[i]):
            assert pos[i] < pos[j]


def test_square_with_corner_seed():
    C = grid(1, 1)
    v = C.vertex_face(0)
    D = derived_order(C, [v])
    assert D.order[0] == C.index[v]
    pos = D.position
    for i, F in enumerate(C.faces):
        if F != v and 0 in F.verts:
            # the corner is the least seed of every face containing it
            assert pos[C.index[v]] < pos[i]
            for j in C.closure(C.facets_of[i]):
                if j != C.index[v]:
                    assert pos[i] < pos[j]


def test_seed_order_is_respected():
    C = path_complex(3)
    seeds = [simplex(2), simplex(0), simplex(1), simplex(3)]
    D = derived_order(C, seeds, chain_order(seeds))
    pos = D.position
    ranks = [pos[C.index[F]] for F in seeds]
    assert ranks == sorted(ranks)


def test_contradictory_precedence_reports_cycle():
    C = build_complex([simplex(0, 1)])
    # a ≺ b and b ≺ a cannot be linearised
    with pytest.raises(OrderCycle):
        derived_order(C, [simplex(0), simplex(1)], lambda a, b: True)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_derived_order_relation_is_acyclic_for_m_sets(seed):
    C = triangulated_grid(2, 2)
    f = generic_distance(C, seed)
    M = m_set(C, f)
    D = derived_order(C, M.faces, chain_order(M.faces))
    assert nx.is_directed_acyclic_graph(D.relation)
    assert sorted(D.order) == list(range(len(C)))
    pos = D.position
    ranks = [pos[C.index[F]] for F in M.faces]
    assert ranks == sorted(ranks)


# -- M-sets ---------------------------------------------------------------------------

def test_segment_with_interior_basepoint():
    C = path_complex(1)
    M = m_set(C, DistanceFunction(C, [0.3]))
    assert M.faces == [simplex(0, 1), simplex(0), simplex(1)]
    assert M.values == sorted(M.values)


def test_basepoint_vertex_comes_first():
    C = build_complex([simplex(0, 1, 2)], {0: [0, 0], 1: [1, 0], 2: [0.3, 1.4]})
    M = m_set(C, DistanceFunction(C, [0, 0]))
    assert M.faces[0] == simplex(0) and M.values[0] == 0.0
    # faces through the basepoint attain their minimum there, so they are absent
    assert simplex(0, 1) not in M.faces and simplex(0, 1, 2) not in M.faces
    assert M.values == sorted(M.values)


def test_symmetric_basepoint_is_a_tie():
    C = grid(2, 2)
    with pytest.raises(UniquenessViolation):
        m_set(C, DistanceFunction(C, C.embedding[4]))


def test_generic_interior_point_in_grid():
    C = grid(2, 2)
    f = DistanceFunction(C, [0.63, 0.41])
    M = m_set(C, f)
    assert M.faces[0] == cube(0, 1, 3, 4)
    assert M.values == sorted(M.values)
    assert all(f.face_min(C.index[F])[2] == F for F in M.faces)


def test_region_restricts_m_set():
    C = grid(2, 2)
    f = DistanceFunction(C, [0.63, 0.41])
    M = m_set(C, f, lambda F: all(C.embedding[v][0] <= 1 for v in F.verts))
    assert all(max(C.embedding[v][0] for v in F.verts) <= 1 for F in M.faces)


# -- descending links ---------------------------------------------------------------------

def test_descending_link_of_grid_centre():
    C = grid(2, 2)
    L = descending_link(4, C, [1.0, 0.3])
    ends = {e.verts[0] if e.verts[1] == 4 else e.verts[1] for e in L.edges.values()}
    assert ends == {7, 5}
    assert L.faces.f_vector == (2, 1)


def test_descending_link_orthogonal_edge_is_a_tie():
    with pytest.raises(AngleTie):
        descending_link(4, grid(2, 2), [1.0, 0.0])


def test_descending_link_simplicial():
    C = fan_triangulation(6)
    L = descending_link(0, C, -C.embedding[0])
    for e in L.edges.values():
        w = e.verts[0] if e.verts[1] == 0 else e.verts[1]
        assert (C.embedding[w] - C.embedding[0]) @ (-C.embedding[0]) > 0


# -- schedules ---------------------------------------------------------------------------

@pytest.mark.parametrize("C", [simplex_complex(2), simplex_complex(3), grid(2, 2), grid(3, 3),
                               polygon_triangulation(1), triangulated_grid(2, 2)],
                         ids=["triangle", "tetrahedron", "grid2", "grid3", "polygon", "trigrid"])
def test_schedule_collapses_sd_to_a_vertex(C):
    cert = sd_collapse_schedule(C, generic_distance(C, 5))
    sd = cert.complex
    assert verify_certificate(cert)
    assert len(cert) == (len(sd) - 1) // 2
    assert len(cert.end_members()) == 1
    log = cert.meta["schedule"]
    assert len(log) == len(C) - 1
    assert all(e["case"] in (1, 2, 3, 4) for e in log)


def test_schedule_ends_at_first_vertex_of_the_order():
    T = simplex_complex(2)
    f = DistanceFunction(T, [1.3, 1.1])
    cert = sd_collapse_schedule(T, f)
    first = cert.meta["first"]
    assert T.faces[first] == simplex(1, 2)
    assert cert.end_faces() == [Face(SIMPLEX, (first,))]


def test_case_labels_match_m_set_and_boundary():
    C = grid(2, 2)
    f = generic_distance(C, 1)
    cert = sd_collapse_schedule(C, f)
    M = set(m_set(C, cert.meta["function"]).faces)
    bd = _boundary_faces(C)
    for e in cert.meta["schedule"]:
        t = e["vertex"]
        expect = (1 if C.faces[t] in M else 2) + (2 if t in bd else 0)
        assert e["case"] == expect


def test_relative_schedule_keeps_boundary_part():
    C = grid(2, 2)
    p = np.array([-0.3, 0.7])
    f = DistanceFunction(C, p)
    inside = [i for i, F in enumerate(C.faces)
              if all(np.linalg.norm(C.embedding[v] - p) <= 1.6 for v in F.verts)]
    R = C.sub(inside)
    bd = _boundary_faces(C)
    RB = C.sub([i for i in R.members if i in bd])
    cert = sd_collapse_schedule(C, f, boundary=RB, region=R)
    assert verify_certificate(cert)
    sd = cert.complex
    for F in cert.end_faces():
        assert all(u in bd for u in F.verts)
    text = write_certificate(cert)
    assert verify_certificate(read_certificate(text, sd))


def test_schedule_text_lists_every_step():
    C = grid(2, 2)
    cert = sd_collapse_schedule(C, generic_distance(C, 2))
    lines = write_schedule(cert).splitlines()
    assert len(lines) == len(C) - 1 and all(l.startswith("schedule ") for l in lines)


def test_schedule_on_non_collapsible_complex_fails_loudly():
    from arborescence.generators import dunce_hat
    D = dunce_hat()
    emb = {v: np.array([np.cos(v), np.sin(v), 0.1 * v]) for v in D.vertices}
    D2 = build_complex(D.facet_faces(), emb)
    with pytest.raises(ScheduleError):
        sd_collapse_schedule(D2, DistanceFunction(D2, [0.11, 0.23, 0.37]))


# -- Hudson lifting ----------------------------------------------------------------------

def test_hudson_lift_identity_subdivision():
    T = simplex_complex(2)
    cert = greedy_collapse(T).certificate
    h = hudson_lift(T, cert, T)
    assert verify_certificate(h) and len(h.end_members()) == 1


def test_hudson_lift_square_to_edge():
    Sq = grid(1, 1)
    e = Sq.index[cube(0, 1)]
    cert = greedy_collapse(Sq, Sq.sub(Sq.closure([e]))).certificate
    D = derived_subdivision(Sq)
    h = hudson_lift(Sq, cert, D)
    assert verify_certificate(h)
    sdD = h.complex
    # what is left is the second subdivision of the kept edge: 5 vertices, 4 edges
    ends = h.end_faces()
    assert sum(1 for F in ends if F.dim == 0) == 5 and sum(1 for F in ends if F.dim == 1) == 4
    assert len(sdD) == len(derived_subdivision(D))
