"""Flag links, simple connectivity and the non-obtuse convexity test."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arborescence.catzero import (CAT0, NO, NOT_CAT0, NOT_NPC, UNKNOWN, YES, Cat0Report,
                                  cat0_cube_check, flag_link_check, read_report,
                                  ridge_star_convexity_nonobtuse, simple_connectivity,
                                  witness_is_empty_clique, write_report)
from arborescence.complex import ComplexError, build_complex, cube, simplex
from arborescence.generators import (cat0_cube_corpus, cube_corner, cubical_annulus,
                                     equilateral_disk, grid, grid_ring, staircase,
                                     simplex_complex, triangulated_grid, tree_of_cubes)


def corner_apex(C):
    return next(v for v in C.vertices if len(C.cofaces(C.index[C.vertex_face(v)])) == 6)


def test_single_square_vertex_passes():
    C = grid(1, 1)
    assert flag_link_check(0, C)


def test_grid_interior_vertex_passes():
    assert flag_link_check(4, grid(2, 2))


def test_cube_corner_apex_fails_with_three_vertex_witness():
    C = cube_corner()
    v = corner_apex(C)
    r = flag_link_check(v, C)
    assert not r and len(r.witness) == 3
    assert witness_is_empty_clique(v, r.witness, C)


def test_filling_the_corner_repairs_the_link():
    hollow, filled = cube_corner(), cube_corner(filled=True)
    v = corner_apex(hollow)
    assert not flag_link_check(v, hollow)
    # the filled corner's apex is the same point; every vertex passes now
    assert all(flag_link_check(w, filled) for w in filled.vertices)
    assert cat0_cube_check(filled).verdict == CAT0


@pytest.mark.parametrize("C", [grid(1, 1), grid(2, 2), grid(3, 2), grid(2, 2, 2), grid(3, 1, 1),
                               staircase([3, 2, 1]), tree_of_cubes(1, 1, 1)],
                         ids=lambda C: f"{C.meta['family']}{C.meta['size']}")
def test_grid_generators_are_cat0(C):
    rep = cat0_cube_check(C)
    assert rep.verdict == CAT0 and rep.simply_connected == YES and not rep.failures


def test_cube_corner_is_not_npc():
    rep = cat0_cube_check(cube_corner())
    assert rep.verdict == NOT_NPC and len(rep.failures) == 1


def test_annulus_is_not_simply_connected_with_loop():
    C = cubical_annulus(3)
    rep = cat0_cube_check(C)
    assert not rep.failures
    assert rep.simply_connected == NO and rep.verdict == NOT_CAT0
    loop = rep.loop
    assert loop[0] == loop[-1] and len(loop) >= 4
    for a, b in zip(loop, loop[1:]):
        assert cube(min(a, b), max(a, b)) in C


def test_grid_ring_is_not_cat0():
    assert cat0_cube_check(grid_ring(3)).verdict == NOT_CAT0


def test_simplicial_input_rejected():
    with pytest.raises(ComplexError):
        cat0_cube_check(simplex_complex(2))


def test_zero_budget_is_honest():
    verdict, loop = simple_connectivity(grid(2, 2), budget=0)
    assert verdict in (UNKNOWN, YES)
    assert verdict != NO


def test_report_round_trip():
    rep = cat0_cube_check(cube_corner())
    back = read_report(write_report(rep))
    assert back.verdict == rep.verdict and back.links == rep.links
    assert back.simply_connected == rep.simply_connected and back.loop == rep.loop


def test_report_rejects_garbage():
    with pytest.raises(ValueError):
        read_report("verdict\n")


def test_corpus_has_no_unknown_verdicts():
    corpus = cat0_cube_corpus()
    assert len(corpus) >= 30
    for C in corpus:
        assert cat0_cube_check(C).verdict == CAT0


def test_equilateral_disk_accepted():
    assert ridge_star_convexity_nonobtuse(equilateral_disk())


def test_right_triangle_grid_accepted():
    assert ridge_star_convexity_nonobtuse(triangulated_grid(3, 2))


def test_obtuse_triangulation_rejected_with_witness():
    C = build_complex([simplex(0, 1, 2), simplex(0, 2, 3)],
                      {0: [0, 0], 1: [1, 0], 2: [-1, 1], 3: [-1, -1]})
    r = ridge_star_convexity_nonobtuse(C)
    assert not r and r.witness == simplex(0, 1, 2) and 0 in r.obtuse_facet.verts


def test_non_obtuse_needs_embedding():
    with pytest.raises(ComplexError):
        ridge_star_convexity_nonobtuse(build_complex([simplex(0, 1, 2)]))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1)),
                min_size=1, max_size=8, unique=True))
def test_not_npc_witnesses_replay(cells):
    from arborescence.generators import cube_union
    C = cube_union(cells)
    rep = cat0_cube_check(C)
    assert isinstance(rep, Cat0Report)
    for r in rep.failures:
        assert witness_is_empty_clique(r.vertex, r.witness, C)
    if rep.verdict == CAT0:
        assert not rep.failures and rep.simply_connected == YES
