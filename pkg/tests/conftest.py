import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from arborescence.generators import (boundary_simplex, cube_corner, cubical_annulus, dunce_hat,  # noqa: E402
                                     equilateral_disk, grid, path_complex, polygon_triangulation,
                                     simplex_complex, staircase, tree_of_cubes, triangulated_grid)


def _named(C, name):
    C.meta = {**(getattr(C, "meta", None) or {}), "name": name}
    return C


def small_corpus():
    """A few complexes of each kind, small enough for per-face invariant scans."""
    return [
        _named(simplex_complex(2), "triangle"),
        _named(simplex_complex(3), "tetrahedron"),
        _named(boundary_simplex(2), "triangle-boundary"),
        _named(path_complex(3), "path"),
        _named(grid(2, 2), "grid2x2"),
        _named(grid(1, 1, 1), "cube"),
        _named(staircase([3, 2, 1]), "staircase"),
        _named(tree_of_cubes(1, 1, 0), "tree-of-cubes"),
        _named(cube_corner(), "cube-corner"),
        _named(cubical_annulus(3), "annulus"),
        _named(dunce_hat(), "dunce-hat"),
        _named(polygon_triangulation(0), "polygon"),
        _named(equilateral_disk(), "equilateral-disk"),
        _named(triangulated_grid(2, 2), "triangulated-grid"),
    ]


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
