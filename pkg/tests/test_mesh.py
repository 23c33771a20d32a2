import math

import numpy as np
import pytest

from spectransfer.cover import gram_identity_defect
from spectransfer.errors import (DegenerateSimplex, Disconnected, NonManifoldFacet,
                                 ParseError, TooSmall)
from spectransfer.graphs import WeightedGraph, complete_graph, disjoint_union, path_graph
from spectransfer.mesh import (SimplicialMesh, barycentric_cover, boundary_cone_volume,
                               conductance, cube_mesh, grid_mesh, kappa_epsilon, load_mesh,
                               parse_mesh, partition_report, spectral_cut)

from conftest import brute_force_conductance

SQUARE = "2 4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n"


def test_unit_square_two_triangles():
    m = parse_mesh(SQUARE)
    assert len(m.adjacent_pairs) == 1
    np.testing.assert_allclose(m.volumes, [0.5, 0.5])
    assert kappa_epsilon(m) == (1.0, pytest.approx(math.sqrt(2)))


def test_right_tetrahedron_volume():
    m = parse_mesh("3 4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 3\n")
    assert m.volumes[0] == pytest.approx(1 / 6)
    assert len(m.boundary_facets) == 4


def test_non_manifold_facet():
    text = "2 5 3\n0 0\n1 0\n0 1\n0 -1\n1 1\n0 1 2\n0 1 3\n0 1 4\n"
    with pytest.raises(NonManifoldFacet) as info:
        parse_mesh(text)
    assert info.value.facet == (0, 1)


def test_degenerate_simplex():
    with pytest.raises(DegenerateSimplex) as info:
        parse_mesh("2 4 2\n0 0\n1 0\n2 0\n0 1\n0 1 3\n0 1 2\n")
    assert info.value.index == 1


@pytest.mark.parametrize("text", [
    "", "4 3 1\n", "2 3 1\n0 0\n1 0\n0 1\n", "2 3 1\n0 0\n1 0\n0 1\n0 1 5\n",
    "2 3 1\n0 0\n1 0\n0\n0 1 2\n", "2 3 1 periodic 1\n0 0\n1 0\n0 1\n0 1 2\n0\n",
    "2 3 1\n0 0\n1 a\n0 1\n0 1 2\n",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_mesh(text)


def test_mesh_round_trip(tmp_path):
    for m in (grid_mesh(3, 2), grid_mesh(4, 4, periodic=True), cube_mesh(1, 2, 1)):
        path = tmp_path / "m.mesh"
        path.write_text(m.to_text())
        again = load_mesh(path)
        np.testing.assert_array_equal(again.simplices, m.simplices)
        np.testing.assert_array_equal(again.identify, m.identify)
        np.testing.assert_allclose(again.coords, m.coords)


def test_two_triangle_cover():
    c, dual = barycentric_cover(parse_mesh(SQUARE))
    assert dual.edges == ((0, 1, pytest.approx(1 / 3)),)
    np.testing.assert_allclose(c.measures, [2 / 3, 2 / 3])
    assert c.almost_two_fold


def test_periodic_cover_is_exact():
    for m in (grid_mesh(6, 6, periodic=True), grid_mesh(5, 3, row_heights=[1, 2, 1],
                                                         periodic=True)):
        c, dual = barycentric_cover(m)
        assert not c.almost_two_fold
        np.testing.assert_allclose(dual.degrees(), c.measures, rtol=1e-12)
        assert gram_identity_defect(c) <= 1e-12


@pytest.mark.parametrize("m", [grid_mesh(5, 4), grid_mesh(4, 4, row_heights=[1, 2, 1, 2]),
                               cube_mesh(2, 2, 2), grid_mesh(7, 1, width=7.0)])
def test_boundary_defect_accounting(m):
    c, dual = barycentric_cover(m)
    defect = float(np.sum(c.measures - dual.degrees()))
    assert defect == pytest.approx(boundary_cone_volume(m), rel=1e-12)


def test_kappa_examples():
    assert kappa_epsilon(grid_mesh(8, 8))[0] == pytest.approx(1.0)
    assert kappa_epsilon(grid_mesh(8, 8, row_heights=[1, 2] * 4))[0] == pytest.approx(2.0)


def test_single_simplex():
    m = parse_mesh("2 3 1\n0 0\n1 0\n0 1\n0 1 2\n")
    c, dual = barycentric_cover(m)
    assert dual.n == 1 and dual.m == 0
    with pytest.raises(TooSmall):
        spectral_cut(dual)


def test_path_cut_in_the_middle():
    p = spectral_cut(path_graph(4))
    assert sorted(p.side.tolist()) == [0, 0, 1, 1]
    assert p.side[0] == p.side[1] != p.side[2] == p.side[3]
    # one unit edge over a side of weighted degree 1 + 2
    assert p.conductance == pytest.approx(1 / 3)
    assert p.balance == pytest.approx(0.5)


def test_two_cliques_bridge():
    k = complete_graph(5)
    edges = list(k.edges) + [(u + 5, v + 5, w) for u, v, w in k.edges] + [(4, 5, 1.0)]
    g = WeightedGraph(10, tuple(edges))
    p = spectral_cut(g)
    assert p.cut_edges == [(4, 5)]
    assert p.conductance == pytest.approx(brute_force_conductance(g))


def test_k2_cut():
    p = spectral_cut(path_graph(2))
    assert p.balance == pytest.approx(0.5) and p.conductance == pytest.approx(1.0)


def test_cut_errors():
    with pytest.raises(Disconnected):
        spectral_cut(disjoint_union([path_graph(2), path_graph(2)]))


def test_conductance_helper_matches_sweep():
    g = barycentric_cover(grid_mesh(4, 4))[1]
    p = spectral_cut(g)
    phi, bal, cut = conductance(g, p.side == 0)
    assert phi == pytest.approx(p.conductance) and bal == pytest.approx(p.balance)
    assert 0 < p.conductance <= 1 and 0 < p.balance <= 0.5


SMALL_MESHES = [grid_mesh(1, 1), grid_mesh(2, 1), grid_mesh(2, 2), grid_mesh(3, 1),
                grid_mesh(5, 1), grid_mesh(1, 2, row_heights=[1, 2]),
                grid_mesh(2, 2, row_heights=[1, 2], col_widths=[2, 1]),
                grid_mesh(2, 2, width=4.0), cube_mesh(1, 1, 1)]


@pytest.mark.parametrize("m", SMALL_MESHES)
def test_small_meshes_match_brute_force(m):
    assert m.n_simplices <= 10
    dual = barycentric_cover(m)[1]
    best = brute_force_conductance(dual)
    p = spectral_cut(dual)
    assert p.conductance >= best * (1 - 1e-12)
    assert p.conductance <= 2 * math.sqrt(best)


def test_balance_floor_is_respected():
    g = barycentric_cover(grid_mesh(12, 3))[1]
    for floor in (0.1, 0.3, 0.45):
        assert spectral_cut(g, balance_floor=floor).balance >= floor - 1e-12


def test_report_examples():
    m = grid_mesh(16, 16)
    p = spectral_cut(barycentric_cover(m)[1])
    rep = partition_report(m, p, math.pi ** 2)
    assert rep["balance"] >= 0.4
    assert rep["cut_count"] == 16
    assert "fiedler_ratio" in rep and "cut_ratio" in rep
    bare = partition_report(m, p)
    assert "fiedler_ratio" not in bare and bare["cut_count"] == rep["cut_count"]


def test_strip_cut_count_is_constant():
    counts = []
    for length in (4, 8, 16, 32):
        m = grid_mesh(length, 1, width=float(length))
        counts.append(len(spectral_cut(barycentric_cover(m)[1]).cut_edges))
    assert max(counts) <= 2


def test_cut_is_deterministic():
    g = barycentric_cover(grid_mesh(9, 7))[1]
    a, b = spectral_cut(g), spectral_cut(g)
    np.testing.assert_array_equal(a.side, b.side)
    assert a.conductance == b.conductance


def test_cube_mesh():
    m = cube_mesh(2, 2, 2)
    assert m.n_simplices == 48
    assert m.volumes.sum() == pytest.approx(1.0)
    p = spectral_cut(barycentric_cover(m)[1])
    assert p.balance > 0.3
