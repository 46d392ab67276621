"""Graph assembly, spectra, connectivity, and connected random sampling."""

import numpy as np
import pytest

from semicontract import (
    Graph,
    connectivity,
    erdos_renyi_connected,
    incidence,
    laplacian,
    read_edge_list,
    spectral_gap,
    sym_eigen_bounds,
    write_edge_list,
)
from semicontract.graphs import adjacency, complete_graph, cycle_graph, path_graph


class TestGraphType:
    def test_canonical_storage(self):
        g = Graph.from_edges(4, [(2, 1), (0, 3), (1, 0)])
        assert g.edges == ((0, 1), (0, 3), (1, 2))
        assert g.edge_count == 3

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph.from_edges(3, [(1, 1)])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="canonical"):
            Graph(3, ((0, 3),))

    def test_rejects_unsorted_raw(self):
        with pytest.raises(ValueError, match="sorted"):
            Graph(3, ((1, 2), (0, 1)))


class TestMatrices:
    def test_laplacian_two_nodes(self):
        L = laplacian(complete_graph(2))
        assert np.array_equal(L, np.array([[1.0, -1.0], [-1.0, 1.0]]))

    def test_laplacian_path3(self):
        L = laplacian(path_graph(3))
        assert np.array_equal(
            L, np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        )

    def test_incidence_signs(self):
        B = incidence(path_graph(3))
        assert np.array_equal(B, np.array([[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]]))

    def test_incidence_factors_laplacian(self):
        rng = np.random.default_rng(67)
        for seed in range(10):
            g = erdos_renyi_connected(int(rng.integers(3, 12)), 0.5, seed)
            B = incidence(g)
            assert np.allclose(B @ B.T, laplacian(g), atol=1e-12)

    def test_adjacency_symmetric_zero_diagonal(self):
        A = adjacency(cycle_graph(5))
        assert np.array_equal(A, A.T)
        assert np.all(np.diag(A) == 0)
        assert A.sum() == 2 * 5


class TestConnectivity:
    def test_connected_cases(self):
        assert connectivity(path_graph(4))
        assert connectivity(Graph(1, ()))

    def test_disconnected_cases(self):
        assert not connectivity(Graph(2, ()))
        assert not connectivity(Graph.from_edges(4, [(0, 1), (2, 3)]))


class TestSpectralGap:
    def test_known_values(self):
        assert spectral_gap(complete_graph(2)) == pytest.approx((2.0, 2.0))
        lam2, lamn = spectral_gap(path_graph(3))
        assert lam2 == pytest.approx(1.0, rel=1e-12)
        assert lamn == pytest.approx(3.0, rel=1e-12)
        lam2, lamn = spectral_gap(cycle_graph(4))
        assert lam2 == pytest.approx(2.0, rel=1e-12)
        assert lamn == pytest.approx(4.0, rel=1e-12)
        assert spectral_gap(complete_graph(5)) == pytest.approx((5.0, 5.0))

    def test_agrees_with_eigen_bounds(self):
        for seed in range(8):
            g = erdos_renyi_connected(9, 0.4, seed)
            lam2, lamn = spectral_gap(g)
            b = sym_eigen_bounds(laplacian(g))
            assert lam2 == pytest.approx(b.lambda_min_nonzero, rel=1e-10)
            assert lamn == pytest.approx(b.lambda_max, rel=1e-10)

    def test_rejects_disconnected(self):
        with pytest.raises(ValueError, match="not connected"):
            spectral_gap(Graph.from_edges(4, [(0, 1), (2, 3)]))
        with pytest.raises(ValueError, match="not connected"):
            spectral_gap(Graph(3, ()))

    def test_rejects_single_node(self):
        with pytest.raises(ValueError, match="at least 2"):
            spectral_gap(Graph(1, ()))


class TestErdosRenyi:
    def test_deterministic_in_seed(self):
        a = erdos_renyi_connected(12, 0.3, 123)
        b = erdos_renyi_connected(12, 0.3, 123)
        assert a == b

    def test_seed_changes_sample(self):
        draws = {erdos_renyi_connected(12, 0.3, s).edges for s in range(6)}
        assert len(draws) > 1

    def test_always_connected(self):
        for seed in range(20):
            assert connectivity(erdos_renyi_connected(8, 0.25, seed))

    def test_probability_one_is_complete(self):
        g = erdos_renyi_connected(6, 1.0, 0)
        assert g.edge_count == 15

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError, match="node_count"):
            erdos_renyi_connected(1, 0.5, 0)
        with pytest.raises(ValueError, match="probability"):
            erdos_renyi_connected(5, 0.0, 0)
        with pytest.raises(ValueError, match="probability"):
            erdos_renyi_connected(5, 1.5, 0)

    def test_gives_up_when_hopeless(self):
        with pytest.raises(RuntimeError, match="attempts"):
            erdos_renyi_connected(2, 1e-12, 0)


class TestEdgeListIO:
    def test_roundtrip(self, tmp_path):
        g = erdos_renyi_connected(7, 0.5, 5)
        path = tmp_path / "g.edges"
        write_edge_list(g, path)
        assert read_edge_list(path) == g

    def test_comments_and_whitespace(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("# a triangle\n3 3\n0 1\n1 2  # last\n\n0 2\n")
        g = read_edge_list(path)
        assert g.edges == ((0, 1), (0, 2), (1, 2))

    def test_rejects_wrong_count(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("3 2\n0 1\n")
        with pytest.raises(ValueError, match="expected"):
            read_edge_list(path)

    def test_rejects_non_integer(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("2 1\n0 x\n")
        with pytest.raises(ValueError, match="integer"):
            read_edge_list(path)
