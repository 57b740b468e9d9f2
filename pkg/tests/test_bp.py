"""Sum-product on both domains: tree exactness, loopy behavior, signed duals."""

import numpy as np
import pytest

from nfgdual.bp import BpConfig, BpResult, DegenerateMessageError, relative_error, run_bp
from nfgdual.graphs import Graph, grid_graph, path_graph, ring_graph
from nfgdual.mapping import map_dual_to_primal, map_primal_to_dual
from nfgdual.nfg import DualNFG, dualize, ising_model, potts_model
from nfgdual.oracle import marginals_dual, marginals_primal


def factor_graph_diameter(nfg, domain):
    """BFS diameter of the bipartite (factor, variable) expansion."""
    g = nfg.graph
    if domain == "primal":
        n_vars = g.num_vertices
        groups = [list(e) for e in g.edges] + [[v] for v in range(g.num_vertices)]
    else:
        n_vars = g.num_edges
        groups = [[e] for e in range(g.num_edges)] + [
            g.incident_edges(v) for v in range(g.num_vertices)
        ]
    n = n_vars + len(groups)
    adj = [[] for _ in range(n)]
    for fi, vs in enumerate(groups):
        for v in vs:
            adj[n_vars + fi].append(v)
            adj[v].append(n_vars + fi)
    diameter = 0
    for src in range(n):
        dist = [-1] * n
        dist[src] = 0
        queue = [src]
        for node in queue:
            for nbr in adj[node]:
                if dist[nbr] < 0:
                    dist[nbr] = dist[node] + 1
                    queue.append(nbr)
        diameter = max(diameter, max(dist))
    return diameter


class TestTreeExactness:
    @pytest.mark.parametrize("domain", ["primal", "dual"])
    def test_chain_matches_oracle_within_diameter(self, domain):
        p = ising_model(path_graph(6), [0.4, -0.9, 0.3, 0.7, 1.1], 0.2)
        nfg = p if domain == "primal" else dualize(p)
        oracle = marginals_primal(p) if domain == "primal" else marginals_dual(dualize(p))
        res = run_bp(nfg, BpConfig(damping=0.0))
        assert res.converged
        assert res.iterations <= factor_graph_diameter(p, domain)
        assert np.abs(res.edge_values - oracle.edge_values).max() < 1e-10
        assert np.abs(res.vertex_values - oracle.vertex_values).max() < 1e-10

    def test_star_tree_potts(self):
        g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        p = potts_model(g, 4, [0.8, -0.3, 0.5, 1.0], 0.25)
        res = run_bp(p, BpConfig(damping=0.0))
        oracle = marginals_primal(p)
        assert res.converged
        assert np.abs(res.edge_values - oracle.edge_values).max() < 1e-10

    def test_signed_dual_tree_exact(self):
        p = ising_model(path_graph(5), [-0.6, 0.4, -0.2, 0.9], 0.3)
        d = dualize(p)
        oracle = marginals_dual(d)
        res = run_bp(d, BpConfig(damping=0.0))
        assert res.converged
        assert np.abs(res.edge_values - oracle.edge_values).max() < 1e-10
        assert np.abs(res.vertex_values - oracle.vertex_values).max() < 1e-10


class TestLoopyBehavior:
    def test_beliefs_normalized_every_location(self):
        p = ising_model(grid_graph(3, 3, periodic=True), 0.4, 0.15)
        res = run_bp(p)
        assert np.abs(res.edge_values.sum(axis=1) - 1).max() < 1e-9
        assert np.abs(res.vertex_values.sum(axis=1) - 1).max() < 1e-9

    def test_damping_levels_share_fixed_point(self):
        p = ising_model(grid_graph(3, 3, periodic=True), 0.5, 0.1)
        r0 = run_bp(p, BpConfig(damping=0.0))
        r5 = run_bp(p, BpConfig(damping=0.5))
        assert r0.converged and r5.converged
        assert np.abs(r0.edge_values - r5.edge_values).max() < 1e-6

    def test_schedules_share_fixed_point(self):
        p = ising_model(ring_graph(6), 0.7, 0.2)
        rf = run_bp(p, BpConfig(schedule="flooding"))
        rs = run_bp(p, BpConfig(schedule="sequential"))
        assert rf.converged and rs.converged
        assert np.abs(rf.edge_values - rs.edge_values).max() < 1e-6

    def test_loopy_close_to_oracle_high_temperature(self):
        # the 3x3 torus has girth-3 loops, so a few percent of bias is expected
        p = ising_model(grid_graph(3, 3, periodic=True), 0.2, 0.15)
        oracle = marginals_primal(p)
        res = run_bp(p)
        assert res.converged
        assert relative_error(res.edge(0), oracle.edge(0)) < 0.05

    def test_nonconvergence_is_returned_not_raised(self):
        p = ising_model(grid_graph(3, 3, periodic=True), -2.0, 0.05)
        res = run_bp(p, BpConfig(damping=0.0, max_iters=40))
        assert isinstance(res, BpResult)
        assert not res.converged
        assert res.iterations == 40
        assert np.isfinite(res.residual)

    def test_primal_and_dual_fixed_points_correspond(self):
        # the local map carries one domain's BP fixed point onto the other's
        p = ising_model(grid_graph(3, 3, periodic=True), 0.6, 0.15)
        d = dualize(p)
        cfg = BpConfig(tol=1e-12, max_iters=20000)
        rp, rd = run_bp(p, cfg), run_bp(d, cfg)
        assert rp.converged and rd.converged
        for e in range(p.graph.num_edges):
            mapped = map_dual_to_primal(rd.edge(e), p.edge_tables[e], d.edge_tables[e])
            assert np.abs(mapped.values - rp.edge_values[e]).max() < 1e-9


class TestSignedDual:
    def test_frustrated_triangle_consistency(self):
        # dual BP on signed factors converges; its beliefs agree with mapped
        # primal BP to solver precision, and sit near the oracle marginal
        # functions at ordinary loopy-BP accuracy
        tri = Graph(3, [(0, 1), (1, 2), (2, 0)])
        p = potts_model(tri, 3, [-0.25, 0.8, 0.8], 0.1)
        d = dualize(p)
        cfg = BpConfig(tol=1e-12, max_iters=20000)
        rp, rd = run_bp(p, cfg), run_bp(d, cfg)
        assert rp.converged and rd.converged
        dm = marginals_dual(d)
        assert np.abs(rd.edge_values - dm.edge_values).max() < 0.05
        for e in range(3):
            mapped = map_primal_to_dual(rp.edge(e), p.edge_tables[e], d.edge_tables[e])
            assert np.abs(mapped.values - rd.edge_values[e]).max() < 1e-6

    def test_degenerate_message_is_identified(self):
        g = path_graph(2)
        d = DualNFG(
            g,
            ising_model(g, 0.5).alphabet,
            np.array([[0.0 + 0j, 0.0 + 0j]]),
            np.array([[1.0 + 0j, 1.0 + 0j], [1.0 + 0j, 1.0 + 0j]]),
        )
        with pytest.raises(DegenerateMessageError, match="edge"):
            run_bp(d)


class TestRelativeError:
    def test_identical_vectors(self):
        assert relative_error(np.array([0.6, 0.4]), np.array([0.6, 0.4])) == 0.0

    def test_first_entry_convention(self):
        assert relative_error(np.array([0.9, 0.1]), np.array([1.0, 0.0])) == pytest.approx(0.1)

    def test_l1_variant(self):
        got = relative_error(np.array([0.9, 0.1]), np.array([1.0, 0.0]), mode="l1")
        assert got == pytest.approx(0.2)

    def test_oracle_vs_bp_small_torus(self):
        p = ising_model(grid_graph(2, 2, periodic=True), 0.4, 0.1)
        oracle = marginals_primal(p)
        res = run_bp(p)
        err = relative_error(res.edge(0), oracle.edge(0))
        assert 0 <= err < 0.05


class TestConfigValidation:
    def test_bad_damping(self):
        with pytest.raises(ValueError):
            BpConfig(damping=1.0)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            BpConfig(tol=0.0)

    def test_bad_schedule(self):
        with pytest.raises(ValueError):
            BpConfig(schedule="roundrobin")
