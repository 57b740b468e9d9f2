"""Local marginal mappings, fixed points, criticality constants, and bounds."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfgdual.graphs import Alphabet, Graph, grid_graph, path_graph, ring_graph
from nfgdual.mapping import (
    CLOCK4_CRITICAL,
    ISING_CRITICAL,
    MagnetizationPair,
    SingularMapError,
    clock_fixed_point,
    fixed_point,
    ising_fixed_point,
    ising_lower_bounds,
    magnetization_roundtrip,
    map_dual_to_primal,
    map_primal_to_dual,
    potts_critical,
    potts_fixed_point,
    potts_lower_bounds,
)
from nfgdual.nfg import dft_table, dualize, ising_edge_table, ising_model, potts_model
from nfgdual.oracle import marginals_dual, marginals_primal


def triangle():
    return Graph(3, [(0, 1), (1, 2), (2, 0)])


class TestMapAgainstOracle:
    def test_three_ring_ising(self):
        p = ising_model(ring_graph(3), 0.5)
        d = dualize(p)
        om, dm = marginals_primal(p), marginals_dual(d)
        mv = map_dual_to_primal(dm.edge(0), p.edge_tables[0], d.edge_tables[0])
        assert np.abs(mv.values - om.edge_values[0]).max() < 1e-10
        assert mv.domain == "primal"

    def test_frustrated_potts_signed_dual(self):
        p = potts_model(triangle(), 3, [-0.25, 0.8, 0.8], 0.1)
        d = dualize(p)
        om, dm = marginals_primal(p), marginals_dual(d)
        for e in range(3):
            mapped = map_dual_to_primal(dm.edge(e), p.edge_tables[e], d.edge_tables[e])
            assert np.abs(mapped.values - om.edge_values[e]).max() < 1e-10
            assert np.abs(mapped.values.imag).max() < 1e-10  # real-out from signed-in

    def test_vertices_map_too(self, small_model_corpus):
        # clock models carry no field, so their dual vertex tables have zeros
        # and sit outside the map's precondition; everything else must map
        for p, family in small_model_corpus[:10]:
            d = dualize(p)
            om, dm = marginals_primal(p), marginals_dual(d)
            for v in range(p.graph.num_vertices):
                if family == "clock":
                    with pytest.raises(SingularMapError):
                        map_dual_to_primal(dm.vertex(v), p.vertex_tables[v], d.vertex_tables[v])
                    continue
                mapped = map_dual_to_primal(dm.vertex(v), p.vertex_tables[v], d.vertex_tables[v])
                assert np.abs(mapped.values - om.vertex_values[v]).max() < 1e-10

    def test_corpus_edges_both_directions(self, small_model_corpus):
        for p, _family in small_model_corpus[:10]:
            d = dualize(p)
            om, dm = marginals_primal(p), marginals_dual(d)
            for e in range(p.graph.num_edges):
                to_p = map_dual_to_primal(dm.edge(e), p.edge_tables[e], d.edge_tables[e])
                assert np.abs(to_p.values - om.edge_values[e]).max() < 1e-10
                to_d = map_primal_to_dual(om.edge(e), p.edge_tables[e], d.edge_tables[e])
                assert np.abs(to_d.values - dm.edge_values[e]).max() < 1e-10

    def test_torus_primal_to_dual(self):
        p = ising_model(grid_graph(2, 2, periodic=True), 0.44)
        d = dualize(p)
        om, dm = marginals_primal(p), marginals_dual(d)
        mapped = map_primal_to_dual(om.edge(0), p.edge_tables[0], d.edge_tables[0])
        assert np.abs(mapped.values - dm.edge_values[0]).max() < 1e-10

    def test_mapped_output_sums_to_one(self):
        # the map preserves the unit sum exactly, even for noisy inputs
        rng = np.random.default_rng(5)
        psi = ising_edge_table(0.6)
        psit = dft_table(psi, Alphabet(2))
        noisy = np.array([0.93, 0.07]) + rng.normal(0, 0.01, 2)
        noisy /= noisy.sum()
        out = map_dual_to_primal(noisy, psi, psit)
        assert out.values.sum().real == pytest.approx(1.0, abs=1e-12)


class TestRoundTrip:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 10 ** 9))
    def test_random_marginal_roundtrip(self, q, seed):
        rng = np.random.default_rng(seed)
        table = rng.uniform(0.2, 2.0, q).astype(complex)
        dual_table = dft_table(table, Alphabet(q))
        if np.abs(dual_table).min() < 1e-6:
            return  # singular draw, nothing to round-trip
        marg = rng.uniform(0.05, 1.0, q)
        marg = (marg / marg.sum()).astype(complex)
        there = map_primal_to_dual(marg, table, dual_table)
        back = map_dual_to_primal(there, table, dual_table)
        assert np.abs(back.values - marg).max() < 1e-12

    def test_low_temperature_limit(self):
        bj = 2.0
        psi = ising_edge_table(bj)
        psit = dft_table(psi, Alphabet(2))
        out = map_primal_to_dual(np.array([1.0, 0.0]), psi, psit)
        expected = [(1 + np.exp(-2 * bj)) / 2, (1 - np.exp(-2 * bj)) / 2]
        assert np.allclose(out.values.real, expected, atol=1e-13)

    def test_singular_zero_coupling(self):
        psi = ising_edge_table(0.0)
        psit = dft_table(psi, Alphabet(2))  # [2, 0]
        with pytest.raises(SingularMapError, match="singular"):
            map_dual_to_primal(np.array([1.0, 0.0]), psi, psit)

    def test_singular_primal_zero(self):
        psi = np.array([1.0, 0.0])
        psit = dft_table(psi, Alphabet(2))
        with pytest.raises(SingularMapError):
            map_primal_to_dual(np.array([0.5, 0.5]), psi, psit)


class TestFixedPoints:
    def test_fixed_under_map(self):
        psi = ising_edge_table(0.6)
        psit = dft_table(psi, Alphabet(2))
        star = fixed_point(psi, psit)
        mapped = map_dual_to_primal(star, psi, psit)
        assert np.abs(mapped.values - star.values).max() < 1e-14

    def test_homogeneous_ising_closed_form(self):
        bj = 0.37
        got = ising_fixed_point(bj)
        denom = 1 + np.sinh(2 * bj)
        expected = [np.exp(bj) * np.cosh(bj) / denom, np.exp(-bj) * np.sinh(bj) / denom]
        assert np.allclose(got, expected, atol=1e-14)

    def test_ising_criticality_values(self):
        got = ising_fixed_point(ISING_CRITICAL)
        expected = [(2 + np.sqrt(2)) / 4, (2 - np.sqrt(2)) / 4]
        assert np.abs(got - expected).max() < 1e-12

    @pytest.mark.parametrize("q", [3, 4, 5, 10, 100])
    def test_potts_criticality_values(self, q):
        got = potts_fixed_point(q, potts_critical(q))
        assert abs(got[0] - (1 + 1 / np.sqrt(q)) / 2) < 1e-12
        assert np.abs(got[1:] - (1 - 1 / np.sqrt(q)) / (2 * (q - 1))).max() < 1e-12

    def test_potts_q3_plot_point(self):
        assert potts_critical(3) == pytest.approx(1.005, abs=5e-4)
        fp = potts_fixed_point(3, potts_critical(3))
        assert fp[0] == pytest.approx(0.7887, abs=5e-5)
        assert fp[1] == pytest.approx(0.10565, abs=5e-5)

    def test_clock4_criticality_values(self):
        got = clock_fixed_point(4, CLOCK4_CRITICAL)
        expected = [(3 + 2 * np.sqrt(2)) / 8, 1 / 8, (3 - 2 * np.sqrt(2)) / 8, 1 / 8]
        assert np.abs(got - expected).max() < 1e-12

    def test_potts_critical_consistency(self):
        assert potts_critical(2) == pytest.approx(2 * ISING_CRITICAL, rel=1e-14)
        assert CLOCK4_CRITICAL == pytest.approx(2 * ISING_CRITICAL, rel=1e-14)

    def test_grid_argmin_ising(self):
        grid = np.round(np.arange(0.01, 3.0001, 0.01), 10)
        vals = [ising_fixed_point(b)[0] for b in grid]
        assert grid[int(np.argmin(vals))] == pytest.approx(0.44, abs=1e-9)

    def test_many_component_limit(self):
        prev = None
        for q in (10, 100, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
            fp0 = potts_fixed_point(q, potts_critical(q))[0]
            assert fp0 == pytest.approx((1 + 1 / np.sqrt(q)) / 2, abs=1e-9)
            if prev is not None:
                assert fp0 < prev  # monotone approach to 1/2 from above
            prev = fp0
        assert abs(prev - 0.5) < 1e-3


class TestBounds:
    def test_boundary_values(self):
        assert ising_lower_bounds(0.0) == pytest.approx((0.5, 1.0))
        bp, bd = potts_lower_bounds(3, 0.0)
        assert (bp, bd) == pytest.approx((1 / 3, 1.0))

    def test_intersection_at_criticality(self):
        bp, bd = ising_lower_bounds(ISING_CRITICAL)
        assert bp == pytest.approx(bd, abs=1e-14)
        assert bp == pytest.approx(np.sqrt(2) / 2, abs=1e-14)
        qp, qd = potts_lower_bounds(3, potts_critical(3))
        assert qp == pytest.approx(qd, abs=1e-14)
        assert qp == pytest.approx(1 / np.sqrt(3), abs=1e-14)

    def test_formula_at_unit_coupling(self):
        bp, bd = ising_lower_bounds(1.0)
        assert bp == pytest.approx(1 / (1 + np.exp(-2)), rel=1e-14)
        assert bd == pytest.approx((1 + np.exp(-2)) / 2, rel=1e-14)

    def test_potts_q2_reduces_to_ising(self):
        bj = 0.65
        bp2, bd2 = potts_lower_bounds(2, 2 * bj)
        bp, bd = ising_lower_bounds(bj)
        assert bp2 == pytest.approx(bp, rel=1e-13)
        assert bd2 == pytest.approx(bd, rel=1e-13)

    def test_bound_products_are_exact_floors(self):
        for bj in (0.1, 0.44, 1.7):
            bp, bd = ising_lower_bounds(bj)
            assert bp * bd == pytest.approx(0.5, rel=1e-14)
            qp, qd = potts_lower_bounds(5, bj)
            assert qp * qd == pytest.approx(0.2, rel=1e-14)

    def test_oracle_marginals_respect_bounds(self):
        rng = np.random.default_rng(12)
        for _ in range(8):
            bjs = rng.uniform(0.05, 2.0, 3)
            p = ising_model(triangle(), bjs, rng.uniform(0, 1, 3))
            om = marginals_primal(p)
            dm = marginals_dual(dualize(p))
            for e in range(3):
                bp, bd = ising_lower_bounds(bjs[e])
                assert om.edge_values[e, 0].real >= bp - 1e-12
                assert dm.edge_values[e, 0].real >= bd - 1e-12

    def test_ferromagnetic_precondition(self):
        with pytest.raises(ValueError):
            ising_lower_bounds(-0.1)


class TestPottsSymmetry:
    def test_ratio_constant_over_nonzero_states(self):
        p = potts_model(ring_graph(4), 4, 0.8, 0.3)
        om = marginals_primal(p)
        dm = marginals_dual(dualize(p))
        d = dualize(p)
        for e in range(4):
            ratios = (om.edge_values[e] / p.edge_tables[e])[1:]
            assert np.abs(ratios - ratios[0]).max() < 1e-12
            dratios = (dm.edge_values[e] / d.edge_tables[e])[1:]
            assert np.abs(dratios - dratios[0]).max() < 1e-12


class TestMagnetization:
    def test_critical_fixed_point(self):
        pair = magnetization_roundtrip(ISING_CRITICAL, delta_d=np.sqrt(2) / 2)
        assert pair.delta_p == pytest.approx(np.sqrt(2) / 2, abs=1e-14)

    def test_free_chain_limit(self):
        bj = 0.9
        pair = magnetization_roundtrip(bj, delta_d=1.0)
        assert pair.primal[0] == pytest.approx(np.exp(bj) / (2 * np.cosh(bj)), rel=1e-13)

    def test_roundtrip_identity(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            delta_d, bj = rng.uniform(0, 1), 0.7
            pair = magnetization_roundtrip(bj, delta_d=delta_d)
            back = magnetization_roundtrip(bj, delta_p=pair.delta_p)
            assert back.delta_d == pytest.approx(delta_d, abs=1e-12)

    def test_consistent_with_local_map(self):
        bj, delta_d = 0.6, 0.55
        pair = magnetization_roundtrip(bj, delta_d=delta_d)
        psi = ising_edge_table(bj)
        psit = dft_table(psi, Alphabet(2))
        mapped = map_dual_to_primal(pair.dual.astype(complex), psi, psit)
        assert np.abs(mapped.values.real - pair.primal).max() < 1e-12

    def test_requires_exactly_one_delta(self):
        with pytest.raises(ValueError):
            magnetization_roundtrip(0.5)
        with pytest.raises(ValueError):
            magnetization_roundtrip(0.5, delta_p=0.1, delta_d=0.2)

    def test_result_type(self):
        pair = magnetization_roundtrip(0.5, delta_d=0.3)
        assert isinstance(pair, MagnetizationPair)
        assert pair.dual.sum() == pytest.approx(1.0)
