"""MCMC marginal estimators: heat-bath Gibbs in both domains and the
subgraphs-world process for ferromagnetic binary models in a positive field.

All chains are driven by numpy's PCG64 generator (stable across versions, so
seeded estimates can serve as golden fixtures) and use a systematic sweep by
default: sites are updated in ascending index order, one full pass per sweep.
`samples` counts retained sweeps; the default burn-in is ten times the number
of variables in the sampled domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bp import BpConfig, run_bp
from .graphs import betti
from .mapping import SingularMapError, map_dual_to_primal
from .nfg import DUAL, PRIMAL, DualNFG, MarginalVector, PrimalNFG, dualize, is_nonnegative


class SamplerError(ValueError):
    """Model violates a sampler's precondition."""


@dataclass(frozen=True)
class SamplerConfig:
    """seed/burn-in/samples/thinning; deterministic given seed.

    burn_in=None means 10x the number of variables in the sampled domain.
    """

    seed: int
    samples: int = 10_000
    burn_in: int | None = None
    thinning: int = 1
    sweep: str = "systematic"  # or "random"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.sweep not in ("systematic", "random"):
            raise ValueError(f"unknown sweep strategy {self.sweep!r}")

    def resolved_burn_in(self, num_variables: int) -> int:
        return 10 * num_variables if self.burn_in is None else self.burn_in


@dataclass
class SampleEstimates:
    """Empirical per-edge and per-vertex marginal frequencies of one domain."""

    edge_values: np.ndarray
    vertex_values: np.ndarray
    domain: str

    def edge(self, e: int) -> MarginalVector:
        return MarginalVector(self.edge_values[e], ("edge", e), self.domain)

    def vertex(self, v: int) -> MarginalVector:
        return MarginalVector(self.vertex_values[v], ("vertex", v), self.domain)


def _real_tables(tables: np.ndarray, what: str) -> list:
    if tables.size and np.abs(tables.imag).max() > 1e-12:
        raise SamplerError(f"{what} must be real for sampling")
    real = tables.real
    if real.size and real.min() < -1e-12:  # same tolerance as is_nonnegative
        raise SamplerError(f"{what} must be nonnegative for sampling")
    return [row.clip(min=0.0).tolist() for row in real]


def _site_order(n: int, sweep: str, rng) -> list:
    if sweep == "systematic":
        return list(range(n))
    return [int(i) for i in rng.integers(0, n, size=n)]


def _draw(weights: list, rng) -> int:
    total = sum(weights)
    u = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def gibbs_primal(p: PrimalNFG, cfg: SamplerConfig) -> SampleEstimates:
    """Single-site heat bath over vertex configurations.

    Each update resamples x_v from its exact conditional given the neighbors:
    weight(a) = phi_v(a) * prod over incident edges of psi_e at the implied
    edge value.  Estimates are empirical frequencies of x_v and y_e(x) over
    retained sweeps.
    """
    g, q = p.graph, p.alphabet.q
    psi = _real_tables(p.edge_tables, "primal edge tables")
    phi = _real_tables(p.vertex_tables, "primal vertex tables")
    # per vertex: (edge table, other endpoint, vertex is tail)
    incident = [[] for _ in range(g.num_vertices)]
    for e, (t, h) in enumerate(g.edges):
        incident[t].append((psi[e], h, True))
        incident[h].append((psi[e], t, False))
    rng = np.random.default_rng(cfg.seed)
    x = [0] * g.num_vertices
    edge_counts = np.zeros((g.num_edges, q), dtype=np.int64)
    vertex_counts = np.zeros((g.num_vertices, q), dtype=np.int64)
    burn = cfg.resolved_burn_in(g.num_vertices)
    total_sweeps = burn + cfg.samples * cfg.thinning
    retained = 0
    for sweep in range(total_sweeps):
        for v in _site_order(g.num_vertices, cfg.sweep, rng):
            weights = []
            for a in range(q):
                w = phi[v][a]
                for table, other, is_tail in incident[v]:
                    y = (a - x[other]) % q if is_tail else (x[other] - a) % q
                    w *= table[y]
                weights.append(w)
            x[v] = _draw(weights, rng)
        if sweep >= burn and (sweep - burn) % cfg.thinning == 0:
            retained += 1
            for v in range(g.num_vertices):
                vertex_counts[v, x[v]] += 1
            for e, (t, h) in enumerate(g.edges):
                edge_counts[e, (x[t] - x[h]) % q] += 1
    return SampleEstimates(
        edge_counts / retained, vertex_counts / retained, PRIMAL
    )


def gibbs_dual(d: DualNFG, cfg: SamplerConfig) -> SampleEstimates:
    """Single-edge-variable heat bath over dual configurations y~.

    The conditional of y~_e involves psi~_e and the two phi~ factors at its
    endpoints (x~ = M^T y~ is tracked incrementally).  Requires a nonnegative
    dual; signed duals have no dual-domain PMF -- estimate those with run_bp.
    Zero entries in phi~ (zero-field models) act as hard parity constraints,
    under which single-edge moves are non-ergodic on any graph with cycles,
    so that combination is refused as well.
    """
    if not is_nonnegative(d):
        raise SamplerError(
            "dual factors are signed or complex, so no dual PMF exists; "
            "estimate dual marginal functions with run_bp instead"
        )
    g, q = d.graph, d.alphabet.q
    psit = _real_tables(d.edge_tables, "dual edge tables")
    phit = _real_tables(d.vertex_tables, "dual vertex tables")
    has_zero = any(min(row) <= 0.0 for row in phit)
    if has_zero and betti(g) > 0:
        raise SamplerError(
            "dual vertex table has zero entries (zero external field): the "
            "single-edge heat bath is non-ergodic on cyclic graphs; add a "
            "field, or use run_bp / the subgraphs-world process"
        )
    rng = np.random.default_rng(cfg.seed)
    y = [0] * g.num_edges
    xt = [0] * g.num_vertices  # x~ = M^T y~, maintained incrementally
    edge_counts = np.zeros((g.num_edges, q), dtype=np.int64)
    vertex_counts = np.zeros((g.num_vertices, q), dtype=np.int64)
    burn = cfg.resolved_burn_in(g.num_edges)
    total_sweeps = burn + cfg.samples * cfg.thinning
    retained = 0
    edges = list(g.edges)
    for sweep in range(total_sweeps):
        for e in _site_order(g.num_edges, cfg.sweep, rng):
            t, h = edges[e]
            cur = y[e]
            base_t = (xt[t] - cur) % q  # tail sees +y~_e, head sees -y~_e
            base_h = (xt[h] + cur) % q
            weights = [
                psit[e][a] * phit[t][(base_t + a) % q] * phit[h][(base_h - a) % q]
                for a in range(q)
            ]
            new = _draw(weights, rng)
            if new != cur:
                y[e] = new
                xt[t] = (base_t + new) % q
                xt[h] = (base_h - new) % q
        if sweep >= burn and (sweep - burn) % cfg.thinning == 0:
            retained += 1
            for e in range(g.num_edges):
                edge_counts[e, y[e]] += 1
            for v in range(g.num_vertices):
                vertex_counts[v, xt[v]] += 1
    return SampleEstimates(edge_counts / retained, vertex_counts / retained, DUAL)


@dataclass
class SubgraphState:
    """Edge subset U plus the per-vertex parity of its degrees, kept in sync."""

    member: list  # bool per edge
    odd: list     # 0/1 per vertex

    @classmethod
    def empty(cls, graph) -> "SubgraphState":
        return cls([False] * graph.num_edges, [0] * graph.num_vertices)

    def toggle(self, e: int, tail: int, head: int) -> None:
        self.member[e] = not self.member[e]
        self.odd[tail] ^= 1
        self.odd[head] ^= 1

    def recompute_odd(self, graph) -> list:
        odd = [0] * graph.num_vertices
        for e, (t, h) in enumerate(graph.edges):
            if self.member[e]:
                odd[t] ^= 1
                odd[h] ^= 1
        return odd

    def bitmask(self) -> int:
        mask = 0
        for e, inside in enumerate(self.member):
            if inside:
                mask |= 1 << e
        return mask


def subgraph_weight(state: SubgraphState, tanh_j, tanh_h) -> float:
    """w(U) = prod_{e in U} tanh(bJ_e) * prod_{v odd in U} tanh(bH_v)."""
    w = 1.0
    for e, inside in enumerate(state.member):
        if inside:
            w *= tanh_j[e]
    for v, parity in enumerate(state.odd):
        if parity:
            w *= tanh_h[v]
    return w


def _swp_parameters(p: PrimalNFG):
    if p.alphabet.q != 2:
        raise SamplerError("the subgraphs-world process is a binary-model sampler")
    bj = np.log(p.edge_tables[:, 0].real) if p.graph.num_edges else np.zeros(0)
    bh = np.log(p.vertex_tables[:, 0].real)
    # builder tables are [e^b, e^-b]; verify and recover b
    if p.graph.num_edges and np.abs(p.edge_tables[:, 1].real - np.exp(-bj)).max() > 1e-9:
        raise SamplerError("edge tables are not of the [e^bJ, e^-bJ] binary form")
    if np.abs(p.vertex_tables[:, 1].real - np.exp(-bh)).max() > 1e-9:
        raise SamplerError("vertex tables are not of the [e^bH, e^-bH] binary form")
    if p.graph.num_edges and bj.min() <= 0:
        raise SamplerError("subgraphs-world sampling needs all couplings > 0")
    if bh.min() <= 0:
        raise SamplerError("subgraphs-world sampling needs all fields > 0")
    return np.tanh(bj).tolist(), np.tanh(bh).tolist()


def swp(p: PrimalNFG, cfg: SamplerConfig, audit_every: int | None = None) -> SampleEstimates:
    """Subgraphs-world process: Metropolis single-edge toggles over U, stationary
    on w(U) = prod_{e in U} tanh(bJ_e) * prod_{v in odd(U)} tanh(bH_v).

    That law is exactly the dual PMF of a ferromagnetic binary model in a
    positive field, so the estimates it returns are dual-domain marginals:
    pi~_d,e(1) is the frequency of e in U and pi~_d,v(1) the frequency of v
    having odd degree in U.  audit_every cross-checks the incremental parity
    bookkeeping against a recomputation every so many proposals.
    """
    tanh_j, tanh_h = _swp_parameters(p)
    g = p.graph
    rng = np.random.default_rng(cfg.seed)
    state = SubgraphState.empty(g)
    edges = list(g.edges)
    edge_counts = np.zeros(g.num_edges, dtype=np.int64)
    vertex_counts = np.zeros(g.num_vertices, dtype=np.int64)
    burn = cfg.resolved_burn_in(g.num_edges)
    total_sweeps = burn + cfg.samples * cfg.thinning
    retained = 0
    proposals = 0
    for sweep in range(total_sweeps):
        for e in _site_order(g.num_edges, cfg.sweep, rng):
            t, h = edges[e]
            ratio = tanh_j[e] if not state.member[e] else 1.0 / tanh_j[e]
            ratio *= 1.0 / tanh_h[t] if state.odd[t] else tanh_h[t]
            ratio *= 1.0 / tanh_h[h] if state.odd[h] else tanh_h[h]
            if ratio >= 1.0 or rng.random() < ratio:
                state.toggle(e, t, h)
            proposals += 1
            if audit_every and proposals % audit_every == 0:
                if state.odd != state.recompute_odd(g):
                    raise AssertionError("parity bookkeeping diverged from recomputation")
        if sweep >= burn and (sweep - burn) % cfg.thinning == 0:
            retained += 1
            for e in range(g.num_edges):
                if state.member[e]:
                    edge_counts[e] += 1
            for v in range(g.num_vertices):
                if state.odd[v]:
                    vertex_counts[v] += 1
    in_freq = edge_counts / retained
    odd_freq = vertex_counts / retained
    return SampleEstimates(
        np.stack([1.0 - in_freq, in_freq], axis=1),
        np.stack([1.0 - odd_freq, odd_freq], axis=1),
        DUAL,
    )


def swp_state_histogram(p: PrimalNFG, steps: int, seed: int) -> np.ndarray:
    """Per-proposal occupancy counts over all 2^|E| subgraph states.

    The recorded chain includes every step after a 10*|E|-sweep burn-in;
    intended for detailed-balance checks on very small graphs.
    """
    g = p.graph
    if g.num_edges > 20:
        raise SamplerError("state histogram is exponential in |E|; keep |E| <= 20")
    tanh_j, tanh_h = _swp_parameters(p)
    rng = np.random.default_rng(seed)
    state = SubgraphState.empty(g)
    edges = list(g.edges)
    counts = np.zeros(2 ** g.num_edges, dtype=np.int64)
    burn_proposals = 10 * g.num_edges * g.num_edges
    for step in range(burn_proposals + steps):
        e = step % g.num_edges
        t, h = edges[e]
        ratio = tanh_j[e] if not state.member[e] else 1.0 / tanh_j[e]
        ratio *= 1.0 / tanh_h[t] if state.odd[t] else tanh_h[t]
        ratio *= 1.0 / tanh_h[h] if state.odd[h] else tanh_h[h]
        if ratio >= 1.0 or rng.random() < ratio:
            state.toggle(e, t, h)
        if step >= burn_proposals:
            counts[state.bitmask()] += 1
    return counts


def swp_state_weights(p: PrimalNFG) -> np.ndarray:
    """Exact stationary weights w(U) over all 2^|E| states, for small graphs."""
    g = p.graph
    if g.num_edges > 20:
        raise SamplerError("state weights are exponential in |E|; keep |E| <= 20")
    tanh_j, tanh_h = _swp_parameters(p)
    out = np.zeros(2 ** g.num_edges)
    for mask in range(2 ** g.num_edges):
        state = SubgraphState.empty(g)
        for e, (t, h) in enumerate(g.edges):
            if mask & (1 << e):
                state.toggle(e, t, h)
        out[mask] = subgraph_weight(state, tanh_j, tanh_h)
    return out


@dataclass
class PrimalEstimates:
    """Dual-domain estimates pushed through the local maps, edge by edge.

    vertex_values is None when the vertex map is singular (zero-field models).
    """

    edge_values: np.ndarray
    vertex_values: np.ndarray | None
    dual_estimates: SampleEstimates
    converged: bool | None = None  # set by the bp_dual method

    def edge(self, e: int) -> MarginalVector:
        return MarginalVector(self.edge_values[e], ("edge", e), PRIMAL)

    def vertex(self, v: int) -> MarginalVector:
        if self.vertex_values is None:
            raise SingularMapError("vertex map was singular for this model")
        return MarginalVector(self.vertex_values[v], ("vertex", v), PRIMAL)


def estimate_primal_via_dual(
    p: PrimalNFG,
    method: str,
    cfg: SamplerConfig | None = None,
    bp_config: BpConfig | None = None,
) -> PrimalEstimates:
    """Estimate in the dual domain, then transform every location at once.

    method: "swp" (ferromagnetic binary, positive field), "gibbs_dual"
    (nonnegative dual), or "bp_dual" (any signs).  Edge estimates are always
    mapped; vertex estimates are mapped when every phi~ table is nonsingular
    and reported as None otherwise.
    """
    d = dualize(p)
    converged = None
    if method == "swp":
        if cfg is None:
            raise ValueError("swp needs a SamplerConfig")
        dual_est = swp(p, cfg)
    elif method == "gibbs_dual":
        if cfg is None:
            raise ValueError("gibbs_dual needs a SamplerConfig")
        dual_est = gibbs_dual(d, cfg)
    elif method == "bp_dual":
        res = run_bp(d, bp_config or BpConfig())
        dual_est = SampleEstimates(res.edge_values, res.vertex_values, DUAL)
        converged = res.converged
    else:
        raise ValueError(f"unknown method {method!r}")

    q = p.alphabet.q
    edge_values = np.zeros((p.graph.num_edges, q), dtype=np.complex128)
    for e in range(p.graph.num_edges):
        edge_values[e] = map_dual_to_primal(
            dual_est.edge(e), p.edge_tables[e], d.edge_tables[e]
        ).values
    vertex_values = np.zeros((p.graph.num_vertices, q), dtype=np.complex128)
    try:
        for v in range(p.graph.num_vertices):
            vertex_values[v] = map_dual_to_primal(
                dual_est.vertex(v), p.vertex_tables[v], d.vertex_tables[v]
            ).values
    except SingularMapError:
        vertex_values = None
    return PrimalEstimates(edge_values, vertex_values, dual_est, converged)
