"""Factor tables, the length-q DFT, model builders, and dualization.

A factor is a length-q table of complex values attached to one edge or one
vertex.  The primal model multiplies an edge table psi_e evaluated at
y_e = x_tail - x_head (mod q) for every edge with a vertex table phi_v
evaluated at x_v for every vertex.  Dualization replaces every table by its
unnormalized forward DFT and flips the role of vertex and edge configurations:
in the dual domain the free variables are the edge values y~ and the vertex
values are derived as x~ = M^T y~.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Alphabet, Graph

IMAG_TRUNCATION = 1e-12  # provably-real results below this are snapped to the real axis

PRIMAL = "primal"
DUAL = "dual"


@dataclass(frozen=True)
class Factor:
    """A length-q complex table located at one edge or one vertex."""

    values: np.ndarray
    site: tuple  # ("edge", index) or ("vertex", index)
    domain: str = PRIMAL

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))
        kind = self.site[0]
        if kind not in ("edge", "vertex"):
            raise ValueError(f"factor site kind must be 'edge' or 'vertex', got {kind!r}")
        if self.domain not in (PRIMAL, DUAL):
            raise ValueError(f"unknown domain tag {self.domain!r}")

    @property
    def q(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MarginalVector:
    """Length-q marginal over one edge or vertex, tagged with its domain.

    Entries of a valid PMF are real in [0, 1] and sum to one; for models whose
    dual factors are signed or complex the entries form a marginal *function*
    that still sums to one but may be negative or complex.
    """

    values: np.ndarray
    site: tuple
    domain: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))

    def real_values(self, tol: float = 1e-9) -> np.ndarray:
        """Real parts, refusing if a significant imaginary residue is present."""
        imag = np.abs(self.values.imag).max() if len(self.values) else 0.0
        scale = max(1.0, np.abs(self.values).max()) if len(self.values) else 1.0
        if imag > tol * scale:
            raise ValueError(f"marginal at {self.site} has imaginary residue {imag:.3e}")
        return self.values.real.copy()


def _truncate_imag(values: np.ndarray, tol: float = IMAG_TRUNCATION) -> np.ndarray:
    out = np.array(values, dtype=np.complex128)
    mask = np.abs(out.imag) < tol
    out.imag = np.where(mask, 0.0, out.imag)
    return out


def dft_table(values: np.ndarray, a: Alphabet) -> np.ndarray:
    """Unnormalized forward DFT on Z/qZ: f~(y~) = sum_y f(y) omega**(y*y~)."""
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != (a.q,):
        raise ValueError(f"table length {values.shape} != alphabet size {a.q}")
    return _truncate_imag(a.dft_matrix() @ values)


def idft_table(values: np.ndarray, a: Alphabet) -> np.ndarray:
    """Inverse DFT with 1/q prefactor and conjugate kernel; exact inverse of dft_table."""
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != (a.q,):
        raise ValueError(f"table length {values.shape} != alphabet size {a.q}")
    return _truncate_imag(np.conj(a.dft_matrix()) @ values / a.q)


def _flip(domain: str) -> str:
    return DUAL if domain == PRIMAL else PRIMAL


def dft(f: Factor, a: Alphabet) -> Factor:
    """Forward DFT of a factor; the domain tag flips."""
    return Factor(dft_table(f.values, a), f.site, _flip(f.domain))


def idft(f: Factor, a: Alphabet) -> Factor:
    """Inverse DFT of a factor; idft(dft(f)) == f up to round-off."""
    return Factor(idft_table(f.values, a), f.site, _flip(f.domain))


class _BaseNFG:
    """Graph plus one table per edge and per vertex, stored as stacked arrays."""

    domain: str

    def __init__(self, graph: Graph, alphabet: Alphabet, edge_tables, vertex_tables):
        self.graph = graph
        self.alphabet = alphabet
        # private copies, frozen: models are immutable after construction
        self.edge_tables = np.array(edge_tables, dtype=np.complex128)
        self.vertex_tables = np.array(vertex_tables, dtype=np.complex128)
        self.edge_tables.setflags(write=False)
        self.vertex_tables.setflags(write=False)
        q = alphabet.q
        if self.edge_tables.shape != (graph.num_edges, q):
            raise ValueError(
                f"edge tables have shape {self.edge_tables.shape}, "
                f"expected {(graph.num_edges, q)}"
            )
        if self.vertex_tables.shape != (graph.num_vertices, q):
            raise ValueError(
                f"vertex tables have shape {self.vertex_tables.shape}, "
                f"expected {(graph.num_vertices, q)}"
            )

    def edge_factor(self, e: int) -> Factor:
        return Factor(self.edge_tables[e], ("edge", e), self.domain)

    def vertex_factor(self, v: int) -> Factor:
        return Factor(self.vertex_tables[v], ("vertex", v), self.domain)


class PrimalNFG(_BaseNFG):
    """Primal model: pi_p(x) proportional to prod_e psi_e(y_e(x)) * prod_v phi_v(x_v)."""

    domain = PRIMAL

    def __init__(self, graph, alphabet, edge_tables, vertex_tables):
        super().__init__(graph, alphabet, edge_tables, vertex_tables)
        for name, tables in (("edge", self.edge_tables), ("vertex", self.vertex_tables)):
            if np.abs(tables.imag).max(initial=0.0) > IMAG_TRUNCATION:
                raise ValueError(f"primal {name} tables must be real")
            if tables.real.min(initial=0.0) < 0:
                raise ValueError(f"primal {name} tables must be nonnegative")


class DualNFG(_BaseNFG):
    """Dual model over edge configurations y~; vertex values derive as x~ = M^T y~.

    Tables may be signed or complex; when they are, the dual global function is
    not a PMF and its marginals are marginal functions (see is_nonnegative).
    """

    domain = DUAL


def dualize(p: PrimalNFG) -> DualNFG:
    """Replace every factor table by its forward DFT; the graph is unchanged."""
    a = p.alphabet
    return DualNFG(
        p.graph,
        a,
        np.stack([dft_table(t, a) for t in p.edge_tables]) if p.graph.num_edges else
        np.zeros((0, a.q), dtype=np.complex128),
        np.stack([dft_table(t, a) for t in p.vertex_tables]),
    )


def is_nonnegative(d: DualNFG) -> bool:
    """True iff every dual table entry is real (|imag| < 1e-12) with nonnegative real part.

    This is the gate for interpreting the dual global function as a PMF and
    therefore for Gibbs sampling in the dual domain.
    """
    for tables in (d.edge_tables, d.vertex_tables):
        if tables.size == 0:
            continue
        if np.abs(tables.imag).max() >= IMAG_TRUNCATION:
            return False
        if tables.real.min() < -IMAG_TRUNCATION:
            return False
    return True


# -- Builder tables ------------------------------------------------------------


def ising_edge_table(beta_j: float) -> np.ndarray:
    return np.array([np.exp(beta_j), np.exp(-beta_j)], dtype=np.complex128)


def ising_vertex_table(beta_h: float) -> np.ndarray:
    return np.array([np.exp(beta_h), np.exp(-beta_h)], dtype=np.complex128)


def potts_edge_table(q: int, beta_j: float) -> np.ndarray:
    t = np.ones(q, dtype=np.complex128)
    t[0] = np.exp(beta_j)
    return t


def potts_vertex_table(q: int, beta_h: float) -> np.ndarray:
    t = np.ones(q, dtype=np.complex128)
    t[0] = np.exp(beta_h)
    return t


def clock_edge_table(q: int, beta_j: float) -> np.ndarray:
    y = np.arange(q)
    return np.exp(beta_j * np.cos(2 * np.pi * y / q)).astype(np.complex128)


def ising_dual_edge_table(beta_j: float) -> np.ndarray:
    """Closed form of the binary edge-table DFT: [2 cosh bJ, 2 sinh bJ]."""
    return np.array([2 * np.cosh(beta_j), 2 * np.sinh(beta_j)], dtype=np.complex128)


def potts_dual_edge_table(q: int, beta_j: float) -> np.ndarray:
    """Closed form of the q-state edge-table DFT: e^bJ - 1 + q at 0, else e^bJ - 1."""
    t = np.full(q, np.exp(beta_j) - 1.0, dtype=np.complex128)
    t[0] += q
    return t


def _per_edge(values, num_edges: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(num_edges, float(arr))
    if arr.shape != (num_edges,):
        raise ValueError(f"expected {num_edges} per-edge values, got shape {arr.shape}")
    return arr


def _per_vertex(values, num_vertices: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(num_vertices, float(arr))
    if arr.shape != (num_vertices,):
        raise ValueError(f"expected {num_vertices} per-vertex values, got shape {arr.shape}")
    return arr


def ising_model(g: Graph, couplings, fields=0.0) -> PrimalNFG:
    """Binary model with psi_e = [e^bJ, e^-bJ] and phi_v = [e^bH, e^-bH]."""
    bj = _per_edge(couplings, g.num_edges)
    bh = _per_vertex(fields, g.num_vertices)
    edge_tables = np.stack([ising_edge_table(b) for b in bj]) if g.num_edges else \
        np.zeros((0, 2), dtype=np.complex128)
    vertex_tables = np.stack([ising_vertex_table(b) for b in bh])
    return PrimalNFG(g, Alphabet(2), edge_tables, vertex_tables)


def potts_model(g: Graph, q: int, couplings, fields=0.0) -> PrimalNFG:
    """q-state model: psi_e(0) = e^bJ else 1; the field acts on state 0 only."""
    bj = _per_edge(couplings, g.num_edges)
    bh = _per_vertex(fields, g.num_vertices)
    edge_tables = np.stack([potts_edge_table(q, b) for b in bj]) if g.num_edges else \
        np.zeros((0, q), dtype=np.complex128)
    vertex_tables = np.stack([potts_vertex_table(q, b) for b in bh])
    return PrimalNFG(g, Alphabet(q), edge_tables, vertex_tables)


def clock_model(g: Graph, q: int, couplings) -> PrimalNFG:
    """Cosine-interaction model psi_e(y) = exp(bJ cos(2 pi y / q)); zero field."""
    bj = _per_edge(couplings, g.num_edges)
    edge_tables = np.stack([clock_edge_table(q, b) for b in bj]) if g.num_edges else \
        np.zeros((0, q), dtype=np.complex128)
    vertex_tables = np.ones((g.num_vertices, q), dtype=np.complex128)
    return PrimalNFG(g, Alphabet(q), edge_tables, vertex_tables)
