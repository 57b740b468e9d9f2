"""Loopy sum-product message passing on primal and dual models.

Both domains reduce to one factor-graph shape: every factor is a length-q
kernel table evaluated at a signed sum of its neighboring variables,

    f(s_1 z_1 + s_2 z_2 + ... + s_d z_d  mod q),  s_i in {+1, -1}.

Primal: variables are vertex values, edge kernels see (x_tail - x_head) and
vertex kernels are unary.  Dual: variables are edge values, edge kernels are
unary and vertex kernels see the incidence-signed sum (M^T y~)_v.  Messages
through a kernel factor are cyclic convolutions, computed exactly with the
length-q DFT.  Signed and complex tables are allowed throughout; messages are
normalized by the sum of absolute values, the one norm that only vanishes on
an identically-zero message.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Alphabet, build_incidence
from .nfg import DUAL, PRIMAL, DualNFG, MarginalVector, PrimalNFG


class DegenerateMessageError(RuntimeError):
    """A message cancelled to exactly zero; sum-product cannot continue."""


@dataclass(frozen=True)
class BpConfig:
    """Sum-product knobs.

    The source material for this solver does not fix a schedule, damping or
    stopping rule; these defaults (flooding, damping 0.5, tol 1e-9) are this
    library's choices, sized for small lattices, and all overridable.
    """

    damping: float = 0.5
    tol: float = 1e-9
    max_iters: int = 10_000
    schedule: str = "flooding"  # or "sequential"

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must be in [0, 1)")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.schedule not in ("flooding", "sequential"):
            raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass
class BpResult:
    """Beliefs per location plus convergence diagnostics."""

    edge_values: np.ndarray    # (|E|, q) complex, unit complex sum
    vertex_values: np.ndarray  # (|V|, q)
    domain: str
    converged: bool
    iterations: int
    residual: float

    def edge(self, e: int) -> MarginalVector:
        return MarginalVector(self.edge_values[e], ("edge", e), self.domain)

    def vertex(self, v: int) -> MarginalVector:
        return MarginalVector(self.vertex_values[v], ("vertex", v), self.domain)


class _KernelFactor:
    __slots__ = ("table", "vars", "signs", "site")

    def __init__(self, table, vars_, signs, site):
        self.table = np.asarray(table, dtype=np.complex128)
        self.vars = list(vars_)
        self.signs = list(signs)
        self.site = site


def _build_factors(nfg):
    """Kernel-factor list plus variable count for either domain."""
    g = nfg.graph
    if isinstance(nfg, PrimalNFG):
        factors = [
            _KernelFactor(nfg.edge_tables[e], [t, h], [1, -1], ("edge", e))
            for e, (t, h) in enumerate(g.edges)
        ]
        factors += [
            _KernelFactor(nfg.vertex_tables[v], [v], [1], ("vertex", v))
            for v in range(g.num_vertices)
        ]
        return factors, g.num_vertices
    if isinstance(nfg, DualNFG):
        m = build_incidence(g)
        factors = [
            _KernelFactor(nfg.edge_tables[e], [e], [1], ("edge", e))
            for e in range(g.num_edges)
        ]
        for v in range(g.num_vertices):
            incident = g.incident_edges(v)
            signs = [int(m[e, v]) for e in incident]
            factors.append(
                _KernelFactor(nfg.vertex_tables[v], incident, signs, ("vertex", v))
            )
        return factors, g.num_edges
    raise TypeError(f"expected PrimalNFG or DualNFG, got {type(nfg).__name__}")


def _normalize(msg: np.ndarray, where: str, real_mode: bool = False) -> np.ndarray:
    """L1-of-abs normalization, plus gauge fixing.

    Messages carry a multiplicative gauge freedom (m and c*m are equivalent);
    left unfixed, perturbations along it grow even when the projective
    dynamics contract.  The magnitude is pinned by the norm; the phase is
    pinned by projecting real-table models onto the real axis (their exact
    messages are real) and by rotating the leading entry of genuinely complex
    messages onto the positive real axis.
    """
    norm = np.abs(msg).sum()
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateMessageError(f"message at {where} cancelled to zero")
    msg = msg / norm
    if real_mode:
        return msg.real + 0.0j
    lead = msg[int(np.argmax(np.abs(msg)))]
    return msg * np.conj(lead / abs(lead))


class _Engine:
    """Message store and update rules; factor-to-variable messages are the state."""

    def __init__(self, nfg, cfg: BpConfig):
        self.cfg = cfg
        self.alphabet: Alphabet = nfg.alphabet
        q = self.alphabet.q
        self.real_mode = bool(
            np.abs(nfg.edge_tables.imag).max(initial=0.0) < 1e-12
            and np.abs(nfg.vertex_tables.imag).max(initial=0.0) < 1e-12
        )
        self.w = self.alphabet.dft_matrix()
        self.winv = np.conj(self.w) / q
        self.factors, self.num_vars = _build_factors(nfg)
        # sign-reindex lookup: perm[s][t] = index of s*t mod q, s in {-1,+1}
        idx = np.arange(q)
        self.perm = {1: idx, -1: (-idx) % q}
        self.var_factors = [[] for _ in range(self.num_vars)]
        for fi, f in enumerate(self.factors):
            for slot, var in enumerate(f.vars):
                self.var_factors[var].append((fi, slot))
        self.msgs = {
            (fi, slot): np.full(q, 1.0 / q, dtype=np.complex128)
            for fi, f in enumerate(self.factors)
            for slot in range(len(f.vars))
        }

    def _var_to_factor(self, var: int, exclude_fi: int) -> np.ndarray:
        out = np.ones(self.alphabet.q, dtype=np.complex128)
        for fi, slot in self.var_factors[var]:
            if fi == exclude_fi:
                continue
            out *= self.msgs[(fi, slot)]
        return _normalize(out, f"variable {var}", self.real_mode)

    def _factor_updates(self, fi: int) -> list:
        """New outgoing messages of factor fi, one per slot, via DFT convolution."""
        f = self.factors[fi]
        d = len(f.vars)
        q = self.alphabet.q
        if d == 1:
            msg = f.table[self.perm[f.signs[0]]]
            return [_normalize(msg, str(f.site), self.real_mode)]
        # incoming messages reindexed to t = s*z, then DFT for prefix/suffix products
        hats = []
        for slot in range(d):
            inc = self._var_to_factor(f.vars[slot], fi)
            hats.append(self.w @ inc[self.perm[f.signs[slot]]])
        prefix = [np.ones(q, dtype=np.complex128)]
        for h in hats[:-1]:
            prefix.append(prefix[-1] * h)
        suffix = [np.ones(q, dtype=np.complex128)]
        for h in reversed(hats[1:]):
            suffix.append(suffix[-1] * h)
        suffix.reverse()
        table_hat = self.w @ f.table
        out = []
        for slot in range(d):
            others_hat = prefix[slot] * suffix[slot]
            # g(u) = sum_w f(u + w) C(w) has DFT f^(k) * C^(-k)
            corr_hat = table_hat * others_hat[(-np.arange(q)) % q]
            g = self.winv @ corr_hat
            msg = g[self.perm[f.signs[slot]]]
            out.append(_normalize(msg, str(f.site), self.real_mode))
        return out

    def iterate(self) -> float:
        cfg = self.cfg
        residual = 0.0
        if cfg.schedule == "flooding":
            new = {}
            for fi in range(len(self.factors)):
                for slot, msg in enumerate(self._factor_updates(fi)):
                    new[(fi, slot)] = msg
            for key, msg in new.items():
                blended = (1 - cfg.damping) * msg + cfg.damping * self.msgs[key]
                blended = _normalize(blended, f"factor slot {key}", self.real_mode)
                residual = max(residual, float(np.abs(blended - self.msgs[key]).max()))
                self.msgs[key] = blended
        else:
            for fi in range(len(self.factors)):
                for slot, msg in enumerate(self._factor_updates(fi)):
                    key = (fi, slot)
                    blended = (1 - cfg.damping) * msg + cfg.damping * self.msgs[key]
                    blended = _normalize(blended, f"factor slot {key}", self.real_mode)
                    residual = max(residual, float(np.abs(blended - self.msgs[key]).max()))
                    self.msgs[key] = blended
        return residual

    def beliefs(self):
        """Kernel-argument beliefs: B(u) proportional to f(u) * conv of inputs at u."""
        q = self.alphabet.q
        edge_beliefs, vertex_beliefs = {}, {}
        for fi, f in enumerate(self.factors):
            if len(f.vars) == 1:
                inc = self._var_to_factor(f.vars[0], fi)
                conv = inc[self.perm[f.signs[0]]]
            else:
                hat = np.ones(q, dtype=np.complex128)
                for slot in range(len(f.vars)):
                    inc = self._var_to_factor(f.vars[slot], fi)
                    hat *= self.w @ inc[self.perm[f.signs[slot]]]
                conv = self.winv @ hat
            b = f.table * conv
            total = b.sum()
            if abs(total) == 0.0 or not np.isfinite(abs(total)):
                raise DegenerateMessageError(f"belief at {f.site} cancelled to zero")
            b = b / total
            if self.real_mode:
                b = b.real + 0.0j
            kind, idx = f.site
            (edge_beliefs if kind == "edge" else vertex_beliefs)[idx] = b
        return edge_beliefs, vertex_beliefs


def run_bp(nfg, cfg: BpConfig | None = None) -> BpResult:
    """Sum-product on a primal or dual model; non-convergence is reported, not raised.

    Beliefs are the kernel-argument marginals, which are exactly the edge and
    vertex marginal estimates of the model's domain: primal beliefs estimate
    pi_p,e and pi_p,v, dual beliefs estimate pi_d,e and pi_d,v (marginal
    functions when the dual is signed).  Exact on tree-structured models.
    """
    cfg = cfg or BpConfig()
    engine = _Engine(nfg, cfg)
    converged = False
    iterations = 0
    residual = float("inf")
    for iterations in range(1, cfg.max_iters + 1):
        residual = engine.iterate()
        if residual < cfg.tol:
            converged = True
            break
    edge_b, vertex_b = engine.beliefs()
    g = nfg.graph
    q = nfg.alphabet.q
    edge_values = np.zeros((g.num_edges, q), dtype=np.complex128)
    vertex_values = np.zeros((g.num_vertices, q), dtype=np.complex128)
    for e, b in edge_b.items():
        edge_values[e] = b
    for v, b in vertex_b.items():
        vertex_values[v] = b
    domain = PRIMAL if isinstance(nfg, PrimalNFG) else DUAL
    return BpResult(edge_values, vertex_values, domain, converged, iterations, residual)


def relative_error(estimate, exact, mode: str = "first") -> float:
    """|est(0) - exact(0)| / |exact(0)|, or the L1 variant over the full vector."""
    est = estimate.values if isinstance(estimate, MarginalVector) else np.asarray(estimate)
    ref = exact.values if isinstance(exact, MarginalVector) else np.asarray(exact)
    if mode == "first":
        return float(abs(est[0] - ref[0]) / abs(ref[0]))
    if mode == "l1":
        return float(np.abs(est - ref).sum() / np.abs(ref).sum())
    raise ValueError(f"unknown mode {mode!r}")
