"""Local DFT mappings between primal and dual marginals, their fixed points and bounds.

The central identity: at every edge, (pi_p(a)/psi(a), a in A) is the forward
DFT of (pi_d(a)/psi~(a), a in A), and the same holds per vertex with the
phi tables.  The map is fully local -- it sees only the one marginal and the
two tables at its site -- and it preserves the unit sum of its input exactly,
so mapped sampler estimates stay normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Alphabet
from .nfg import DUAL, PRIMAL, Factor, MarginalVector, _truncate_imag

_ZERO_REL_FLOOR = 1e-12

ISING_CRITICAL = math.log(1.0 + math.sqrt(2.0)) / 2.0
CLOCK4_CRITICAL = math.log(1.0 + math.sqrt(2.0))


def potts_critical(q: int) -> float:
    """Phase-transition coupling ln(1 + sqrt(q)) of the 2D homogeneous q-state model."""
    return math.log(1.0 + math.sqrt(q))


class SingularMapError(ValueError):
    """A kernel table has a zero entry, so the local map is not invertible.

    The standard trigger is a zero-coupling edge (bJ_e = 0 makes the dual
    table vanish at 1); perturb the coupling by at least 1e-9 to proceed.
    """


def _table(obj) -> np.ndarray:
    if isinstance(obj, Factor):
        return obj.values
    return np.asarray(obj, dtype=np.complex128)


def _marginal_values(mv) -> tuple:
    if isinstance(mv, MarginalVector):
        return mv.values, mv.site
    return np.asarray(mv, dtype=np.complex128), ("edge", -1)


def _require_nonzero(table: np.ndarray, role: str) -> None:
    mags = np.abs(table)
    if mags.size and mags.min() < _ZERO_REL_FLOOR * max(1.0, mags.max()):
        raise SingularMapError(
            f"{role} table has a zero entry; the local map is singular "
            "(zero-coupling edges must be perturbed by >= 1e-9)"
        )


def map_dual_to_primal(mv, primal_table, dual_table) -> MarginalVector:
    """Transform a dual marginal at one site into the primal marginal there.

    pi_p(a) = psi(a) * sum_a' (pi_d(a') / psi~(a')) * omega**(a a'), with
    omega = exp(-2 pi i / q).  Requires every psi~(a) != 0.
    """
    values, site = _marginal_values(mv)
    psi, psit = _table(primal_table), _table(dual_table)
    q = len(values)
    if not (len(psi) == len(psit) == q):
        raise ValueError("marginal and factor tables must share one alphabet size")
    _require_nonzero(psit, "dual factor")
    w = Alphabet(q).dft_matrix()
    out = psi * (w @ (values / psit))
    return MarginalVector(_truncate_imag(out), site, PRIMAL)


def map_primal_to_dual(mv, primal_table, dual_table) -> MarginalVector:
    """Inverse transform: pi_d(a) = psi~(a) * (1/q) sum_a' (pi_p(a')/psi(a')) omega**(-a a').

    Exact inverse of map_dual_to_primal; requires every psi(a) != 0.
    """
    values, site = _marginal_values(mv)
    psi, psit = _table(primal_table), _table(dual_table)
    q = len(values)
    if not (len(psi) == len(psit) == q):
        raise ValueError("marginal and factor tables must share one alphabet size")
    _require_nonzero(psi, "primal factor")
    w = np.conj(Alphabet(q).dft_matrix())
    out = psit * (w @ (values / psi)) / q
    return MarginalVector(_truncate_imag(out), site, DUAL)


def fixed_point(primal_table, dual_table) -> MarginalVector:
    """The marginal vector invariant under the map: pi*(a) = psi(a) psi~(a) / S."""
    psi, psit = _table(primal_table), _table(dual_table)
    prod = psi * psit
    return MarginalVector(_truncate_imag(prod / prod.sum()), ("edge", -1), PRIMAL)


def ising_fixed_point(beta_j: float) -> np.ndarray:
    """Homogeneous binary fixed point [e^bJ cosh bJ, e^-bJ sinh bJ] / (1 + sinh 2bJ)."""
    from .nfg import ising_dual_edge_table, ising_edge_table

    return fixed_point(ising_edge_table(beta_j), ising_dual_edge_table(beta_j)).values.real


def potts_fixed_point(q: int, beta_j: float) -> np.ndarray:
    from .nfg import potts_dual_edge_table, potts_edge_table

    return fixed_point(potts_edge_table(q, beta_j), potts_dual_edge_table(q, beta_j)).values.real


def clock_fixed_point(q: int, beta_j: float) -> np.ndarray:
    from .nfg import clock_edge_table, dft_table

    t = clock_edge_table(q, beta_j)
    return fixed_point(t, dft_table(t, Alphabet(q))).values.real


def ising_lower_bounds(beta_j: float) -> tuple:
    """Ferromagnetic binary lower bounds (on pi_p,e(0), on pi_d,e(0)).

    Valid for any ferromagnetic model in a nonnegative field, independent of
    size and topology; their product is at least 1/2 and they intersect at
    the critical coupling ln(1 + sqrt(2)) / 2.
    """
    if beta_j < 0:
        raise ValueError("bounds hold for ferromagnetic couplings only")
    e2 = math.exp(-2.0 * beta_j)
    return 1.0 / (1.0 + e2), (1.0 + e2) / 2.0


def potts_lower_bounds(q: int, beta_j: float) -> tuple:
    """q-state analogs: (e^bJ/(e^bJ - 1 + q), (e^bJ - 1 + q)/(q e^bJ)); product >= 1/q."""
    if beta_j < 0:
        raise ValueError("bounds hold for ferromagnetic couplings only")
    ebj = math.exp(beta_j)
    return ebj / (ebj - 1.0 + q), (ebj - 1.0 + q) / (q * ebj)


@dataclass(frozen=True)
class MagnetizationPair:
    """Binary local magnetizations Delta = pi(0) - pi(1) in both domains."""

    beta_j: float
    delta_p: float
    delta_d: float

    @property
    def primal(self) -> np.ndarray:
        return np.array([(1 + self.delta_p) / 2, (1 - self.delta_p) / 2])

    @property
    def dual(self) -> np.ndarray:
        return np.array([(1 + self.delta_d) / 2, (1 - self.delta_d) / 2])


def magnetization_roundtrip(beta_j: float, delta_p=None, delta_d=None) -> MagnetizationPair:
    """Complete the magnetization pair from either side.

    Delta_p = (cosh 2bJ - Delta_d) / sinh 2bJ, equivalently
    pi_p,e(0) = (e^{2bJ} - Delta_d) / (2 sinh 2bJ); consistent with mapping
    the vector [(1 + Delta_d)/2, (1 - Delta_d)/2] edge-locally.
    """
    if (delta_p is None) == (delta_d is None):
        raise ValueError("provide exactly one of delta_p, delta_d")
    sh = math.sinh(2.0 * beta_j)
    if sh == 0.0:
        raise SingularMapError("magnetization relation is singular at bJ = 0")
    ch = math.cosh(2.0 * beta_j)
    if delta_d is None:
        delta_d = ch - float(delta_p) * sh
    else:
        delta_p = (ch - float(delta_d)) / sh
    return MagnetizationPair(beta_j, float(delta_p), float(delta_d))
