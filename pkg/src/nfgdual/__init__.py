"""Pairwise graphical models on normal factor graphs, their Fourier duals, and
local mappings that carry marginal probabilities between the two domains."""

__version__ = "0.1.0"

from .graphs import (
    Alphabet,
    Graph,
    GraphError,
    betti,
    build_incidence,
    complete_graph,
    dual_vertex_config,
    edge_config,
    grid_graph,
    path_graph,
    ring_graph,
    scale_factor,
)
from .nfg import (
    DualNFG,
    Factor,
    MarginalVector,
    PrimalNFG,
    clock_model,
    dft,
    dft_table,
    dualize,
    idft,
    idft_table,
    ising_model,
    is_nonnegative,
    potts_model,
)
from .oracle import (
    EnumerationBudgetError,
    chain_ising_marginals,
    duality_check,
    edge_marginals_dual,
    edge_marginals_primal,
    enumeration_budget,
    marginals_dual,
    marginals_primal,
    partition_dual,
    partition_primal,
    ring_potts_marginals,
    vertex_marginals_dual,
    vertex_marginals_primal,
)
from .mapping import (
    CLOCK4_CRITICAL,
    ISING_CRITICAL,
    SingularMapError,
    fixed_point,
    ising_lower_bounds,
    magnetization_roundtrip,
    map_dual_to_primal,
    map_primal_to_dual,
    potts_critical,
    potts_lower_bounds,
)
from .bp import BpConfig, BpResult, DegenerateMessageError, relative_error, run_bp
from .samplers import (
    SamplerConfig,
    SamplerError,
    SubgraphState,
    estimate_primal_via_dual,
    gibbs_dual,
    gibbs_primal,
    swp,
)
from .gaussian import (
    GmrfModel,
    dual_precision,
    exact_dual_vertex_variances,
    exact_variances,
    gibbs_gaussian,
    map_variance_dual_to_primal,
    primal_precision,
)
