"""Hypergraph rewriting with multiway causal structure, causal-guided proof
search, and ZX-diagram simplification."""
from .hypergraph import (
    CanonicalKey,
    Hyperedge,
    Hypergraph,
    HypergraphError,
    OpenHypergraph,
    canonical_form,
    is_isomorphic,
    prune_isolated,
    validate_open,
)
from .multiway import (
    BudgetExceeded,
    CausalGraph,
    Event,
    MultiwayGraph,
    causal_graph,
    causally_independent,
    evolve,
    probe,
    selection_score,
)
from .prover import (
    NotFound,
    Proof,
    ProofGraph,
    ProverConfig,
    Strategy,
    compare_strategies,
    critical_pairs,
    enumerate_critical_pairs,
    prove_reachability,
    rank_lemmas,
    replay,
)
from .rewrite import (
    CompositionError,
    LabelVar,
    Match,
    MatchError,
    PhaseSum,
    RewriteRule,
    apply_match,
    compose_concurrent,
    compose_parallel,
    find_matches,
    rewrite,
    sequentially_independent,
)

__version__ = "0.1.0"
