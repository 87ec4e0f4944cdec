"""Private distributed averaging over graphs, with exact audit tooling.

Agents holding bounded integers cooperate to learn their exact average while
pairwise random shares keep every proper, non-separating coalition from
learning anything beyond that average. The package provides the protocol
pieces (residue arithmetic, mask exchange, consensus), a deterministic event
simulator with a passive-adversary recorder, and enumeration/statistical
audits of the privacy claims.
"""
from .audit import (
    AuditVerdict,
    EnumerationBudgetError,
    Histogram,
    check_effective_input_uniformity,
    check_group_privacy,
    check_mask_uniformity,
    check_view_indistinguishability,
    enumerate_mask_distribution,
    enumerate_view_distribution,
    flatten_view_key,
    histogram_csv,
    sampled_view_test,
)
from .consensus import (
    ConsensusAlgo,
    ConsensusResult,
    ConvergenceError,
    RoundingError,
    finalize,
    flood_sum,
    gossip_avg,
    run_protocol,
)
from .masking import (
    AgentState,
    EdgeDifference,
    MaskShareMsg,
    PhaseDoneMsg,
    ProtocolError,
    ProtocolParams,
    build_states,
    edge_differences,
    exchange_shares,
    init_shares,
    phase_complete,
    receive_share,
)
from .residues import Modulus, ModulusMismatchError, Residue, SeededRng, sum_mod, uniform_residue
from .simnet import (
    AdversarySpec,
    AdversaryView,
    RunReport,
    SimEvent,
    ValueMsg,
    delivery_schedule,
    extract_view,
    simulate,
)
from .topology import (
    IncidenceMatrix,
    Topology,
    connected_components,
    format_topology_text,
    incidence_matrix,
    incidence_rank_mod_p,
    is_vertex_cut,
    load_topology_text,
    vertex_connectivity,
)

__all__ = [
    "AdversarySpec",
    "AdversaryView",
    "AgentState",
    "AuditVerdict",
    "ConsensusAlgo",
    "ConsensusResult",
    "ConvergenceError",
    "EdgeDifference",
    "EnumerationBudgetError",
    "Histogram",
    "IncidenceMatrix",
    "MaskShareMsg",
    "Modulus",
    "ModulusMismatchError",
    "PhaseDoneMsg",
    "ProtocolError",
    "ProtocolParams",
    "Residue",
    "RoundingError",
    "RunReport",
    "SeededRng",
    "SimEvent",
    "Topology",
    "ValueMsg",
    "build_states",
    "check_effective_input_uniformity",
    "check_group_privacy",
    "check_mask_uniformity",
    "check_view_indistinguishability",
    "connected_components",
    "delivery_schedule",
    "edge_differences",
    "enumerate_mask_distribution",
    "enumerate_view_distribution",
    "exchange_shares",
    "extract_view",
    "finalize",
    "flatten_view_key",
    "flood_sum",
    "format_topology_text",
    "gossip_avg",
    "histogram_csv",
    "incidence_matrix",
    "incidence_rank_mod_p",
    "init_shares",
    "is_vertex_cut",
    "load_topology_text",
    "phase_complete",
    "receive_share",
    "run_protocol",
    "sampled_view_test",
    "simulate",
    "sum_mod",
    "uniform_residue",
    "vertex_connectivity",
]

__version__ = "0.1.0"
