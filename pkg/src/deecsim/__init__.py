"""Deterministic round-based simulator for DEEC-family cluster-head
election protocols (DEEC, DDEEC, EDEEC, EDDEEC) in heterogeneous wireless
sensor networks."""

from ._kernels import ASSIGN_CH, ASSIGN_DIRECT_BS, ASSIGN_NONE, get_backend
from .engine import NetworkConfig, RoundOutcome, Simulation, run
from .metrics import (
    BatchSummary,
    LifetimeSummary,
    SimResult,
    emit_plot_svg,
    emit_series_csv,
    summarize,
)
from .model import (
    RADIO_PROFILES,
    FieldGeometry,
    NodeClass,
    NodeState,
    RadioParams,
    aggregation_energy,
    deduct,
    distance,
    rx_energy,
    tx_energy,
)
from .protocols import (
    AVG_ENERGY_FLOOR_J,
    P_MAX,
    EnergyEstimate,
    HeterogeneityParams,
    Protocol,
    ProtocolConfig,
    absolute_threshold,
    ch_probability,
    election_threshold,
    energy_per_round,
    epoch_length,
    estimate_average_energy,
    expected_distances,
    make_energy_estimate,
    optimal_cluster_count,
)

__version__ = "0.1.0"

__all__ = [
    "ASSIGN_CH",
    "ASSIGN_DIRECT_BS",
    "ASSIGN_NONE",
    "AVG_ENERGY_FLOOR_J",
    "BatchSummary",
    "EnergyEstimate",
    "FieldGeometry",
    "HeterogeneityParams",
    "LifetimeSummary",
    "NetworkConfig",
    "NodeClass",
    "NodeState",
    "P_MAX",
    "Protocol",
    "ProtocolConfig",
    "RADIO_PROFILES",
    "RadioParams",
    "RoundOutcome",
    "SimResult",
    "Simulation",
    "absolute_threshold",
    "aggregation_energy",
    "ch_probability",
    "deduct",
    "distance",
    "election_threshold",
    "emit_plot_svg",
    "emit_series_csv",
    "energy_per_round",
    "epoch_length",
    "estimate_average_energy",
    "expected_distances",
    "get_backend",
    "make_energy_estimate",
    "optimal_cluster_count",
    "run",
    "rx_energy",
    "summarize",
    "tx_energy",
]
