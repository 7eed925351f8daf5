"""Monte Carlo simulator for GHZ-swap routing on noisy square-grid repeater networks."""
from .distillation import (
    DistillationConfig,
    DomainError,
    FidelityDistribution,
    bbpssw,
    ladder_distribution,
    sample_link,
)
from .kernels import BACKEND
from .montecarlo import (
    AggregateStats,
    SimulationSpec,
    cycle_fraction_study,
    distance_sweep,
    envelope_sweep,
    run_trials,
)
from .network import (
    ConfigError,
    GridSpec,
    HeraldedGraph,
    build_grid,
    enumerate_cycles,
    herald_links,
    select_region,
)
from .protocol import GLOBAL, SCHEDULERS, ProtocolConfig, RoundOutcome, execute_round
from .state import (
    GHZDiagonalState,
    ProtocolViolation,
    StateError,
    bell_diagonal,
    coherent_information,
    fuse,
    ghz_swap_equal,
    ghz_swap_mixed,
    measure_x,
    merge_swap,
    werner_from_fidelity,
    x_measure,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GLOBAL",
    "SCHEDULERS",
    "AggregateStats",
    "ConfigError",
    "DistillationConfig",
    "DomainError",
    "FidelityDistribution",
    "GHZDiagonalState",
    "GridSpec",
    "HeraldedGraph",
    "ProtocolConfig",
    "ProtocolViolation",
    "RoundOutcome",
    "SimulationSpec",
    "StateError",
    "bbpssw",
    "bell_diagonal",
    "build_grid",
    "coherent_information",
    "cycle_fraction_study",
    "distance_sweep",
    "enumerate_cycles",
    "envelope_sweep",
    "execute_round",
    "fuse",
    "ghz_swap_equal",
    "ghz_swap_mixed",
    "herald_links",
    "ladder_distribution",
    "measure_x",
    "merge_swap",
    "run_trials",
    "sample_link",
    "select_region",
    "werner_from_fidelity",
    "x_measure",
]
