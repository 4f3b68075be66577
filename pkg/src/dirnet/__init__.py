"""Clustering, persistent homology and sampling convergence for directed networks."""

from .clustering import (
    MergeTree,
    NonreciprocalClustering,
    ReciprocalClustering,
    Ultrametric,
    component_target_nr,
    component_target_r,
    merge_tree,
    minimax_directed_cost,
    nonreciprocal,
    reciprocal,
    validate_ultrametric,
)
from .distance import (
    Correspondence,
    codistortion,
    correspondence_from_cover,
    distortion_correspondence,
    distortion_map,
    dn_exact,
    dn_to_point,
    dn_upper_linf,
    map_pair_cost,
)
from .exceptions import BudgetExceededError, NetworkValidationError
from .network import (
    DirectedCircle,
    FiniteNetwork,
    MeasuredNetwork,
    circle_weights,
    cycle_network,
    directed_circle,
    induced_lambda,
    induced_nu,
    is_dissimilarity,
    modified_weight,
    reversibility,
    subnetwork,
)
from .persistence import (
    Diagram,
    DowkerPersistence,
    Filtration,
    RipsPersistence,
    bottleneck,
    compute_diagrams,
    dowker_duality_check,
    dowker_sink_filtration,
    dowker_source_filtration,
    persistence,
    rips_filtration,
)
from .sampling import (
    Cover,
    ExperimentConfig,
    ExperimentRow,
    is_epsilon_system,
    max_min_mass,
    minimal_mass,
    run_convergence_experiment,
    sample_circle,
    sample_iid,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "Correspondence",
    "Cover",
    "Diagram",
    "DirectedCircle",
    "DowkerPersistence",
    "ExperimentConfig",
    "ExperimentRow",
    "Filtration",
    "FiniteNetwork",
    "MeasuredNetwork",
    "MergeTree",
    "NetworkValidationError",
    "NonreciprocalClustering",
    "ReciprocalClustering",
    "RipsPersistence",
    "Ultrametric",
    "bottleneck",
    "circle_weights",
    "codistortion",
    "component_target_nr",
    "component_target_r",
    "compute_diagrams",
    "correspondence_from_cover",
    "cycle_network",
    "directed_circle",
    "distortion_correspondence",
    "distortion_map",
    "dn_exact",
    "dn_to_point",
    "dn_upper_linf",
    "dowker_duality_check",
    "dowker_sink_filtration",
    "dowker_source_filtration",
    "induced_lambda",
    "induced_nu",
    "is_dissimilarity",
    "is_epsilon_system",
    "map_pair_cost",
    "max_min_mass",
    "merge_tree",
    "minimal_mass",
    "minimax_directed_cost",
    "modified_weight",
    "nonreciprocal",
    "persistence",
    "reciprocal",
    "reversibility",
    "rips_filtration",
    "run_convergence_experiment",
    "sample_circle",
    "sample_iid",
    "subnetwork",
    "validate_ultrametric",
]
