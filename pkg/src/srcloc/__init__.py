"""Sparse diffusion-source recovery on weighted graphs from one snapshot."""

from .dataio import Dataset, OutlierMode, interpolate_invalid, load_dataset, remove_outlier, write_results
from .diffusion import (
    DiffusionOperator,
    apply_diffusion,
    apply_theta_derivative,
    diffusion_matrix,
    kernel_eval,
)
from .experiments import (
    ExperimentGrid,
    localize,
    run_distance_theta_grid,
    run_k_sweep,
    run_snr_theta_grid,
    summarize_records,
)
from .graphs import (
    AUTO,
    Graph,
    SpectralDecomposition,
    build_knn_graph,
    hop_distances,
    metric_shortest_paths,
    normalized_laplacian,
    spectral_decomposition,
)
from .metrics import HopErrorReport, ZoneScore, hop_error, influence_zones
from .solver import (
    FistaResult,
    Observation,
    SolveResult,
    SolverConfig,
    alternating_solve,
    fidelity_theta_derivatives,
    fista_solve_x,
    newton_theta_step,
    objective,
    soft_threshold,
)
from .synth import add_noise_snr, generate_planted_dataset, generate_sensor_graph, sample_spike_pair

__all__ = [
    "AUTO",
    "Dataset",
    "DiffusionOperator",
    "ExperimentGrid",
    "FistaResult",
    "Graph",
    "HopErrorReport",
    "Observation",
    "OutlierMode",
    "SolveResult",
    "SolverConfig",
    "SpectralDecomposition",
    "ZoneScore",
    "add_noise_snr",
    "alternating_solve",
    "apply_diffusion",
    "apply_theta_derivative",
    "build_knn_graph",
    "diffusion_matrix",
    "fidelity_theta_derivatives",
    "fista_solve_x",
    "generate_planted_dataset",
    "generate_sensor_graph",
    "hop_distances",
    "hop_error",
    "influence_zones",
    "interpolate_invalid",
    "kernel_eval",
    "load_dataset",
    "localize",
    "metric_shortest_paths",
    "newton_theta_step",
    "normalized_laplacian",
    "objective",
    "remove_outlier",
    "run_distance_theta_grid",
    "run_k_sweep",
    "run_snr_theta_grid",
    "sample_spike_pair",
    "soft_threshold",
    "spectral_decomposition",
    "summarize_records",
    "write_results",
]

__version__ = "0.1.0"
