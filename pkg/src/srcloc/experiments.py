"""Experiment harnesses: seeded grid runs and dataset sweeps.

Each grid cell/trial draws its randomness from a substream keyed by the
cell axis values (via a hash) and the trial index, so cells are
independent of the grid shape and individually rerunnable.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .dataio import Dataset, OutlierMode, interpolate_invalid, remove_outlier
from .diffusion import apply_diffusion
from .errors import (
    GenerationFailureError,
    InfeasibleDistanceError,
    InvalidParameterError,
    NumericalFailureError,
    SourceLocError,
)
from .graphs import AUTO, Graph, build_knn_graph, normalized_laplacian, spectral_decomposition
from .metrics import HopErrorReport, hop_error
from .solver import Observation, SolveResult, SolverConfig, alternating_solve
from .synth import add_noise_snr, generate_sensor_graph, sample_spike_pair, seed_sequence, substream

DISTANCE_GRID_COLUMNS = ["h", "theta", "trial", "hop_error", "outer_iterations",
                         "converged", "final_energy", "theta_recovered", "status"]
SNR_GRID_COLUMNS = ["snr_db", "theta", "trial", "hop_error", "outer_iterations",
                    "converged", "final_energy", "theta_recovered", "status"]
K_SWEEP_COLUMNS = ["k", "trial", "hop_error", "outer_iterations", "converged",
                   "final_energy", "status"]


@dataclass(frozen=True)
class ExperimentGrid:
    """Axis definitions plus trial count and master seed."""

    h_values: tuple = ()
    theta_values: tuple = ()
    snr_db_values: tuple = ()
    k_values: tuple = ()
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("h_values", "theta_values", "snr_db_values", "k_values"):
            vals = tuple(getattr(self, name))
            if any(not math.isfinite(float(v)) for v in vals):
                raise InvalidParameterError(f"{name} must be finite")
            object.__setattr__(self, name, vals)
        if self.trials < 1:
            raise InvalidParameterError("trials must be at least 1")


def _cell_stream(master: np.random.SeedSequence, label: str, trial: int) -> np.random.SeedSequence:
    digest = hashlib.sha256(label.encode()).digest()
    words = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    return np.random.SeedSequence(entropy=master.entropy,
                                  spawn_key=(*master.spawn_key, *words, trial))


def _solve_record(res: SolveResult) -> dict:
    return {
        "outer_iterations": res.outer_iterations,
        "converged": res.converged,
        "final_energy": res.energy_trace[-1][1],
        "theta_recovered": res.theta,
    }


def _failure_record(exc: SourceLocError) -> dict:
    return {
        "hop_error": float("nan"),
        "outer_iterations": 0,
        "converged": False,
        "final_energy": float("nan"),
        "theta_recovered": float("nan"),
        "status": exc.category,
    }


def _spike_trial(h: int, theta: float, trial_stream, n: int, graph_k: int,
                 cfg: SolverConfig, snr_db=None):
    """One synthetic trial: fresh graph, planted spikes, diffuse, solve, score."""
    g = generate_sensor_graph(n, graph_k, substream(trial_stream, 0))
    x_true = sample_spike_pair(g, h, substream(trial_stream, 1))
    decomp = spectral_decomposition(normalized_laplacian(g))
    b = apply_diffusion(decomp, theta, x_true)
    if snr_db is not None:
        b = add_noise_snr(b, snr_db, substream(trial_stream, 2))
    res = alternating_solve(Observation(b=b), cfg, decomp, theta_init=theta)
    report = hop_error(x_true, res.x, g, spike_tol=0.0)
    rec = {"hop_error": report.total, "status": "ok"}
    rec.update(_solve_record(res))
    return rec


def run_distance_theta_grid(grid: ExperimentGrid, cfg: SolverConfig,
                            n: int = 250, graph_k: int = 10):
    """Hop error over (source distance h, diffusion time theta) cells.

    Per trial: fresh sensor graph, two unit spikes h hops apart, noiseless
    diffusion with the cell theta, then a solve initialized at that theta
    (fixed or joint per cfg). Failures are recorded, not raised.
    """
    master = seed_sequence(grid.seed)
    records = []
    for h in grid.h_values:
        for theta in grid.theta_values:
            label = f"dist:h={int(h)};theta={float(theta):.9g}"
            for trial in range(grid.trials):
                rec = {"h": int(h), "theta": float(theta), "trial": trial}
                stream = _cell_stream(master, label, trial)
                try:
                    rec.update(_spike_trial(int(h), float(theta), stream, n, graph_k, cfg))
                except (InfeasibleDistanceError, GenerationFailureError,
                        NumericalFailureError) as exc:
                    rec.update(_failure_record(exc))
                records.append(rec)
    return records


def run_snr_theta_grid(grid: ExperimentGrid, cfg: SolverConfig,
                       n: int = 250, graph_k: int = 10, h: int = 6):
    """Hop error over (SNR, diffusion time theta) cells at fixed spike distance."""
    master = seed_sequence(grid.seed)
    records = []
    for snr_db in grid.snr_db_values:
        for theta in grid.theta_values:
            label = f"snr:h={int(h)};snr={float(snr_db):.9g};theta={float(theta):.9g}"
            for trial in range(grid.trials):
                rec = {"snr_db": float(snr_db), "theta": float(theta), "trial": trial}
                stream = _cell_stream(master, label, trial)
                try:
                    rec.update(_spike_trial(int(h), float(theta), stream, n, graph_k,
                                            cfg, snr_db=float(snr_db)))
                except (InfeasibleDistanceError, GenerationFailureError,
                        NumericalFailureError) as exc:
                    rec.update(_failure_record(exc))
                records.append(rec)
    return records


def build_dataset_graph(dataset: Dataset, k: int, sigma2=AUTO) -> Graph:
    """k-NN graph from a dataset's coordinates or distance matrix."""
    if dataset.coords is not None:
        g = build_knn_graph(points=dataset.coords, k=k, sigma2=sigma2)
    else:
        g = build_knn_graph(distances=dataset.distances, k=k, sigma2=sigma2)
    return g


def dataset_observation(dataset: Dataset, g: Graph) -> Observation:
    """Observation from a dataset signal, interpolating invalid samples."""
    if dataset.valid.all():
        values = dataset.signal.copy()
    else:
        values = interpolate_invalid(dataset.signal, dataset.valid, g)
    return Observation(b=values)


def _apply_outlier(obs: Observation, mode, g: Graph) -> Observation:
    if mode is None:
        return obs
    node = int(np.argmax(obs.b))  # ties resolve to the lowest index
    return remove_outlier(obs, node, mode, g)


def run_k_sweep(dataset: Dataset, k_values, cfg: SolverConfig, theta: float,
                source_nodes, outlier_mode: OutlierMode | None = None, sigma2=AUTO):
    """Rebuild the graph for each k, solve at fixed theta, score hop error.

    ``outlier_mode`` (None, MASK, or INTERPOLATE) removes the argmax(b)
    observation before solving. Scoring uses unit reference spikes at the
    declared source nodes.
    """
    sources = [int(s) for s in source_nodes]
    if not sources:
        raise InvalidParameterError("at least one source node is required for scoring")
    sweep_cfg = replace(cfg, fix_theta=True)
    records = []
    for k in k_values:
        rec = {"k": int(k), "trial": 0}
        if k >= dataset.n:
            rec.update(_failure_record(InvalidParameterError("k >= n")))
            rec.pop("theta_recovered")
            records.append(rec)
            continue
        try:
            g = build_dataset_graph(dataset, int(k), sigma2=sigma2)
            obs = _apply_outlier(dataset_observation(dataset, g), outlier_mode, g)
            decomp = spectral_decomposition(normalized_laplacian(g))
            res = alternating_solve(obs, sweep_cfg, decomp, theta_init=theta)
            x_ref = np.zeros(dataset.n)
            x_ref[sources] = 1.0
            rec["hop_error"] = hop_error(x_ref, res.x, g, spike_tol=0.0).total
            solve = _solve_record(res)
            solve.pop("theta_recovered")
            rec.update(solve)
            rec["status"] = "ok"
        except SourceLocError as exc:
            rec.update(_failure_record(exc))
            rec.pop("theta_recovered")
        records.append(rec)
    return records


def summarize_records(records, cell_keys):
    """Per-cell mean/std of the finite hop errors plus failure counts.

    Infinite hop errors are counted separately and never averaged; the std
    is the sample standard deviation (ddof=1) over finite ok trials.
    """
    cells = {}
    order = []
    for rec in records:
        key = tuple(rec[k] for k in cell_keys)
        if key not in cells:
            cells[key] = []
            order.append(key)
        cells[key].append(rec)
    summary = []
    for key in order:
        rows = cells[key]
        oks = [r["hop_error"] for r in rows if r.get("status") == "ok"]
        finite = [e for e in oks if math.isfinite(e)]
        row = dict(zip(cell_keys, key))
        row["trials"] = len(rows)
        row["n_ok"] = len(oks)
        row["n_infinite"] = len(oks) - len(finite)
        row["n_failed"] = len(rows) - len(oks)
        row["mean_hop_error"] = float(np.mean(finite)) if finite else float("nan")
        row["std_hop_error"] = float(np.std(finite, ddof=1)) if len(finite) > 1 else float("nan")
        summary.append(row)
    return summary


def localize(dataset: Dataset, cfg: SolverConfig, k: int = 10, sigma2=AUTO,
             theta_init: float = 1.0, source_nodes=None, outlier_mode=None,
             outlier_nodes=()):
    """General dataset entry point: build, decompose, solve, score.

    Returns (result, graph, hop-error report or None). ``outlier_nodes``
    are removed explicitly; ``outlier_mode`` with no explicit nodes removes
    argmax(b).
    """
    g = build_dataset_graph(dataset, k, sigma2=sigma2)
    obs = dataset_observation(dataset, g)
    if outlier_mode is not None:
        if outlier_nodes:
            for node in outlier_nodes:
                obs = remove_outlier(obs, int(node), outlier_mode, g)
        else:
            obs = _apply_outlier(obs, outlier_mode, g)
    decomp = spectral_decomposition(normalized_laplacian(g))
    res = alternating_solve(obs, cfg, decomp, theta_init=theta_init)
    report = None
    if source_nodes:
        x_ref = np.zeros(dataset.n)
        x_ref[[int(s) for s in source_nodes]] = 1.0
        report = hop_error(x_ref, res.x, g, spike_tol=0.0)
    return res, g, report
