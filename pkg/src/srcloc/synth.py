"""Synthetic sensor graphs, spike sampling, and noise injection."""
from __future__ import annotations

import numpy as np

from .diffusion import apply_diffusion
from .errors import (
    GenerationFailureError,
    InfeasibleDistanceError,
    InvalidInputError,
    InvalidParameterError,
)
from .graphs import AUTO, Graph, build_knn_graph, hop_distances, normalized_laplacian, spectral_decomposition


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def substream(base, *key: int) -> np.random.SeedSequence:
    """Derive an independent child stream from integer counters."""
    base = seed_sequence(base)
    return np.random.SeedSequence(entropy=base.entropy, spawn_key=(*base.spawn_key, *key))


def generate_sensor_graph(n: int, k: int, seed, max_attempts: int = 100) -> Graph:
    """Random k-NN graph over n uniform points in the unit square.

    Gaussian edge weights with AUTO sigma2. Disconnected draws are
    resampled from a fresh substream, up to max_attempts.
    """
    if n < 2:
        raise InvalidParameterError("need at least two nodes")
    if k >= n:
        raise InvalidParameterError(f"k={k} must be smaller than n={n}")
    base = seed_sequence(seed)
    for attempt in range(max_attempts):
        rng = np.random.default_rng(substream(base, attempt))
        points = rng.random((n, 2))
        g = build_knn_graph(points=points, k=k, sigma2=AUTO)
        if g.is_connected():
            return g
    raise GenerationFailureError(
        f"no connected sensor graph in {max_attempts} attempts (n={n}, k={k})")


def sample_spike_pair(g: Graph, h: int, seed) -> np.ndarray:
    """Two unit spikes at hop distance exactly h, drawn uniformly."""
    if h < 1:
        raise InvalidParameterError("h must be a positive integer")
    hops = hop_distances(g)
    pairs = np.argwhere(hops == float(h))
    if pairs.shape[0] == 0:
        raise InfeasibleDistanceError(f"no node pair at hop distance {h}")
    rng = np.random.default_rng(seed_sequence(seed))
    i, j = pairs[rng.integers(pairs.shape[0])]
    x = np.zeros(g.n)
    x[int(i)] = 1.0
    x[int(j)] = 1.0
    return x


def add_noise_snr(b, snr_db: float, seed) -> np.ndarray:
    """Add white Gaussian noise at the requested SNR.

    SNR is the energy ratio in dB: the noise std is
    ||b||_2 / (sqrt(n) * 10^(snr_db/20)), so the expected
    10*log10(||b||^2 / E||w||^2) equals snr_db.
    """
    b = np.asarray(b, dtype=float)
    norm = float(np.linalg.norm(b))
    if norm == 0.0:
        raise InvalidInputError("cannot set an SNR relative to b = 0")
    std = norm / (np.sqrt(b.size) * 10.0 ** (snr_db / 20.0))
    rng = np.random.default_rng(seed_sequence(seed))
    return b + rng.normal(0.0, std, size=b.size)


def generate_planted_dataset(n: int = 200, k: int = 10, theta: float = 1.0,
                             n_sources: int = 1, seed=0):
    """Sensor-graph dataset with known diffusion sources.

    Returns (graph, observed signal, source node tuple); the signal is the
    noiseless heat diffusion of unit spikes at the sources.
    """
    if n_sources < 1 or n_sources >= n:
        raise InvalidParameterError("n_sources must be in [1, n)")
    base = seed_sequence(seed)
    g = generate_sensor_graph(n, k, substream(base, 0))
    rng = np.random.default_rng(substream(base, 1))
    sources = np.sort(rng.choice(n, size=n_sources, replace=False))
    x = np.zeros(n)
    x[sources] = 1.0
    decomp = spectral_decomposition(normalized_laplacian(g))
    b = apply_diffusion(decomp, theta, x)
    return g, b, tuple(int(s) for s in sources)
