"""Weighted graphs, normalized Laplacians, and shortest-path distances."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .errors import DegenerateGraphError, InvalidInputError, InvalidParameterError

AUTO = "auto"


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with optional node coordinates.

    ``weights`` is an n x n symmetric matrix of non-negative edge weights
    with a zero diagonal; a zero entry means no edge.
    """

    weights: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidInputError("weights must be a square matrix")
        if not np.array_equal(w, w.T):
            raise InvalidInputError("weights must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise InvalidInputError("weights must have a zero diagonal")
        if np.any(w < 0.0):
            raise InvalidInputError("edge weights must be non-negative")
        object.__setattr__(self, "weights", w)
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            if c.ndim != 2 or c.shape[0] != w.shape[0]:
                raise InvalidInputError("coords must be an n x d array")
            object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.weights[i] > 0.0)

    def is_connected(self) -> bool:
        return bool(np.all(np.isfinite(hop_distances(self, sources=[0])[0])))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        if vals.ndim != 1 or vecs.shape != (vals.size, vals.size):
            raise InvalidInputError("eigenvalues/eigenvectors shapes do not match")
        if np.any(np.diff(vals) < 0.0):
            raise InvalidInputError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def build_knn_graph(points=None, distances=None, k: int = 10, sigma2=AUTO) -> Graph:
    """Build a k-nearest-neighbor graph with Gaussian edge weights.

    Provide either point coordinates (Euclidean metric) or a precomputed
    distance matrix. Edge (i, j) exists when j is among i's k nearest
    neighbors or i among j's (union symmetrization); its weight is
    exp(-d(i,j)^2 / sigma2). ``sigma2=AUTO`` sets sigma2 to the mean
    squared distance over the retained edges.
    """
    if (points is None) == (distances is None):
        raise InvalidParameterError("provide exactly one of points or distances")
    if points is not None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise InvalidInputError("points must be an n x d array")
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        dist = 0.5 * (dist + dist.T)
        coords = pts
    else:
        dist = np.asarray(distances, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise InvalidInputError("distance matrix must be square")
        if not np.allclose(dist, dist.T, rtol=1e-9, atol=1e-12):
            raise InvalidInputError("distance matrix must be symmetric")
        if np.any(np.diag(dist) != 0.0):
            raise InvalidInputError("distance matrix must have a zero diagonal")
        if np.any(dist < 0.0):
            raise InvalidInputError("distances must be non-negative")
        dist = 0.5 * (dist + dist.T)
        coords = None

    n = dist.shape[0]
    if int(k) != k or k < 1:
        raise InvalidParameterError("k must be a positive integer")
    k = int(k)
    if k >= n:
        raise InvalidParameterError(f"k={k} must be smaller than the node count n={n}")

    order = np.argsort(dist, axis=1, kind="stable")
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        row = order[i]
        picked = row[row != i][:k]
        adj[i, picked] = True
    adj |= adj.T

    iu, ju = np.triu_indices(n, k=1)
    edge_mask = adj[iu, ju]
    sq = dist[iu, ju][edge_mask] ** 2
    if sigma2 == AUTO:
        s2 = float(sq.mean()) if sq.size else 0.0
    else:
        s2 = float(sigma2)
        if not s2 > 0.0:
            raise InvalidParameterError("sigma2 must be positive or AUTO")

    weights = np.zeros((n, n))
    if s2 == 0.0:
        weights[adj] = 1.0  # all retained distances zero: kernel at d=0
    else:
        weights[adj] = np.exp(-dist[adj] ** 2 / s2)
    return Graph(weights=weights, coords=coords)


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Normalized Laplacian I - D^{-1/2} W D^{-1/2} of a graph.

    Every node must have positive degree.
    """
    deg = g.degrees()
    isolated = np.flatnonzero(deg == 0.0)
    if isolated.size:
        raise DegenerateGraphError(
            f"node {int(isolated[0])} is isolated (zero degree); "
            "the normalized Laplacian is undefined"
        )
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = -(g.weights * inv_sqrt[:, None]) * inv_sqrt[None, :]
    np.fill_diagonal(lap, 1.0)
    return 0.5 * (lap + lap.T)


def spectral_decomposition(laplacian: np.ndarray) -> SpectralDecomposition:
    """Dense symmetric eigendecomposition with near-zero eigenvalue clamping."""
    lap = np.asarray(laplacian, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise InvalidInputError("laplacian must be a square matrix")
    if not np.allclose(lap, lap.T, rtol=0.0, atol=1e-10):
        raise InvalidInputError("matrix is not symmetric within 1e-10")
    vals, vecs = np.linalg.eigh(lap)
    vals = vals.copy()
    vals[(vals > -1e-10) & (vals < 0.0)] = 0.0
    if abs(vals[0]) <= 1e-10:
        vals[0] = 0.0
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vecs)


def _adjacency_lists(g: Graph) -> list[np.ndarray]:
    return [np.flatnonzero(g.weights[i] > 0.0) for i in range(g.n)]


def hop_distances(g: Graph, sources=None) -> np.ndarray:
    """BFS hop distances from each source (all nodes if omitted).

    Returns one row per source; unreachable pairs are +inf.
    """
    n = g.n
    if sources is None:
        src = list(range(n))
    else:
        src = [int(s) for s in sources]
        for s in src:
            if not 0 <= s < n:
                raise InvalidInputError(f"source node {s} out of range")
    nbrs = _adjacency_lists(g)
    out = np.full((len(src), n), np.inf)
    for row, s in enumerate(src):
        dist = out[row]
        dist[s] = 0.0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            du = dist[u] + 1.0
            for v in nbrs[u]:
                if du < dist[v]:
                    dist[v] = du
                    queue.append(v)
    return out


def metric_shortest_paths(g: Graph, edge_lengths: np.ndarray, sources=None) -> np.ndarray:
    """Weighted shortest-path lengths over edges with finite metric length.

    ``edge_lengths`` is n x n, symmetric, non-negative, +inf where there is
    no edge. Dijkstra from each requested source (all nodes if omitted).
    """
    lengths = np.asarray(edge_lengths, dtype=float)
    n = g.n
    if lengths.shape != (n, n):
        raise InvalidInputError("edge_lengths must be n x n")
    if np.any(lengths < 0.0):
        raise InvalidInputError("edge lengths must be non-negative")
    if not np.allclose(lengths, lengths.T, rtol=1e-9, atol=1e-12):
        raise InvalidInputError("edge_lengths must be symmetric")

    nbrs = []
    for i in range(n):
        row = lengths[i]
        js = np.flatnonzero(np.isfinite(row) & (np.arange(n) != i))
        nbrs.append([(int(j), float(row[j])) for j in js])

    if sources is None:
        src = list(range(n))
    else:
        src = [int(s) for s in sources]
        for s in src:
            if not 0 <= s < n:
                raise InvalidInputError(f"source node {s} out of range")

    out = np.full((len(src), n), np.inf)
    for row_idx, s in enumerate(src):
        dist = out[row_idx]
        dist[s] = 0.0
        heap = [(0.0, s)]
        done = np.zeros(n, dtype=bool)
        while heap:
            du, u = heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v, w in nbrs[u]:
                dv = du + w
                if dv < dist[v]:
                    dist[v] = dv
                    heappush(heap, (dv, v))
    return out
