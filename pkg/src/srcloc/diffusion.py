"""Heat-kernel diffusion operators evaluated in the spectral domain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .graphs import SpectralDecomposition


def kernel_eval(theta: float, lam):
    """Heat kernel exp(-theta * lam) for theta > 0 and lam >= 0."""
    if not theta > 0.0:
        raise InvalidParameterError("theta must be positive")
    return np.exp(-theta * np.asarray(lam, dtype=float))


def _spectral_factors(eigenvalues: np.ndarray, theta: float, order: int) -> np.ndarray:
    # Single implementation point for the kernel and its theta-derivatives;
    # a different parametric kernel only needs to swap these factors.
    g = np.exp(-theta * eigenvalues)
    if order == 0:
        return g
    if order == 1:
        return -eigenvalues * g
    if order == 2:
        return eigenvalues * eigenvalues * g
    raise InvalidParameterError("derivative order must be 1 or 2")


def _apply_filter(decomp: SpectralDecomposition, factors: np.ndarray, x: np.ndarray) -> np.ndarray:
    u = decomp.eigenvectors
    return u @ (factors * (u.T @ x))


def apply_diffusion(decomp: SpectralDecomposition, theta: float, x) -> np.ndarray:
    """Apply A_theta = U exp(-theta Lambda) U^T to a signal."""
    if not theta > 0.0:
        raise InvalidParameterError("theta must be positive")
    x = np.asarray(x, dtype=float)
    if x.shape != (decomp.n,):
        raise InvalidInputError(f"signal length {x.shape} does not match n={decomp.n}")
    return _apply_filter(decomp, _spectral_factors(decomp.eigenvalues, theta, 0), x)


def apply_theta_derivative(decomp: SpectralDecomposition, theta: float, x, order: int = 1) -> np.ndarray:
    """Apply d^order A_theta / d theta^order to a signal (order 1 or 2)."""
    if not theta > 0.0:
        raise InvalidParameterError("theta must be positive")
    if order not in (1, 2):
        raise InvalidParameterError("derivative order must be 1 or 2")
    x = np.asarray(x, dtype=float)
    if x.shape != (decomp.n,):
        raise InvalidInputError(f"signal length {x.shape} does not match n={decomp.n}")
    return _apply_filter(decomp, _spectral_factors(decomp.eigenvalues, theta, order), x)


def diffusion_matrix(decomp: SpectralDecomposition, theta: float) -> np.ndarray:
    """Materialize A_theta. Intended for tests and small problems only."""
    if not theta > 0.0:
        raise InvalidParameterError("theta must be positive")
    u = decomp.eigenvectors
    mat = (u * _spectral_factors(decomp.eigenvalues, theta, 0)) @ u.T
    return 0.5 * (mat + mat.T)


@dataclass(frozen=True)
class DiffusionOperator:
    """A_theta bound to one decomposition and one diffusion time."""

    decomposition: SpectralDecomposition
    theta: float

    def __post_init__(self):
        if not self.theta > 0.0:
            raise InvalidParameterError("theta must be positive")

    def apply(self, x) -> np.ndarray:
        return apply_diffusion(self.decomposition, self.theta, x)

    def apply_derivative(self, x, order: int = 1) -> np.ndarray:
        return apply_theta_derivative(self.decomposition, self.theta, x, order)

    def matrix(self) -> np.ndarray:
        return diffusion_matrix(self.decomposition, self.theta)
