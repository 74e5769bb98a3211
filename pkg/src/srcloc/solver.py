"""Sparse source recovery by alternating minimization.

The objective is E(x, theta) = gamma*||x||_1 + alpha/2*||M(A_theta x - b)||^2
with M a binary observation mask. The x-step is solved with FISTA, the
theta-step with a proximally smoothed damped Newton method, and the outer
loop alternates the two until the energy change drops below a tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .diffusion import apply_diffusion, apply_theta_derivative
from .errors import InvalidInputError, InvalidParameterError, NumericalFailureError
from .graphs import SpectralDecomposition


@dataclass(frozen=True)
class Observation:
    """Observed snapshot b with a binary mask (1 = entry is observed)."""

    b: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1:
            raise InvalidInputError("b must be a vector")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("b must be finite")
        if self.mask is None:
            mask = np.ones(b.size)
        else:
            mask = np.asarray(self.mask, dtype=float)
            if mask.shape != b.shape:
                raise InvalidInputError("mask length must match b")
            if not np.all((mask == 0.0) | (mask == 1.0)):
                raise InvalidInputError("mask entries must be 0 or 1")
            if not np.any(mask == 1.0):
                raise InvalidInputError("mask must observe at least one entry")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mask", mask)

    @property
    def n(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class SolverConfig:
    """Tunables for the alternating solver.

    ``mu`` defaults to 1e-2 * alpha so the proximal term scales with the
    fidelity term. ``gamma=0`` is allowed (pure least squares).
    """

    gamma: float = 1e-2
    alpha: float = 1.0
    epsilon: float = 1e-8
    max_outer_iter: int = 50
    fista_max_iter: int = 1000
    fista_tol: float = 1e-8
    mu: float | None = None
    newton_max_iter: int = 20
    theta_min: float = 1e-4
    theta_max: float = 50.0
    fix_theta: bool = False

    def __post_init__(self):
        if self.gamma < 0.0:
            raise InvalidParameterError("gamma must be non-negative")
        if not self.alpha > 0.0:
            raise InvalidParameterError("alpha must be positive")
        if not (self.epsilon > 0.0 and self.fista_tol > 0.0):
            raise InvalidParameterError("tolerances must be positive")
        if self.max_outer_iter < 1 or self.fista_max_iter < 1 or self.newton_max_iter < 1:
            raise InvalidParameterError("iteration caps must be at least 1")
        if not 0.0 < self.theta_min < self.theta_max:
            raise InvalidParameterError("need 0 < theta_min < theta_max")
        if self.mu is None:
            object.__setattr__(self, "mu", 1e-2 * self.alpha)
        elif self.mu < 0.0:
            raise InvalidParameterError("mu must be non-negative")


class FistaResult(NamedTuple):
    x: np.ndarray
    iterations: int
    objective: float


@dataclass(frozen=True)
class SolveResult:
    """Recovered sources and diffusion time with the outer energy trace."""

    x: np.ndarray
    theta: float
    energy_trace: tuple
    converged: bool
    outer_iterations: int


def objective(x, theta: float, obs: Observation, cfg: SolverConfig,
              decomp: SpectralDecomposition) -> float:
    """Masked energy gamma*||x||_1 + alpha/2*||M(A_theta x - b)||^2."""
    x = np.asarray(x, dtype=float)
    r = obs.mask * (apply_diffusion(decomp, theta, x) - obs.b)
    return cfg.gamma * float(np.abs(x).sum()) + 0.5 * cfg.alpha * float(r @ r)


def soft_threshold(v, t: float) -> np.ndarray:
    """Component-wise sign(v) * max(|v| - t, 0)."""
    if t < 0.0:
        raise InvalidParameterError("threshold must be non-negative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _masked_operator_norm(decomp: SpectralDecomposition, theta: float, mask: np.ndarray,
                          max_iter: int = 50, tol: float = 1e-6) -> float:
    """Power-iteration estimate of ||diag(mask) A_theta||_2.

    Iterates on A M A (the normal operator); falls back to the global
    bound 1 when the iteration degenerates.
    """
    n = decomp.n
    v = np.ones(n) / np.sqrt(n)
    sigma_sq = None
    for _ in range(max_iter):
        w = apply_diffusion(decomp, theta, mask * apply_diffusion(decomp, theta, v))
        norm_w = float(np.linalg.norm(w))
        if norm_w <= 0.0:
            return 1.0
        rayleigh = float(v @ w)
        v = w / norm_w
        if sigma_sq is not None and abs(rayleigh - sigma_sq) <= tol * max(abs(rayleigh), 1e-30):
            sigma_sq = rayleigh
            break
        sigma_sq = rayleigh
    return float(np.sqrt(max(sigma_sq, 0.0)))


def fista_solve_x(theta: float, obs: Observation, cfg: SolverConfig,
                  decomp: SpectralDecomposition, x_init=None) -> FistaResult:
    """Minimize E(., theta) with FISTA.

    The smooth-part gradient is alpha * A_theta(M(A_theta x - b)) (A_theta is
    symmetric), the step is 1/L with L = alpha * ||M A_theta||_2^2, and the
    momentum follows t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2. Stops when the
    relative objective change falls below fista_tol. Returns the best
    iterate seen, so a solve never ends above its starting energy.
    """
    if not cfg.theta_min <= theta <= cfg.theta_max:
        raise InvalidParameterError(
            f"theta={theta} outside [{cfg.theta_min}, {cfg.theta_max}]")
    n = decomp.n
    if x_init is None:
        x = np.zeros(n)
    else:
        x = np.array(x_init, dtype=float)
        if x.shape != (n,):
            raise InvalidInputError("x_init length does not match n")

    if np.all(obs.mask == 1.0):
        op_norm = float(np.exp(-theta * decomp.eigenvalues[0]))
    else:
        # 2% headroom on the estimate, capped by the exact global bound
        op_norm = min(1.0, 1.02 * _masked_operator_norm(decomp, theta, obs.mask))
    step = 1.0 / (cfg.alpha * op_norm * op_norm)
    shrink = cfg.gamma * step

    f_prev = objective(x, theta, obs, cfg, decomp)
    best_x, best_f = x, f_prev
    y = x
    t = 1.0
    iterations = 0
    for it in range(1, cfg.fista_max_iter + 1):
        grad = cfg.alpha * apply_diffusion(
            decomp, theta, obs.mask * (apply_diffusion(decomp, theta, y) - obs.b))
        x_new = soft_threshold(y - step * grad, shrink)
        f_new = objective(x_new, theta, obs, cfg, decomp)
        if not np.isfinite(f_new):
            raise NumericalFailureError(
                f"objective became non-finite at inner iteration {it}", iterate=x_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        iterations = it
        if f_new < best_f:
            best_x, best_f = x_new, f_new
        rel_change = abs(f_new - f_prev) / max(abs(f_prev), 1e-30)
        x, f_prev, t = x_new, f_new, t_new
        if rel_change < cfg.fista_tol:
            break
    return FistaResult(x=best_x, iterations=iterations, objective=best_f)


def fidelity_theta_derivatives(x, theta: float, obs: Observation, cfg: SolverConfig,
                               decomp: SpectralDecomposition):
    """f(theta) = alpha/2*||M(A_theta x - b)||^2 and its first two derivatives.

    f'  = alpha * (M r)^T (M A' x)
    f'' = alpha * (||M A' x||^2 + (M r)^T (M A'' x))
    with r = A_theta x - b and A', A'' the theta-derivatives of A_theta.
    """
    x = np.asarray(x, dtype=float)
    r = obs.mask * (apply_diffusion(decomp, theta, x) - obs.b)
    d1 = obs.mask * apply_theta_derivative(decomp, theta, x, order=1)
    d2 = obs.mask * apply_theta_derivative(decomp, theta, x, order=2)
    f = 0.5 * cfg.alpha * float(r @ r)
    fp = cfg.alpha * float(r @ d1)
    fpp = cfg.alpha * (float(d1 @ d1) + float(r @ d2))
    return f, fp, fpp


def newton_theta_step(x, theta_k: float, obs: Observation, cfg: SolverConfig,
                      decomp: SpectralDecomposition) -> float:
    """One smoothed Newton pass for the diffusion time.

    Minimizes f(theta) + (mu/2)(theta - theta_k)^2 with damped Newton
    updates (step halving) projected onto [theta_min, theta_max]. When no
    candidate decreases the smoothed objective, theta_k is returned
    unchanged.
    """
    if not cfg.theta_min <= theta_k <= cfg.theta_max:
        raise InvalidParameterError(
            f"theta_k={theta_k} outside [{cfg.theta_min}, {cfg.theta_max}]")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("x must be finite")

    def smoothed_value(theta):
        r = obs.mask * (apply_diffusion(decomp, theta, x) - obs.b)
        d = theta - theta_k
        return 0.5 * cfg.alpha * float(r @ r) + 0.5 * cfg.mu * d * d

    theta = float(theta_k)
    current = smoothed_value(theta)
    start = current
    for _ in range(cfg.newton_max_iter):
        f, fp, fpp = fidelity_theta_derivatives(x, theta, obs, cfg, decomp)
        grad = fp + cfg.mu * (theta - theta_k)
        hess = fpp + cfg.mu
        if abs(grad) <= 1e-14 * max(1.0, abs(f)):
            break
        step = -grad / hess if hess > 1e-30 else -grad
        moved = False
        for _ in range(30):
            cand = min(max(theta + step, cfg.theta_min), cfg.theta_max)
            if cand != theta:
                value = smoothed_value(cand)
                if value < current:
                    theta, current = cand, value
                    moved = True
                    break
            step *= 0.5
        if not moved:
            break
    if current < start:
        return theta
    return float(theta_k)


def alternating_solve(obs: Observation, cfg: SolverConfig, decomp: SpectralDecomposition,
                      x_init=None, theta_init: float = 1.0) -> SolveResult:
    """Alternate the FISTA x-step and the Newton theta-step.

    Each outer iteration runs the x-step at the current theta, then (unless
    fix_theta) the theta-step; a theta update that raises the energy is
    rejected, so the recorded energy trace is non-increasing. Stops when
    |E_{k+1} - E_k| < epsilon or after max_outer_iter iterations.
    """
    if not cfg.theta_min <= theta_init <= cfg.theta_max:
        raise InvalidParameterError(
            f"theta_init={theta_init} outside [{cfg.theta_min}, {cfg.theta_max}]")
    n = decomp.n
    if x_init is None:
        x = np.zeros(n)
    else:
        x = np.array(x_init, dtype=float)
        if x.shape != (n,):
            raise InvalidInputError("x_init length does not match n")

    theta = float(theta_init)
    energy = objective(x, theta, obs, cfg, decomp)
    trace = [(0, energy)]
    converged = False
    outer = 0
    for outer in range(1, cfg.max_outer_iter + 1):
        x = fista_solve_x(theta, obs, cfg, decomp, x_init=x).x
        if not cfg.fix_theta:
            cand = newton_theta_step(x, theta, obs, cfg, decomp)
            if cand != theta and (objective(x, cand, obs, cfg, decomp)
                                  <= objective(x, theta, obs, cfg, decomp)):
                theta = cand
        new_energy = objective(x, theta, obs, cfg, decomp)
        trace.append((outer, new_energy))
        if abs(new_energy - energy) < cfg.epsilon:
            energy = new_energy
            converged = True
            break
        energy = new_energy
    return SolveResult(x=x, theta=theta, energy_trace=tuple(trace),
                       converged=converged, outer_iterations=outer)
