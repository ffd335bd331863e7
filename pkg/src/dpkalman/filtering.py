"""Steady-state Kalman filter runtime for privatized output streams.

The gain is fixed at its steady-state value from time zero; each step applies
the measurement update with the received output, then predicts one step ahead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .linalg import RiccatiSolution, SystemModel, as_vector, solve_dare


@dataclass(frozen=True, eq=False)
class FilterState:
    """Prediction and estimate at one time step."""

    k: int
    x_hat_prior: np.ndarray
    x_hat: np.ndarray


@dataclass(frozen=True, eq=False)
class FilterSolution:
    """A system together with its noise covariance and Riccati solution."""

    system: SystemModel
    V: np.ndarray
    riccati: RiccatiSolution


def solve_filter(system: SystemModel, sigma) -> FilterSolution:
    """Solve the steady state for per-channel noise scales ``sigma``.

    Builds V = diag(sigma_i^2); singular V (any zero scale) is rejected by
    the Riccati solver.
    """
    sigma = as_vector(sigma, "sigma", length=system.q)
    V = np.diag(sigma**2)
    return FilterSolution(system=system, V=V, riccati=solve_dare(system, V))


def predict(sol: FilterSolution, x_hat) -> np.ndarray:
    """One-step state prediction H x_hat."""
    return sol.system.H @ as_vector(x_hat, "x_hat", length=sol.system.n)


def update(sol: FilterSolution, x_hat_prior, y_tilde) -> np.ndarray:
    """Measurement update: prediction plus gain times the innovation."""
    x_hat_prior = as_vector(x_hat_prior, "x_hat_prior", length=sol.system.n)
    y_tilde = as_vector(y_tilde, "y_tilde", length=sol.system.q)
    innovation = y_tilde - sol.system.C @ x_hat_prior
    return x_hat_prior + sol.riccati.gain @ innovation


def run_filter(sol: FilterSolution, y_tilde, x0_hat) -> list[FilterState]:
    """Filter a whole (T, q) trajectory starting from the prediction ``x0_hat``."""
    y_tilde = np.asarray(y_tilde, dtype=float)
    if y_tilde.ndim != 2 or y_tilde.shape[0] == 0:
        raise ValidationError(f"y_tilde must be a nonempty (T, q) array, got shape {y_tilde.shape}")
    if y_tilde.shape[1] != sol.system.q:
        raise DimensionMismatchError(
            f"y_tilde has {y_tilde.shape[1]} channels, system has {sol.system.q}"
        )
    prior = as_vector(x0_hat, "x0_hat", length=sol.system.n)
    states = []
    for k in range(y_tilde.shape[0]):
        est = update(sol, prior, y_tilde[k])
        states.append(FilterState(k=k, x_hat_prior=prior, x_hat=est))
        prior = predict(sol, est)
    return states
