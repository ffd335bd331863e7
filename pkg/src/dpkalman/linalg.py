"""Dense small-matrix primitives and the steady-state Riccati machinery.

Matrices are 2-D ``numpy.float64`` arrays and vectors are 1-D. Every function
is a pure function of its inputs; model dataclasses freeze their arrays after
validation so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    FactorizationError,
    NoConvergenceError,
    NonSymmetricError,
    NotDetectableError,
    SingularMatrixError,
    ValidationError,
)

SYMMETRY_TOL = 1e-9
RANK_TOL = 1e-10
SINGULARITY_RTOL = 1e-12
DARE_RESIDUAL_TOL = 1e-10
DARE_CHANGE_TOL = 1e-12
DARE_MAX_ITERATIONS = 100_000


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Copy ``value`` into a finite 2-D float array."""
    arr = np.array(value, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionMismatchError(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_vector(value, name: str = "vector", length: int | None = None) -> np.ndarray:
    """Copy ``value`` into a finite 1-D float array, optionally of fixed length."""
    arr = np.array(value, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatchError(f"{name} must be a nonempty 1-D array, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionMismatchError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def symmetrize(S: np.ndarray) -> np.ndarray:
    return 0.5 * (S + S.T)


def require_symmetric(S: np.ndarray, name: str = "matrix", tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Check max |S_ij - S_ji| <= tol and return the symmetrized matrix."""
    if S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {S.shape}")
    skew = float(np.max(np.abs(S - S.T)))
    if skew > tol:
        raise NonSymmetricError(f"{name} is not symmetric: max |S_ij - S_ji| = {skew:.3e} > {tol:.1e}")
    return symmetrize(S)


def extreme_eigenvalues(S) -> tuple[float, float]:
    """Smallest and largest eigenvalues of a symmetric matrix."""
    sym = require_symmetric(as_matrix(S, "S"), "S")
    w = np.linalg.eigvalsh(sym)
    return float(w[0]), float(w[-1])


def singular_values(A) -> np.ndarray:
    """Singular values of ``A`` in descending order."""
    return np.linalg.svd(as_matrix(A, "A"), compute_uv=False)


def _numerical_rank(A: np.ndarray, rank_tol: float) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def observability_check(H, C, rank_tol: float = RANK_TOL) -> bool:
    """True iff the stacked map [C; CH; ...; CH^(n-1)] has numerical rank n."""
    H = as_matrix(H, "H")
    C = as_matrix(C, "C")
    n = H.shape[0]
    if H.shape != (n, n) or C.shape[1] != n:
        raise DimensionMismatchError(f"inconsistent shapes H {H.shape}, C {C.shape}")
    blocks = [C]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ H)
    return _numerical_rank(np.vstack(blocks), rank_tol) == n


def symmetric_factor(W) -> np.ndarray:
    """Factor D with W = D D^T via the eigendecomposition of symmetric PSD W."""
    W = require_symmetric(as_matrix(W, "W"), "W")
    w, U = np.linalg.eigh(W)
    if w[0] < -1e-9:
        raise FactorizationError(f"W has a negative eigenvalue {w[0]:.3e}; cannot factor as D D^T")
    return U * np.sqrt(np.clip(w, 0.0, None))


def controllability_check(H, W, rank_tol: float = RANK_TOL) -> bool:
    """True iff [D, HD, ..., H^(n-1)D] has numerical rank n, where W = D D^T."""
    H = as_matrix(H, "H")
    D = symmetric_factor(W)
    n = H.shape[0]
    if H.shape != (n, n) or D.shape[0] != n:
        raise DimensionMismatchError(f"inconsistent shapes H {H.shape}, W {D.shape}")
    blocks = [D]
    for _ in range(n - 1):
        blocks.append(H @ blocks[-1])
    return _numerical_rank(np.hstack(blocks), rank_tol) == n


def block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    """Assemble a block-diagonal matrix from a nonempty list of 2-D blocks."""
    if not blocks:
        raise DimensionMismatchError("block_diag needs at least one block")
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Public LTI plant: state update ``H``, output map ``C``, process-noise
    covariance ``W`` (symmetric positive definite), and the public mean
    initial condition ``x0_hat``.
    """

    H: np.ndarray
    C: np.ndarray
    W: np.ndarray
    x0_hat: np.ndarray

    def __post_init__(self):
        H = as_matrix(self.H, "H")
        n = H.shape[0]
        if H.shape != (n, n):
            raise DimensionMismatchError(f"H must be square, got shape {H.shape}")
        C = as_matrix(self.C, "C")
        if C.shape[1] != n:
            raise DimensionMismatchError(f"C must have {n} columns, got shape {C.shape}")
        W = require_symmetric(as_matrix(self.W, "W"), "W")
        if W.shape != (n, n):
            raise DimensionMismatchError(f"W must be {n}x{n}, got shape {W.shape}")
        w = np.linalg.eigvalsh(W)
        if w[0] <= 0.0:
            raise ValidationError(f"W must be positive definite; smallest eigenvalue is {w[0]:.3e}")
        x0 = as_vector(self.x0_hat, "x0_hat", length=n)
        for name, arr in (("H", H), ("C", C), ("W", W), ("x0_hat", x0)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def q(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Steady-state covariances of the filter driven by noise covariance V.

    ``sigma`` is the prediction (a priori) error covariance, ``sigma_bar``
    the estimation (a posteriori) error covariance, and ``gain`` the constant
    filter gain ``sigma_bar C^T V^-1``.
    """

    sigma: np.ndarray
    sigma_bar: np.ndarray
    gain: np.ndarray
    residual: float
    iterations: int

    def __post_init__(self):
        for name in ("sigma", "sigma_bar", "gain"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _require_invertible_spd(M: np.ndarray, name: str) -> None:
    w = np.linalg.eigvalsh(M)
    if w[-1] <= 0.0 or w[0] < SINGULARITY_RTOL * w[-1]:
        raise SingularMatrixError(
            f"{name} is singular by condition estimate "
            f"(eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}])"
        )


def posterior_covariance(sigma, C, V) -> np.ndarray:
    """Estimation error covariance (C^T V^-1 C + sigma^-1)^-1.

    ``sigma`` must be symmetric and numerically invertible; ``V`` symmetric
    positive definite.
    """
    sigma = require_symmetric(as_matrix(sigma, "sigma"), "sigma")
    C = as_matrix(C, "C")
    V = require_symmetric(as_matrix(V, "V"), "V")
    n = sigma.shape[0]
    if C.shape[1] != n or V.shape[0] != C.shape[0]:
        raise DimensionMismatchError(
            f"inconsistent shapes sigma {sigma.shape}, C {C.shape}, V {V.shape}"
        )
    _require_invertible_spd(sigma, "sigma")
    _require_invertible_spd(V, "V")
    eye = np.eye(n)
    m = C.T @ np.linalg.solve(V, C) + np.linalg.solve(sigma, eye)
    return symmetrize(np.linalg.solve(m, eye))


def _dare_map(sigma: np.ndarray, H: np.ndarray, W: np.ndarray, info: np.ndarray) -> np.ndarray:
    # One application of sigma -> H (sigma^-1 + C^T V^-1 C)^-1 H^T + W.
    eye = np.eye(sigma.shape[0])
    inner = np.linalg.solve(np.linalg.solve(sigma, eye) + info, eye)
    return symmetrize(H @ inner @ H.T + W)


def dare_residual(sigma: np.ndarray, H: np.ndarray, W: np.ndarray, info: np.ndarray) -> float:
    """Relative Frobenius fixed-point defect of a candidate solution."""
    image = _dare_map(sigma, H, W, info)
    denom = max(float(np.linalg.norm(sigma)), np.finfo(float).tiny)
    return float(np.linalg.norm(sigma - image)) / denom


def solve_dare(
    system: SystemModel,
    V,
    *,
    residual_tol: float = DARE_RESIDUAL_TOL,
    change_tol: float = DARE_CHANGE_TOL,
    max_iterations: int = DARE_MAX_ITERATIONS,
) -> RiccatiSolution:
    """Solve the steady-state Riccati fixed point for noise covariance ``V``.

    Iterates sigma <- H (sigma^-1 + C^T V^-1 C)^-1 H^T + W from sigma = W,
    symmetrizing each iterate, until the relative change drops below
    ``change_tol`` and the fixed-point residual below ``residual_tol``.
    The start at W is valid because the solution dominates W.
    """
    V = require_symmetric(as_matrix(V, "V"), "V")
    if V.shape != (system.q, system.q):
        raise DimensionMismatchError(f"V must be {system.q}x{system.q}, got shape {V.shape}")
    if not observability_check(system.H, system.C):
        raise NotDetectableError("the pair (H, C) is not observable; the filter has no steady state")
    if not controllability_check(system.H, system.W):
        raise NotDetectableError(
            "the pair (H, D) with W = D D^T is not controllable; the solution may not be unique"
        )
    vw = np.linalg.eigvalsh(V)
    if vw[-1] <= 0.0 or vw[0] < SINGULARITY_RTOL * vw[-1]:
        raise SingularMatrixError(
            f"V is singular by condition estimate (eigenvalue range [{vw[0]:.3e}, {vw[-1]:.3e}])"
        )

    H, W = system.H, system.W
    info = system.C.T @ np.linalg.solve(V, system.C)
    sigma = W.copy()
    iterations = 0
    residual = np.inf
    converged = False
    for iterations in range(1, max_iterations + 1):
        nxt = _dare_map(sigma, H, W, info)
        denom = max(float(np.linalg.norm(nxt)), np.finfo(float).tiny)
        change = float(np.linalg.norm(nxt - sigma)) / denom
        sigma = nxt
        if change < change_tol:
            residual = dare_residual(sigma, H, W, info)
            if residual <= residual_tol:
                converged = True
                break
    if not converged:
        residual = dare_residual(sigma, H, W, info)
        raise NoConvergenceError(
            f"Riccati iteration did not converge within {max_iterations} iterations "
            f"(residual {residual:.3e})"
        )

    sigma_bar = posterior_covariance(sigma, system.C, V)
    gain = np.linalg.solve(V, system.C @ sigma_bar).T
    return RiccatiSolution(
        sigma=sigma, sigma_bar=sigma_bar, gain=gain, residual=residual, iterations=iterations
    )
