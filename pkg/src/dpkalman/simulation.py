"""Seeded Monte Carlo validation of the analytic error bounds.

Each trial draws a true state path x(k+1) = H x(k) + w(k), privatizes the
outputs pointwise in time, runs the steady-state filter on the privatized
stream, and records squared prediction/estimation errors per step next to the
constant trace bounds. Process noise, privacy noise, and the optional initial
spread use independent substreams keyed by (seed, trial, stream tag), so
results are bit-identical no matter how trials are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import aposteriori_trace_bounds, apriori_trace_bounds
from .errors import ValidationError
from .filtering import FilterSolution, solve_filter
from .linalg import SystemModel, as_matrix, require_symmetric, symmetric_factor
from .network import NetworkModel
from .privacy import PrivacyConfig
from .rng import STREAM_INIT, STREAM_PRIVACY, STREAM_PROCESS, gaussian_generator

CSV_HEADER = (
    "trial,k,sq_err_prior,sq_err_post,"
    "bound_prior_lo,bound_prior_hi,bound_post_lo,bound_post_hi"
)

DEFAULT_BURN_IN = 10


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """Inputs of one Monte Carlo run.

    ``system`` is a single system (with ``privacy`` supplying the noise
    scales) or a composed network (whose agents carry their own privacy).
    By default the true initial state equals the public mean prediction;
    pass ``x0_cov`` for a Gaussian spread around it.
    """

    system: SystemModel | NetworkModel
    privacy: PrivacyConfig | None
    horizon_T: int
    trials: int
    seed: int
    x0_cov: np.ndarray | None = None
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.horizon_T < 1:
            raise ValidationError(f"horizon_T must be >= 1, got {self.horizon_T}")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.burn_in < 0:
            raise ValidationError(f"burn_in must be >= 0, got {self.burn_in}")
        if isinstance(self.system, NetworkModel):
            if self.privacy is not None:
                raise ValidationError("a network carries per-agent privacy; top-level privacy must be None")
        elif self.privacy is None:
            raise ValidationError("a single-system simulation needs a privacy configuration")
        if self.x0_cov is not None:
            cov = require_symmetric(as_matrix(self.x0_cov, "x0_cov"), "x0_cov")
            n = self.system.system.n if isinstance(self.system, NetworkModel) else self.system.n
            if cov.shape != (n, n):
                raise ValidationError(f"x0_cov must be {n}x{n}, got shape {cov.shape}")
            object.__setattr__(self, "x0_cov", cov)

    def resolve(self) -> tuple[SystemModel, np.ndarray]:
        """The plain system to simulate and its noise-scale vector."""
        if isinstance(self.system, NetworkModel):
            return self.system.system, self.system.sigma
        return self.system, self.privacy.sigma


@dataclass(frozen=True)
class SimulationRecord:
    """Squared errors at one step of one trial, with the constant bounds."""

    k: int
    sq_err_prior: float
    sq_err_post: float
    bound_prior_lo: float
    bound_prior_hi: float
    bound_post_lo: float
    bound_post_hi: float


@dataclass(frozen=True)
class SimulationSummary:
    """Trial-and-time averages past the burn-in, with Monte Carlo standard errors."""

    mean_sq_err_prior: float
    mean_sq_err_post: float
    stderr_sq_err_prior: float
    stderr_sq_err_post: float
    trials: int
    horizon_T: int
    burn_in: int

    def to_dict(self) -> dict:
        return {
            "mean_sq_err_prior": float(self.mean_sq_err_prior),
            "mean_sq_err_post": float(self.mean_sq_err_post),
            "stderr_sq_err_prior": float(self.stderr_sq_err_prior),
            "stderr_sq_err_post": float(self.stderr_sq_err_post),
            "trials": int(self.trials),
            "horizon_T": int(self.horizon_T),
            "burn_in": int(self.burn_in),
        }


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Per-step squared errors, (trials, T) arrays, plus bounds and summary."""

    sq_err_prior: np.ndarray
    sq_err_post: np.ndarray
    bound_prior: tuple[float, float]
    bound_post: tuple[float, float]
    summary: SimulationSummary
    seed: int
    solution: FilterSolution

    @property
    def trials(self) -> int:
        return self.sq_err_prior.shape[0]

    @property
    def horizon_T(self) -> int:
        return self.sq_err_prior.shape[1]

    def trial_records(self, trial: int) -> list[SimulationRecord]:
        return [
            SimulationRecord(
                k=k,
                sq_err_prior=float(self.sq_err_prior[trial, k]),
                sq_err_post=float(self.sq_err_post[trial, k]),
                bound_prior_lo=self.bound_prior[0],
                bound_prior_hi=self.bound_prior[1],
                bound_post_lo=self.bound_post[0],
                bound_post_hi=self.bound_post[1],
            )
            for k in range(self.horizon_T)
        ]


def _run_trials(lo: int, hi: int, system: SystemModel, gain: np.ndarray,
                sigma: np.ndarray, seed: int, T: int, x0_factor: np.ndarray | None,
                out_prior: np.ndarray, out_post: np.ndarray) -> None:
    # Fills rows [lo, hi) of the output arrays; noise is keyed per trial so the
    # result is independent of how trials are chunked.
    H, C, x0 = system.H, system.C, system.x0_hat
    n, q = system.n, system.q
    m = hi - lo
    chol_w = np.linalg.cholesky(system.W)
    w_noise = np.empty((m, T, n))
    v_noise = np.empty((m, T, q))
    x = np.tile(x0, (m, 1))
    for i, trial in enumerate(range(lo, hi)):
        w_noise[i] = gaussian_generator(seed, trial=trial, stream=STREAM_PROCESS).standard_normal((T, n)) @ chol_w.T
        v_noise[i] = gaussian_generator(seed, trial=trial, stream=STREAM_PRIVACY).standard_normal((T, q)) * sigma
        if x0_factor is not None:
            x[i] += x0_factor @ gaussian_generator(seed, trial=trial, stream=STREAM_INIT).standard_normal(n)
    x_prior = np.tile(x0, (m, 1))
    for k in range(T):
        y_tilde = x @ C.T + v_noise[:, k, :]
        x_hat = x_prior + (y_tilde - x_prior @ C.T) @ gain.T
        out_prior[lo:hi, k] = ((x - x_prior) ** 2).sum(axis=1)
        out_post[lo:hi, k] = ((x - x_hat) ** 2).sum(axis=1)
        x = x @ H.T + w_noise[:, k, :]
        x_prior = x_hat @ H.T


def simulate(config: SimulationConfig, *, threads: int = 1) -> SimulationResult:
    """Run the Monte Carlo experiment; deterministic for a fixed seed.

    ``threads`` controls how trials are chunked across a thread pool and has
    no effect on the output values.
    """
    system, sigma = config.resolve()
    sol = solve_filter(system, sigma)
    prior_rep = apriori_trace_bounds(system, sigma)
    post_rep = aposteriori_trace_bounds(system, sigma)

    T, trials = config.horizon_T, config.trials
    out_prior = np.empty((trials, T))
    out_post = np.empty((trials, T))
    x0_factor = symmetric_factor(config.x0_cov) if config.x0_cov is not None else None

    threads = max(1, int(threads))
    args = (system, sol.riccati.gain, sigma, config.seed, T, x0_factor, out_prior, out_post)
    if threads == 1 or trials == 1:
        _run_trials(0, trials, *args)
    else:
        chunk = math.ceil(trials / threads)
        spans = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_trials, lo, hi, *args) for lo, hi in spans]
            for f in futures:
                f.result()

    burn = min(config.burn_in, T - 1)
    per_trial_prior = out_prior[:, burn:].mean(axis=1)
    per_trial_post = out_post[:, burn:].mean(axis=1)
    if trials > 1:
        se_prior = float(per_trial_prior.std(ddof=1) / math.sqrt(trials))
        se_post = float(per_trial_post.std(ddof=1) / math.sqrt(trials))
    else:
        se_prior = se_post = 0.0
    summary = SimulationSummary(
        mean_sq_err_prior=float(per_trial_prior.mean()),
        mean_sq_err_post=float(per_trial_post.mean()),
        stderr_sq_err_prior=se_prior,
        stderr_sq_err_post=se_post,
        trials=trials,
        horizon_T=T,
        burn_in=burn,
    )
    return SimulationResult(
        sq_err_prior=out_prior,
        sq_err_post=out_post,
        bound_prior=(prior_rep.lower, prior_rep.upper),
        bound_post=(post_rep.lower, post_rep.upper),
        summary=summary,
        seed=config.seed,
        solution=sol,
    )


def bound_violation_stats(records) -> dict[str, float]:
    """Fraction of steps whose instantaneous squared error leaves the MSE bounds.

    Accepts a :class:`SimulationResult` or any nonempty iterable of
    :class:`SimulationRecord`. The bounds govern averages, not samples, so
    these fractions are descriptive rather than asserted.
    """
    if isinstance(records, SimulationResult):
        p_lo, p_hi = records.bound_prior
        e_lo, e_hi = records.bound_post
        prior_out = (records.sq_err_prior < p_lo) | (records.sq_err_prior > p_hi)
        post_out = (records.sq_err_post < e_lo) | (records.sq_err_post > e_hi)
        return {
            "frac_steps_prior_outside": float(prior_out.mean()),
            "frac_steps_post_outside": float(post_out.mean()),
        }
    items = list(records)
    if not items:
        raise ValidationError("records must be nonempty")
    prior_hits = sum(1 for r in items if not r.bound_prior_lo <= r.sq_err_prior <= r.bound_prior_hi)
    post_hits = sum(1 for r in items if not r.bound_post_lo <= r.sq_err_post <= r.bound_post_hi)
    return {
        "frac_steps_prior_outside": prior_hits / len(items),
        "frac_steps_post_outside": post_hits / len(items),
    }


def write_csv(result: SimulationResult, path) -> None:
    """Write one row per (trial, k): LF line endings, full-precision floats."""
    b = [repr(float(v)) for v in (*result.bound_prior, *result.bound_post)]
    tail = f",{b[0]},{b[1]},{b[2]},{b[3]}\n"
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for t in range(result.trials):
            prior_row = result.sq_err_prior[t]
            post_row = result.sq_err_post[t]
            for k in range(result.horizon_T):
                fh.write(f"{t},{k},{float(prior_row[k])!r},{float(post_row[k])!r}{tail}")
