"""Streaming Gibbs sampler for (mu, lambda, alpha, beta).

Observations arrive in batches.  Each batch is swept a fixed number of
times; one sweep recomputes the Normal-Gamma posterior at the current
exponent samples, draws lambda and mu from it, then moment-matches the
exponent posteriors onto Beta shapes and draws alpha and beta.  After the
sweeps, the batch posterior becomes the prior for the next batch
(posterior-to-prior chaining), and a trace point records the full-form log
likelihood of the batch at the current samples.

Parameters are sampled rather than set to posterior modes or means, which
keeps the chain from locking onto an early local optimum.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

import numpy as np

from .errors import MomentInfeasibleError, NumericalError, ParameterError
from .inference import (
    Batch,
    BetaParams,
    NormalGammaParams,
    alpha_log_posterior_unnorm,
    beta_fit_from_moments,
    beta_log_posterior_unnorm,
    log_likelihood,
    normal_gamma_update,
    posterior_moments,
)
from .quadrature import QuadratureConfig

log = logging.getLogger(__name__)

# Keep exponent draws strictly inside the open unit interval.
_UNIT_EPS = 1e-12


@dataclass(frozen=True)
class GibbsConfig:
    batch_size: int = 20
    inner_iterations: int = 10
    max_batches: int = 100
    rng_seed: int = 0
    clamp_moments: bool = True

    def __post_init__(self):
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be at least 1, got {self.batch_size!r}")
        if self.inner_iterations < 1:
            raise ParameterError(f"inner_iterations must be at least 1, got {self.inner_iterations!r}")
        if self.max_batches < 0:
            raise ParameterError(f"max_batches must be non-negative, got {self.max_batches!r}")


@dataclass(frozen=True)
class GibbsState:
    """Current priors and parameter draws; immutable between sweeps.

    The *_post fields carry the most recent batch posterior so the run loop
    can promote it to the next batch's prior; they are outputs of a sweep,
    never inputs.
    """

    ng: NormalGammaParams
    alpha_prior: BetaParams
    beta_prior: BetaParams
    mu_sample: float
    lambda_sample: float
    alpha_sample: float
    beta_sample: float
    batch_index: int = 0
    ng_post: NormalGammaParams | None = None
    alpha_post: BetaParams | None = None
    beta_post: BetaParams | None = None
    clamp_count: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.lambda_sample) and self.lambda_sample > 0.0):
            raise ParameterError(f"lambda sample must be positive, got {self.lambda_sample!r}")
        for name in ("alpha_sample", "beta_sample"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ParameterError(f"{name} must lie strictly inside (0, 1), got {value!r}")

    @property
    def sigma_sample(self) -> float:
        return math.sqrt(1.0 / self.lambda_sample)


@dataclass(frozen=True)
class TracePoint:
    batch_index: int
    cumulative_observations: int
    log_likelihood: float
    mu: float
    sigma: float
    alpha: float
    beta: float


@dataclass
class GibbsResult:
    trace: list[TracePoint]
    state: GibbsState
    aborted: bool = False
    abort_reason: str | None = None
    discarded_observations: int = 0


def initial_state(ng: NormalGammaParams, alpha_prior: BetaParams, beta_prior: BetaParams,
                  rng: np.random.Generator) -> GibbsState:
    """Draw the starting exponent samples from their priors.

    mu and lambda are initialized to their prior means; the first sweep
    overwrites both before they are ever used.
    """
    alpha0 = float(np.clip(rng.beta(alpha_prior.shape_a, alpha_prior.shape_b),
                           _UNIT_EPS, 1.0 - _UNIT_EPS))
    beta0 = float(np.clip(rng.beta(beta_prior.shape_a, beta_prior.shape_b),
                          _UNIT_EPS, 1.0 - _UNIT_EPS))
    return GibbsState(
        ng=ng, alpha_prior=alpha_prior, beta_prior=beta_prior,
        mu_sample=ng.mu0, lambda_sample=ng.nu0 / ng.psi0,
        alpha_sample=alpha0, beta_sample=beta0,
    )


def default_priors(first_batch: Batch, alpha_sample: float) -> NormalGammaParams:
    """Weakly informative Normal-Gamma prior built from the first batch.

    The location is the batch's mean completion time rescaled to full
    workload through the current alpha draw; the counts are all 1.
    """
    f_bar = float(np.mean(first_batch.f))
    t_bar = float(np.mean(first_batch.t))
    mu0 = t_bar * f_bar ** (-alpha_sample)
    return NormalGammaParams(mu0=mu0, kappa0=1.0, nu0=1.0, psi0=1.0)


DEFAULT_EXPONENT_PRIOR = BetaParams(2.0, 2.0)


def _fit_beta(mean: float, variance: float, clamp: bool) -> tuple[BetaParams, bool]:
    """Moment-matched Beta shapes, optionally clamping infeasible variances."""
    try:
        return beta_fit_from_moments(mean, variance), False
    except MomentInfeasibleError:
        if not clamp:
            raise
        clamped = 0.999 * mean * (1.0 - mean)
        log.warning("clamping infeasible posterior variance %.6g to %.6g at mean %.6g",
                    variance, clamped, mean)
        return beta_fit_from_moments(mean, clamped), True


def gibbs_sweep(state: GibbsState, b: Batch, rng: np.random.Generator, *,
                quad: QuadratureConfig = QuadratureConfig(),
                clamp_moments: bool = False) -> GibbsState:
    """One sweep: conjugate update, then draw lambda, mu, alpha, beta in order."""
    ng_post = normal_gamma_update(state.ng, b, state.alpha_sample, state.beta_sample)

    lam = float(rng.gamma(shape=ng_post.nu0, scale=1.0 / ng_post.psi0))
    if lam <= 0.0:
        raise NumericalError(f"gamma draw for lambda underflowed to {lam!r}")
    mu = float(rng.normal(ng_post.mu0, math.sqrt(1.0 / (ng_post.kappa0 * lam))))

    clamps = 0

    a_mean, a_var = posterior_moments(
        lambda a: alpha_log_posterior_unnorm(a, b, mu, lam, state.beta_sample, state.alpha_prior),
        quad,
    )
    alpha_post, clamped = _fit_beta(a_mean, a_var, clamp_moments)
    clamps += clamped
    alpha = float(np.clip(rng.beta(alpha_post.shape_a, alpha_post.shape_b),
                          _UNIT_EPS, 1.0 - _UNIT_EPS))

    b_mean, b_var = posterior_moments(
        lambda x: beta_log_posterior_unnorm(x, b, mu, lam, alpha, state.beta_prior),
        quad,
    )
    beta_post, clamped = _fit_beta(b_mean, b_var, clamp_moments)
    clamps += clamped
    beta = float(np.clip(rng.beta(beta_post.shape_a, beta_post.shape_b),
                         _UNIT_EPS, 1.0 - _UNIT_EPS))

    return replace(
        state,
        mu_sample=mu, lambda_sample=lam, alpha_sample=alpha, beta_sample=beta,
        ng_post=ng_post, alpha_post=alpha_post, beta_post=beta_post,
        clamp_count=state.clamp_count + clamps,
    )


def _promote(state: GibbsState) -> GibbsState:
    """Make the batch posterior the next batch's prior (including the Gamma rate)."""
    return replace(
        state,
        ng=state.ng_post, alpha_prior=state.alpha_post, beta_prior=state.beta_post,
        ng_post=None, alpha_post=None, beta_post=None,
        batch_index=state.batch_index + 1,
    )


def _as_pairs(source) -> Iterator[tuple[float, float]]:
    for obs in source:
        if hasattr(obs, "f") and hasattr(obs, "t"):
            yield float(obs.f), float(obs.t)
        else:
            f, t = obs
            yield float(f), float(t)


def run(source: Iterable, cfg: GibbsConfig, *,
        ng_prior: NormalGammaParams | None = None,
        alpha_prior: BetaParams | None = None,
        beta_prior: BetaParams | None = None,
        rng: np.random.Generator | None = None,
        quad: QuadratureConfig = QuadratureConfig()) -> GibbsResult:
    """Consume the observation stream in batches and return the trace.

    Stops after cfg.max_batches batches or when the stream ends.  A partial
    final batch is processed if it has at least 2 observations and discarded
    otherwise.  When no Normal-Gamma prior is given, one is built from the
    first batch via default_priors.  Unrecoverable numerical errors abort
    the run, returning the trace accumulated so far.

    Each trace point's log likelihood is the full form evaluated on that
    round's batch at the post-sweep samples, so successive points are
    comparable when batches share a size.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    if alpha_prior is None:
        alpha_prior = DEFAULT_EXPONENT_PRIOR
    if beta_prior is None:
        beta_prior = DEFAULT_EXPONENT_PRIOR

    pairs = _as_pairs(source)
    # The placeholder prior is replaced before the first update when the
    # caller supplied none; initial exponent draws happen first either way.
    state = initial_state(ng_prior if ng_prior is not None else NormalGammaParams(0.0, 1.0, 1.0, 1.0),
                          alpha_prior, beta_prior, rng)

    trace: list[TracePoint] = []
    seen = 0
    discarded = 0
    for round_index in range(cfg.max_batches):
        chunk = list(itertools.islice(pairs, cfg.batch_size))
        if not chunk:
            break
        if len(chunk) < cfg.batch_size and len(chunk) < 2:
            log.info("discarding final partial batch of %d observation(s)", len(chunk))
            discarded = len(chunk)
            break
        batch = Batch.from_pairs(chunk)
        if round_index == 0 and ng_prior is None:
            state = replace(state, ng=default_priors(batch, state.alpha_sample))
        try:
            for _ in range(cfg.inner_iterations):
                state = gibbs_sweep(state, batch, rng, quad=quad,
                                    clamp_moments=cfg.clamp_moments)
        except NumericalError as exc:
            log.error("aborting at batch %d: %s", round_index, exc)
            return GibbsResult(trace, state, aborted=True, abort_reason=str(exc),
                               discarded_observations=discarded)
        seen += len(batch)
        trace.append(TracePoint(
            batch_index=state.batch_index,
            cumulative_observations=seen,
            log_likelihood=log_likelihood(batch, state.mu_sample, state.lambda_sample,
                                          state.alpha_sample, state.beta_sample, full=True),
            mu=state.mu_sample, sigma=state.sigma_sample,
            alpha=state.alpha_sample, beta=state.beta_sample,
        ))
        state = _promote(state)
        if len(batch) < cfg.batch_size:
            break
    return GibbsResult(trace, state, discarded_observations=discarded)


_TRACE_COLUMNS = ["batch", "n_obs", "loglik", "mu", "sigma", "alpha", "beta"]


def write_trace_csv(trace: Iterable[TracePoint], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TRACE_COLUMNS)
        for p in trace:
            writer.writerow([p.batch_index, p.cumulative_observations,
                             f"{p.log_likelihood:.17g}", f"{p.mu:.17g}", f"{p.sigma:.17g}",
                             f"{p.alpha:.17g}", f"{p.beta:.17g}"])


def write_trace_jsonl(trace: Iterable[TracePoint], path) -> None:
    import json

    with open(path, "w") as fh:
        for p in trace:
            fh.write(json.dumps({
                "batch": p.batch_index, "n_obs": p.cumulative_observations,
                "loglik": p.log_likelihood, "mu": p.mu, "sigma": p.sigma,
                "alpha": p.alpha, "beta": p.beta,
            }))
            fh.write("\n")


def read_trace_csv(path) -> list[TracePoint]:
    import csv

    from .errors import TraceFormatError

    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("empty trace file", line=1) from None
        if header != _TRACE_COLUMNS:
            raise TraceFormatError(f"expected columns {_TRACE_COLUMNS}, got {header}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                points.append(TracePoint(int(row[0]), int(row[1]), float(row[2]),
                                         float(row[3]), float(row[4]), float(row[5]),
                                         float(row[6])))
            except (ValueError, IndexError):
                raise TraceFormatError(f"malformed trace row {row!r}", line=lineno) from None
    return points
