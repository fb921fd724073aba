"""Bayesian updates for the scaled Gaussian completion-time model.

An observation is a pair (f, t): the workload share f in (0, 1] a unit was
given and the completion time t it produced, modeled as

    t ~ N(f**alpha * mu, (f**beta * sigma)**2),    lambda = 1 / sigma**2.

With alpha and beta held fixed, (mu, lambda) admits a conjugate
Normal-Gamma prior whose posterior after a batch {(f_n, t_n)} is

    mu_N    = (mu0*kappa0 + sum f_n**(alpha-2*beta) * t_n) / kappa_N
    kappa_N = kappa0 + sum f_n**(2*alpha-2*beta)
    nu_N    = nu0 + N/2
    psi_N   = psi0 + (-mu_N**2*kappa_N + mu0**2*kappa0 + sum (t_n/f_n**beta)**2) / 2

The exponents themselves live in (0, 1) and carry Beta priors.  Their
conditional posteriors have no closed form, so they are exposed as
unnormalized log densities; numerical moments of those densities are
moment-matched back onto Beta shapes.  Two likelihood variants appear: the
full form keeps the product of f_n**beta normalizers (a -beta * sum(log f_n)
term in log space), the simplified form drops it.  The alpha posterior uses
the simplified form, the beta posterior the full one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import MomentInfeasibleError, NumericalError, ParameterError
from .quadrature import QuadratureConfig, integrate_adaptive


@dataclass(frozen=True)
class NormalGammaParams:
    """Normal-Gamma state for (mu, lambda): prior or posterior."""

    mu0: float
    kappa0: float
    nu0: float
    psi0: float

    def __post_init__(self):
        for name in ("mu0", "kappa0", "nu0", "psi0"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.kappa0 <= 0.0:
            raise ParameterError(f"kappa0 must be positive, got {self.kappa0!r}")
        if self.nu0 <= 0.0:
            raise ParameterError(f"nu0 must be positive, got {self.nu0!r}")
        if self.psi0 <= 0.0:
            raise ParameterError(f"psi0 must be positive, got {self.psi0!r}")


@dataclass(frozen=True)
class BetaParams:
    """Beta shape pair, used as the prior/posterior of alpha or beta."""

    shape_a: float
    shape_b: float

    def __post_init__(self):
        for name in ("shape_a", "shape_b"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise ParameterError(f"{name} must be finite and positive, got {value!r}")

    def mean(self) -> float:
        return self.shape_a / (self.shape_a + self.shape_b)

    def variance(self) -> float:
        total = self.shape_a + self.shape_b
        return self.shape_a * self.shape_b / (total * total * (total + 1.0))

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        return (self.shape_a - 1.0) * np.log(x) + (self.shape_b - 1.0) * np.log1p(-x)


class Batch:
    """An ordered batch of (share, completion time) observations."""

    __slots__ = ("f", "t")

    def __init__(self, f: Sequence[float], t: Sequence[float]):
        f = np.asarray(f, dtype=float)
        t = np.asarray(t, dtype=float)
        if f.ndim != 1 or t.ndim != 1 or f.shape != t.shape:
            raise ParameterError("f and t must be 1-D sequences of equal length")
        if f.size and not np.all((f > 0.0) & (f <= 1.0)):
            raise ParameterError("every workload share must lie in (0, 1]")
        if not np.all(np.isfinite(t)):
            raise ParameterError("every completion time must be finite")
        f.flags.writeable = False
        t.flags.writeable = False
        self.f = f
        self.t = t

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "Batch":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __len__(self) -> int:
        return int(self.f.size)

    def __repr__(self) -> str:
        return f"Batch(n={len(self)})"


def normal_gamma_update(prior: NormalGammaParams, b: Batch,
                        alpha: float, beta: float) -> NormalGammaParams:
    """Posterior Normal-Gamma parameters after observing a batch.

    An empty batch returns the prior unchanged.  The psi update is evaluated
    with exact (compensated) summation; a non-positive result means the
    inputs are numerically inconsistent and raises rather than clamping.
    """
    if not (np.isfinite(alpha) and 0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not (np.isfinite(beta) and 0.0 < beta <= 1.0):
        raise ParameterError(f"beta must lie in (0, 1], got {beta!r}")
    n = len(b)
    if n == 0:
        return prior

    f, t = b.f, b.t
    weights = f ** (2.0 * alpha - 2.0 * beta)
    kappa_n = prior.kappa0 + math.fsum(weights)
    mu_n = (prior.mu0 * prior.kappa0 + math.fsum(f ** (alpha - 2.0 * beta) * t)) / kappa_n
    nu_n = prior.nu0 + 0.5 * n
    scaled_sq = (t / f ** beta) ** 2
    psi_n = prior.psi0 + 0.5 * math.fsum(
        [-mu_n * mu_n * kappa_n, prior.mu0 * prior.mu0 * prior.kappa0, *scaled_sq]
    )
    if psi_n <= 0.0:
        raise NumericalError(
            f"posterior Gamma rate collapsed to {psi_n!r}; "
            f"the update cancelled catastrophically for this prior/batch"
        )
    return NormalGammaParams(mu_n, kappa_n, nu_n, psi_n)


def _residual_sum(b: Batch, mu: float, alpha, beta) -> np.ndarray:
    """sum_n ((t_n - f_n**alpha * mu) / f_n**beta)**2, vectorized over alpha or beta.

    Exactly one of alpha/beta may be an array; the result matches its shape.
    """
    log_f = np.log(b.f)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.ndim:
        fa = np.exp(alpha[..., None] * log_f)
        resid = (b.t - fa * mu) / np.exp(float(beta) * log_f)
        return np.sum(resid * resid, axis=-1)
    if beta.ndim:
        core = (b.t - np.exp(float(alpha) * log_f) * mu) ** 2
        return np.sum(core * np.exp(-2.0 * beta[..., None] * log_f), axis=-1)
    resid = (b.t - b.f ** float(alpha) * mu) / b.f ** float(beta)
    return np.sum(resid * resid)


def log_likelihood(b: Batch, mu: float, lam: float, alpha: float, beta: float,
                   full: bool = True) -> float:
    """Unnormalized log likelihood of a batch at the given parameters.

    The full form is
        N/2 * log(lambda) - beta * sum(log f_n) - lambda/2 * sum(resid**2)
    and the simplified form omits the -beta * sum(log f_n) term.  Constants
    independent of all four parameters are dropped.
    """
    if not (np.isfinite(lam) and lam > 0.0):
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    n = len(b)
    value = 0.5 * n * math.log(lam) - 0.5 * lam * float(_residual_sum(b, mu, alpha, beta))
    if full:
        value -= beta * float(np.sum(np.log(b.f)))
    return value


def alpha_log_posterior_unnorm(alpha, b: Batch, mu: float, lam: float, beta: float,
                               prior: BetaParams):
    """Unnormalized log posterior of the mean-scaling exponent alpha.

    Simplified-likelihood form times the Beta prior density.  alpha may be a
    scalar or an ndarray with all entries strictly inside (0, 1).
    """
    if not (np.isfinite(lam) and lam > 0.0):
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    arr = np.asarray(alpha, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ParameterError("alpha must lie strictly inside (0, 1)")
    n = len(b)
    loglik = 0.5 * n * math.log(lam) - 0.5 * lam * _residual_sum(b, mu, arr, beta)
    out = loglik + prior.log_density(arr)
    return float(out) if np.asarray(out).ndim == 0 else out


def beta_log_posterior_unnorm(beta, b: Batch, mu: float, lam: float, alpha: float,
                              prior: BetaParams):
    """Unnormalized log posterior of the deviation-scaling exponent beta.

    Uses the full likelihood (the -beta * sum(log f_n) term matters here
    because beta is the variable).  beta may be a scalar or an ndarray.
    """
    if not (np.isfinite(lam) and lam > 0.0):
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    arr = np.asarray(beta, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ParameterError("beta must lie strictly inside (0, 1)")
    n = len(b)
    sum_log_f = float(np.sum(np.log(b.f))) if n else 0.0
    loglik = (0.5 * n * math.log(lam) - arr * sum_log_f
              - 0.5 * lam * _residual_sum(b, mu, alpha, arr))
    out = loglik + prior.log_density(arr)
    return float(out) if np.asarray(out).ndim == 0 else out


# Inset applied in the transformed angle variable.  It must keep
# x = sin(theta)**2 representably inside (0, 1) at both ends (1 - x shrinks
# quadratically in the inset, so it cannot be much below ~1.5e-8) while
# leaving negligible truncated mass even for inverse-square-root endpoint
# divergences.
_THETA_INSET = 3e-8
_SCAN_POINTS = 513


def posterior_moments(log_density: Callable, quad: QuadratureConfig = QuadratureConfig()) -> tuple[float, float]:
    """Mean and variance of exp(log_density) normalized over (0, 1).

    log_density must accept ndarray arguments.  The integral is computed
    after the substitution x = sin(theta)**2, which concentrates nodes near
    the endpoints and keeps densities with integrable endpoint divergences
    (Beta shapes down to 0.5) quadrature-friendly.  The transformed
    integrand (density times Jacobian) is rescaled by its scanned maximum
    before exponentiation; if the normalization still underflows the density
    is too concentrated for the grid and a NumericalError is raised.
    """
    lo = _THETA_INSET
    hi = 0.5 * math.pi - _THETA_INSET
    theta_scan = np.linspace(lo, hi, _SCAN_POINTS)
    x_scan = np.sin(theta_scan) ** 2
    ld_scan = np.asarray(log_density(x_scan), dtype=float)
    if np.any(np.isnan(ld_scan)) or np.any(ld_scan == np.inf):
        raise NumericalError("log density produced NaN or +inf on the scan grid")
    log_w_scan = ld_scan + np.log(np.sin(2.0 * theta_scan))
    peak = float(np.max(log_w_scan))
    if peak == -np.inf:
        raise NumericalError("log density is -inf everywhere on the scan grid")
    center = float(x_scan[int(np.argmax(log_w_scan))])

    def integrand(theta):
        x = np.sin(theta) ** 2
        log_w = np.asarray(log_density(x), dtype=float) + np.log(np.sin(2.0 * theta))
        weight = np.exp(log_w - peak)
        dev = x - center
        return np.stack([weight, weight * dev, weight * dev * dev], axis=-1)

    (z, m1, m2), _ = integrate_adaptive(
        integrand, lo, hi,
        abs_tol=quad.abs_tol, max_depth=quad.max_depth,
        initial_panels=(_SCAN_POINTS - 1) // 2,
    )
    if not (z > 0.0) or z < 1e-300:
        raise NumericalError(
            f"posterior normalization underflowed (Z={z!r}); "
            f"the density is too concentrated for the quadrature grid"
        )
    shift = m1 / z
    mean = center + shift
    variance = m2 / z - shift * shift
    if not 0.0 < mean < 1.0:
        raise NumericalError(f"posterior mean {mean!r} fell outside (0, 1)")
    if variance <= 0.0:
        raise NumericalError(f"posterior variance {variance!r} is not positive")
    return mean, variance


def beta_fit_from_moments(mean: float, variance: float) -> BetaParams:
    """Method-of-moments Beta shapes matching the given mean and variance.

        shape_a = mean * (mean*(1-mean)/variance - 1)
        shape_b = (1-mean) * (mean*(1-mean)/variance - 1)

    Requires 0 < mean < 1 and 0 < variance < mean*(1-mean); no Beta
    distribution matches moments outside that region.
    """
    if not (np.isfinite(mean) and 0.0 < mean < 1.0):
        raise ParameterError(f"mean must lie strictly inside (0, 1), got {mean!r}")
    if not (np.isfinite(variance) and variance > 0.0):
        raise ParameterError(f"variance must be positive, got {variance!r}")
    if variance >= mean * (1.0 - mean):
        raise MomentInfeasibleError(mean, variance)
    factor = mean * (1.0 - mean) / variance - 1.0
    return BetaParams(mean * factor, (1.0 - mean) * factor)
