"""Two-unit parallel completion-time model.

A divisible task is split between two processing units: unit i receives a
fraction f of the workload and unit j the remaining 1 - f.  A unit given a
workload share s completes in a Gaussian time

    t ~ N(s**alpha * mu, (s**beta * sigma)**2)

where alpha and beta are scaling exponents (1.0 is ideal linear scaling).
The task finishes when both units do, so its completion time is the max of
the two component times, its CDF the product of the component CDFs, and its
mean and variance follow from integrating the survival function:

    E[t]   = integral of 1 - P(t <= eps) on [0, inf)
    Var[t] = 2 * integral of eps * (1 - P(t <= eps)) on [0, inf) - E[t]**2

Integrals are truncated at a configurable number of tail standard
deviations; a zero share is treated as a point mass at time 0.

Split fractions are plain floats in [0, 1], validated at entry points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ParameterError, QuadratureError
from .quadrature import QuadratureConfig, integrate_adaptive


@dataclass(frozen=True)
class UnitParams:
    """Completion-time characteristics of one processing unit."""

    mu: float
    sigma: float
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("mu", "sigma", "alpha", "beta"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.mu <= 0.0:
            raise ParameterError(f"mu must be positive, got {self.mu!r}")
        if self.sigma <= 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta!r}")

    @property
    def precision(self) -> float:
        """Precision lambda = 1 / sigma**2."""
        return 1.0 / (self.sigma * self.sigma)

    def scaled_mean(self, share: float) -> float:
        return share ** self.alpha * self.mu

    def scaled_sigma(self, share: float) -> float:
        return share ** self.beta * self.sigma


@dataclass(frozen=True)
class SystemParams:
    """The pair of units a task is split across."""

    unit_i: UnitParams
    unit_j: UnitParams


def _check_fraction(f: float) -> float:
    if not (np.isfinite(f) and 0.0 <= f <= 1.0):
        raise ParameterError(f"split fraction must lie in [0, 1], got {f!r}")
    return float(f)


def component_cdf(eps, share: float, u: UnitParams):
    """P(t <= eps) for one unit given its workload share.

    eps may be a scalar or an ndarray; the return matches its shape.  A zero
    share is a point mass at 0 (probability 1 for eps >= 0, else 0).
    """
    if not isinstance(u, UnitParams):
        u = UnitParams(*u)
    if not (np.isfinite(share) and 0.0 <= share <= 1.0):
        raise ParameterError(f"workload share must lie in [0, 1], got {share!r}")
    eps = np.asarray(eps, dtype=float)
    if not np.all(np.isfinite(eps)):
        raise ParameterError("eps must be finite")
    if share == 0.0:
        out = np.where(eps >= 0.0, 1.0, 0.0)
    else:
        out = ndtr((eps - u.scaled_mean(share)) / u.scaled_sigma(share))
    return float(out) if out.ndim == 0 else out


def task_cdf(eps, f: float, s: SystemParams):
    """P(task completes by eps): product of the two component CDFs."""
    f = _check_fraction(f)
    return component_cdf(eps, f, s.unit_i) * component_cdf(eps, 1.0 - f, s.unit_j)


def negative_mass(f: float, s: SystemParams) -> dict[str, float]:
    """Per-unit P(t < 0), a diagnostic for strain in the Gaussian model.

    The completion-time integrals start at 0 while the Gaussian components
    put some mass below it; this reports how much, per unit, at the given
    split.  Degenerate shares contribute zero.
    """
    f = _check_fraction(f)
    out = {}
    for name, unit, share in (("unit_i", s.unit_i, f), ("unit_j", s.unit_j, 1.0 - f)):
        if share == 0.0:
            out[name] = 0.0
        else:
            out[name] = float(ndtr(-unit.scaled_mean(share) / unit.scaled_sigma(share)))
    return out


def _upper_limit(f: float, s: SystemParams, tail_sigmas: float) -> float:
    limit = 0.0
    for unit, share in ((s.unit_i, f), (s.unit_j, 1.0 - f)):
        if share > 0.0:
            limit = max(limit, unit.scaled_mean(share) + tail_sigmas * unit.scaled_sigma(share))
    return limit


def _completion_moments(f: float, s: SystemParams, quad: QuadratureConfig) -> tuple[float, float]:
    """Mean and variance of the task completion time at split f."""
    f = _check_fraction(f)
    upper = _upper_limit(f, s, quad.tail_sigmas)
    if upper <= 0.0:
        raise ParameterError("both units received zero workload")
    tail = 1.0 - task_cdf(upper, f, s)
    if tail >= 1e-12:
        raise QuadratureError(
            f"survival mass {tail:.3e} beyond the truncation point {upper:.6g} "
            f"exceeds 1e-12; increase tail_sigmas"
        )

    def integrand(eps):
        survival = 1.0 - task_cdf(eps, f, s)
        return np.stack([survival, eps * survival], axis=-1)

    (raw_mean, raw_second), _ = integrate_adaptive(
        integrand, 0.0, upper,
        abs_tol=quad.abs_tol, max_depth=quad.max_depth, initial_panels=64,
    )
    mean = float(raw_mean)
    variance = 2.0 * float(raw_second) - mean * mean
    # A variance indistinguishable from zero at the certified tolerance is
    # reported as exactly zero so degenerate (noise-free) systems compare
    # cleanly downstream.
    if abs(variance) < quad.abs_tol:
        variance = 0.0
    return mean, variance


def expected_completion(f: float, s: SystemParams, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Expected task completion time at split f."""
    return _completion_moments(f, s, quad)[0]


def completion_variance(f: float, s: SystemParams, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Variance of the task completion time at split f.

    Mild negative values (within quadrature error) may be reported; anything
    below -100 * abs_tol indicates numerical failure and raises.
    """
    variance = _completion_moments(f, s, quad)[1]
    if variance < -100.0 * quad.abs_tol:
        raise QuadratureError(
            f"completion variance {variance!r} is negative beyond quadrature tolerance",
            estimate=variance,
        )
    return variance
