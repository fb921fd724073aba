"""Mean-variance sweep over split fractions and Pareto frontier extraction.

Sweeping f over a grid yields one (expected time, variance) pair per split;
the efficient frontier is the Pareto-minimal subset (no other point is at
least as good in both coordinates and strictly better in one).  Selection
helpers answer the two QoS queries: least variance under an expected-time
budget and least expected time under a variance budget.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import InfeasibleBudgetError, ParameterError, QuadratureError
from .model import SystemParams, _completion_moments
from .quadrature import QuadratureConfig


@dataclass(frozen=True)
class SweepGrid:
    """Evenly spaced split fractions; defaults avoid the degenerate endpoints."""

    f_min: float = 0.01
    f_max: float = 0.99
    steps: int = 99

    def __post_init__(self):
        if not (np.isfinite(self.f_min) and np.isfinite(self.f_max)):
            raise ParameterError("grid bounds must be finite")
        if not (0.0 <= self.f_min < self.f_max <= 1.0):
            raise ParameterError(
                f"grid bounds must satisfy 0 <= f_min < f_max <= 1, got [{self.f_min!r}, {self.f_max!r}]"
            )
        if self.steps < 2:
            raise ParameterError(f"steps must be at least 2, got {self.steps!r}")

    def values(self) -> np.ndarray:
        return np.linspace(self.f_min, self.f_max, self.steps)


@dataclass(frozen=True)
class FrontierPoint:
    f: float
    mu: float
    var: float
    on_frontier: bool = False


def sweep(s: SystemParams, grid: SweepGrid = SweepGrid(),
          quad: QuadratureConfig = QuadratureConfig()) -> list[FrontierPoint]:
    """Evaluate (mu(f), var(f)) at every grid point; frontier flags unset."""
    points = []
    for f in grid.values():
        try:
            mean, variance = _completion_moments(float(f), s, quad)
        except QuadratureError as exc:
            err = QuadratureError(f"sweep failed at f={float(f)!r}: {exc}",
                                  estimate=exc.estimate, error_bound=exc.error_bound)
            err.split_fraction = float(f)
            raise err from exc
        points.append(FrontierPoint(float(f), mean, variance))
    return points


def efficient_frontier(points: Sequence[FrontierPoint]) -> list[FrontierPoint]:
    """Return the points, in input order, with on_frontier set.

    A point is on the frontier exactly when no other point has mu <= and
    var <= with at least one strict inequality; exact duplicates are all
    kept.  Single pass over a (mu, var) sort, so flags are independent of
    input order.
    """
    if not points:
        raise ParameterError("cannot extract a frontier from an empty sweep")
    order = sorted(range(len(points)), key=lambda i: (points[i].mu, points[i].var))
    flags = [False] * len(points)
    best_var = np.inf  # min variance among strictly smaller mu
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and points[order[j]].mu == points[order[i]].mu:
            j += 1
        group = order[i:j]
        group_min = min(points[idx].var for idx in group)
        if group_min < best_var:
            for idx in group:
                if points[idx].var == group_min:
                    flags[idx] = True
            best_var = group_min
        i = j
    return [replace(p, on_frontier=flags[i]) for i, p in enumerate(points)]


def min_variance_given_mu(points: Sequence[FrontierPoint], mu_budget: float) -> FrontierPoint:
    """Feasible point (mu <= budget) of least variance; ties go to smaller f."""
    if not points:
        raise ParameterError("no sweep points supplied")
    feasible = [p for p in points if p.mu <= mu_budget]
    if not feasible:
        best = min(p.mu for p in points)
        raise InfeasibleBudgetError(
            f"no split meets expected-time budget {mu_budget!r}; minimum achievable is {best!r}",
            best_achievable=best,
        )
    return min(feasible, key=lambda p: (p.var, p.f))


def min_mu_given_variance(points: Sequence[FrontierPoint], var_budget: float) -> FrontierPoint:
    """Feasible point (var <= budget) of least expected time; ties go to smaller f."""
    if not points:
        raise ParameterError("no sweep points supplied")
    feasible = [p for p in points if p.var <= var_budget]
    if not feasible:
        best = min(p.var for p in points)
        raise InfeasibleBudgetError(
            f"no split meets variance budget {var_budget!r}; minimum achievable is {best!r}",
            best_achievable=best,
        )
    return min(feasible, key=lambda p: (p.mu, p.f))


def write_csv(points: Iterable[FrontierPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f", "mu", "var", "on_frontier"])
        for p in points:
            writer.writerow([f"{p.f:.17g}", f"{p.mu:.17g}", f"{p.var:.17g}",
                             "true" if p.on_frontier else "false"])


def write_json(points: Iterable[FrontierPoint], path) -> None:
    records = [{"f": p.f, "mu": p.mu, "var": p.var, "on_frontier": p.on_frontier}
               for p in points]
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
