"""Synthetic observation streams and CSV trace files.

Draws completion times from the scaled Gaussian unit model under a share
policy (fixed, uniform random, or cyclic), and round-trips traces through a
two-column CSV format, header "f,t".  Negative draws are kept: the
estimator targets the untruncated model, and resampling or truncating would
bias recovery experiments.  A count of negative draws is logged instead.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TraceFormatError
from .model import UnitParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceRecord:
    """One observation: the share a unit was given and the time it took."""

    f: float
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.f) and 0.0 < self.f <= 1.0):
            raise ParameterError(f"share must lie in (0, 1], got {self.f!r}")
        if not np.isfinite(self.t):
            raise ParameterError(f"completion time must be finite, got {self.t!r}")


@dataclass(frozen=True)
class SplitPolicy:
    """How workload shares are chosen for successive trials."""

    kind: str
    params: tuple[float, ...]

    @classmethod
    def fixed(cls, f: float) -> "SplitPolicy":
        if not (np.isfinite(f) and 0.0 < f <= 1.0):
            raise ParameterError(f"fixed share must lie in (0, 1], got {f!r}")
        return cls("fixed", (float(f),))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "SplitPolicy":
        if not (np.isfinite(lo) and np.isfinite(hi) and 0.0 < lo <= hi <= 1.0):
            raise ParameterError(f"uniform bounds must satisfy 0 < lo <= hi <= 1, got [{lo!r}, {hi!r}]")
        return cls("uniform", (float(lo), float(hi)))

    @classmethod
    def cyclic(cls, values) -> "SplitPolicy":
        values = tuple(float(v) for v in values)
        if not values:
            raise ParameterError("cyclic policy needs at least one share")
        if not all(np.isfinite(v) and 0.0 < v <= 1.0 for v in values):
            raise ParameterError("every cyclic share must lie in (0, 1]")
        return cls("cyclic", values)

    def shares(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ParameterError(f"need at least one trial, got n={n!r}")
        if self.kind == "fixed":
            return np.full(n, self.params[0])
        if self.kind == "uniform":
            lo, hi = self.params
            return rng.uniform(lo, hi, size=n)
        if self.kind == "cyclic":
            reps = -(-n // len(self.params))
            return np.tile(np.asarray(self.params), reps)[:n]
        raise ParameterError(f"unknown policy kind {self.kind!r}")


def sample_completion(share: float, u: UnitParams, rng: np.random.Generator) -> float:
    """One Gaussian completion-time draw at the given workload share."""
    if not (np.isfinite(share) and 0.0 < share <= 1.0):
        raise ParameterError(f"share must lie in (0, 1], got {share!r}")
    return float(rng.normal(u.scaled_mean(share), u.scaled_sigma(share)))


def generate_trace(n: int, policy: SplitPolicy, u: UnitParams,
                   rng: np.random.Generator) -> list[TraceRecord]:
    """n observations with shares from the policy; deterministic under a seed."""
    if n < 1:
        raise ParameterError(f"need at least one observation, got n={n!r}")
    shares = policy.shares(n, rng)
    times = (shares ** u.alpha) * u.mu + (shares ** u.beta) * u.sigma * rng.standard_normal(n)
    negatives = int(np.sum(times < 0.0))
    if negatives:
        log.warning("generated %d negative completion time(s) out of %d draws", negatives, n)
    return [TraceRecord(float(f), float(t)) for f, t in zip(shares, times)]


def save_trace(records, path) -> None:
    """Write records as CSV with header f,t at full float64 precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f", "t"])
        for r in records:
            writer.writerow([f"{r.f:.17g}", f"{r.t:.17g}"])


def load_trace(path) -> list[TraceRecord]:
    """Read a CSV trace; malformed rows raise with their line number."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("missing header row 'f,t'", line=1) from None
        if [c.strip() for c in header] != ["f", "t"]:
            raise TraceFormatError(f"expected header 'f,t', got {','.join(header)!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise TraceFormatError(f"expected 2 columns, got {len(row)}", line=lineno)
            try:
                f, t = float(row[0]), float(row[1])
            except ValueError:
                raise TraceFormatError(f"non-numeric row {row!r}", line=lineno) from None
            if not (math.isfinite(f) and 0.0 < f <= 1.0):
                raise TraceFormatError(f"share {row[0]} outside (0, 1]", line=lineno)
            if not math.isfinite(t):
                raise TraceFormatError(f"non-finite completion time {row[1]}", line=lineno)
            records.append(TraceRecord(f, t))
    return records
