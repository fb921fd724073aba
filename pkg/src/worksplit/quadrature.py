"""Adaptive Simpson quadrature with batched integrand evaluation.

The integrators in this package share one engine: a classic adaptive
Simpson rule with Richardson extrapolation, where every refinement level
evaluates all pending midpoints in a single vectorized call.  Integrands
may be vector-valued, in which case all components share the refinement
and the error criterion is the componentwise maximum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, QuadratureError


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the numerical integrals.

    abs_tol is the absolute error budget for one integral, max_depth the
    number of interval-halving levels allowed past the initial panels, and
    tail_sigmas fixes the upper integration limit of the completion-time
    integrals (scaled mean plus tail_sigmas scaled standard deviations).
    """

    abs_tol: float = 1e-8
    max_depth: int = 30
    tail_sigmas: float = 10.0

    def __post_init__(self):
        if not (np.isfinite(self.abs_tol) and self.abs_tol > 0.0):
            raise ParameterError(f"abs_tol must be finite and positive, got {self.abs_tol!r}")
        if self.max_depth < 1:
            raise ParameterError(f"max_depth must be at least 1, got {self.max_depth!r}")
        if not (np.isfinite(self.tail_sigmas) and self.tail_sigmas > 0.0):
            raise ParameterError(f"tail_sigmas must be finite and positive, got {self.tail_sigmas!r}")


def integrate_adaptive(fn, lo: float, hi: float, *, abs_tol: float = 1e-8,
                       max_depth: int = 30, initial_panels: int = 8):
    """Integrate fn over [lo, hi] by adaptive Simpson refinement.

    fn maps a 1-D array of abscissae to values of shape (m,) for a scalar
    integrand or (m, k) for k simultaneous integrands.  Returns
    (value, error_bound) with shape () or (k,).

    Each interval gets an error budget proportional to its width; intervals
    that fail their budget are bisected until max_depth, after which they
    are accepted with their Richardson error estimate added to the global
    bound.  If the accumulated bound exceeds abs_tol a QuadratureError is
    raised carrying the achieved estimate and bound.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        raise ParameterError(f"integration bounds must be finite with hi > lo, got [{lo!r}, {hi!r}]")
    if initial_panels < 1:
        raise ParameterError("initial_panels must be at least 1")

    span = hi - lo
    xs = np.linspace(lo, hi, 2 * initial_panels + 1)
    vals = np.asarray(fn(xs), dtype=float)
    scalar = vals.ndim == 1
    if scalar:
        vals = vals[:, None]
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand returned a non-finite value on the initial grid")
    k = vals.shape[1]

    # Active intervals: left edge x0, width w, node values f0/fm/f1, Simpson
    # estimate s, refinement depth.
    x0 = xs[0:-1:2]
    w = np.full(initial_panels, span / initial_panels)
    f0 = vals[0:-1:2]
    fm = vals[1::2]
    f1 = vals[2::2]
    s = (w / 6.0)[:, None] * (f0 + 4.0 * fm + f1)
    depth = np.zeros(initial_panels, dtype=int)

    total = np.zeros(k)
    bound = np.zeros(k)

    while x0.size:
        lm = x0 + 0.25 * w
        rm = x0 + 0.75 * w
        mid_vals = np.asarray(fn(np.concatenate([lm, rm])), dtype=float)
        if mid_vals.ndim == 1:
            mid_vals = mid_vals[:, None]
        if not np.all(np.isfinite(mid_vals)):
            raise QuadratureError("integrand returned a non-finite value during refinement")
        flm = mid_vals[: x0.size]
        frm = mid_vals[x0.size:]

        w12 = (w / 12.0)[:, None]
        s_left = w12 * (f0 + 4.0 * flm + fm)
        s_right = w12 * (fm + 4.0 * frm + f1)
        s2 = s_left + s_right
        err = (s2 - s) / 15.0

        budget = abs_tol * (w / span)
        done = (np.max(np.abs(err), axis=1) <= budget) | (depth >= max_depth)

        if np.any(done):
            total += np.sum(s2[done] + err[done], axis=0)
            bound += np.sum(np.abs(err[done]), axis=0)

        keep = ~done
        if not np.any(keep):
            break
        half = 0.5 * w[keep]
        x0 = np.concatenate([x0[keep], x0[keep] + half])
        w = np.concatenate([half, half])
        new_f0 = np.vstack([f0[keep], fm[keep]])
        new_fm = np.vstack([flm[keep], frm[keep]])
        new_f1 = np.vstack([fm[keep], f1[keep]])
        s = np.vstack([s_left[keep], s_right[keep]])
        f0, fm, f1 = new_f0, new_fm, new_f1
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])

    if np.any(bound > abs_tol):
        estimate = float(total[0]) if scalar else total
        err_bound = float(bound[0]) if scalar else bound
        raise QuadratureError(
            f"quadrature error bound {np.max(bound):.3e} exceeds abs_tol {abs_tol:.3e}",
            estimate=estimate, error_bound=err_bound,
        )
    if scalar:
        return float(total[0]), float(bound[0])
    return total, bound
