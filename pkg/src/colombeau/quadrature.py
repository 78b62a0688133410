"""Adaptive composite Gauss-Legendre quadrature for smooth, compactly supported integrands.

The integrands in this package (bump functions, their derivatives, and
convolutions against them) are smooth everywhere but develop steep layers
near the edges of their support, so the panel subdivision is dyadic: a
panel is accepted when the difference between its one-panel and two-panel
Gauss-Legendre values drops below the panel's share of the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# 16-node Gauss-Legendre rule; exact for polynomials of degree <= 31 on a panel.
NODES_PER_PANEL = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(NODES_PER_PANEL)

#: Hard ceiling on the number of processed panels before giving up.
MAX_PANELS = 2**20

_EPS = np.finfo(float).eps


class QuadratureError(Exception):
    """Base class for quadrature failures."""


class IntegrandEvaluationError(QuadratureError):
    """The integrand produced a non-finite value inside its support."""

    def __init__(self, abscissa: float):
        self.abscissa = abscissa
        super().__init__(f"integrand is not finite at x = {abscissa!r}")


class ConvergenceError(QuadratureError):
    """The panel budget was exhausted before reaching the tolerance."""

    def __init__(self, best: "QuadResult"):
        self.best = best
        super().__init__(
            f"subdivision limit exceeded ({best.panels} panels); "
            f"best estimate {best.value!r} +/- {best.error_estimate:.3e}"
        )


@dataclass(frozen=True)
class Integrand:
    """A real integrand that is identically zero outside ``support``.

    ``fn`` must accept a 1-d numpy array of abscissae and return values of
    the same shape.  Values are clamped to exactly zero outside the support
    before they are used, which keeps underflow noise at bump edges out of
    the panel sums.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        a, b = self.support
        inside = (x >= a) & (x <= b)
        vals = np.where(inside, self.fn(x), 0.0)
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(np.atleast_1d(vals)))
            idx = bad[0][-1]
            raise IntegrandEvaluationError(float(np.atleast_1d(x)[idx]))
        return vals


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    panels: int


def gl_panel(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    """Single 16-node Gauss-Legendre panel over [a, b] (no subdivision)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(fn(mid + half * _GL_NODES), dtype=float)
    return half * (vals @ _GL_WEIGHTS), np.max(np.abs(vals), axis=-1)


def _adaptive(fn, a: float, b: float, tol: float, max_panels: int):
    """Shared adaptive core.

    ``fn`` may return a vector per abscissa (shape ``(..., m)`` for ``m``
    nodes); every component is then integrated over the same panels and the
    acceptance test applies to all components at once.  Returns
    ``(value, error_estimate, panels)``.
    """
    width = b - a
    coarse, scale0 = gl_panel(fn, a, b)
    stack = [(a, b, coarse)]
    total = np.zeros_like(coarse)
    err_total = 0.0
    panels = 0
    while stack:
        lo, hi, coarse = stack.pop()
        mid = 0.5 * (lo + hi)
        left, lscale = gl_panel(fn, lo, mid)
        right, rscale = gl_panel(fn, mid, hi)
        fine = left + right
        err = np.abs(coarse - fine)
        panels += 1
        tol_local = tol * (hi - lo) / width
        # Roundoff floor: once the two-level difference is at the level of
        # rounding in the panel sums, further subdivision cannot help.
        floor = 64.0 * _EPS * (hi - lo) * np.maximum(lscale, rscale)
        if panels >= max_panels:
            partial = total + fine + sum(c for (_, _, c) in stack)
            best = QuadResult(
                float(np.max(partial)) if np.ndim(partial) else float(partial),
                float(np.max(err)),
                panels,
            )
            raise ConvergenceError(best)
        if np.all(err <= np.maximum(tol_local, floor)):
            total = total + fine
            err_total += float(np.max(err))
        else:
            stack.append((mid, hi, right))
            stack.append((lo, mid, left))
    return total, err_total, panels


def integrate(
    f: Integrand,
    interval: tuple[float, float],
    tol: float = 1e-12,
    max_panels: int = MAX_PANELS,
) -> QuadResult:
    """Integrate ``f`` over ``interval`` to absolute tolerance ``tol``.

    The integration window is clipped to the integrand's support (the
    clipped-away part contributes exactly zero).  Deterministic for fixed
    inputs.
    """
    a, b = interval
    if not a <= b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo = max(a, f.support[0])
    hi = min(b, f.support[1])
    if lo >= hi:
        return QuadResult(0.0, 0.0, 0)
    value, err, panels = _adaptive(f, lo, hi, tol, max_panels)
    return QuadResult(float(value), err, panels)


def integrate_batch(
    fn: Callable[[np.ndarray], np.ndarray],
    interval: tuple[float, float],
    tol: float = 1e-12,
    max_panels: int = MAX_PANELS,
):
    """Integrate a family of integrands sharing the same panels.

    ``fn(x)`` maps ``m`` abscissae to an array of shape ``(..., m)``; the
    result has shape ``(...,)``.  Used internally to evaluate convolution
    embeddings over whole y-grids in one adaptive pass.
    """
    a, b = interval
    if not a < b:
        return np.zeros(np.shape(fn(np.array([0.5 * (a + b)])))[:-1])
    value, _, _ = _adaptive(fn, a, b, tol, max_panels)
    return value
