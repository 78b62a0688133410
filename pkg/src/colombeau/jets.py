"""Exact higher derivatives of primitive smooth functions via truncated Taylor jets.

Each primitive knows how to produce the stack ``(f(x), f'(x), ..., f^(n)(x))``
at arbitrary points.  Derivatives are propagated with power-series recurrences
(reciprocal and exponential of a series), never with finite differences, so
the results are exact up to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Default ceiling on the jet order; callers with a legitimate need may
#: pass a higher ``max_order`` explicitly.
DEFAULT_MAX_ORDER = 8

# exp underflows to zero well before this; returning an exact zero jet is
# the correctly rounded result and keeps polynomial prefactors from
# manufacturing noise out of underflowed exponentials.
_EXP_CUTOFF = math.log(np.finfo(float).tiny) + 50.0

_poly = np.polynomial.polynomial


@dataclass(frozen=True)
class Jet:
    """Truncated derivative sequence (f(x), f'(x), ..., f^(n)(x)) at a point."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("a jet needs at least the order-0 coefficient")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError(f"non-finite jet coefficients: {self.coeffs}")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "Jet") -> "Jet":
        return jet_arith(self, other, "add")

    def __mul__(self, other: "Jet") -> "Jet":
        return jet_arith(self, other, "mul")


def jet_arith(a: Jet, b: Jet | None, op) -> Jet:
    """Combine jets of equal order: op is 'add', 'mul' or ('scalar', c).

    Multiplication follows the Leibniz rule
    ``c[k] = sum_j C(k, j) a[j] b[k - j]``.
    """
    if isinstance(op, tuple) and op[0] == "scalar":
        c = float(op[1])
        return Jet(tuple(c * x for x in a.coeffs))
    if b is None:
        raise ValueError(f"op {op!r} needs two jets")
    if a.order != b.order:
        raise ValueError(f"jet order mismatch: {a.order} vs {b.order}")
    if op == "add":
        return Jet(tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))
    if op == "mul":
        av = np.asarray(a.coeffs)
        bv = np.asarray(b.coeffs)
        out = [
            float(sum(math.comb(k, j) * av[j] * bv[k - j] for j in range(k + 1)))
            for k in range(a.order + 1)
        ]
        return Jet(tuple(out))
    raise ValueError(f"unknown jet op {op!r}")


def stack_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Leibniz product of derivative stacks of shape (n+1, ...)."""
    n = a.shape[0] - 1
    if b.shape[0] != n + 1:
        raise ValueError("stack order mismatch")
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for k in range(n + 1):
        for j in range(k + 1):
            out[k] += math.comb(k, j) * a[j] * b[k - j]
    return out


# ---------------------------------------------------------------------------
# primitives

class SmoothPrimitive:
    """A real function with evaluable derivatives of every order."""

    kind: str = "abstract"

    def deriv_stack(self, x: np.ndarray, n: int) -> np.ndarray:
        """Return ``(n+1, *x.shape)`` array of f, f', ..., f^(n) at ``x``."""
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.deriv_stack(np.asarray(x, dtype=float), 0)[0]


@dataclass(frozen=True)
class Polynomial(SmoothPrimitive):
    coeffs: tuple[float, ...]
    kind = "polynomial"

    def deriv_stack(self, x, n):
        x = np.asarray(x, dtype=float)
        out = np.zeros((n + 1,) + x.shape)
        c = np.asarray(self.coeffs, dtype=float)
        for k in range(n + 1):
            out[k] = _poly.polyval(x, c) if c.size else 0.0
            c = _poly.polyder(c) if c.size > 1 else np.zeros(0)
        return out


@dataclass(frozen=True)
class Exponential(SmoothPrimitive):
    kind = "exponential"

    def deriv_stack(self, x, n):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.exp(x), (n + 1,) + x.shape).copy()


@dataclass(frozen=True)
class Sine(SmoothPrimitive):
    kind = "sine"

    def deriv_stack(self, x, n):
        x = np.asarray(x, dtype=float)
        cycle = (np.sin(x), np.cos(x), -np.sin(x), -np.cos(x))
        out = np.zeros((n + 1,) + x.shape)
        for k in range(n + 1):
            out[k] = cycle[k % 4]
        return out


@lru_cache(maxsize=None)
def _tanh_deriv_polys(n: int) -> tuple[np.ndarray, ...]:
    # d^k/du^k tanh(u) = P_k(tanh u) with P_{k+1} = P_k' * (1 - t^2)
    polys = [np.array([0.0, 1.0])]
    for _ in range(n):
        polys.append(_poly.polymul(_poly.polyder(polys[-1]), np.array([1.0, 0.0, -1.0])))
    return tuple(polys)


@dataclass(frozen=True)
class TanhScaled(SmoothPrimitive):
    """tanh(k*x)."""

    k: float
    kind = "tanh_scaled"

    def deriv_stack(self, x, n):
        x = np.asarray(x, dtype=float)
        t = np.tanh(self.k * x)
        polys = _tanh_deriv_polys(n)
        out = np.zeros((n + 1,) + x.shape)
        for m in range(n + 1):
            out[m] = self.k**m * _poly.polyval(t, polys[m])
        return out


def _exp_series(e: np.ndarray) -> np.ndarray:
    """exp of a normalized Taylor series, coefficient rows stacked on axis 0."""
    w = np.zeros_like(e)
    w[0] = np.exp(e[0])
    for k in range(1, e.shape[0]):
        acc = np.zeros_like(w[0])
        for j in range(1, k + 1):
            acc += j * e[j] * w[k - j]
        w[k] = acc / k
    return w


@dataclass(frozen=True)
class Bump(SmoothPrimitive):
    """The even bump exp(1 + 1/((x/h)^2 - 1)) on (-h, h), zero elsewhere.

    Normalized to peak value 1 at the origin; all derivatives vanish at the
    support edges, so jets there and outside are identically zero.
    """

    halfwidth: float
    kind = "bump"

    @property
    def support(self) -> tuple[float, float]:
        return (-self.halfwidth, self.halfwidth)

    def deriv_stack(self, x, n):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros((n + 1, flat.shape[0]))
        h = self.halfwidth
        s = flat / h
        v0 = s * s - 1.0
        inside = np.abs(s) < 1.0
        e0 = 1.0 + 1.0 / np.where(inside, v0, -1.0)
        live = inside & (e0 >= _EXP_CUTOFF)
        if np.any(live):
            xl = flat[live]
            m = xl.shape[0]
            # normalized Taylor coefficients of v(t) = ((x+t)/h)^2 - 1 at t=0
            v = np.zeros((n + 1, m))
            v[0] = (xl / h) ** 2 - 1.0
            if n >= 1:
                v[1] = 2.0 * xl / h**2
            if n >= 2:
                v[2] = 1.0 / h**2
            # reciprocal series r = 1/v
            r = np.zeros_like(v)
            r[0] = 1.0 / v[0]
            for k in range(1, n + 1):
                acc = np.zeros(m)
                for j in range(1, k + 1):
                    acc += v[j] * r[k - j]
                r[k] = -r[0] * acc
            r[0] += 1.0  # exponent series of 1 + 1/v
            w = _exp_series(r)
            fact = 1.0
            for k in range(n + 1):
                if k:
                    fact *= k
                out[k][live] = fact * w[k]
        return out.reshape((n + 1,) + x.shape)


@dataclass(frozen=True)
class Gaussian(SmoothPrimitive):
    """exp(-x^2 / 2)."""

    kind = "gaussian"

    def deriv_stack(self, x, n):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        e = np.zeros((n + 1, flat.shape[0]))
        e[0] = -0.5 * flat * flat
        if n >= 1:
            e[1] = -flat
        if n >= 2:
            e[2] = -0.5
        w = _exp_series(e)
        fact = np.array([math.factorial(k) for k in range(n + 1)], dtype=float)
        return (fact[:, None] * w).reshape((n + 1,) + x.shape)


def eval_jet(
    f: SmoothPrimitive, x: float, n: int, max_order: int = DEFAULT_MAX_ORDER
) -> Jet:
    """Jet of a primitive at a point: coeffs[k] = f^(k)(x) for k = 0..n."""
    if n < 0:
        raise ValueError("jet order must be nonnegative")
    if n > max_order:
        raise ValueError(f"jet order {n} exceeds cap {max_order}")
    stack = f.deriv_stack(np.asarray(float(x)), n)
    return Jet(tuple(float(c) for c in stack))
