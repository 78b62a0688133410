"""Test functions: moment-vanishing mollifier construction, translation, scaling.

A test function is a finite combination ``sum_k w_k psi^(k)(x - shift)`` of
derivatives of a single even bump ``psi``.  The class-q members (unit mass,
moments 1..q vanishing) are built by solving the triangular moment system of
the derivative combination; scaling by epsilon concentrates them toward a
delta function while preserving the unit mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .jets import Bump, Jet
from .quadrature import Integrand, integrate

#: quadrature tolerance used for every moment integral
MOMENT_TOL = 1e-12

#: the triangular solve uses exact integer factorials; beyond this order
#: they are no longer exactly representable in double precision
MAX_CLASS_ORDER = 12

_M0_TOL = 1e-10
_MR_TOL = 1e-8


class ConstructionError(Exception):
    """A mollifier could not be built or failed its moment validation."""


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported function with evaluable derivatives.

    ``weights[k]`` multiplies the k-th derivative of the base bump; the
    whole function is translated by ``shift``.
    """

    base: Bump
    weights: tuple[float, ...]
    shift: float = 0.0
    claimed_class: int | None = None
    label: str = "phi"
    moment_cache: tuple[float, ...] = ()
    aq_lambdas: tuple[float, ...] | None = None

    @property
    def support(self) -> tuple[float, float]:
        h = self.base.halfwidth
        return (self.shift - h, self.shift + h)

    @property
    def is_even(self) -> bool:
        return self.shift == 0.0 and all(
            w == 0.0 for w in self.weights[1::2]
        )

    def deriv_stack(self, x, n: int) -> np.ndarray:
        """(n+1, *x.shape) array of phi, phi', ..., phi^(n) at x."""
        x = np.asarray(x, dtype=float)
        base_stack = self.base.deriv_stack(x - self.shift, n + len(self.weights) - 1)
        out = np.zeros((n + 1,) + x.shape)
        for k in range(n + 1):
            for j, w in enumerate(self.weights):
                if w != 0.0:
                    out[k] += w * base_stack[k + j]
        return out

    def value(self, x) -> np.ndarray:
        return self.deriv_stack(x, 0)[0]

    def jet(self, x: float, n: int) -> Jet:
        stack = self.deriv_stack(np.asarray(float(x)), n)
        return Jet(tuple(float(c) for c in stack))


@dataclass(frozen=True)
class ScaledTestFunction:
    """phi_eps(x) = (1/eps) * phi(x/eps); support shrinks to eps*[a, b]."""

    parent: TestFunction
    epsilon: float

    @property
    def support(self) -> tuple[float, float]:
        a, b = self.parent.support
        return (self.epsilon * a, self.epsilon * b)

    @property
    def label(self) -> str:
        return f"{self.parent.label}@eps={self.epsilon:g}"

    def deriv_stack(self, x, n: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        stack = self.parent.deriv_stack(x / self.epsilon, n)
        for k in range(n + 1):
            stack[k] *= self.epsilon ** (-(k + 1))
        return stack

    def value(self, x) -> np.ndarray:
        return self.deriv_stack(x, 0)[0]

    def jet(self, x: float, n: int) -> Jet:
        stack = self.deriv_stack(np.asarray(float(x)), n)
        return Jet(tuple(float(c) for c in stack))


def make_bump(halfwidth: float = 1.0) -> TestFunction:
    """The even bump c * exp(1/((x/h)^2 - 1)), normalized to unit mass.

    Even symmetry makes the first moment vanish, so the result is in the
    class q = 1.
    """
    if not halfwidth > 0:
        raise ValueError("halfwidth must be positive")
    base = Bump(halfwidth)
    raw_mass = integrate(
        Integrand(base, base.support), base.support, MOMENT_TOL
    ).value
    tf = TestFunction(
        base=base,
        weights=(1.0 / raw_mass,),
        claimed_class=1,
        label=f"bump(h={halfwidth:g})",
    )
    return replace(tf, moment_cache=tuple(moments(tf, 1)))


def moments(phi: TestFunction | ScaledTestFunction, r_max: int) -> np.ndarray:
    """Moments m_r = integral of z^r phi(z) dz for r = 0..r_max."""
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    a, b = phi.support
    out = np.zeros(r_max + 1)
    for r in range(r_max + 1):
        f = Integrand(lambda z, r=r: z**r * phi.value(z), (a, b))
        out[r] = integrate(f, (a, b), MOMENT_TOL).value
    return out


def construct_Aq(q: int, base: TestFunction | None = None) -> TestFunction:
    """Build phi in the class q as a derivative combination of ``base``.

    Solves the (q+1) x (q+1) lower-triangular system for lambda in
    ``phi = lambda_0 base + lambda_1 base' + ... + lambda_q base^(q)`` so
    that m_0(phi) = 1 and m_r(phi) = 0 for 1 <= r <= q, using
    ``int z^r base^(k) dz = (-1)^k r!/(r-k)! M_{r-k}(base)`` for r >= k.
    """
    if q < 0:
        raise ValueError("class order q must be nonnegative")
    if q > MAX_CLASS_ORDER:
        raise ConstructionError(f"class order {q} exceeds cap {MAX_CLASS_ORDER}")
    if base is None:
        base = make_bump(1.0)
    M = moments(base, q)
    if abs(M[0]) < 1e-13:
        raise ConstructionError("base has vanishing mass; moment system is singular")
    if base.is_even:
        # odd moments of an even base vanish identically; zeroing the
        # quadrature noise keeps the odd-index lambdas exactly zero
        M[1::2] = 0.0
    lam = np.zeros(q + 1)
    for r in range(q + 1):
        acc = 1.0 if r == 0 else 0.0
        for k in range(r):
            acc -= lam[k] * (-1.0) ** k * math.perm(r, k) * M[r - k]
        lam[r] = acc / ((-1.0) ** r * math.factorial(r) * M[0])
    lam += 0.0  # normalize -0.0 to +0.0

    # compose with the base's own derivative weights
    w = np.zeros(q + len(base.weights))
    for k, lk in enumerate(lam):
        for j, bj in enumerate(base.weights):
            w[k + j] += lk * bj
    out = TestFunction(
        base=base.base,
        weights=tuple(w),
        shift=base.shift,
        claimed_class=q,
        label=f"A{q}[{base.label}]",
        aq_lambdas=tuple(lam),
    )
    mom = moments(out, q)
    if abs(mom[0] - 1.0) > _M0_TOL or np.any(np.abs(mom[1:]) > _MR_TOL):
        raise ConstructionError(
            f"moment validation failed for q={q}: moments {mom.tolist()}"
        )
    return replace(out, moment_cache=tuple(mom))


def translate(phi: TestFunction, y: float) -> TestFunction:
    """phi(x - y): the support shifts by y.

    Unit mass survives translation but higher moments do not, so the
    claimed class drops to 0.
    """
    if y == 0.0:
        return phi
    claimed = 0 if phi.claimed_class is not None else None
    return replace(
        phi,
        shift=phi.shift + y,
        claimed_class=claimed,
        label=f"{phi.label}+{y:g}",
        moment_cache=(),
    )


def scale(phi: TestFunction | ScaledTestFunction, eps: float) -> ScaledTestFunction:
    """phi_eps(x) = (1/eps) phi(x/eps); narrower and taller, same mass."""
    if not eps > 0:
        raise ValueError(f"scale factor must be positive, got {eps}")
    if isinstance(phi, ScaledTestFunction):
        return ScaledTestFunction(phi.parent, phi.epsilon * eps)
    return ScaledTestFunction(phi, eps)
