"""Generalized functions as an expression DAG over test-function functionals.

Leaves embed the Dirac delta (reflection of the test function), the
Heaviside step (tail integral of the test function), smooth functions by
convolution (``RegularBar``) or directly (``Tilde``), plus the classic null
example ``phi -> phi(1)``.  Combinators are pointwise sum, product, scalar
multiple, and derivative in the evaluation variable.

Derivatives are computed structurally: sums and scalars are linear, products
follow Leibniz, and at the leaves the derivative moves onto the test
function (e.g. ``d/dy int f(x) phi(x - y) dx = -int f(x) phi'(x - y) dx``),
so no finite differencing happens anywhere inside evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import SmoothPrimitive, stack_mul
from .mollifier import ScaledTestFunction, TestFunction
from .quadrature import QuadratureError, gl_panel, integrate_batch

#: absolute tolerance for the convolution quadratures
QUAD_TOL = 1e-12

Phi = TestFunction | ScaledTestFunction


class EvaluationError(Exception):
    """Evaluation failed; the message carries the node path."""


class Node:
    """Base class for generalized-function DAG nodes."""

    def _stack(self, phi: Phi, ys: np.ndarray, n: int, path: str) -> np.ndarray:
        """Return shape (n+1, len(ys)): derivatives 0..n of y -> A[phi](y)."""
        raise NotImplementedError

    def feature_windows(self, phi: Phi) -> list[tuple[float, float]]:
        """y-intervals where the evaluation varies on the scale of supp(phi)."""
        return []

    # small algebra sugar so DAGs read like formulas
    def __add__(self, other: "Node") -> "Node":
        return Sum(self, other)

    def __sub__(self, other: "Node") -> "Node":
        return Sum(self, Scalar(-1.0, other))

    def __mul__(self, other):
        if isinstance(other, Node):
            return Product(self, other)
        return Scalar(float(other), self)

    __rmul__ = __mul__

    def deriv(self, n: int = 1) -> "Node":
        return Derivative(n, self)


@dataclass(frozen=True)
class DeltaBar(Node):
    """Embedded Dirac delta: A[phi](y) = phi(-y)."""

    def _stack(self, phi, ys, n, path):
        pstack = phi.deriv_stack(-ys, n)
        for k in range(1, n + 1, 2):
            pstack[k] = -pstack[k]
        return pstack

    def feature_windows(self, phi):
        a, b = phi.support
        return [(-b, -a)]


@dataclass(frozen=True)
class HeavisideBar(Node):
    """Embedded unit step: A[phi](y) = integral of phi over [-y, infinity).

    The integral is truncated to the support of phi; derivatives reduce
    analytically to point evaluations of phi at -y.
    """

    def _stack(self, phi, ys, n, path):
        out = np.zeros((n + 1, ys.shape[0]))
        try:
            out[0] = _tail_integrals(phi, -ys)
        except QuadratureError as exc:
            raise EvaluationError(f"{path}: {exc}") from exc
        if n >= 1:
            pstack = phi.deriv_stack(-ys, n - 1)
            sign = 1.0
            for k in range(1, n + 1):
                out[k] = sign * pstack[k - 1]
                sign = -sign
        return out

    def feature_windows(self, phi):
        a, b = phi.support
        return [(-b, -a)]


@dataclass(frozen=True)
class RegularBar(Node):
    """Convolution embedding of a smooth f: A[phi](y) = int f(x) phi(x-y) dx."""

    f: SmoothPrimitive

    def _stack(self, phi, ys, n, path):
        a, b = phi.support
        signs = np.array([(-1.0) ** k for k in range(n + 1)])

        def fn(u):
            phist = phi.deriv_stack(u, n)  # (n+1, m)
            fvals = self.f(ys[:, None] + u[None, :])  # (n_y, m)
            return signs[:, None, None] * fvals[None, :, :] * phist[:, None, :]

        try:
            return integrate_batch(fn, (a, b), QUAD_TOL)
        except QuadratureError as exc:
            raise EvaluationError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class Tilde(Node):
    """Direct embedding of a smooth f: A[phi](y) = f(y), independent of phi."""

    f: SmoothPrimitive

    def _stack(self, phi, ys, n, path):
        return self.f.deriv_stack(ys, n)


@dataclass(frozen=True)
class NullExample(Node):
    """A[phi](y) = phi(1): nonzero in general, yet null under scaling."""

    def _stack(self, phi, ys, n, path):
        out = np.zeros((n + 1, ys.shape[0]))
        out[0] = phi.value(np.asarray(1.0))
        return out


@dataclass(frozen=True)
class Sum(Node):
    left: Node
    right: Node

    def _stack(self, phi, ys, n, path):
        return self.left._stack(phi, ys, n, path + ".Sum.left") + self.right._stack(
            phi, ys, n, path + ".Sum.right"
        )

    def feature_windows(self, phi):
        return self.left.feature_windows(phi) + self.right.feature_windows(phi)


@dataclass(frozen=True)
class Product(Node):
    left: Node
    right: Node

    def _stack(self, phi, ys, n, path):
        ls = self.left._stack(phi, ys, n, path + ".Product.left")
        rs = self.right._stack(phi, ys, n, path + ".Product.right")
        return stack_mul(ls, rs)

    def feature_windows(self, phi):
        return self.left.feature_windows(phi) + self.right.feature_windows(phi)


@dataclass(frozen=True)
class Scalar(Node):
    c: float
    child: Node

    def _stack(self, phi, ys, n, path):
        return self.c * self.child._stack(phi, ys, n, path + ".Scalar")

    def feature_windows(self, phi):
        return self.child.feature_windows(phi)


@dataclass(frozen=True)
class Derivative(Node):
    n: int
    child: Node

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("derivative order must be nonnegative")

    def _stack(self, phi, ys, n, path):
        full = self.child._stack(phi, ys, n + self.n, path + f".D^{self.n}")
        return full[self.n :]

    def feature_windows(self, phi):
        return self.child.feature_windows(phi)


# ---------------------------------------------------------------------------
# evaluation entry points

def evaluate(A: Node, phi: Phi, y: float) -> float:
    """A[phi](y)."""
    return float(A._stack(phi, np.asarray([float(y)]), 0, describe(A))[0, 0])


def evaluate_derivative(A: Node, phi: Phi, y: float, n: int) -> float:
    """n-th derivative of y -> A[phi](y) at y."""
    if n < 0:
        raise ValueError("derivative order must be nonnegative")
    return float(A._stack(phi, np.asarray([float(y)]), n, describe(A))[n, 0])


def evaluate_grid(A: Node, phi: Phi, ys, n: int = 0) -> np.ndarray:
    """Elementwise evaluate_derivative over a grid of y values."""
    ys = np.asarray(ys, dtype=float)
    return A._stack(phi, ys, n, describe(A))[n].copy()


def describe(A: Node) -> str:
    """Compact structural description of a DAG (used in reports and errors)."""
    if isinstance(A, DeltaBar):
        return "delta"
    if isinstance(A, HeavisideBar):
        return "heaviside"
    if isinstance(A, NullExample):
        return "nullex"
    if isinstance(A, RegularBar):
        return f"bar({_prim_name(A.f)})"
    if isinstance(A, Tilde):
        return f"tilde({_prim_name(A.f)})"
    if isinstance(A, Sum):
        return f"({describe(A.left)} + {describe(A.right)})"
    if isinstance(A, Product):
        return f"({describe(A.left)} * {describe(A.right)})"
    if isinstance(A, Scalar):
        return f"{A.c:g}*{describe(A.child)}"
    if isinstance(A, Derivative):
        return f"D^{A.n}({describe(A.child)})"
    return type(A).__name__


def _prim_name(f: SmoothPrimitive) -> str:
    params = [
        f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
        for k, v in getattr(f, "__dict__", {}).items()
    ]
    return f.kind + (f"({', '.join(params)})" if params else "")


def _tail_integrals(phi: Phi, ts: np.ndarray) -> np.ndarray:
    """G(t) = integral of phi over [max(t, A), B] for each t, sharing panels.

    All query points are inserted as panel cuts into a uniform partition of
    the support, each segment gets one Gauss-Legendre panel (segments are at
    most 1/64 of the support wide, where the rule is exact to roundoff for
    these integrands), and suffix sums give every tail at once.
    """
    a, b = phi.support
    tcl = np.clip(ts, a, b)
    cuts = np.union1d(np.linspace(a, b, 65), tcl)
    seg = np.zeros(cuts.shape[0] - 1)
    for i in range(cuts.shape[0] - 1):
        if cuts[i + 1] > cuts[i]:
            seg[i], _ = gl_panel(phi.value, cuts[i], cuts[i + 1])
    suffix = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    idx = np.searchsorted(cuts, tcl)
    return suffix[idx]
