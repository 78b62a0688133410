"""Empirical order-of-growth machinery under test-function scaling.

Sup-norms over an interval are measured on a uniform grid, refined around
the argmax with a golden-section pass, and additionally sampled inside the
leaf-derived feature windows (the reflected support of the scaled test
function) where delta-like subjects concentrate all their variation; a
fixed grid alone goes blind there once the support shrinks below the grid
spacing.

Order estimates fit the log-log slope of the sup-norms against the scale
parameter; classification combines boundedness witnesses (moderateness)
with per-class decay estimates (nullity).  Verdicts are evidence at the
tested resolution, never proofs: the schedules and mollifier bases used
are recorded in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .genfunc import Node, Scalar, Sum, describe, evaluate_derivative, evaluate_grid
from .mollifier import TestFunction, construct_Aq, make_bump, scale

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

#: slope fits use this many of the smallest schedule entries
FIT_POINTS = 5

#: max-abs log-space deviation above which a fit is flagged as outside
#: the asymptotic regime
RESIDUAL_FLAG = 0.15

_WINDOW_POINTS = 257


class ConfigurationError(Exception):
    """The supplied mollifier bases cannot support the requested check."""


@dataclass(frozen=True)
class EpsSchedule:
    """Strictly decreasing positive scale factors driving the limit."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = self.values
        if len(v) == 0 or any(x <= 0 for x in v):
            raise ValueError("schedule values must be positive")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("schedule values must be strictly decreasing")

    @classmethod
    def default(cls) -> "EpsSchedule":
        return cls.geometric(0.2, 0.5, 9)

    @classmethod
    def geometric(cls, start: float, ratio: float, count: int) -> "EpsSchedule":
        if not 0 < ratio < 1:
            raise ValueError("ratio must be in (0, 1)")
        if count < 1:
            raise ValueError("count must be positive")
        return cls(tuple(start * ratio**k for k in range(count)))


@dataclass(frozen=True)
class OrderEstimate:
    """Fitted log-log slope of sup-norms against the scale parameter.

    ``exact_zero`` marks the short-circuit taken when the sup-norms vanish
    identically (stronger evidence than any fitted decay rate).
    """

    slope: float
    intercept: float
    residual: float
    points: tuple[tuple[float, float], ...]
    exact_zero: bool = False

    @property
    def in_asymptotic_regime(self) -> bool:
        return self.exact_zero or self.residual <= RESIDUAL_FLAG

    def at_least(self, q: float) -> bool:
        """Does the evidence support decay of order >= q?"""
        return self.exact_zero or self.slope >= q


@dataclass(frozen=True)
class BoundWitness:
    """Concrete (C, eta) pair witnessing boundedness of eps^-q * sup-norm."""

    q: int
    C: float
    eta: float
    interval: tuple[float, float]
    satisfied: bool


@dataclass(frozen=True)
class ClassificationReport:
    subject: str
    interval: tuple[float, float]
    schedule: EpsSchedule
    base_labels: tuple[str, ...]
    n_max: int
    q_max: int
    N_max: int
    moderate_N: int | None
    moderate_evidence: dict
    null_evidence: dict
    verdict: str
    rows: tuple = field(repr=False, default=())

    def summary(self) -> str:
        extra = " (equal to 0 in G(R) at tested resolution)" if self.verdict == "null" else ""
        return f"{self.subject}: {self.verdict}{extra}"

    def to_text(self) -> str:
        lines = [
            f"subject: {self.subject}",
            f"verdict: {self.verdict} [at tested resolution]",
            f"interval: [{self.interval[0]:g}, {self.interval[1]:g}]",
            "schedule: " + ", ".join(f"{e:g}" for e in self.schedule.values),
            "bases: " + ", ".join(self.base_labels),
            f"n_max={self.n_max} q_max={self.q_max} N_max={self.N_max}",
        ]
        if self.moderate_N is not None:
            lines.append(f"moderate: N={self.moderate_N}")
            for n in sorted(self.moderate_evidence):
                N_n, _ = self.moderate_evidence[n]
                lines.append(f"  deriv order n={n}: bounded by eps^-{N_n}")
        else:
            lines.append("moderate: no bound found up to N_max")
        if self.null_evidence:
            for (n, q) in sorted(self.null_evidence):
                p, ests = self.null_evidence[(n, q)]
                if p is None:
                    lines.append(f"  null check n={n} q={q}: FAILED")
                else:
                    desc = ", ".join(
                        "exact-zero" if e.exact_zero else f"slope={e.slope:.3f}"
                        for e in ests
                    )
                    lines.append(f"  null check n={n} q={q}: class p={p} ({desc})")
        return "\n".join(lines) + "\n"

    def csv_rows(self) -> list[tuple]:
        """(epsilon, sup_norm, deriv_order, phi_id, subject_id) rows."""
        return list(self.rows)


# ---------------------------------------------------------------------------
# sup-norm measurement

def sup_norm(
    A: Node,
    phi: TestFunction,
    eps: float,
    interval: tuple[float, float],
    n: int = 0,
    grid_points: int = 401,
) -> float:
    """Sup of |d^n/dy^n A[phi_eps](y)| over the interval.

    Uniform grid plus feature-window subgrids, then one golden-section
    refinement pass around the best grid point.
    """
    if grid_points < 51:
        raise ValueError("grid_points must be at least 51")
    a, b = interval
    phie = scale(phi, eps)
    best_val = 0.0
    best_bracket = None
    grids = [np.linspace(a, b, grid_points)]
    for (wa, wb) in A.feature_windows(phie):
        lo, hi = max(a, wa), min(b, wb)
        if lo < hi:
            grids.append(np.linspace(lo, hi, _WINDOW_POINTS))
    for ys in grids:
        vals = np.abs(evaluate_grid(A, phie, ys, n))
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_bracket = (ys[max(i - 1, 0)], ys[min(i + 1, len(ys) - 1)])
    if best_bracket is None or best_bracket[0] == best_bracket[1]:
        return best_val

    def g(y: float) -> float:
        return abs(evaluate_derivative(A, phie, y, n))

    return max(best_val, _golden_max(g, *best_bracket))


def _golden_max(g, lo: float, hi: float, iters: int = 80) -> float:
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = g(c), g(d)
    best = max(fc, fd)
    for _ in range(iters):
        if hi - lo <= tol:
            break
        if fc < fd:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = g(d)
            best = max(best, fd)
        else:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = g(c)
            best = max(best, fc)
    return best


def _sup_series(A, phi, schedule, interval, n, grid_points) -> np.ndarray:
    return np.array(
        [sup_norm(A, phi, eps, interval, n, grid_points) for eps in schedule.values]
    )


# ---------------------------------------------------------------------------
# order estimation and boundedness

def _order_from_sups(schedule: EpsSchedule, sups: np.ndarray) -> OrderEstimate:
    points = tuple(zip(schedule.values, (float(m) for m in sups)))
    tail = points[-FIT_POINTS:]
    nz = [(e, m) for (e, m) in tail if m > 0.0]
    if len(nz) < 3:
        return OrderEstimate(math.inf, math.nan, 0.0, points, exact_zero=True)
    le = np.log([e for e, _ in nz])
    lm = np.log([m for _, m in nz])
    slope, intercept = np.polyfit(le, lm, 1)
    residual = float(np.max(np.abs(slope * le + intercept - lm)))
    return OrderEstimate(float(slope), float(intercept), residual, points)


def estimate_order(
    A: Node,
    phi: TestFunction,
    interval: tuple[float, float],
    schedule: EpsSchedule | None = None,
    n: int = 0,
    grid_points: int = 401,
) -> OrderEstimate:
    """Least-squares slope of log sup-norm vs log eps (last 5 schedule points).

    Scales at which the sup-norm is exactly zero are dropped; fewer than 3
    nonzero points short-circuit to the exact-zero estimate.
    """
    schedule = schedule or EpsSchedule.default()
    if len(schedule.values) < 4:
        raise ValueError("schedule needs at least 4 points")
    sups = _sup_series(A, phi, schedule, interval, n, grid_points)
    return _order_from_sups(schedule, sups)


def _bound_from_sups(
    schedule: EpsSchedule,
    sups: np.ndarray,
    q: int,
    interval: tuple[float, float],
    C_margin: float,
) -> BoundWitness:
    eps = np.asarray(schedule.values)
    scaled = eps ** (-q) * sups
    eta = float(eps[0])
    C = C_margin * float(np.max(scaled)) if np.any(scaled > 0) else C_margin
    est = _order_from_sups(schedule, sups)
    no_growth = est.exact_zero or (est.slope - q >= -0.1)
    satisfied = bool(no_growth and scaled[-1] <= C)
    return BoundWitness(q=q, C=C, eta=eta, interval=tuple(interval), satisfied=satisfied)


def check_bound(
    A: Node,
    phi: TestFunction,
    q: int,
    interval: tuple[float, float],
    schedule: EpsSchedule | None = None,
    n: int = 0,
    C_margin: float = 2.0,
    grid_points: int = 401,
) -> BoundWitness:
    """Witness for eps^-q * sup-norm staying bounded along the schedule."""
    if C_margin < 1:
        raise ValueError("C_margin must be at least 1")
    schedule = schedule or EpsSchedule.default()
    sups = _sup_series(A, phi, schedule, interval, n, grid_points)
    return _bound_from_sups(schedule, sups, q, interval, C_margin)


# ---------------------------------------------------------------------------
# classification

def default_bases(q_max: int, halfwidth: float = 1.0) -> list[TestFunction]:
    """One constructed class-p mollifier for each p = 0..q_max."""
    bump = make_bump(halfwidth)
    return [construct_Aq(p, bump) for p in range(q_max + 1)]


def classify(
    A: Node,
    bases: list[TestFunction] | None = None,
    interval: tuple[float, float] = (-1.0, 1.0),
    schedule: EpsSchedule | None = None,
    n_max: int = 2,
    q_max: int = 3,
    N_max: int = 6,
    C_margin: float = 2.0,
    grid_points: int = 401,
    subject_id: str | None = None,
) -> ClassificationReport:
    """Empirically classify A as moderate, null, or neither.

    Moderate: for every derivative order n <= n_max some N <= N_max bounds
    eps^N * sup-norm for all unit-mass bases.  Null: for every n <= n_max
    and q <= q_max some class p <= q_max makes every class-p base decay
    with order >= q (or exactly zero).  A null verdict requires the
    moderate evidence as well.
    """
    schedule = schedule or EpsSchedule.default()
    bases = bases if bases is not None else default_bases(q_max)
    subject = subject_id or describe(A)
    for p in range(q_max + 1):
        if not any((b.claimed_class or 0) >= p for b in bases):
            raise ConfigurationError(f"no basis of class >= {p} supplied (q_max={q_max})")

    rows: list[tuple] = []
    ests: dict[tuple[int, int], OrderEstimate] = {}
    sups_cache: dict[tuple[int, int], np.ndarray] = {}

    def series(i: int, n: int) -> np.ndarray:
        if (i, n) not in sups_cache:
            s = _sup_series(A, bases[i], schedule, interval, n, grid_points)
            sups_cache[(i, n)] = s
            for eps, m in zip(schedule.values, s):
                rows.append((eps, float(m), n, bases[i].label, subject))
            ests[(i, n)] = _order_from_sups(schedule, s)
        return sups_cache[(i, n)]

    # moderate: smallest N covering each derivative order for all bases
    moderate_evidence: dict[int, tuple[int, list[BoundWitness]]] = {}
    moderate_ok = True
    for n in range(n_max + 1):
        found = None
        for N in range(N_max + 1):
            witnesses = [
                _bound_from_sups(schedule, series(i, n), -N, interval, C_margin)
                for i in range(len(bases))
            ]
            if all(w.satisfied for w in witnesses):
                found = (N, witnesses)
                break
        if found is None:
            moderate_ok = False
            break
        moderate_evidence[n] = found
    moderate_N = max(N for N, _ in moderate_evidence.values()) if moderate_ok else None

    # null: for each q, search a class p (largest first) whose bases all decay
    null_evidence: dict[tuple[int, int], tuple[int | None, list[OrderEstimate]]] = {}
    null_ok = True
    for q in range(1, q_max + 1):
        for n in range(n_max + 1):
            chosen = None
            for p in range(q_max, -1, -1):
                idxs = [i for i, b in enumerate(bases) if (b.claimed_class or 0) >= p]
                cand = []
                for i in idxs:
                    series(i, n)
                    cand.append(ests[(i, n)])
                if cand and all(e.at_least(q) for e in cand):
                    chosen = (p, cand)
                    break
            if chosen is None:
                null_evidence[(n, q)] = (None, [])
                null_ok = False
                break
            null_evidence[(n, q)] = chosen
        if not null_ok:
            break

    if null_ok and moderate_ok:
        verdict = "null"
    elif moderate_ok:
        verdict = "moderate"
    else:
        verdict = "neither-at-tested-resolution"
    return ClassificationReport(
        subject=subject,
        interval=tuple(interval),
        schedule=schedule,
        base_labels=tuple(b.label for b in bases),
        n_max=n_max,
        q_max=q_max,
        N_max=N_max,
        moderate_N=moderate_N,
        moderate_evidence=moderate_evidence,
        null_evidence=null_evidence,
        verdict=verdict,
        rows=tuple(rows),
    )


def equivalent(A: Node, B: Node, **kwargs) -> ClassificationReport:
    """Classify A - B; a null verdict means A = B in the quotient algebra
    at the tested resolution."""
    sid = kwargs.pop("subject_id", None) or f"({describe(A)}) - ({describe(B)})"
    return classify(Sum(A, Scalar(-1.0, B)), subject_id=sid, **kwargs)
