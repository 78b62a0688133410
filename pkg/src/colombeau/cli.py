"""Command-line surface: mollifiers, expression evaluation, order estimates,
classification, and figure data reproduction.

All tabular output uses 17-significant-digit decimal formatting (lossless
for doubles, so identical runs produce byte-identical files) and is written
to a temporary file renamed into place on success.

Exit codes: 0 success, 2 usage/parse, 3 construction, 4 evaluation, 5 I/O.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import EpsSchedule, classify, default_bases, estimate_order
from .exprlang import FunctionRegistry, ParseError, parse, to_dag
from .genfunc import EvaluationError, HeavisideBar, Product, RegularBar, evaluate_grid
from .jets import TanhScaled
from .mollifier import ConstructionError, construct_Aq, make_bump, scale
from .quadrature import QuadratureError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3
EXIT_EVALUATION = 4
EXIT_IO = 5

_SEPS = {"csv": ",", "tsv": "\t"}


@dataclass
class RunConfig:
    subcommand: str
    expr: str | None = None
    q: int = 1
    eps: float = 0.1
    eps_start: float = 0.2
    eps_ratio: float = 0.5
    eps_count: int = 9
    interval: tuple[float, float] = (-1.0, 1.0)
    grid: int = 401
    out: str | None = None
    outdir: str | None = None
    fmt: str = "csv"
    seed: int = 0  # reserved; no subcommand randomizes yet
    deriv: int = 0
    q_max: int = 3
    N_max: int = 6
    n_max: int = 2
    halfwidth: float = 1.0
    samples: int = 401
    rows_out: str | None = None

    def validate(self) -> None:
        if self.q < 0:
            raise ValueError("q must be nonnegative")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not (self.eps_start > 0 and 0 < self.eps_ratio < 1 and self.eps_count >= 4):
            raise ValueError("schedule needs start > 0, ratio in (0,1), count >= 4")
        if not self.interval[0] < self.interval[1]:
            raise ValueError("interval must satisfy A < B")
        if self.grid < 2:
            raise ValueError("grid must be at least 2")
        if self.deriv < 0 or self.n_max < 0 or self.N_max < 0 or self.q_max < 0:
            raise ValueError("orders must be nonnegative")
        if not self.halfwidth > 0:
            raise ValueError("halfwidth must be positive")
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if self.fmt not in _SEPS:
            raise ValueError(f"unknown output format {self.fmt!r}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_table(path: str, header: list[str], columns: list[np.ndarray], sep: str) -> None:
    """Write columns atomically: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    rows = zip(*columns)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(sep.join(header) + "\n")
            for row in rows:
                fh.write(sep.join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_mollifier(cfg: RunConfig) -> int:
    phi = construct_Aq(cfg.q, make_bump(cfg.halfwidth))
    a, b = phi.support
    xs = np.linspace(a, b, cfg.samples)
    stack = phi.deriv_stack(xs, 1)
    _write_table(cfg.out, ["x", "phi", "deriv1"], [xs, stack[0], stack[1]], _SEPS[cfg.fmt])
    lam = phi.aq_lambdas or ()
    print("lambda = (" + ", ".join(_fmt(v) for v in lam) + ")")
    for r, m in enumerate(phi.moment_cache):
        target = 1.0 if r == 0 else 0.0
        print(f"m[{r}] = {_fmt(m)} (|error| = {abs(m - target):.3e})")
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    dag = to_dag(parse(cfg.expr, FunctionRegistry.default()))
    phi = scale(construct_Aq(cfg.q, make_bump(cfg.halfwidth)), cfg.eps)
    ys = np.linspace(cfg.interval[0], cfg.interval[1], cfg.grid)
    values = evaluate_grid(dag, phi, ys)
    _write_table(cfg.out, ["y", "value"], [ys, values], _SEPS[cfg.fmt])
    return EXIT_OK


def cmd_order(cfg: RunConfig) -> int:
    dag = to_dag(parse(cfg.expr, FunctionRegistry.default()))
    phi = construct_Aq(cfg.q, make_bump(cfg.halfwidth))
    schedule = EpsSchedule.geometric(cfg.eps_start, cfg.eps_ratio, cfg.eps_count)
    est = estimate_order(dag, phi, cfg.interval, schedule, cfg.deriv, cfg.grid)
    eps = np.array([e for e, _ in est.points])
    sups = np.array([m for _, m in est.points])
    _write_table(cfg.out, ["epsilon", "sup_norm"], [eps, sups], _SEPS[cfg.fmt])
    if est.exact_zero:
        print("slope=exact-zero residual=0")
    else:
        print(f"slope={est.slope:.6f} residual={est.residual:.6f}")
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    dag = to_dag(parse(cfg.expr, FunctionRegistry.default()))
    report = classify(
        dag,
        default_bases(cfg.q_max, cfg.halfwidth),
        interval=cfg.interval,
        n_max=cfg.n_max,
        q_max=cfg.q_max,
        N_max=cfg.N_max,
        grid_points=cfg.grid,
        subject_id=cfg.expr,
    )
    _write_text(cfg.out, report.to_text())
    if cfg.rows_out:
        rows = report.csv_rows()
        cols = [
            np.array([r[0] for r in rows]),
            np.array([r[1] for r in rows]),
            np.array([r[2] for r in rows]),
        ]
        sep = _SEPS[cfg.fmt]
        directory = os.path.dirname(os.path.abspath(cfg.rows_out))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(sep.join(["epsilon", "sup_norm", "deriv_order", "phi_id", "subject_id"]) + "\n")
                for r in rows:
                    fh.write(sep.join([_fmt(r[0]), _fmt(r[1]), str(r[2]), r[3], r[4]]) + "\n")
            os.replace(tmp, cfg.rows_out)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    print(report.verdict)
    return EXIT_OK


def cmd_figures(cfg: RunConfig) -> int:
    outdir = cfg.outdir
    os.makedirs(outdir, exist_ok=True)
    sep = _SEPS[cfg.fmt]
    bump = make_bump(1.0)
    phi1 = construct_Aq(1, bump)
    phi3 = construct_Aq(3, bump)
    xs = np.linspace(-1.0, 1.0, 401)
    for name, phi in (("fig1_phi1.csv", phi1), ("fig1_phi3.csv", phi3)):
        stack = phi.deriv_stack(xs, 1)
        _write_table(os.path.join(outdir, name), ["x", "phi", "deriv1"],
                     [xs, stack[0], stack[1]], sep)

    ys = np.linspace(-1.0, 1.0, 401)
    theta = np.where(ys > 0, 1.0, np.where(ys < 0, 0.0, 0.5))
    hbar = HeavisideBar()
    thetabar = evaluate_grid(hbar, scale(phi1, 0.1), ys)
    _write_table(
        os.path.join(outdir, "fig2_heaviside.csv"),
        ["y", "theta", "thetabar", "thetabar_sq"],
        [ys, theta, thetabar, thetabar**2],
        sep,
    )

    f = TanhScaled(10.0)
    fbar = RegularBar(f)
    fvals = f(ys)
    smoothed = {}
    for q, phi in ((1, phi1), (3, phi3)):
        for eps in (0.2, 0.1):
            smoothed[(q, eps)] = evaluate_grid(fbar, scale(phi, eps), ys)
    _write_table(
        os.path.join(outdir, "fig3_smoothed.csv"),
        ["y", "f", "fbar_q1_eps0.2", "fbar_q1_eps0.1", "fbar_q3_eps0.2", "fbar_q3_eps0.1"],
        [ys, fvals, smoothed[(1, 0.2)], smoothed[(1, 0.1)], smoothed[(3, 0.2)], smoothed[(3, 0.1)]],
        sep,
    )
    errors = {}
    for q, phi in ((1, phi1), (3, phi3)):
        for eps in (0.02, 0.01):
            errors[(q, eps)] = evaluate_grid(fbar, scale(phi, eps), ys) - fvals
    _write_table(
        os.path.join(outdir, "fig3_error.csv"),
        ["y", "err_q1_eps0.02", "err_q1_eps0.01", "err_q3_eps0.02", "err_q3_eps0.01"],
        [ys, errors[(1, 0.02)], errors[(1, 0.01)], errors[(3, 0.02)], errors[(3, 0.01)]],
        sep,
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="colombeau",
        description="Numerical experiments in the algebra of generalized functions.",
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    mol = sub.add_parser("mollifier", help="construct a class-q mollifier and sample it")
    mol.add_argument("--q", type=int, required=True)
    mol.add_argument("--halfwidth", type=float, default=1.0)
    mol.add_argument("--samples", type=int, default=401)
    mol.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluate an expression on a y-grid")
    ev.add_argument("--expr", required=True)
    ev.add_argument("--q", type=int, required=True)
    ev.add_argument("--eps", type=float, required=True)
    ev.add_argument("--interval", type=float, nargs=2, default=(-1.0, 1.0), metavar=("A", "B"))
    ev.add_argument("--grid", type=int, default=401)
    ev.add_argument("--out", required=True)

    ord_ = sub.add_parser("order", help="estimate the scaling order of an expression")
    ord_.add_argument("--expr", required=True)
    ord_.add_argument("--q", type=int, required=True)
    ord_.add_argument("--eps-start", type=float, default=0.2)
    ord_.add_argument("--eps-ratio", type=float, default=0.5)
    ord_.add_argument("--eps-count", type=int, default=9)
    ord_.add_argument("--interval", type=float, nargs=2, default=(-1.0, 1.0), metavar=("A", "B"))
    ord_.add_argument("--deriv", type=int, default=0)
    ord_.add_argument("--grid", type=int, default=401)
    ord_.add_argument("--out", required=True)

    cl = sub.add_parser("classify", help="moderate/null/neither classification")
    cl.add_argument("--expr", required=True)
    cl.add_argument("--q-max", type=int, default=3)
    cl.add_argument("--N-max", type=int, default=6)
    cl.add_argument("--n-max", type=int, default=2)
    cl.add_argument("--interval", type=float, nargs=2, default=(-1.0, 1.0), metavar=("A", "B"))
    cl.add_argument("--grid", type=int, default=401)
    cl.add_argument("--rows", dest="rows_out", default=None,
                    help="also write the (epsilon, sup_norm, ...) rows to this path")
    cl.add_argument("--out", required=True)

    fig = sub.add_parser("figures", help="emit the standard figure CSVs")
    fig.add_argument("--outdir", required=True)

    for s in (mol, ev, ord_, cl, fig):
        s.add_argument("--format", dest="fmt", choices=("csv", "tsv"), default="csv")
    return p


def _config_from(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=ns.subcommand)
    for name in vars(cfg):
        if hasattr(ns, name):
            value = getattr(ns, name)
            if name == "interval":
                value = (float(value[0]), float(value[1]))
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


_DISPATCH = {
    "mollifier": cmd_mollifier,
    "eval": cmd_eval,
    "order": cmd_order,
    "classify": cmd_classify,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        cfg = _config_from(ns)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _DISPATCH[cfg.subcommand](cfg)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (EvaluationError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVALUATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
