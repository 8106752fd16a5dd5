"""Command line front end.

::

    logdiv divergence --input pairs.csv [--output DIR]
    logdiv simulate   --base 1,1.5 --direction 1,-0.6 --count 100 --output DIR
    logdiv pca        --input DIR/data.csv --k 1 --baseline aitchison --output DIR
    logdiv foliate    --input DIR/data.csv --subspace DIR/fit.json --output DIR

Options may also come from ``--config FILE`` (``key = value`` lines, ``#``
comments); flags override file values. Exit codes: 0 success, 2 malformed
input, 3 domain or parameter error, 4 convergence failure, 5 other library
error.
"""

from __future__ import annotations

import argparse
import importlib
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import subspace_angles

from . import __version__
from ._io import (
    RunConfig,
    numeric_block,
    parse_matrix_columns,
    parse_vector,
    read_json,
    read_table,
    row_ids,
    write_csv,
    write_json,
)
from .dirichlet import data_to_simplex, log_potential, sample_perturbation, simplex_to_data
from .divergence import (
    Frame,
    Point,
    Potential,
    check_alpha,
    conjugate_potential,
    l_alpha_divergence,
    legendre_forward,
)
from .errors import (
    ConvergenceError,
    DomainError,
    InputError,
    LogDivError,
    ParameterError,
)
from .geometry import pythagorean_gap
from .pca import PcaConfig, aitchison_pca_baseline, fit, objective, point_divergence
from .projection import AffineSubspace, ProjectionConfig, leaf_assign, leaf_ids
from .svg import render_simplex

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4
EXIT_OTHER = 5

GEODESIC_SAMPLES = 5


@dataclass
class Instance:
    psi: Potential
    phi: Potential
    n: Optional[int]

    @property
    def d(self) -> int:
        return self.psi.dim


def resolve_instance(spec: str, alpha: float) -> Instance:
    """``dirichlet:n`` or ``custom:module:attr`` (attr is a data-space potential or a factory)."""
    kind, _, rest = spec.partition(":")
    if kind == "dirichlet":
        try:
            n = int(rest)
        except ValueError:
            raise InputError(f"bad instance {spec!r}; expected dirichlet:n") from None
        return Instance(log_potential(n, f"dirichlet psi (n={n})"), log_potential(n, f"dirichlet phi (n={n})"), n)
    if kind == "custom":
        mod, _, attr = rest.partition(":")
        try:
            obj = getattr(importlib.import_module(mod), attr)
        except (ImportError, AttributeError) as exc:
            raise InputError(f"cannot load custom potential {rest!r}: {exc}") from exc
        psi = obj if isinstance(obj, Potential) else obj()
        return Instance(psi, conjugate_potential(psi, alpha), None)
    raise InputError(f"unknown instance {spec!r}")


def _columns(prefix, m):
    return [f"{prefix}{i}" for i in range(1, m + 1)]


def _width(inst, cfg):
    if cfg.format == "simplex":
        if inst.n is None:
            raise InputError("simplex format needs a dirichlet instance")
        return inst.n
    if cfg.format == "data":
        return inst.d
    raise InputError(f"unknown format {cfg.format!r}")


def _to_data(inst, cfg, X, path, rows):
    """Rows in file format -> data-space coordinates, with line-numbered domain errors."""
    if cfg.format == "data":
        for r, x in enumerate(X):
            if not inst.psi.in_domain(x):
                raise DomainError(f"{path}:{rows[r][0]}: point outside the data space")
        return X
    Y = np.empty((len(X), inst.d))
    for r, x in enumerate(X):
        try:
            Y[r] = simplex_to_data(x)
        except DomainError as exc:
            raise DomainError(f"{path}:{rows[r][0]}: {exc}") from None
    return Y


def _from_data(inst, cfg, Y):
    return data_to_simplex(Y) if cfg.format == "simplex" else np.asarray(Y)


def load_points(inst, cfg):
    header, rows = read_table(cfg.input)
    prefix = "p" if cfg.format == "simplex" else "y"
    X = numeric_block(cfg.input, header, rows, _columns(prefix, _width(inst, cfg)))
    return row_ids(header, rows), X, _to_data(inst, cfg, X, cfg.input, rows)


def load_subspace(cfg, d) -> AffineSubspace:
    """Subspace in parameter coordinates from a fit/meta JSON or base + directions."""
    if cfg.subspace:
        spec = read_json(cfg.subspace).get("subspace")
        if not spec:
            raise InputError(f"{cfg.subspace}: no 'subspace' entry")
        base, basis = np.array(spec["base"], dtype=float), np.array(spec["basis"], dtype=float)
    elif cfg.base and cfg.directions:
        base, basis = parse_vector(cfg.base, "base"), parse_matrix_columns(cfg.directions)
    else:
        raise InputError("a subspace is required: --subspace FILE or --base and --direction")
    if base.size != d or basis.reshape(d, -1).shape[0] != d:
        raise InputError(f"subspace dimension mismatch (expected {d})")
    return AffineSubspace.spanning(Frame.PRIMAL, base, basis.reshape(d, -1))


def _subspace_json(sub):
    return {"base": sub.base, "basis": sub.basis, "k": sub.k}


def _provenance(cfg):
    return {"config_sha256": cfg.digest(), "seed": cfg.seed, "version": __version__, "command": cfg.command}


def _out(cfg, name):
    os.makedirs(cfg.output, exist_ok=True)
    return os.path.join(cfg.output, name)


def _echo_config(cfg):
    if cfg.output:
        with open(_out(cfg, f"{cfg.command}.config.txt"), "w") as fh:
            fh.write(cfg.to_text())


# divergence -----------------------------------------------------------------


def cmd_divergence(cfg: RunConfig) -> int:
    alpha = check_alpha(cfg.alpha)
    inst = resolve_instance(cfg.instance, alpha)
    header, rows = read_table(cfg.input)
    m = _width(inst, cfg)
    P = numeric_block(cfg.input, header, rows, _columns("p", m))
    Q = numeric_block(cfg.input, header, rows, _columns("q", m))
    triple = all(c in header for c in _columns("r", m))
    R = numeric_block(cfg.input, header, rows, _columns("r", m)) if triple else None
    ids = row_ids(header, rows)
    out_rows, failed = [], 0
    for r in range(len(rows)):
        try:
            yp, yq = (_to_data(inst, cfg, X[r : r + 1], cfg.input, rows[r : r + 1])[0] for X in (P, Q))
            fwd = l_alpha_divergence(inst.psi, alpha, yq, yp)
            bwd = l_alpha_divergence(inst.psi, alpha, yp, yq)
            gap = orth = None
            if triple:
                yr = _to_data(inst, cfg, R[r : r + 1], cfg.input, rows[r : r + 1])[0]
                gap, orth = pythagorean_gap(inst.psi, alpha, yp, yq, yr)
            out_rows.append([ids[r], fwd, bwd, gap, orth, ""])
        except LogDivError as exc:
            failed += 1
            out_rows.append([ids[r], None, None, None, None, f"{type(exc).__name__}: {exc}"])
    cols = ["id", "D_forward", "D_backward", "pythagorean_residual", "orthogonality", "error"]
    if cfg.output:
        write_csv(_out(cfg, "divergence.csv"), cols, out_rows)
        _echo_config(cfg)
    else:
        sys.stdout.write(write_csv(None, cols, out_rows))
    return EXIT_DOMAIN if failed else EXIT_OK


# foliation ------------------------------------------------------------------


def foliate_data(inst, alpha, sub, Y, pconf):
    """Leaf assignments of data points (dual frame of ``phi``) along ``sub``."""
    points = [Point(y, Frame.DUAL) for y in Y]
    return leaf_assign(inst.phi, alpha, sub, points, pconf)


def _geodesic_traces(inst, assignments):
    traces = []
    s = np.linspace(0.0, 1.0, GEODESIC_SAMPLES)[:, None]
    for i, a in enumerate(assignments):
        if not a.ok:
            continue
        y = a.point.coords
        traces.append((i, data_to_simplex(y + s * (a.projection_eta - y))))
    return traces


def _subspace_curve(inst, alpha, sub, ts, n=400):
    if sub.k != 1:
        return None
    lo, hi = (float(ts.min()), float(ts.max())) if ts.size else (-1.0, 1.0)
    pad = max(0.25 * (hi - lo), 0.25)
    pts = []
    for t in np.linspace(lo - pad, hi + pad, n):
        th = sub.point([t])
        if inst.phi.in_domain(th):
            try:
                pts.append(legendre_forward(inst.phi, alpha, th))
            except LogDivError:
                continue
    return data_to_simplex(np.array(pts)) if pts else None


def _annotate(inst, alpha, assignments):
    for a in assignments:
        a.projection_eta = legendre_forward(inst.phi, alpha, a.leaf_base.coords) if a.ok else None
    return assignments


def _figure(inst, alpha, sub, data_simplex, assignments, baseline=None, title=""):
    ok = [a for a in assignments if a.ok]
    ts = np.array([sub.coordinates(a.leaf_base.coords)[0] for a in ok]) if sub.k == 1 else np.zeros(0)
    return render_simplex(
        data=data_simplex,
        geodesics=_geodesic_traces(inst, assignments),
        subspace=_subspace_curve(inst, alpha, sub, ts),
        baseline=baseline,
        title=title,
    )


def cmd_foliate(cfg: RunConfig) -> int:
    alpha = check_alpha(cfg.alpha)
    inst = resolve_instance(cfg.instance, alpha)
    ids, X, Y = load_points(inst, cfg)
    sub = load_subspace(cfg, inst.d)
    pconf = ProjectionConfig(tol=cfg.tol_inner, seed=cfg.seed)
    assignments = _annotate(inst, alpha, foliate_data(inst, alpha, sub, Y, pconf))
    labels = leaf_ids(assignments)
    m = _width(inst, cfg)
    prefix = "p" if cfg.format == "simplex" else "y"
    cols = (
        ["id"]
        + _columns(prefix, m)
        + _columns("proj_" + prefix, m)
        + _columns("theta", inst.d)
        + ["leaf_id", "divergence", "orthogonality_residual", "membership_residual", "geodesic_length", "error"]
    )
    rows = []
    for i, a in enumerate(assignments):
        if a.ok:
            proj = _from_data(inst, cfg, a.projection_eta[None, :])[0]
            length = float(np.linalg.norm(a.projection_eta - a.point.coords))
            rows.append(
                [ids[i], *X[i], *proj, *a.leaf_base.coords, labels[i], a.projection.divergence,
                 a.projection.orthogonality_residual, a.membership_residual, length, ""]
            )
        else:
            rows.append([ids[i], *X[i], *([None] * (m + inst.d)), -1, None, None, None, None, a.error])
    write_csv(_out(cfg, "foliation.csv"), cols, rows)
    if cfg.svg and inst.n == 3:
        with open(_out(cfg, "foliation.svg"), "w") as fh:
            fh.write(_figure(inst, alpha, sub, data_to_simplex(Y), assignments, title="dual foliation"))
    write_json(
        _out(cfg, "foliation.json"),
        {"subspace": _subspace_json(sub), "provenance": _provenance(cfg),
         "failures": sum(not a.ok for a in assignments)},
    )
    _echo_config(cfg)
    return EXIT_OK


# pca ------------------------------------------------------------------------


def cmd_pca(cfg: RunConfig) -> int:
    alpha = check_alpha(cfg.alpha)
    inst = resolve_instance(cfg.instance, alpha)
    ids, X, Y = load_points(inst, cfg)
    pc = PcaConfig(
        k=cfg.k, alpha=alpha, max_outer_iters=cfg.max_outer_iters, inner_tol=cfg.tol_inner,
        outer_tol=cfg.tol_outer, n_restarts=cfg.restarts, seed=cfg.seed,
    )
    status = EXIT_OK
    try:
        result = fit(inst.psi, Y, pc)
    except ConvergenceError as exc:
        if exc.result is None:
            raise
        result, status = exc.result, EXIT_CONVERGENCE
        print(f"logdiv: {exc}", file=sys.stderr)

    trace = result.objective_trace
    summary = {
        "subspace": _subspace_json(result.subspace),
        "objective": result.objective,
        "objective_trace": trace,
        "monotone": bool(np.all(np.diff(trace) <= 0.0)),
        "converged": result.converged,
        "max_orthogonality_residual": result.max_residual,
        "restart": result.restart,
        "diagnostics": result.diagnostics,
        "alpha": alpha,
        "k": cfg.k,
        "provenance": _provenance(cfg),
    }
    if cfg.truth:
        meta = read_json(cfg.truth)
        truth = AffineSubspace.spanning(
            Frame.PRIMAL, np.array(meta["subspace"]["base"]), np.array(meta["subspace"]["basis"])
        )
        summary["recovery"] = {
            "principal_angle_deg": float(np.degrees(np.max(subspace_angles(truth.basis, result.subspace.basis)))),
            "objective_at_truth": objective(inst.psi, alpha, truth, Y, pc.projection_config()),
        }

    m = _width(inst, cfg)
    prefix = "p" if cfg.format == "simplex" else "y"
    proj = _from_data(inst, cfg, result.eta)
    cols = ["id"] + _columns(prefix, m) + _columns("proj_" + prefix, m) + _columns("theta", inst.d) + _columns("t", cfg.k) + ["divergence", "orthogonality_residual"]
    rows = [
        [ids[i], *X[i], *proj[i], *result.theta[i], *result.coordinates[i],
         point_divergence(inst.psi, alpha, Y[i], result.theta[i]), result.residuals[i]]
        for i in range(len(Y))
    ]
    write_csv(_out(cfg, "points.csv"), cols, rows)
    write_csv(_out(cfg, "trace.csv"), ["iteration", "objective"], list(enumerate(trace)))

    baseline_curve = None
    if cfg.baseline == "aitchison":
        if cfg.format != "simplex":
            raise InputError("the Aitchison baseline needs simplex-format input")
        base = aitchison_pca_baseline(X, min(cfg.k, inst.d))
        baseline_curve = base.curve()
        write_csv(_out(cfg, "baseline.csv"), _columns("p", m), baseline_curve.tolist())
        summary["baseline"] = {
            "ilr_mean": base.mean, "components": base.components, "explained_variance": base.explained_variance,
        }
    elif cfg.baseline not in ("", "none"):
        raise InputError(f"unknown baseline {cfg.baseline!r}")
    write_json(_out(cfg, "fit.json"), summary)

    if cfg.svg and inst.n == 3:
        pconf = ProjectionConfig(tol=cfg.tol_inner, seed=cfg.seed)
        assignments = _annotate(inst, alpha, foliate_data(inst, alpha, result.subspace, Y, pconf))
        with open(_out(cfg, "pca.svg"), "w") as fh:
            fh.write(_figure(inst, alpha, result.subspace, X, assignments, baseline_curve, title="L-alpha PCA"))
    _echo_config(cfg)
    return status


# simulate -------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig) -> int:
    alpha = check_alpha(cfg.alpha)
    inst = resolve_instance(cfg.instance, alpha)
    if inst.n is None:
        raise ParameterError("simulate supports dirichlet instances only")
    if not (cfg.base and cfg.directions):
        raise InputError("simulate needs --base and --direction")
    sub = AffineSubspace.spanning(Frame.PRIMAL, parse_vector(cfg.base, "base"), parse_matrix_columns(cfg.directions))
    if sub.d != inst.d:
        raise InputError(f"subspace dimension mismatch (expected {inst.d})")
    lo, hi = parse_vector(cfg.t_range, "t range")
    if cfg.count < 0:
        raise ParameterError("count must be nonnegative")
    rng = np.random.default_rng(cfg.seed)
    T = rng.uniform(lo, hi, size=(cfg.count, sub.k))
    clean = np.empty((cfg.count, inst.n))
    for i, t in enumerate(T):
        th = sub.point(t)
        if not inst.phi.in_domain(th):
            raise ParameterError(f"sampled parameter {th.tolist()} (t={t.tolist()}) is outside the parameter space")
        clean[i] = data_to_simplex(legendre_forward(inst.phi, alpha, th))
    noisy = np.vstack([sample_perturbation(p, cfg.concentration, 1, rng) for p in clean]) if cfg.count else clean
    cols = ["id"] + _columns("p", inst.n)
    write_csv(_out(cfg, "data.csv"), cols, [[i, *row] for i, row in enumerate(noisy)])
    write_json(
        _out(cfg, "data.meta.json"),
        {
            "instance": cfg.instance, "alpha": alpha, "subspace": _subspace_json(sub), "t": T,
            "clean": clean, "concentration": cfg.concentration, "count": cfg.count,
            "provenance": _provenance(cfg),
        },
    )
    _echo_config(cfg)
    return EXIT_OK


COMMANDS = {"divergence": cmd_divergence, "foliate": cmd_foliate, "pca": cmd_pca, "simulate": cmd_simulate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--instance", help="dirichlet:n or custom:module:attr")
    common.add_argument("--alpha", type=float)
    common.add_argument("--k", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--tol-inner", dest="tol_inner", type=float)
    common.add_argument("--tol-outer", dest="tol_outer", type=float)
    common.add_argument("--max-outer-iters", dest="max_outer_iters", type=int)
    common.add_argument("--baseline", choices=["none", "aitchison"])
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--format", choices=["simplex", "data"])
    common.add_argument("--svg", dest="svg", action="store_true")
    common.add_argument("--no-svg", dest="svg", action="store_false")
    common.add_argument("--subspace", help="fit.json or data.meta.json holding a subspace")
    common.add_argument("--base", help="comma-separated base point in parameter coordinates")
    common.add_argument("--direction", action="append", help="comma-separated direction (repeatable)")
    common.add_argument("--truth", help="data.meta.json for recovery comparison")
    common.add_argument("--count", type=int)
    common.add_argument("--concentration", type=float)
    common.add_argument("--t-range", dest="t_range")

    parser = argparse.ArgumentParser(prog="logdiv", description="Logarithmic divergence geometry and PCA.")
    parser.add_argument("--version", action="version", version=f"logdiv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__name__.replace("cmd_", ""))
    return parser


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    cfg = RunConfig(command=command)
    path = ns.pop("config", None)
    if path:
        try:
            with open(path) as fh:
                cfg = RunConfig.from_text(fh.read(), base=cfg)
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        cfg.command = command
    if "direction" in ns:
        ns["directions"] = ";".join(ns.pop("direction"))
    for key, value in ns.items():
        cfg.set(key, value, where=f"--{key}")
    return cfg


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        if cfg.command != "divergence" and not cfg.output:
            raise InputError("--output directory is required")
        if cfg.command != "simulate" and not cfg.input:
            raise InputError("--input is required")
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"logdiv: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, ParameterError) as exc:
        print(f"logdiv: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"logdiv: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except LogDivError as exc:
        print(f"logdiv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
