"""Command-line interface.

Usage::

    qecregimes exact --L 8 --L 16 --p-grid 0.05:0.45:0.01
    qecregimes simulate --geometry planar --L 5 --p 0.103 --shots 10000 --seed 1
    qecregimes gapdist --geometry planar --L 9 --p 0.103 --shots 10000
    qecregimes fit --model compare --input shots.csv
    qecregimes duality --L 16 --p-grid 0.05:0.28:0.01
    qecregimes pathcount --L 16 --p-grid 0.001:0.1:0.001
    qecregimes capillary --L 32 --p-grid 0.05:0.28:0.01
    qecregimes collapse --L 8 --L 16 --L 32 --p-grid 0.27:0.32:0.0005

Exit codes: 0 success, 2 usage error, 3 domain error, 4 I/O or schema error,
5 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from qecregimes import __version__
from qecregimes import analysis, regimes
from qecregimes.errors import DomainError, NonConvergenceError, SchemaError
from qecregimes.exact import P_C, duality_residual, kw_dual, pfail_exact
from qecregimes.io import parse_grid, read_table, require_columns, write_json, write_table
from qecregimes.sim.decoder import DEFAULT_NODE_BUDGET
from qecregimes.sim.geometry import build_geometry
from qecregimes.sim.oracles import exact_failure_polynomial
from qecregimes.sim.runner import default_threads, run_shots

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO, EXIT_NONCONV = 0, 2, 3, 4, 5

MODEL_ALIASES = {
    "erf2": "erf_quadratic",
    "erf1": "erf_linear",
    "poly": "poly_simple",
    "polyL": "poly_L",
}
FIT_MODELS = ("erf_quadratic", "erf_linear", "poly_simple", "poly_L", "compare", "g_collapse",
              "surface_tension")

# Keys that never influence results and are left out of the metadata echo,
# so that output files are byte-identical across worker counts and paths.
_NON_SEMANTIC = ("threads", "out", "config")

DEFAULTS = {
    "geometry": "planar",
    "L": None,
    "p": None,
    "p_grid": None,
    "shots": 10000,
    "seed": 12345,
    "threads": None,
    "out": None,
    "format": "csv",
    "model": None,
    "epsilon": 0.0025,
    "wmax": None,
    "node_budget": DEFAULT_NODE_BUDGET,
    "input": None,
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags")
    common.add_argument("--geometry", choices=("torus", "planar"))
    common.add_argument("--L", type=int, action="append", help="lattice size (repeatable)")
    common.add_argument("--p", type=float, help="single error rate")
    common.add_argument("--p-grid", dest="p_grid", help="start:stop:step, inclusive")
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="worker processes (results do not depend on it)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--model", help="fit family, 'compare', 'g_collapse' or 'surface_tension'; "
                        "for pathcount 'nps' or 'enumerate'")
    common.add_argument("--epsilon", type=float, help="collapse spread tolerance")
    common.add_argument("--wmax", type=int, help="maximum error weight for exhaustive counts")
    common.add_argument("--node-budget", dest="node_budget", type=int)
    common.add_argument("--input", help="input table for fit")

    ap = argparse.ArgumentParser(prog="qecregimes", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("exact", "exact post-selected failure curves"),
        ("simulate", "Monte-Carlo failure rates"),
        ("gapdist", "domain-wall energy cost histograms"),
        ("fit", "fit regime or scaling models to a table"),
        ("duality", "Kramers-Wannier residuals"),
        ("pathcount", "path-counting estimates with validity boundaries"),
        ("capillary", "capillary-wave estimates with validity boundaries"),
        ("collapse", "data-collapse window of exact curves"),
    ):
        sub.add_parser(name, parents=[common], help=help_)
    return ap


def resolve_config(argv=None) -> dict:
    """Merge defaults, an optional JSON config and explicit flags."""
    ns = _parser().parse_args(argv)
    cfg = dict(DEFAULTS)
    if ns.config:
        try:
            loaded = json.loads(Path(ns.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config {ns.config} is not valid JSON") from exc
        unknown = set(loaded) - set(DEFAULTS) - {"command"}
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k: v for k, v in loaded.items() if k != "command"})
    for key in DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = ns.command
    if isinstance(cfg["L"], int):
        cfg["L"] = [cfg["L"]]
    if cfg["model"] in MODEL_ALIASES:
        cfg["model"] = MODEL_ALIASES[cfg["model"]]
    if cfg["shots"] is not None and cfg["shots"] < 1:
        raise DomainError("shots must be >= 1")
    return cfg


class UsageError(Exception):
    """Malformed or missing command-line input."""


def _grid(cfg) -> list[float]:
    if cfg["p_grid"]:
        try:
            return parse_grid(cfg["p_grid"])
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
    if cfg["p"] is not None:
        return [float(cfg["p"])]
    raise UsageError("no error rate given (use --p or --p-grid)")


def _sizes(cfg) -> list[int]:
    if not cfg["L"]:
        raise UsageError("no lattice size given (use --L)")
    return [int(x) for x in cfg["L"]]


def _meta(cfg, **extra) -> dict:
    echo = {k: v for k, v in sorted(cfg.items()) if k not in _NON_SEMANTIC}
    return {"config": echo, "version": __version__, **extra}


# -- commands ------------------------------------------------------------------


def cmd_exact(cfg):
    grid = _grid(cfg)
    rows = [(L, p, pfail_exact(p, L)) for L in _sizes(cfg) for p in grid]
    return ("L", "p", "pfail"), rows, _meta(cfg)


def cmd_simulate(cfg):
    rows = []
    threads = cfg["threads"] or default_threads()
    for L in _sizes(cfg):
        g = build_geometry(cfg["geometry"], L)
        for p in _grid(cfg):
            s = run_shots(g, p, cfg["shots"], cfg["seed"], threads=threads,
                          node_budget=cfg["node_budget"])
            rows.append((L, p, s.shots, s.failures, s.pfail_hat, s.ci_low, s.ci_high, s.ties,
                         s.timeouts, s.seed))
    cols = ("L", "p", "shots", "failures", "pfail_hat", "ci_low", "ci_high", "ties", "timeouts", "seed")
    timeouts = int(sum(r[8] for r in rows))
    return cols, rows, _meta(cfg, timeouts=timeouts, weighting="binomial")


def cmd_gapdist(cfg):
    if cfg["geometry"] != "planar":
        raise DomainError("gap distributions are defined for the planar code")
    rows = []
    timeouts = 0
    threads = cfg["threads"] or default_threads()
    for L in _sizes(cfg):
        g = build_geometry("planar", L)
        for p in _grid(cfg):
            rec = run_shots(g, p, cfg["shots"], cfg["seed"], mode="gap", threads=threads,
                            node_budget=cfg["node_budget"])
            timeouts += int((~rec.valid).sum())
            vals, counts = np.unique(rec.delta_e[rec.valid], return_counts=True)
            rows.extend((L, p, int(v), int(c)) for v, c in zip(vals, counts))
    return ("L", "p", "delta_e", "count"), rows, _meta(cfg, timeouts=timeouts)


def _failure_points(path):
    cols, rows, _ = read_table(path)
    if "pfail_hat" in cols:
        require_columns(cols, ("L", "p", "shots", "pfail_hat"), path)
        P = np.array([r["pfail_hat"] for r in rows])
        n = np.array([r["shots"] for r in rows])
        err = analysis.binomial_stderr(P, n)
    else:
        require_columns(cols, ("L", "p", "pfail"), path)
        P = np.array([r["pfail"] for r in rows])
        if "stderr" in cols:
            err = np.array([r["stderr"] for r in rows])
        else:
            # Exact curves carry no noise; use uniform weights.
            err = np.full(len(rows), 1e-3)
    L = np.array([r["L"] for r in rows])
    p = np.array([r["p"] for r in rows])
    return np.column_stack([L, p, P, err])


def _gap_points(path, n_boot=analysis.N_BOOT, seed=0):
    cols, rows, _ = read_table(path)
    require_columns(cols, ("L", "p", "delta_e", "count"), path)
    groups = {}
    for r in rows:
        groups.setdefault((int(r["L"]), r["p"]), []).append((int(r["delta_e"]), int(r["count"])))
    pts = []
    for (L, p), vc in sorted(groups.items()):
        samples = np.repeat([v for v, _ in vc], [c for _, c in vc])
        ratio, err = analysis.moment_ratio(samples, n_boot=n_boot, seed=seed)
        pts.append((L, p, ratio, err))
    return pts


def cmd_fit(cfg):
    model = cfg["model"]
    if model not in FIT_MODELS:
        raise DomainError(f"--model must be one of {FIT_MODELS} (or an alias {sorted(MODEL_ALIASES)})")
    if not cfg["input"]:
        raise DomainError("fit needs --input")
    path = cfg["input"]
    if model == "g_collapse":
        res = analysis.fit_g_collapse(_gap_points(path))
        out = {"fits": [res.to_dict()]}
        converged = res.converged
    elif model == "surface_tension":
        pts = _failure_points(path)
        fits = analysis.fit_surface_tension(pts, capillary=False)
        out = {"surface_tension": {format(k, ".17g"): v for k, v in fits.items()}}
        converged = True
    else:
        pts = _failure_points(path)
        families = ("erf_quadratic", "erf_linear", "poly_simple", "poly_L") if model == "compare" else (model,)
        results = [analysis.fit_failure_ansatz(pts, f) for f in families]
        out = {"fits": [r.to_dict() for r in results]}
        if model == "compare":
            out["ranking"] = analysis.rank_models(results)
        converged = all(r.converged for r in results)
    out["metadata"] = _meta(cfg, weighting="binomial stderr; gap ratios by 200-resample bootstrap")
    if not converged:
        out["metadata"]["converged"] = False
    return out, converged


def cmd_duality(cfg):
    rows = []
    for L in _sizes(cfg):
        for p in _grid(cfg):
            rows.append((L, p, kw_dual(p), duality_residual(p, L)))
    worst = max(abs(r[3]) for r in rows)
    return ("L", "p", "p_star", "residual"), rows, _meta(cfg, max_abs_residual=worst)


def cmd_pathcount(cfg):
    rows = []
    if cfg["model"] == "enumerate":
        # Exhaustive low-order coefficients next to the closed-form count.
        for L in _sizes(cfg):
            if L > 5:
                raise DomainError("exhaustive enumeration needs L <= 5")
            coeffs = exact_failure_polynomial(build_geometry(cfg["geometry"], L), cfg["wmax"])
            formula = regimes.nmin_coefficient(cfg["geometry"], L)
            for k, c in enumerate(coeffs):
                rows.append((L, k, float(c), formula if k == (L + 1) // 2 else float("nan")))
        return ("L", "order", "coefficient", "nmin_formula"), rows, _meta(cfg)
    if cfg["model"] in ("nps", "nonpostselected"):
        for L in _sizes(cfg):
            parity = "odd" if L % 2 else "even"
            for p in _grid(cfg):
                coef, lead, ok = regimes.pathcount_nonpostselected(cfg["geometry"], parity, L, p)
                pb = float(regimes.validity_boundary("pathcount_nps", L))
                rows.append((L, p, coef, lead, int(ok), pb))
        return ("L", "p", "coefficient", "pfail_leading", "valid", "boundary_p"), rows, _meta(cfg)
    for L in _sizes(cfg):
        pb = float(regimes.validity_boundary("pathcount_post", L))
        boundary = regimes.pathcount_postselected(pb, L)[0] if pb < 1 else float("nan")
        for p in _grid(cfg):
            est, ok = regimes.pathcount_postselected(p, L)
            rows.append((L, p, pfail_exact(p, L), est, int(ok), pb, boundary))
    cols = ("L", "p", "pfail_exact", "pathcount", "valid", "boundary_p", "boundary_pfail")
    return cols, rows, _meta(cfg)


def cmd_capillary(cfg):
    rows = []
    for L in _sizes(cfg):
        pb = float(regimes.validity_boundary("capillary", L))
        boundary = regimes.capillary_pfail(pb, L)[0] if 0 < pb < P_C else float("nan")
        for p in _grid(cfg):
            if p >= P_C:
                continue
            est, ok = regimes.capillary_pfail(p, L)
            full, _ = regimes.capillary_pfail(p, L, stiffness=True)
            rows.append((L, p, pfail_exact(p, L), est, full, int(ok), pb, boundary))
    if not rows:
        raise DomainError("capillary grid has no points below threshold")
    cols = ("L", "p", "pfail_exact", "capillary", "capillary_stiffness", "valid", "boundary_p",
            "boundary_pfail")
    return cols, rows, _meta(cfg)


def cmd_collapse(cfg):
    # The p grid fixes the x grid through the smallest L; every size is then
    # evaluated on that common x grid, so no interpolation is needed.
    sizes = _sizes(cfg)
    if len(sizes) < 2:
        raise UsageError("collapse needs at least two sizes")
    xs = (np.array(_grid(cfg)) - P_C) * min(sizes)
    curves = []
    rows = []
    for L in sizes:
        ps = P_C + xs / L
        ys = np.array([pfail_exact(p, L) for p in ps])
        curves.append((xs, ys))
        rows.extend((L, p, x, y) for p, x, y in zip(ps, xs, ys))
    lo, hi = analysis.collapse_spread(curves, cfg["epsilon"], anchor=0.0)
    return ("L", "p", "x", "pfail"), rows, _meta(cfg, window=[lo, hi])


TABLE_COMMANDS = {
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "gapdist": cmd_gapdist,
    "duality": cmd_duality,
    "pathcount": cmd_pathcount,
    "capillary": cmd_capillary,
    "collapse": cmd_collapse,
}


def run(cfg) -> int:
    """Execute a resolved configuration; returns the exit code."""
    if cfg["command"] == "fit":
        out, converged = cmd_fit(cfg)
        text = write_json(cfg["out"], out)
        if cfg["out"] in (None, "-"):
            sys.stdout.write(text)
        return EXIT_OK if converged else EXIT_NONCONV
    cols, rows, meta = TABLE_COMMANDS[cfg["command"]](cfg)
    text = write_table(cfg["out"], cols, rows, meta, cfg["format"])
    if cfg["out"] in (None, "-"):
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
