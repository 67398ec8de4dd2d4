"""Command-line front end.

Each subcommand writes CSV (with a ``#`` provenance block), a JSON mirror and,
where it makes sense, an SVG figure into ``--out``.  Exit status is 0 on
success, 1 when a geometric computation fails and 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from solitongeom import identities as ident
from solitongeom import report
from solitongeom.config import COMMANDS, build_config, read_config_file, resolve
from solitongeom.errors import ConditionsViolated, ConfigError, GeometryError
from solitongeom.gallery import (ExpProfile, SpiralCurve, canonical_atlas, exp_bound_check,
                                 inequality_chain_check, profile_conditions_check,
                                 properness_diagnostic, spiral_curvature,
                                 weighted_mean_curvature_scan)
from solitongeom.identities import shrinker_residual
from solitongeom.omission import coverage_raster, omission_certificate
from solitongeom.surface import ParamGrid

_IDENTITY_CHECKS = {
    "grad": ident.check_grad_identity,
    "div": ident.check_div_identity,
    "master": ident.check_master_identity,
    "shrinker": ident.check_shrinker_pde,
}


class _Parser(argparse.ArgumentParser):
    """Routes argparse usage errors to ConfigError so they exit with status 2."""

    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser():
    parser = _Parser(prog="solitongeom", description="Hypersurface identities, omission rasters and spiral diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="key = value file; flags override its entries")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--format", help="comma list of csv,json,svg (default: all)")
        p.add_argument("--threads", type=int, help="worker cap; results do not depend on it")

    def surface_opts(p):
        p.add_argument("--surface", help="builder, e.g. sphere:r=2 or spiral-cylinder:arctan,m=1,a=1")
        p.add_argument("--orientation", help="inward, outward or as-computed")
        p.add_argument("--grid", help="node counts, e.g. 81x81")
        p.add_argument("--ranges", help="parameter box, e.g. -0.5:0.5,-0.5:0.5")
        p.add_argument("--t", help="first-axis interval lo:hi[:count] (default step 0.01)")

    p = sub.add_parser("frames", help="sample geometric frames on a grid")
    surface_opts(p)
    common(p)

    p = sub.add_parser("identities", help="grid residuals of the support-function identities")
    surface_opts(p)
    p.add_argument("--refine", action="store_const", const=True, help="also run at h/2 and estimate the order")
    p.add_argument("--identities", help="comma list of grad,div,master,shrinker or all")
    common(p)

    p = sub.add_parser("omission", help="omission certificate and tangent-plane coverage raster")
    surface_opts(p)
    p.add_argument("--box", help="raster box, e.g. -2:2,-2:2")
    p.add_argument("--cells", help="cells per axis, e.g. 400 or 400x300")
    p.add_argument("--cover-tol", dest="cover_tol", help="coverage tolerance (default 1.5 cell diagonals)")
    p.add_argument("--s", help="clip tangent lines to s in lo:hi (planar rasters only)")
    p.add_argument("--p0", help="base point for the certificate (default origin)")
    common(p)

    p = sub.add_parser("spiral", help="profile conditions, inequality chain and limits for a spiral curve")
    p.add_argument("--profile", help="arctan:m=1,a=1 | exp | constant:value=0 | poly:coeffs=1;0;1")
    p.add_argument("--d", help="base radius (default 1)")
    p.add_argument("--checks", help="comma list of conditions,chain,curvature,properness,weighted,exp-bound or all")
    p.add_argument("--t", help="t grid lo:hi:count (default -50:50:2001)")
    p.add_argument("--s", help="s grid lo:hi:count (default -100:100:2001)")
    p.add_argument("--trap-radius", dest="trap_radius", help="properness trap radius (default 1.2)")
    p.add_argument("--T-values", dest="T_values", help="properness horizons (default 50,100,200,400)")
    p.add_argument("--asymptotic-T", dest="asymptotic_T", help="horizon for the limit conditions")
    common(p)

    p = sub.add_parser("canonical", help="residuals on the canonical shrinkers")
    p.add_argument("--n", help="hypersurface dimension, 1 or 2 (default 2)")
    p.add_argument("--samples", help="samples per axis per chart (default 101)")
    common(p)
    return parser


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _join_negative_values(argv):
    """``--t -50:50`` -> ``--t=-50:50``; argparse would read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_config(argv):
    args = vars(build_parser().parse_args(_join_negative_values(list(argv))))
    command = args.pop("command")
    path = args.pop("config", None)
    file_values = read_config_file(path) if path else None
    return build_config(command, args, file_values)


# ---------------------------------------------------------------------------
# emission


class _Emitter:
    def __init__(self, cfg, formats):
        self.out = Path(cfg.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.config = cfg.provenance()
        self.formats = formats
        self.written = []

    def csv(self, name, rows, columns=None):
        if "csv" in self.formats:
            self.written.append(report.write_csv(self.out / f"{name}.csv", rows, self.config, columns))

    def json(self, name, reports):
        if "json" in self.formats:
            self.written.append(report.write_json(self.out / f"{name}.json", self.config, reports))

    def svg(self, name, draw, *args, **kwargs):
        if "svg" in self.formats:
            from solitongeom import plotting
            self.written.append(getattr(plotting, draw)(*args, path=self.out / f"{name}.svg", **kwargs))


# ---------------------------------------------------------------------------
# commands


def _frame_rows(grid, fr):
    u = grid.nodes().reshape(-1, grid.dim_n)
    flat = {k: np.asarray(getattr(fr, k)).reshape(u.shape[0], -1)
            for k in ("x", "normal", "f", "mean_h", "norm_a_sq")}
    rho = np.asarray(shrinker_residual(fr)).reshape(-1)
    rows = []
    for i in range(u.shape[0]):
        row = {f"u{k}": float(u[i, k]) for k in range(u.shape[1])}
        row.update({f"x{k}": float(v) for k, v in enumerate(flat["x"][i])})
        row.update({f"N{k}": float(v) for k, v in enumerate(flat["normal"][i])})
        row.update(f=float(flat["f"][i, 0]), H=float(flat["mean_h"][i, 0]),
                   norm_A_sq=float(flat["norm_a_sq"][i, 0]), shrinker_residual=float(rho[i]))
        rows.append(row)
    return rows


def cmd_frames(cfg, res, emit):
    _, fr = res.spec.sample(res.grid)
    rows = _frame_rows(res.grid, fr)
    emit.csv("frames", rows)
    emit.json("frames", {"surface": res.spec.describe(), "counts": res.grid.counts, "frames": rows})


def cmd_identities(cfg, res, emit):
    reports = [_IDENTITY_CHECKS[name](res.spec, res.grid, refine=cfg.refine) for name in res.identities]
    rows = [r.record() for r in reports]
    emit.csv("identities", rows)
    emit.json("identities", rows)
    if cfg.refine:
        emit.svg("identities_convergence", "plot_convergence", reports,
                 title=f"identity residuals, {res.spec.describe()}")


def cmd_omission(cfg, res, emit):
    params = res.grid.nodes().reshape(-1, res.spec.n)
    cert = omission_certificate(res.spec, params, res.p0, cert_tol=None)
    raster = coverage_raster(res.spec, params, res.box, res.cells, cover_tol=cfg.cover_tol,
                             s_range=res.s, workers=cfg.threads)
    r = raster.radius()
    disk = r <= 1.0 - raster.cover_tol
    summary = {"surface": raster.surface, "cells": raster.cells, "cover_tol": raster.cover_tol,
               "cell_diagonal": raster.cell_diagonal, "n_planes": raster.n_planes,
               "reduced_2d": raster.reduced_2d, "covered_cells": int(np.sum(raster.covered)),
               "covered_in_unit_disk": int(np.sum(raster.covered[disk])),
               "covered_fraction_annulus_1.05_1.8": raster.covered_fraction((r >= 1.05) & (r <= 1.8))}
    emit.csv("omission_raster", raster.records())
    emit.csv("omission_certificate", [cert.record()])
    emit.json("omission", {"certificate": cert.record(), "raster": summary})
    if len(raster.cells) == 2:
        emit.svg("omission_raster", "plot_raster", raster)


def cmd_spiral(cfg, res, emit):
    profile = res.profile
    curve = SpiralCurve(profile, cfg.d)
    t = np.linspace(*res.t)
    s = np.linspace(*res.s)
    out = {"curve": curve.describe()}

    if "conditions" in res.checks:
        cond = profile_conditions_check(profile, t, cfg.asymptotic_T)
        emit.csv("spiral_conditions", cond.records())
        out["conditions"] = cond.records()
    if "chain" in res.checks:
        # the exp profile only meets the preconditions for t >= 0
        t_chain = t[t >= 0] if isinstance(profile, ExpProfile) else t
        try:
            chain = inequality_chain_check(curve, t_chain, s)
            emit.csv("spiral_chain", [dict(row, **chain.summary()) for row in chain.records()])
            out["chain"] = {"summary": chain.summary(), "links": chain.records()}
        except ConditionsViolated as exc:
            # a sweep over every check records the skip; an explicit request fails
            if len(res.checks) == 1:
                raise
            row = {"curve": curve.describe(), "status": "preconditions_violated", "detail": str(exc)}
            emit.csv("spiral_chain", [row])
            out["chain"] = row
    if "curvature" in res.checks:
        k = spiral_curvature(curve, t)
        m = profile.limit_minus
        lower = 1.0 / (cfg.d + m) if m is not None else math.nan
        rows = [{"t": float(a), "k": float(b)} for a, b in zip(t, k)]
        emit.csv("spiral_curvature", rows)
        within = bool(np.all((k > lower) & (k < 1.0 / cfg.d))) if m is not None else None
        out["curvature"] = {"k_t_max": float(k[-1]), "k_t_min": float(k[0]), "t_max": float(t[-1]),
                            "t_min": float(t[0]), "lower_bound": lower, "upper_bound": 1.0 / cfg.d,
                            "strictly_within_bounds": within, "k_min": float(k.min()), "k_max": float(k.max())}
    if "properness" in res.checks:
        table = properness_diagnostic(curve, res.T_values, cfg.trap_radius)
        emit.csv("spiral_properness", [dict(r, verdict=table.verdict) for r in table.records()])
        out["properness"] = {"rows": table.records(), "saturated": table.saturated, "verdict": table.verdict}
    if "weighted" in res.checks:
        scan = weighted_mean_curvature_scan(curve, t)
        emit.csv("spiral_weighted", [scan.record()])
        out["weighted"] = scan.record()
    if "exp-bound" in res.checks and isinstance(profile, ExpProfile) and cfg.d == 1.0:
        out["exp-bound"] = exp_bound_check(t, s)
        emit.csv("spiral_exp_bound", [out["exp-bound"]])
    emit.json("spiral", out)
    m = profile.limit_minus
    circles = [cfg.d] + ([cfg.d + m] if m is not None and math.isfinite(m) else [])
    emit.svg("spiral_trace", "plot_curve_trace", curve, t, circles=circles)


def cmd_canonical(cfg, res, emit):
    rows = []
    for p in range(cfg.n + 1):
        for spec in canonical_atlas(p, cfg.n):
            grid = ParamGrid(spec.default_ranges, (cfg.samples,) * spec.n)
            _, fr = spec.sample(grid)
            rho = np.abs(shrinker_residual(fr))
            rows.append({"p": p, "n": cfg.n, "chart": spec.describe(), "samples": int(rho.size),
                         "max_abs_shrinker_residual": float(rho.max()),
                         "max_abs_norm_A_sq_minus_half": float(np.max(np.abs(fr.norm_a_sq - 0.5))) if p else None,
                         "max_abs_H": float(np.max(np.abs(fr.mean_h)))})
    emit.csv("canonical", rows)
    emit.json("canonical", rows)


_COMMANDS = {"frames": cmd_frames, "identities": cmd_identities, "omission": cmd_omission,
             "spiral": cmd_spiral, "canonical": cmd_canonical}
assert set(_COMMANDS) == set(COMMANDS)


def run(cfg):
    """Execute a validated :class:`RunConfig`; returns the list of written paths."""
    res = resolve(cfg)
    emit = _Emitter(cfg, res.formats)
    _COMMANDS[cfg.command](cfg, res, emit)
    return emit.written


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        written = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        op = getattr(exc, "operation", None) or cfg.command
        print(f"numerical failure in {op}: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
