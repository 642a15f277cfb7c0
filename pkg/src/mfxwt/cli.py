"""Command line front end: ``mfxwt <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dataio, pipeline
from .config import AnalysisConfig, format_config, load_config
from .errors import MFXWTError
from .surrogates import SurrogateKind, shift_scan, surrogate_ensemble
from .synth import BfbmSpec, BinomialSpec, gen_bfbm, gen_bfgn, gen_binomial


class UsageError(Exception):
    pass


def _add_config_args(p):
    g = p.add_argument_group("analysis configuration")
    g.add_argument("--config", help="key = value configuration file")
    g.add_argument("--smin", type=float, dest="fit_min", help="lower end of the scaling range")
    g.add_argument("--smax", type=float, dest="fit_max", help="upper end of the scaling range")
    g.add_argument("--scale-min", type=float)
    g.add_argument("--scale-max", type=float)
    g.add_argument("--scale-count", type=int)
    g.add_argument("--order-max", type=float)
    g.add_argument("--order-step", type=float)
    g.add_argument("--diag-max", type=float)
    g.add_argument("--diag-step", type=float)
    g.add_argument("--kernel-order", type=int)
    g.add_argument("--kernel-half-width", type=float)
    g.add_argument("--floor", type=float)
    g.add_argument("--exclude-edges", action="store_const", const=True, default=None)


def _add_input_args(p):
    p.add_argument("--x", required=True, help="CSV for the first series")
    p.add_argument("--y", required=True, help="CSV for the second series")
    p.add_argument("--series", choices=["auto", "returns", "volatility", "raw"], default="auto",
                   help="price files become returns/volatilities; raw reads a numeric column")
    p.add_argument("--date-col", default="Date")
    p.add_argument("--close-col", default="Close")
    p.add_argument("--x-col", help="column of --x to read in raw mode")
    p.add_argument("--y-col", help="column of --y to read in raw mode")


def _config_from(args):
    keys = ["fit_min", "fit_max", "scale_min", "scale_max", "scale_count", "order_max", "order_step",
            "diag_max", "diag_step", "kernel_order", "kernel_half_width", "floor", "exclude_edges", "seed"]
    overrides = {k: getattr(args, k, None) for k in keys}
    return load_config(getattr(args, "config", None), **overrides)


def _load_inputs(args):
    kind = args.series
    if kind == "auto":
        dated = dataio.has_column(args.x, args.date_col) and dataio.has_column(args.y, args.date_col)
        kind = "returns" if dated else "raw"
    if kind == "raw":
        x = dataio.load_values_csv(args.x, args.x_col)
        y = dataio.load_values_csv(args.y, args.y_col)
        return x, y, {"series": "raw"}
    pa = dataio.load_price_csv(args.x, args.date_col, args.close_col)
    pb = dataio.load_price_csv(args.y, args.date_col, args.close_col)
    pair = dataio.aligned_returns(pa, pb, kind)
    info = {
        "series": kind,
        "symbols": [pa.symbol, pb.symbol],
        "rows": [len(pa), len(pb)],
        "aligned_prices": len(pair.dates) + 1,
        "dropped": [pair.dropped_x, pair.dropped_y],
        "first_date": pair.dates[0],
        "last_date": pair.dates[-1],
    }
    return pair.x, pair.y, info


def _require_seed(args):
    if args.seed is None:
        raise UsageError(f"'{args.command}' is stochastic; pass --seed explicitly")


def _parse_shifts(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    if args.model == "binomial":
        z = gen_binomial(BinomialSpec(args.pz, args.k))
        text = dataio.columns_csv({"value": z})
    else:
        _require_seed(args)
        spec = BfbmSpec(args.hxx, args.hyy, args.rho, args.n, args.sigma_x, args.sigma_y, args.seed)
        if args.increments:
            inc = gen_bfgn(spec, method=args.method)
            x, y = inc[:, 0], inc[:, 1]
        else:
            x, y = gen_bfbm(spec, method=args.method)
        text = dataio.columns_csv({"x": x, "y": y})
    dataio.atomic_write_text(args.output, text)


def cmd_analyze(args):
    cfg = _config_from(args)
    x, y, info = _load_inputs(args)
    doc = pipeline.analyze(x, y, args.mode, cfg)
    doc["input"] = info
    dataio.write_json(args.out, doc)
    if args.csv_prefix:
        _export_surfaces(doc, args.csv_prefix)


def _export_surfaces(doc, prefix):
    if "p_values" not in doc:
        d = doc.get("diagonal")
        if d:
            cols = {k: d[k] for k in ("q_values", "h_xy", "D", "T", "h_xy_legendre", "D_legendre")}
            dataio.atomic_write_text(f"{prefix}_diagonal.csv", dataio.columns_csv(cols))
        return
    P, Q = doc["p_values"], doc["q_values"]
    surfaces = {k: doc[k] for k in ("T", "r2", "h_x", "h_y", "D") if k in doc}
    for k, v in doc.get("direct", {}).items():
        surfaces[f"direct_{k}"] = v
    if "pf" in doc:
        surfaces["pf_tau"] = doc["pf"]["tau"]
    for name, values in surfaces.items():
        dataio.atomic_write_text(f"{prefix}_{name}.csv", dataio.surface_long_csv(P, Q, values))


def cmd_theory(args):
    doc = pipeline.theory_doc(args.px, args.py, args.order_max, args.order_step, args.diag_step)
    dataio.write_json(args.out, doc)


def cmd_shift_scan(args):
    cfg = _config_from(args)
    x, y, info = _load_inputs(args)
    doc = shift_scan(x, y, _parse_shifts(args.shifts), cfg)
    doc["input"] = info
    doc["config"] = cfg.to_dict()
    dataio.write_json(args.out, doc)


def cmd_surrogate(args):
    _require_seed(args)
    cfg = _config_from(args)
    x, y, info = _load_inputs(args)
    report = surrogate_ensemble(x, y, args.kind, args.count, args.seed, cfg, n_jobs=args.jobs)
    doc = report.to_dict()
    doc["input"] = info
    dataio.write_json(args.out, doc)
    if args.widths_csv:
        dataio.atomic_write_text(args.widths_csv, dataio.columns_csv({"width": report.widths}))


def cmd_config(args):
    cfg = AnalysisConfig() if args.show_defaults else _config_from(args)
    sys.stdout.write(format_config(cfg))


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(prog="mfxwt", description="Multifractal cross wavelet analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--seed", type=int, help="RNG seed (required by stochastic commands)")
        return p

    gen = sub.add_parser("gen", help="generate synthetic series")
    gsub = gen.add_subparsers(dest="model", required=True)
    gb = gsub.add_parser("binomial", help="binomial cascade measure")
    gb.add_argument("--pz", type=float, required=True)
    gb.add_argument("-k", type=int, required=True)
    gb.add_argument("-o", "--output", required=True)
    gb.add_argument("--seed", type=int)
    gf = gsub.add_parser("bfbm", help="bivariate fractional Brownian motion")
    gf.add_argument("--hxx", type=float, required=True)
    gf.add_argument("--hyy", type=float, required=True)
    gf.add_argument("--rho", type=float, required=True)
    gf.add_argument("-n", type=int, required=True)
    gf.add_argument("--sigma-x", type=float, default=1.0)
    gf.add_argument("--sigma-y", type=float, default=1.0)
    gf.add_argument("--method", choices=["auto", "circulant", "cholesky"], default="auto")
    gf.add_argument("--increments", action="store_true", help="write increments instead of paths")
    gf.add_argument("-o", "--output", required=True)
    gf.add_argument("--seed", type=int)
    gen.set_defaults(func=cmd_gen)

    an = add("analyze", help="joint multifractal analysis of a pair")
    _add_input_args(an)
    _add_config_args(an)
    an.add_argument("--mode", choices=pipeline.ANALYZE_MODES, default="wt")
    an.add_argument("--out", required=True)
    an.add_argument("--csv-prefix", help="also write long-format p,q,value CSVs")
    an.set_defaults(func=cmd_analyze)

    th = add("theory", help="closed-form binomial curves")
    th.add_argument("--px", type=float, required=True)
    th.add_argument("--py", type=float, required=True)
    th.add_argument("--order-max", type=float, default=10.0)
    th.add_argument("--order-step", type=float, default=0.5)
    th.add_argument("--diag-step", type=float, default=0.25)
    th.add_argument("--out", required=True)
    th.set_defaults(func=cmd_theory)

    sc = add("shift-scan", help="spectrum width against relative shift")
    _add_input_args(sc)
    _add_config_args(sc)
    sc.add_argument("--shifts", default="1:100", help="e.g. 1:100 or 1,10,80")
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_shift_scan)

    sg = add("surrogate", help="surrogate ensemble of spectrum widths")
    _add_input_args(sg)
    _add_config_args(sg)
    sg.add_argument("--kind", choices=[k.value for k in SurrogateKind], required=True)
    sg.add_argument("--count", type=int, default=1000)
    sg.add_argument("--jobs", type=int, default=1)
    sg.add_argument("--out", required=True)
    sg.add_argument("--widths-csv")
    sg.set_defaults(func=cmd_surrogate)

    cf = add("config", help="print the effective configuration")
    _add_config_args(cf)
    cf.add_argument("--show-defaults", action="store_true")
    cf.set_defaults(func=cmd_config)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except MFXWTError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": "data_error", "message": str(exc)}), file=sys.stderr)
        return 3
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": "numerical_failure", "message": str(exc)}), file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
