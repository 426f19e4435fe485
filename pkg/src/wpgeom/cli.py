"""``wpg`` command-line front end.

Every report is a JSON object carrying the model's content hash and the
full run configuration.  Exit codes: 0 success, 1 a check failed, 2 the
model file or the arguments could not be parsed, 3 any other error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import corpus
from .degeneration import degeneration_order, order_constancy_probe
from .errors import ModelFileError, WPGError
from .model import untwist_check, validate
from .modelfile import ModelFile, dump_model, load_model, parse_model_text
from .monodromy import jordan_chevalley, unipotent_reduction
from .poincare import PoincareChart, modular_chart
from .quadrature import eps_limit, integrate_form, thread_count, write_cells_csv
from .rational import DEFAULT_MAX_DEN, rationalize
from .tensors import complex_matrix_json
from .wpmetric import curvature_direct, ricci, strominger_curvature, wp_metric

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_ERROR = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    chart: str | None = None
    eps: list = field(default_factory=list)
    level: int = 2
    cells_per_axis: int = 4
    points: list = field(default_factory=list)
    out: str | None = None
    csv_cells: str | None = None
    plot: str | None = None
    precision: str = "double"
    threads: int = 1
    k: int | None = None
    l: int | None = None
    divisor: int | None = None
    max_den: int = DEFAULT_MAX_DEN

    def to_dict(self):
        return asdict(self)


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.complexfloating):
        return [float(o.real), float(o.imag)]
    if hasattr(o, "to_dict"):
        return o.to_dict()
    return str(o)


def _emit(report, out):
    text = json.dumps(report, indent=2, default=_json_default, allow_nan=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def load_model_arg(arg: str) -> ModelFile:
    """A path to a TOML model file, or ``builtin:NAME`` for a corpus model."""
    name = arg[len("builtin:"):] if arg.startswith("builtin:") else None
    if name is None and not os.path.exists(arg) and arg in corpus.BUILTIN:
        name = arg
    if name is not None:
        if name not in corpus.BUILTIN:
            raise UsageError(f"unknown built-in model {name!r}; choose from {sorted(corpus.BUILTIN)}")
        text = dump_model(corpus.BUILTIN[name]())
        mf = parse_model_text(text, f"builtin:{name}")
        return mf
    if not os.path.exists(arg):
        raise UsageError(f"model file {arg!r} not found")
    return load_model(arg)


def parse_eps(text: str) -> list:
    try:
        eps = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse eps list {text!r}") from exc
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise UsageError("eps list must be positive and strictly decreasing")
    return eps


def parse_chart(text: str | None, model) -> PoincareChart:
    """``modular`` or ``inner,outer;inner,outer;...`` (one pair per variable, punctures first)."""
    if text is None:
        if model.dim == 1:
            text = "modular"
        else:
            raise UsageError("--chart is required for models of dimension > 1")
    if text.strip() == "modular":
        if model.dim != 1 or model.punctures != 1:
            raise UsageError("the modular chart needs a one-dimensional punctured model")
        chart = modular_chart()
    else:
        pairs = []
        for part in text.split(";"):
            try:
                a, b = (float(Fraction(x.strip())) for x in part.split(","))
            except ValueError as exc:
                raise UsageError(f"cannot parse chart entry {part!r}") from exc
            pairs.append((a, b))
        if len(pairs) != model.dim:
            raise UsageError(f"chart needs {model.dim} inner,outer pairs")
        chart = PoincareChart(dim=model.dim, puncture_count=model.punctures,
                              outer_radius=tuple(b for _, b in pairs),
                              inner_radius=tuple(a for a, _ in pairs), name=text)
    if max(chart.outer_radius) >= model.radius:
        raise UsageError("chart radii must stay below the model radius")
    return chart


def parse_points(text: str | None, model) -> list:
    """``re,im;re,im`` for one point (one pair per coordinate); several points separated by ``|``."""
    if not text:
        return [tuple(model.base_point)]
    points = []
    for chunk in text.split("|"):
        coords = []
        for part in chunk.split(";"):
            try:
                re_, im_ = (float(x) for x in part.split(","))
            except ValueError as exc:
                raise UsageError(f"cannot parse point coordinate {part!r}") from exc
            coords.append(complex(re_, im_))
        if len(coords) != model.dim:
            raise UsageError(f"points need {model.dim} coordinates")
        points.append(tuple(coords))
    return points


def _header(cfg: RunConfig, mf: ModelFile | None):
    h = {"command": cfg.command, "config": cfg.to_dict()}
    if mf is not None:
        h["model_sha256"] = mf.sha256
        h["model_name"] = mf.model.name
    return h


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(args, cfg):
    mf = load_model_arg(args.model)
    report = _header(cfg, mf)
    val = validate(mf.model)
    report["validation"] = val.to_dict()
    un = untwist_check(mf.model)
    report["untwist"] = un.to_dict()
    ok = val.ok and un.ok
    report["ok"] = ok
    return report, EXIT_OK if ok else EXIT_CHECK


def _integrate_series(args, cfg, k, l):
    mf = load_model_arg(args.model)
    model = mf.model
    chart = parse_chart(args.chart, model)
    cfg.chart = chart.name or args.chart
    m = model.dim
    if k is None:
        k = m - l
    if l is None:
        l = m - k
    cfg.k, cfg.l = k, l
    eps = cfg.eps
    if len(eps) < 3:
        raise UsageError("at least three eps values are needed for the limit")
    dtype = np.clongdouble if cfg.precision == "extended" else np.complex128
    ests = []
    for i, e in enumerate(eps):
        record = bool(cfg.csv_cells) and i == len(eps) - 1
        ests.append(integrate_form(model, chart, k, l, e, cfg.level, n0=cfg.cells_per_axis,
                                   threads=cfg.threads, dtype=dtype, record_cells=record))
    if cfg.csv_cells:
        write_cells_csv(ests[-1], cfg.csv_cells)
    lim = eps_limit(ests)
    cand = rationalize(lim.limit, lim.uncertainty, cfg.max_den)
    report = _header(cfg, mf)
    report.update({
        "chart": chart.describe(),
        "estimates": [e.to_dict() for e in ests],
        "limit": lim.to_dict(),
        "value": lim.limit,
        "bracket": lim.uncertainty,
        "rational": cand.to_dict(),
        "unique": cand.unique,
        "candidate": str(cand) if cand.unique else None,
    })
    if cfg.plot:
        _write_plot(cfg.plot, ests, lim)
        report["plot"] = {"csv": cfg.plot + ".csv", "script": cfg.plot + ".gp"}
    return report, EXIT_OK


def _write_plot(prefix, ests, lim):
    with open(prefix + ".csv", "w") as fh:
        fh.write("eps,value,quad_error,tail_bound\n")
        for e in ests:
            fh.write(f"{e.epsilon!r},{e.value!r},{e.quad_error!r},{e.tail_bound!r}\n")
    e1, e2 = lim.eps[-2], lim.eps[-1]
    v1, v2 = lim.values[-2], lim.values[-1]
    slope = (v2 - v1) / (e2 - e1) if lim.extrapolated else 0.0
    with open(prefix + ".gp", "w") as fh:
        fh.write("# gnuplot script: estimates against eps with the linear extrapolation\n")
        fh.write("set datafile separator ','\nset key left top\nset xlabel 'eps'\nset ylabel 'integral'\n")
        fh.write(f"limit = {lim.limit!r}\nslope = {slope!r}\n")
        fh.write(f"set xrange [0:{max(lim.eps) * 1.1!r}]\n")
        fh.write(f"plot '{os.path.basename(prefix)}.csv' using 1:2:3 skip 1 with yerrorbars title 'estimates', "
                 "limit + slope * x title 'linear extrapolation'\n")


def cmd_volume(args, cfg):
    return _integrate_series(args, cfg, 0, None)


def cmd_chern(args, cfg):
    if args.k is None and args.l is None:
        raise UsageError("give --k and/or --l")
    return _integrate_series(args, cfg, args.k, args.l)


def cmd_degorder(args, cfg):
    mf = load_model_arg(args.model)
    model = mf.model
    divisors = [args.divisor - 1] if args.divisor else list(range(model.punctures))
    if any(not 0 <= j < model.punctures for j in divisors):
        raise UsageError(f"divisor must be between 1 and {model.punctures}")
    rng = np.random.default_rng(0)
    entries = []
    for j in divisors:
        rep = degeneration_order(model, j)
        entry = {"divisor": j + 1, "k": rep.k, "l": rep.l, "tau": rep.tau, "c": rep.c,
                 "slope_k": rep.slope_k, "slope_l": rep.slope_l, "slope_ok": rep.slope_ok,
                 "violations": rep.violations}
        if model.dim > 1:
            samples = []
            for _ in range(args.samples):
                z = np.array(model.base_point, dtype=complex)
                for i in range(model.dim):
                    if i != j:
                        r = 0.9 * model.radius * math.sqrt(rng.uniform(0.05, 1.0))
                        z[i] = r * np.exp(1j * rng.uniform(-math.pi, math.pi))
                samples.append(tuple(z))
            con = order_constancy_probe(model, j, samples)
            entry["samples"] = con.to_dict()
        entries.append(entry)
    report = _header(cfg, mf)
    report["divisors"] = entries
    return report, EXIT_OK


def cmd_curvature(args, cfg):
    mf = load_model_arg(args.model)
    model = mf.model
    points = parse_points(args.at, model)
    cfg.points = [[[z.real, z.imag] for z in p] for p in points]
    out = []
    for p in points:
        g = wp_metric(model, p)
        direct = curvature_direct(model, p)
        strom = strominger_curvature(model, p)
        ric = ricci(model, p)
        scale = float(np.max(np.abs(direct.components)))
        resid = float(np.max(np.abs(direct.components - strom.components)) / scale) if scale else 0.0
        out.append({
            "point": [[z.real, z.imag] for z in p],
            "metric": complex_matrix_json(g.matrix),
            "metric_eigenvalues": [float(x) for x in g.eigenvalues],
            "curvature": complex_matrix_json(direct.components.reshape(model.dim ** 2, model.dim ** 2)),
            "ricci": complex_matrix_json(ric.matrix),
            "strominger_residual": resid,
            "convention": direct.convention,
        })
    report = _header(cfg, mf)
    report["points"] = out
    return report, EXIT_OK


def cmd_reduce(args, cfg):
    mf = load_model_arg(args.model)
    if not mf.monodromies:
        raise UsageError("model file has no monodromies to reduce")
    ops = [jordan_chevalley(T) for T in mf.monodromies]
    reduced = unipotent_reduction(mf.model, ops)
    new_monos = [op.matrix ** op.semisimple_order for op in ops] if reduced is not mf.model else None
    text = dump_model(reduced, args.output, monodromies=new_monos)
    report = _header(cfg, mf)
    report.update({
        "orders": [op.semisimple_order for op in ops],
        "monodromies": [op.to_dict() for op in ops],
        "reduced_model": args.output,
        "reduced_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "coefficients": [{"powers": list(key[0]), "vector": [str(c) for c in vec]}
                         for key, vec in sorted(reduced.holomorphic_part.items(), key=lambda kv: kv[0])],
    })
    return report, EXIT_OK


def cmd_rationalize(args, cfg):
    value = Fraction(args.value) if "/" in args.value else float(args.value)
    err = Fraction(args.err) if "/" in args.err else float(args.err)
    cand = rationalize(value, err, cfg.max_den)
    report = _header(cfg, None)
    report["rational"] = cand.to_dict()
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wpg", description="Weil-Petersson geometry from nilpotent-orbit data")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("model", help="TOML model file or builtin:NAME")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--threads", type=int, default=None, help="worker threads (default WPG_THREADS or 1)")

    def integral(sp):
        sp.add_argument("--chart", help="'modular' or 'inner,outer;...' per variable")
        sp.add_argument("--eps", default="0.1,0.05,0.025", help="decreasing cut-off list")
        sp.add_argument("--level", type=int, default=2)
        sp.add_argument("--cells", type=int, default=4, help="cells per axis at level 0")
        sp.add_argument("--max-den", type=int, default=DEFAULT_MAX_DEN)
        sp.add_argument("--precision", choices=["double", "extended"], default="double")
        sp.add_argument("--csv-cells", help="per-cell audit CSV for the smallest eps")
        sp.add_argument("--plot", help="prefix for a CSV plus gnuplot script")

    sp = sub.add_parser("check", help="validate a model and its untwisting")
    common(sp)
    sp = sub.add_parser("volume", help="volume integral with eps extrapolation")
    common(sp)
    integral(sp)
    sp = sub.add_parser("chern", help="integral of Ric^k wedge omega^l")
    common(sp)
    integral(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--l", type=int)
    sp = sub.add_parser("degorder", help="degeneration order along boundary divisors")
    common(sp)
    sp.add_argument("--divisor", type=int, help="1-based divisor index (default: all)")
    sp.add_argument("--samples", type=int, default=12, help="transverse samples for the constancy probe")
    sp = sub.add_parser("curvature", help="metric, curvature and Ricci tensors at points")
    common(sp)
    sp.add_argument("--at", help="'re,im;re,im' per point, points separated by '|' (default: base point)")
    sp = sub.add_parser("reduce", help="unipotent reduction by base change")
    common(sp)
    sp.add_argument("-o", "--output", required=True, help="reduced model file to write")
    sp = sub.add_parser("rationalize", help="rational reconstruction of value +- err")
    sp.add_argument("value")
    sp.add_argument("err")
    sp.add_argument("--max-den", type=int, default=DEFAULT_MAX_DEN)
    sp.add_argument("--out")
    return p


COMMANDS = {
    "check": cmd_check, "volume": cmd_volume, "chern": cmd_chern, "degorder": cmd_degorder,
    "curvature": cmd_curvature, "reduce": cmd_reduce, "rationalize": cmd_rationalize,
}


def _config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, model=getattr(args, "model", None), out=getattr(args, "out", None))
    cfg.threads = thread_count(getattr(args, "threads", None))
    if hasattr(args, "eps"):
        cfg.eps = parse_eps(args.eps)
        cfg.level = args.level
        cfg.cells_per_axis = args.cells
        cfg.precision = args.precision
        cfg.csv_cells = args.csv_cells
        cfg.plot = args.plot
        cfg.chart = args.chart
    if hasattr(args, "max_den"):
        cfg.max_den = args.max_den
    if hasattr(args, "divisor"):
        cfg.divisor = args.divisor
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        report, code = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        _emit({"error": "usage", "message": str(exc)}, None)
        return EXIT_PARSE
    except ModelFileError as exc:
        _emit({"error": "parse", "message": str(exc), "field": exc.field,
               "line": exc.line, "column": exc.column}, None)
        return EXIT_PARSE
    except (WPGError, ValueError, ArithmeticError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, None)
        return EXIT_ERROR
    _emit(report, getattr(args, "out", None))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
