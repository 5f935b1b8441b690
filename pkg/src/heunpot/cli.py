"""Command-line front end.

Every subcommand writes a table to stdout, as CSV (header row first) or as
JSON. Numbers are printed with 17 significant digits so that output is
byte-identical between runs.

Exit codes: 0 on success, 1 on invalid input, 2 on numerical failure or a
failed verification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadSpecFile,
    HeunError,
    NumericalError,
    UnknownCommand,
    ValidationError,
)
from .heun import GAMMA0_CHOICES, HeunParams, frobenius_termination, hypergeom_termination
from .potentials import PotentialSpec, catalog, potential_x, z_of_x
from .solutions import SCHEMES, build_wavefunction, exponent_set, fig2_data, heun_params, interior_grid
from .triads import canonical_class, class_number, enumerate_triads
from .verify import bose_consistency_check, schrodinger_residual

COMMANDS = ("triads", "catalog", "eval-potential", "solve", "verify", "terminate", "fig2")
DEFAULT_TOL = 1e-10
VERIFY_THRESHOLD = 1e-6
CSV_VERSION = "1"


@dataclass
class RunConfig:
    command: str
    spec_path: str | None = None
    grid: tuple | None = None
    energy: float = 0.0
    signs: str = "+++"
    scheme: str = "frobenius"
    format: str = "csv"
    tol: float = DEFAULT_TOL
    center: int | None = None
    interval: tuple | None = None
    threshold: float = VERIFY_THRESHOLD
    mechanism: str = "frobenius"
    N: int = 0
    mu: float = 0.0
    gamma0: str = "gamma"
    heun: tuple | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UnknownCommand(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ValidationError(f"format must be csv or json, got {self.format!r}")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.grid is not None:
            lo, hi, n = self.grid
            if int(n) != n or n < 2:
                raise ValidationError("grid needs at least two points")
            if not lo < hi:
                raise ValidationError("grid needs x_min < x_max")
            self.grid = (float(lo), float(hi), int(n))


# -- formatting -----------------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + _num(obj.real) + ", " + _num(obj.imag) + "]"
    return json.dumps(str(obj), ensure_ascii=False)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return str(v)


def _emit(out, fmt: str, columns: list[str], rows: list[list], meta: dict | None = None):
    if fmt == "json":
        doc = dict(meta or {})
        doc["columns"] = columns
        doc["rows"] = [dict(zip(columns, r)) for r in rows]
        out.write(_json(doc) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    out.write(buf.getvalue())


# -- commands -------------------------------------------------------------------

def _load_spec(path: str | None) -> PotentialSpec:
    if path is None:
        raise BadSpecFile("this command needs a spec file")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadSpecFile(f"cannot read spec file {path}: {exc}") from exc
    return PotentialSpec.from_json(text)


def _grid(cfg: RunConfig):
    lo, hi, n = cfg.grid
    return np.linspace(lo, hi, n)


def _cmd_triads(cfg, out):
    rows = []
    for t in enumerate_triads():
        c = canonical_class(t)
        rows.append([t.label(), *t.m, class_number(t), c.label()])
    _emit(out, cfg.format, ["triad", "m1", "m2", "m3", "class", "canonical"], rows,
          {"version": CSV_VERSION, "count": len(rows)})


def _cmd_catalog(cfg, out):
    rows = catalog()
    if cfg.format == "json":
        out.write(_json({"version": CSV_VERSION, "rows": [r.to_dict() for r in rows]}) + "\n")
        return
    _emit(out, "csv", ["class", "triad", "potential", "transformation", "explicit_z_of_x"],
          [[r.number, r.triad.label(), r.potential, r.transformation, r.explicit]
           for r in rows])


def _cmd_eval_potential(cfg, out):
    spec = _load_spec(cfg.spec_path)
    if cfg.grid is None:
        raise ValidationError("eval-potential needs --grid")
    x = _grid(cfg)
    z = z_of_x(spec, x, cfg.interval)
    V = potential_x(spec, x, cfg.interval)
    _emit(out, cfg.format, ["x", "z", "V"], [[a, b, c] for a, b, c in zip(x, z, V)],
          {"version": CSV_VERSION})


def _wavefunction(cfg, spec):
    return build_wavefunction(spec, cfg.energy, cfg.signs, cfg.scheme, center=cfg.center,
                              interval=cfg.interval, gamma0=cfg.gamma0, tol=cfg.tol)


def _cmd_solve(cfg, out):
    spec = _load_spec(cfg.spec_path)
    wf = _wavefunction(cfg, spec)
    x = _grid(cfg) if cfg.grid is not None else interior_grid(wf)
    z = np.asarray(wf.z_of_x(x), dtype=float)
    psi = np.asarray(wf.psi_z(z), dtype=complex)
    if not np.all(np.isfinite(psi)):
        raise NumericalError("wavefunction is not finite on the grid")
    rel = schrodinger_residual(wf, x).relative
    meta = {"version": CSV_VERSION, "energy": cfg.energy, "signs": cfg.signs,
            "scheme": cfg.scheme, "exponents": list(wf.exps.alphas)}
    _emit(out, cfg.format, ["x", "z", "psi_re", "psi_im", "residual"],
          [[a, b, p.real, p.imag, r] for a, b, p, r in zip(x, z, psi, rel)], meta)


def _cmd_verify(cfg, out) -> int:
    spec = _load_spec(cfg.spec_path)
    with np.errstate(all="ignore"):
        wf = _wavefunction(cfg, spec)
        x = _grid(cfg) if cfg.grid is not None else interior_grid(wf)
        rep = schrodinger_residual(wf, x)
        zs = np.asarray(wf.z_of_x(x[:: max(1, len(x) // 10)]), dtype=float)
        bose = bose_consistency_check(wf.spec, cfg.energy, zs,
                                      tuple(wf.exps.signs))
    res = rep.max_rel_residual
    ok = bool(np.isfinite(res) and np.isfinite(bose)
              and res < cfg.threshold and bose < cfg.threshold)
    _emit(out, cfg.format,
          ["n_points", "h_min", "scale", "max_rel_residual", "bose_mismatch", "threshold", "passed"],
          [[len(x), float(np.min(rep.h)), rep.scale, res, bose, cfg.threshold, ok]],
          {"version": CSV_VERSION})
    return 0 if ok else 2


def _heun_from_cfg(cfg) -> HeunParams:
    if cfg.heun is not None:
        a, al, be, ga, de = cfg.heun
        return HeunParams.canonical(a, 0.0, al, be, ga, de)
    spec = _load_spec(cfg.spec_path)
    return heun_params(spec, cfg.energy, exponent_set(spec, cfg.energy, cfg.signs))


def _cmd_terminate(cfg, out):
    p = _heun_from_cfg(cfg)
    if cfg.mechanism == "frobenius":
        roots = frobenius_termination(p, cfg.mu, cfg.N)
    elif cfg.mechanism == "hypergeometric":
        roots = hypergeom_termination(p, cfg.gamma0, cfg.N)
    else:
        raise ValidationError(f"unknown mechanism {cfg.mechanism!r}")
    if cfg.format == "json":
        doc = {"version": CSV_VERSION, "mechanism": cfg.mechanism, "N": cfg.N,
               "roots": [{"q": complex(r.q), "q_canonical": complex(r.q_canonical),
                          "coeffs": [complex(c) for c in r.coeffs]} for r in roots]}
        out.write(_json(doc) + "\n")
        return
    rows = []
    for i, r in enumerate(roots):
        q = complex(r.q)
        for n, c in enumerate(r.coeffs):
            rows.append([i, q.real, q.imag, n, c.real, c.imag])
    _emit(out, "csv", ["root", "q_re", "q_im", "n", "c_re", "c_im"], rows)


def _cmd_fig2(cfg, out):
    d = fig2_data()
    labels = list(d["curves"])
    _emit(out, cfg.format, ["x", *(f"V_{k}" for k in labels)],
          [[x, *(d["curves"][k][i] for k in labels)] for i, x in enumerate(d["x"])],
          {"version": CSV_VERSION})


_DISPATCH = {
    "triads": _cmd_triads,
    "catalog": _cmd_catalog,
    "eval-potential": _cmd_eval_potential,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "terminate": _cmd_terminate,
    "fig2": _cmd_fig2,
}


def run(cfg: RunConfig, out=None, err=None) -> int:
    """Execute one command; returns the exit code."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        code = _DISPATCH[cfg.command](cfg, out)
    except ValidationError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except (NumericalError, ArithmeticError, FloatingPointError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return 2
    except HeunError as exc:
        err.write(f"error: {exc}\n")
        return 2
    return code or 0


# -- argument parsing -------------------------------------------------------------

class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _env_tol() -> float:
    raw = os.environ.get("HEUN_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"HEUN_TOL is not a number: {raw!r}") from exc


def _parse_grid(values) -> tuple:
    parts = values[0].split(":") if len(values) == 1 else list(values)
    if len(parts) != 3:
        raise ValidationError("grid is XMIN XMAX N or XMIN:XMAX:N")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad grid {values}: {exc}") from exc
    return lo, hi, n


def _interval(values):
    if values is None:
        return None
    return tuple(float(v) for v in values)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, default=None,
                        help="series tolerance (default: $HEUN_TOL or 1e-10)")

    spec_opts = _Parser(add_help=False)
    spec_opts.add_argument("spec", nargs="?", help="potential spec JSON file")
    spec_opts.add_argument("--spec", dest="spec_opt", help="same as the positional SPEC")
    spec_opts.add_argument("--grid", nargs="+", metavar="X",
                           help="XMIN XMAX N, or XMIN:XMAX:N")
    spec_opts.add_argument("--interval", nargs=2, type=float, metavar=("ZLO", "ZHI"),
                           help="admissible z interval (inf allowed)")

    wf_opts = _Parser(add_help=False)
    wf_opts.add_argument("--energy", "-E", type=float, default=0.0)
    wf_opts.add_argument("--signs", default="+++")
    wf_opts.add_argument("--scheme", choices=SCHEMES, default="frobenius")
    wf_opts.add_argument("--center", type=int, choices=(0, 1, 2), default=None,
                         help="expansion point (default: first one bounding an admissible interval)")
    wf_opts.add_argument("--gamma0", choices=GAMMA0_CHOICES, default="gamma")

    p = _Parser(prog="heunpot", description="Heun-class Schrodinger potentials.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("triads", parents=[common], help="list the 35 exponent triads")
    sub.add_parser("catalog", parents=[common], help="the 11 independent potential classes")
    sub.add_parser("eval-potential", parents=[common, spec_opts],
                   help="z(x) and V(x) on a grid")
    sub.add_parser("solve", parents=[common, spec_opts, wf_opts],
                   help="wavefunction on a grid")
    v = sub.add_parser("verify", parents=[common, spec_opts, wf_opts],
                       help="residual and invariant checks of a wavefunction")
    v.add_argument("--threshold", type=float, default=VERIFY_THRESHOLD)
    t = sub.add_parser("terminate", parents=[common, wf_opts],
                       help="accessory parameters that truncate a series")
    t.add_argument("spec", nargs="?", help="potential spec JSON file")
    t.add_argument("--spec", dest="spec_opt", help="same as the positional SPEC")
    t.add_argument("--mechanism", choices=("frobenius", "hypergeometric"), default="frobenius")
    t.add_argument("-N", type=int, default=0)
    t.add_argument("--mu", type=float, default=0.0)
    t.add_argument("--heun", nargs=5, type=float, metavar=("A", "ALPHA", "BETA", "GAMMA", "DELTA"),
                   help="canonical Heun parameters instead of a spec; epsilon "
                        "follows from the Fuchs relation")
    sub.add_parser("fig2", parents=[common], help="the four sample curves of the closed form")
    return p


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    tol = ns.tol if ns.tol is not None else _env_tol()
    kw = dict(command=ns.command, format=ns.format, tol=tol)
    if hasattr(ns, "spec"):
        if ns.spec is not None and ns.spec_opt is not None:
            raise ValidationError("give the spec file once, positionally or with --spec")
        kw["spec_path"] = ns.spec if ns.spec is not None else ns.spec_opt
    for name in ("energy", "signs", "scheme", "center", "gamma0", "threshold",
                 "mechanism", "N", "mu"):
        if hasattr(ns, name):
            kw[name] = getattr(ns, name)
    if getattr(ns, "grid", None) is not None:
        kw["grid"] = _parse_grid(ns.grid)
    if getattr(ns, "interval", None) is not None:
        kw["interval"] = _interval(ns.interval)
    if getattr(ns, "heun", None) is not None:
        kw["heun"] = tuple(ns.heun)
    return RunConfig(**kw)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except _ArgError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return run(cfg)
