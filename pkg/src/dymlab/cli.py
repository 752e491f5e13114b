"""Command-line interface: ``dymlab {simulate,family,find-periodic,verify}``.

Every command writes plain CSV (header row, 17 significant digits, LF) and
a JSON manifest with sorted keys.  Exit codes: 0 success, 1 usage error,
2 mathematical termination (blow-up or singularity).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from . import __version__
from . import constant_rho as crho
from . import constant_w as cw
from .algebra import Quaternion
from .dynamics import (CartesianState, canonicalize_initial_data, cartesian_field, constraint_from_array,
                       constraint_value, polar_delta0_field, polar_deltapos_field, polar_initial_vector,
                       project_constraint)
from .errors import DymError, InvalidInputError
from .integrate import IntegratorConfig, integrate_two_sided
from .metric import MetricProfile
from .verify import FieldSample, fields_from_solution, verify

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 1, 2


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------
# parsing helpers

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_FULL = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)[ij]$")
_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)[ij]$")
_REAL = re.compile(rf"^[+-]?{_NUM}$")


def _dec(text: str) -> float:
    try:
        return float(Decimal(text))
    except InvalidOperation as exc:
        raise UsageError(f"bad number {text!r}") from exc


def _imag(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return _dec(text)


def parse_complex(text: str) -> complex:
    """``"a+bi"``, ``"a"``, ``"bi"``, ``"-i"``; decimal literals only."""
    t = text.strip()
    if m := _REAL.match(t):
        return complex(_dec(t), 0.0)
    if m := _IMAG.match(t):
        return complex(0.0, _imag(m.group("im")))
    if m := _FULL.match(t):
        return complex(_dec(m.group("re")), _imag(m.group("im")))
    raise UsageError(f"cannot parse complex number {text!r}")


def parse_xi(text: str) -> Quaternion:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--xi0 expects 'c,h' with two complex numbers")
    return Quaternion(parse_complex(parts[0]), parse_complex(parts[1]))


def parse_span(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"span {text!r} must look like A:B")
    a, b = _dec(parts[0]), _dec(parts[1])
    if not a < b:
        raise UsageError(f"span {text!r} is empty")
    return a, b


def read_csv_columns(path: str) -> dict[str, np.ndarray]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc}") from exc
    with fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise UsageError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        vals = []
        for j, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise UsageError(f"{path}: row {i}, column {header[j]!r}: not a number ({cell!r})") from None
        data.append(vals)
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    return {h: arr[:, k] for k, h in enumerate(header)}


def parse_metric(text: str) -> MetricProfile:
    kind, _, rest = text.partition(":")
    try:
        if kind == "const":
            return MetricProfile.constant(_dec(rest))
        if kind == "form":
            name, _, params = rest.partition(":")
            vals = [_dec(p) for p in params.split(",")] if params else []
            return MetricProfile.closed_form(name, *vals)
        if kind == "file":
            cols = read_csv_columns(rest)
            if "s" not in cols or "r" not in cols:
                raise UsageError(f"{rest}: metric file needs columns 's' and 'r'")
            return MetricProfile.tabulated(cols["s"], cols["r"])
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown metric {text!r}; use const:V, form:NAME:P1,P2 or file:PATH")


# ----------------------------------------------------------------------
# output helpers


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: list[str], columns: list) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_manifest(path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def manifest_path(args) -> Path:
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    return Path(str(args.out) + ".json")


def base_manifest(args, command: str) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"command": command, "params": params, "version": __version__}


def fields_columns(sample):
    return (["s", "z_re", "z_im", "xi_c_re", "xi_c_im", "xi_h_re", "xi_h_im", "r"],
            [sample.s, sample.z.real, sample.z.imag, sample.c.real, sample.c.imag,
             sample.h.real, sample.h.imag, sample.r])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DYM_THREADS", "1")))
    except ValueError:
        return 1


# ----------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    lam = args.lam
    if not lam > 0:
        raise UsageError("--lambda must be positive")
    xi0 = parse_xi(args.xi0)
    metric = parse_metric(args.metric)
    span = parse_span(args.span)
    if not span[0] <= args.s0 <= span[1]:
        raise UsageError("--s0 must lie in --span")
    z0 = parse_complex(args.z0) if args.z0 else complex(args.rho0)
    if args.Y0:
        Y0 = parse_complex(args.Y0)
    else:
        if abs(z0) == 0:
            raise UsageError("--Y0 is required when z0 = 0")
        Y0 = (z0 / abs(z0)) * complex(args.U0, -0.25 * float(xi0.norm2()) / abs(z0))
    cv = constraint_value(CartesianState(z0, Y0, xi0))
    projected = False
    if abs(cv) > 1e-10:
        if not args.project_constraint:
            raise UsageError(f"initial data violate the constraint (|value| = {abs(cv):.3e}); "
                             "pass --project-constraint to re-solve Im part of Y0")
        Y0 = project_constraint(z0, Y0, xi0)
        projected = True
    cfg = IntegratorConfig(rtol=args.rtol, atol=args.atol)
    man = base_manifest(args, "simulate")
    man["tolerances"] = {"rtol": args.rtol, "atol": args.atol}
    man["metric"] = metric.describe()
    man["constraint_projected"] = projected
    if args.system == "cartesian":
        y0 = CartesianState(z0, Y0, xi0).to_array()
        field = cartesian_field(metric, lam)
        header = ["s", "z_re", "z_im", "Y_re", "Y_im", "xi_c_re", "xi_c_im", "xi_h_re", "xi_h_im",
                  "constraint", "r"]
    else:
        try:
            data, transform = canonicalize_initial_data(z0, Y0, xi0)
            branch, y0 = polar_initial_vector(data)
        except InvalidInputError as exc:
            raise UsageError(str(exc)) from exc
        want = "delta0" if args.system == "polar0" else "deltapos"
        if branch != want:
            raise UsageError(f"initial data belong to the {branch} branch, not {want}")
        man["canonical"] = {"rho0": data.rho0, "U0": data.U0, "W0": data.W0, "delta0": data.delta0,
                            "rotation": transform.rotation, "swapped": transform.swapped}
        if branch == "delta0":
            field = polar_delta0_field(metric, lam)
            header = ["s", "rho", "H", "R", "W", "A_cos", "A_sin"]
        else:
            field = polar_deltapos_field(metric, lam, data.delta0)
            header = ["s", "rho", "H", "P", "W", "A_tanh_half", "A_coth_half", "A_coth"]
    tr = integrate_two_sided(field, y0, args.s0, span, cfg)
    lo, hi = tr.span
    s = np.linspace(lo, hi, args.n_out)
    y = tr(s)
    cols = [s] + [y[:, k] for k in range(y.shape[1])]
    if args.system == "cartesian":
        cols.append(constraint_from_array(y))
        cols.append(metric.eval(s))
    write_csv(args.out, header, cols)
    man["terminations"] = list(tr.terminations)
    man["termination"] = tr.termination
    man["message"] = tr.message
    man["realized_span"] = [lo, hi]
    man["stats"] = tr.stats
    if args.system == "cartesian":
        man["max_constraint_drift"] = float(np.max(np.abs(constraint_from_array(tr.y) - cv)))
    code = EXIT_OK
    if tr.termination != "reached-end":
        ends = [e for e, t in zip((lo, hi) if len(tr.terminations) == 2 else (tr.s_final,), tr.terminations)
                if t != "reached-end"]
        man["singular_s"] = ends
        code = EXIT_MATH
    write_manifest(manifest_path(args), man)
    return code


# ----------------------------------------------------------------------
# family


FAMILIES = ("rho1-delta0", "winfty", "s1xs2", "rational-fp", "rho1-deltapos", "w0pi-delta0",
            "w0pi-deltapos", "crho-delta0", "crho-deltapos", "cw-delta0", "cw-deltapos")


def _grid(args, default):
    a, b = parse_span(args.span) if args.span else default
    n = int(round((b - a) / args.h)) + 1
    if n < 2:
        raise UsageError("--h is larger than the span")
    return a + args.h * np.arange(n)


def cmd_family(args) -> int:
    lam = args.lam
    fam = args.family
    man = base_manifest(args, "family")
    c0 = math.sqrt(args.xi0_sq / 2)
    code = EXIT_OK
    if fam == "rho1-delta0":
        sample = crho.closed_form_rho1_delta0(lam, args.W0, _grid(args, (0.0, 1.0)), c0)
    elif fam == "winfty":
        sample = crho.winfty_solution(lam, args.rho0, _grid(args, (0.0, 1.0)), c0, args.sign)
        man["W_inf"] = sample.meta["W"]
    elif fam == "s1xs2":
        rc = crho.rho_crit(lam)
        sol = crho.s1xs2_solution_delta0(lam, args.xi0_sq, _grid(args, (0.0, 2 * math.pi / (lam * rc))))
        sample = sol.sample
        man["radii"] = {"S1": sol.radius_s1, "S2": sol.radius_s2}
        man["rho_crit"] = rc
    elif fam == "rational-fp":
        if args.p is None or args.q is None:
            raise UsageError("rational-fp needs --p and --q")
        rf = crho.rational_fixed_point(lam, args.p, args.q, args.delta0)
        sample = rf.fields(_grid(args, (0.0, 2 * math.pi / rf.t_scale)))
        man["radii"] = {"S1": rf.radius_s1, "S2": rf.radius_s2}
        man["stationarity_check"] = "PASS"
        man["report"] = rf.report()
    elif fam == "rho1-deltapos":
        out = crho.closed_form_rho1_deltapos(lam, args.P0, args.W0, _grid(args, (0.0, 1.0)), args.delta0)
        sample = out.sample
    elif fam in ("w0pi-delta0", "w0pi-deltapos"):
        s = _grid(args, (0.0, 1.0))
        if fam == "w0pi-delta0":
            res = cw.closed_form_W0pi_delta0(lam, args.rho0, args.U0, s, c0)
        else:
            res = cw.closed_form_W0pi_deltapos(lam, args.rho0, args.U0, args.P0, s, args.delta0)
        man["globality"] = res.params
        man["blowup_s"] = list(res.blowup_s)
        sample = res.sample
        if sample is None:
            lo, hi = res.blowup_s
            keep = np.ones_like(s, dtype=bool)
            if lo is not None:
                keep &= s > lo
            if hi is not None:
                keep &= s < hi
            man["termination"] = "blow-up"
            write_csv(args.out, ["s", "rho"], [s[keep], res.rho[keep]])
            write_manifest(manifest_path(args), man)
            return EXIT_MATH
    elif fam == "crho-delta0":
        sample = crho.delta0_family(lam, args.rho0, args.W0, _grid(args, (0.0, 1.0)), c0)
        man["W_column"] = True
    elif fam == "crho-deltapos":
        sample = crho.deltapos_family(lam, args.rho0, args.P0, args.W0, _grid(args, (0.0, 1.0)), args.delta0)
    elif fam == "cw-delta0":
        sample = cw.constant_w_delta0_family(lam, args.W0, args.rho0, args.U0, _grid(args, (0.0, 1.0)), c0)
    elif fam == "cw-deltapos":
        sample = cw.constant_w_deltapos_family(lam, args.W0, args.rho0, args.P0, _grid(args, (0.0, 1.0)),
                                               args.U0, args.delta0)
    else:  # argparse guards this
        raise UsageError(f"unknown family {fam!r}")
    header, cols = fields_columns(sample)
    if "W" in sample.meta and np.ndim(sample.meta["W"]) == 1:
        header.append("W")
        cols.append(sample.meta["W"])
    write_csv(args.out, header, cols)
    man["n"] = len(sample.s)
    write_manifest(manifest_path(args), man)
    return code


# ----------------------------------------------------------------------
# find-periodic


def cmd_find_periodic(args) -> int:
    lam = args.lam
    rr = parse_span(args.rho_range)
    man = base_manifest(args, "find-periodic")
    if args.branch == "delta0":
        cands = crho.scan_periodic_delta0(lam, rr[0], rr[1], args.qmax, args.n_grid, args.max_candidates,
                                          workers=_threads())
        found = [{"rho0": c.rho0, "p": c.p, "q": c.q, "f": c.f, "T": c.T, "minimal_period": c.minimal_period,
                  "closure": c.closure} for c in cands]
    else:
        pr = parse_span(args.P0_range)
        pairs = crho.find_periodic_deltapos(lam, args.branch, rr, pr, args.qmax, args.n_grid,
                                            max_candidates=args.max_candidates)
        found = [{"rho0": c.rho0, "P0": c.P0, "f1": str(c.f1), "f2": str(c.f2), "T": c.T,
                  "minimal_period": c.minimal_period, "closure": c.closure} for c in pairs]
    man["candidates"] = found
    text = json.dumps(_jsonable(man), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ----------------------------------------------------------------------
# verify


def _fields_from_csv(cols: dict, path: str) -> FieldSample:
    need = ["s", "w", "v", "psi1_re", "psi1_im", "psi2_re", "psi2_im", "alpha", "r"]
    missing = [k for k in need if k not in cols]
    if missing:
        raise UsageError(f"{path}: missing columns {missing}")
    try:
        return FieldSample(cols["s"], cols["w"], cols["v"], cols["psi1_re"] + 1j * cols["psi1_im"],
                           cols["psi2_re"] + 1j * cols["psi2_im"], cols["alpha"], cols["r"])
    except InvalidInputError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_verify(args) -> int:
    if bool(args.inp) == bool(args.fields):
        raise UsageError("give exactly one of --in and --fields")
    if args.inp:
        cols = read_csv_columns(args.inp)
        need = ["s", "z_re", "z_im", "xi_c_re", "xi_c_im", "xi_h_re", "xi_h_im", "r"]
        missing = [k for k in need if k not in cols]
        if missing:
            raise UsageError(f"{args.inp}: missing columns {missing}")
        try:
            fs = fields_from_solution(cols["s"], cols["z_re"] + 1j * cols["z_im"],
                                      cols["xi_c_re"] + 1j * cols["xi_c_im"],
                                      cols["xi_h_re"] + 1j * cols["xi_h_im"], cols["r"])
        except InvalidInputError as exc:
            raise UsageError(f"{args.inp}: {exc}") from exc
    else:
        fs = _fields_from_csv(read_csv_columns(args.fields), args.fields)
    try:
        rep = verify(fs, args.lam)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from exc
    out = {"command": "verify", "version": __version__, "lambda": args.lam, "tol": args.tol,
           **rep.as_dict(), "pass": rep.passed(args.tol)}
    text = json.dumps(_jsonable(out), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.passed(args.tol) else EXIT_MATH


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dymlab", description="Spherically symmetric SU(2) Dirac-Yang-Mills ODE lab")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate the reduced system")
    sp.add_argument("--system", choices=("cartesian", "polar0", "polarpos"), required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--rho0", type=float, default=1.0)
    sp.add_argument("--U0", type=float, default=0.0)
    sp.add_argument("--xi0", default="0,0", help="spinor as 'c,h', e.g. '1+0.5i,0.3-0.2i'")
    sp.add_argument("--z0", default=None, help="complex z(s0); defaults to rho0")
    sp.add_argument("--Y0", default=None, help="complex Y(s0); defaults to the constrained value")
    sp.add_argument("--metric", default="const:1")
    sp.add_argument("--span", default="0:10")
    sp.add_argument("--s0", type=float, default=0.0)
    sp.add_argument("--rtol", type=float, default=1e-10)
    sp.add_argument("--atol", type=float, default=1e-12)
    sp.add_argument("--n-out", dest="n_out", type=int, default=1001)
    sp.add_argument("--project-constraint", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--manifest", default=None)
    sp.set_defaults(func=cmd_simulate)

    fp = sub.add_parser("family", help="sample an explicit or reduced solution family")
    fp.add_argument("--family", choices=FAMILIES, required=True)
    fp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    fp.add_argument("--rho0", type=float, default=0.2)
    fp.add_argument("--U0", type=float, default=0.0)
    fp.add_argument("--W0", type=float, default=0.0)
    fp.add_argument("--P0", type=float, default=1.0)
    fp.add_argument("--delta0", type=float, default=1.0)
    fp.add_argument("--xi0-sq", dest="xi0_sq", type=float, default=8.0)
    fp.add_argument("--sign", type=int, default=1, choices=(1, -1))
    fp.add_argument("--p", type=int, default=None)
    fp.add_argument("--q", type=int, default=None)
    fp.add_argument("--span", default=None)
    fp.add_argument("--h", type=float, default=1e-3)
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--out", required=True)
    fp.add_argument("--manifest", default=None)
    fp.set_defaults(func=cmd_family)

    pp = sub.add_parser("find-periodic", help="search parameters with rational phase integrals")
    pp.add_argument("--branch", choices=("delta0", "deltapos-drift", "deltapos-bounded"), required=True)
    pp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    pp.add_argument("--rho-range", dest="rho_range", default="0.02:0.3")
    pp.add_argument("--P0-range", dest="P0_range", default="0.05:4")
    pp.add_argument("--qmax", type=int, default=64)
    pp.add_argument("--n-grid", dest="n_grid", type=int, default=12)
    pp.add_argument("--max-candidates", dest="max_candidates", type=int, default=4)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--out", default=None)
    pp.set_defaults(func=cmd_find_periodic)

    vp = sub.add_parser("verify", help="residuals, energy and current of sampled fields")
    vp.add_argument("--in", dest="inp", default=None)
    vp.add_argument("--fields", default=None)
    vp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    vp.add_argument("--tol", type=float, default=1e-6)
    vp.add_argument("--out", default=None)
    vp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dymlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"dymlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DymError as exc:
        print(f"dymlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
