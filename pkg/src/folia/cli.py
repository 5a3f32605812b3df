"""Command-line entry point: ``folia validate|verify|report|verdict|heat``.

Every command prints a short human table, can write the full report as JSON
(``--json PATH``) and exits with 0 on success, 1 when a check fails and 2 on
bad input.  Reports carry ``"schema": 1`` and no timing data, so identical
inputs give byte-identical JSON.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .checks import run_battery, thread_count
from .connections import yang_mills
from .curvature import (
    difference_decay, fiber_positivity, horizontal_curvature_operator, q_tensor,
    ricci_variation_table, sym_min_eig, vertical_parallel_torsion,
)
from .frames import BUILTIN_MODELS, FrameError, builtin_model, load_frame, validate
from .scalars import Eps
from .spectral import (
    SpectralError, closed_form_decay, cohomology_verdict, heat_apply, invariant_matrix,
)

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


# --------------------------------------------------------------------------
# parsing helpers

def parse_eps_list(text):
    try:
        return [Eps(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad --eps value {text!r}: {exc}") from exc


def parse_times(text):
    """``a:b:h`` (inclusive grid) or a comma-separated list of times."""
    try:
        if ":" in text:
            a, b, h = (float(x) for x in text.split(":"))
            if h <= 0 or b < a:
                raise ValueError("need start <= stop and a positive step")
            count = int(math.floor((b - a) / h + 1e-9)) + 1
            return [round(a + i * h, 12) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad --t value {text!r}: {exc}") from exc


def load_model(args):
    try:
        if args.file:
            return load_frame(args.file)
        if args.model in BUILTIN_MODELS:
            return builtin_model(args.model)
    except FrameError as exc:
        raise InputError(str(exc)) from exc
    raise InputError(f"unknown model {args.model!r}; choose from {', '.join(BUILTIN_MODELS)}")


# --------------------------------------------------------------------------
# output

def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (bool, str, int)) or x is None:
        return x
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return str(x)


def dump_report(report):
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _base(command, spec, **params):
    return {"schema": SCHEMA, "command": command, "model": spec.name, "parameters": params}


def _table(rows, out):
    if not rows:
        return
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        out.write("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _emit(args, report, rows, out):
    _table(rows, out)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dump_report(report))


# --------------------------------------------------------------------------
# commands

def cmd_validate(args, out):
    spec = load_model(args)
    rep = validate(spec)
    report = _base("validate", spec)
    report.update(status="PASS" if rep.ok else "FAIL", validity=rep.to_dict())
    rows = [("check", "status", "detail")]
    rows += [(k, "PASS" if c["pass"] else "FAIL", c["detail"]) for k, c in rep.checks.items()]
    rows.append(("overall", report["status"], ""))
    _emit(args, report, rows, out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_verify(args, out):
    spec = load_model(args)
    eps_list = parse_eps_list(args.eps)
    if args.trials < 1:
        raise InputError("--trials must be positive")
    if args.order < 2:
        raise InputError("--order must be at least 2")
    checks = run_battery(spec, eps_list, trials=args.trials, seed=args.seed, order=args.order,
                         constrained=not args.no_commutator_constraints)
    ok = all(c["status"] != "FAIL" for c in checks)
    report = _base("verify", spec, eps=[str(e) for e in eps_list], trials=args.trials,
                   seed=args.seed, order=args.order, tolerance=args.tolerance, mode="exact",
                   commutator_constraints=not args.no_commutator_constraints)
    report.update(status="PASS" if ok else "FAIL", checks=checks)
    rows = [("check", "eps", "status", "failures", "max residual")]
    for c in checks:
        rows.append((c["name"], c.get("eps", "-"), c["status"],
                     c.get("failures", "-") if not isinstance(c.get("failures"), list)
                     else len(c["failures"]), c.get("max_residual", "-")))
    rows.append(("overall", "", report["status"], "", ""))
    _emit(args, report, rows, out)
    return EXIT_OK if ok else EXIT_FAIL


def _matrix_rows(M):
    return [[str(x) for x in row] for row in np.asarray(M).tolist()]


def cmd_report(args, out):
    spec = load_model(args)
    eps_list = parse_eps_list(args.eps)
    rep = validate(spec)
    Q = q_tensor(spec)
    RH, pairs = horizontal_curvature_operator(spec)
    flag = vertical_parallel_torsion(spec)[0]
    report = _base("report", spec, eps=[str(e) for e in eps_list])
    report["validity"] = rep.to_dict()
    report["q_tensor"] = {"matrix": _matrix_rows(Q), "min_sym_eig": sym_min_eig(Q),
                          "symmetric": bool(np.all(Q == Q.T))}
    report["horizontal_curvature_operator"] = {
        "pairs": [f"{i + 1}{j + 1}" for i, j in pairs], "matrix": _matrix_rows(RH),
        "eigenvalues": (np.linalg.eigvalsh(np.array(RH, dtype=float)).tolist() if RH.size else []),
    }
    report["yang_mills"] = yang_mills(spec)
    report["vertical_parallel_torsion"] = flag
    report["fiber_positivity"] = {f"{i},{j}": v for (i, j), v in fiber_positivity(spec).items()}
    report["difference_decay"] = difference_decay(spec)["rows"]
    if spec.is_constant():
        report["ricci_g_eps"] = {str(e): _matrix_rows(ricci_variation_table(spec, e))
                                 for e in eps_list if e.finite}
    report["status"] = "PASS"
    rows = [("quantity", "value")]
    rows.append(("Q min eig (sym)", f"{report['q_tensor']['min_sym_eig']:.6g}"))
    ev = report["horizontal_curvature_operator"]["eigenvalues"]
    rows.append(("R_H min eig", f"{min(ev):.6g}" if ev else "n/a"))
    rows.append(("Yang-Mills", yang_mills(spec)))
    rows.append(("nabla_Z T = 0", flag))
    for key, v in report["fiber_positivity"].items():
        rows.append((f"c1 on ({key})", f"{v:.6g}"))
    _emit(args, report, rows, out)
    return EXIT_OK


def cmd_verdict(args, out):
    spec = load_model(args)
    v = cohomology_verdict(spec)
    report = _base("verdict", spec)
    report.update(v.to_dict())
    report["status"] = "PASS"
    rows = [("degree", "status", "reason")]
    for k, d in sorted(v.degrees.items()):
        rows.append((f"H^{k}", d["status"], d["reason"]))
    _emit(args, report, rows, out)
    return EXIT_OK


def cmd_heat(args, out):
    spec = load_model(args)
    times = parse_times(args.t)
    if any(t < 0 for t in times):
        raise InputError("heat times must be non-negative")
    eps = "auto" if args.eps == "auto" else parse_eps_list(args.eps)[0]
    try:
        dec = closed_form_decay(spec, eps, args.k, seed=args.seed)
    except SpectralError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = _base("heat", spec, k=args.k, eps=str(args.eps), t=times, seed=args.seed)
    report["decay"] = {k: v for k, v in dec.items() if k != "curve"}
    curve = []
    if "eps" in dec:
        op = invariant_matrix(spec, Eps(dec["eps"]), args.k)
        rng = np.random.default_rng(args.seed)
        if dec["closed_dim"]:
            import scipy.linalg

            from .spectral import d_matrix

            basis = scipy.linalg.null_space(np.array(d_matrix(spec, args.k), dtype=float)) \
                if args.k < spec.N else np.eye(op.dim)
            a = basis @ rng.standard_normal(basis.shape[1])
            subspace = "closed invariant forms"
        else:
            a = rng.standard_normal(op.dim)
            subspace = "all invariant forms (no closed invariant forms in this degree)"
        a = a / op.norm(a)
        c = dec.get("c_eps")
        for t in times:
            nt = op.norm(heat_apply(op, t, a))
            curve.append({"t": t, "norm": nt, "bound": math.exp(-c * t) if c is not None else None})
        report["subspace"] = subspace
    report["curve"] = curve
    failed = dec.get("status") == "FAILED"
    report["status"] = "FAIL" if failed else "PASS"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "norm", "bound"])
    for row in curve:
        w.writerow([repr(row["t"]), repr(row["norm"]), "" if row["bound"] is None else repr(row["bound"])])
    rows = [("quantity", "value")]
    for key in ("status", "eps", "c_eps", "closed_dim", "gap", "garding", "slack", "exactness_residual", "reason"):
        if key in dec:
            rows.append((key, dec[key]))
    _emit(args, report, rows, out)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_FAIL if failed else EXIT_OK


# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="folia", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"folia {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def model_args(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--model", help=f"builtin model ({', '.join(BUILTIN_MODELS)})")
        g.add_argument("--file", help="frame JSON file")
        sp.add_argument("--json", metavar="PATH", help="write the full report as JSON")

    sp = sub.add_parser("validate", help="check the frame structure conditions")
    model_args(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("verify", help="run the identity battery")
    model_args(sp)
    sp.add_argument("--eps", default="1/4,1,4,inf", help="comma-separated eps values (inf allowed)")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--order", type=int, default=2, help="jet order of random forms")
    sp.add_argument("--tolerance", type=float, default=0.0,
                    help="recorded for reference; identities are checked in exact arithmetic")
    sp.add_argument("--exact", action="store_true", help="exact rational mode (the default)")
    sp.add_argument("--no-commutator-constraints", action="store_true",
                    help="debug: drop bracket terms when reordering derivatives")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="curvature tables and positivity constants")
    model_args(sp)
    sp.add_argument("--eps", default="1/2,1,2")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("verdict", help="cohomology vanishing verdicts")
    model_args(sp)
    sp.set_defaults(func=cmd_verdict)

    sp = sub.add_parser("heat", help="heat flow decay on invariant forms")
    model_args(sp)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--eps", default="auto")
    sp.add_argument("--t", default="0:10:0.5")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--csv", metavar="PATH", help="write the decay curve here instead of stdout")
    sp.set_defaults(func=cmd_heat)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    start = time.perf_counter()
    try:
        code = args.func(args, out)
    except InputError as exc:
        sys.stderr.write(f"folia: error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"folia: error: {exc}\n")
        return EXIT_INPUT
    sys.stderr.write(f"[{args.command}: {time.perf_counter() - start:.2f}s, "
                     f"threads={thread_count()}]\n")
    return code


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
