"""Command-line front end.

Exit codes: 0 success, 1 audit failure, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from . import leggettgarg as lg
from . import matkernel as mk
from .correlations import (
    op_joint,
    post_selection_observable,
    qjp,
    quasi_cond_expect,
    sample_sequential,
    weak_value,
)
from .errors import NumericalFailure, QcorrError, Undefined
from .measures import DEFAULT_SEED, OptimizerConfig
from .quantum import Propagator, density_matrix, make_observable, pure_state
from .qubit import KET, SX, SZ, QubitExample, bloch_disk, bloch_state, sigma_theta, surface
from .serialize import fmt, load_json, operator_from_obj, vector_from_obj
from .tolerance import DEFAULT_TOL, ToleranceProfile

EXIT_OK, EXIT_AUDIT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


_PI_RE = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(text: str) -> float:
    """Float, or a multiple of pi such as ``pi/3``, ``2pi/3``, ``-0.5*pi``."""
    m = _PI_RE.match(text.lower())
    if m:
        k = m.group(1)
        coef = 1.0 if k in ("", "+") else (-1.0 if k == "-" else float(k))
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}") from None


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return vals


def default_seed() -> int:
    env = os.environ.get("QCORR_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"QCORR_SEED is not an integer: {env!r}") from None
    return DEFAULT_SEED


def tolerance_from(args) -> ToleranceProfile:
    return DEFAULT_TOL.with_overrides(herm_tol=args.herm_tol, cluster_tol=args.cluster_tol,
                                      weight_floor=args.weight_floor, tol_audit=args.tol_audit)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[dict], fields) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([fmt(r[k]) for k in fields])
    return buf.getvalue()


def _num(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None  # JSON has no NaN
    return x


# -- demo-qubit ------------------------------------------------------------

def cmd_demo_qubit(args) -> int:
    x, y, z = args.bloch
    theta = args.theta
    bloch_state(x, y, z)  # raises InvalidBloch
    ex = QubitExample(theta)
    num = ex.quantities(x, y, z)
    closed = ex.closed_forms(x, y, z)
    k_num = min(num["anticomm_sum"], num["comm_sum"])
    upper = k_num * (num["inv_a"] + num["inv_b"])
    lower = max(num["delta_a_b"], num["delta_b_a"])
    residuals = {k: float(np.max(np.abs(np.asarray(num[k]) - np.asarray(closed[k])))) for k in num}
    notes = []
    if residuals["comm_sum"] > 1e-10:
        notes.append("comm_sum: direct evaluation gives 2|sin theta| per the cell identity "
                     "P_z[P_z, P_theta] = sin(theta)/4 (sigma_x +- i sigma_y), whose operator norm "
                     "is |sin theta|/2; the closed-form column holds sqrt(2)|sin theta|")
    if num["tv"] <= 1e-12 and num["comm_state_norm"] > 1e-9:
        notes.append("orders agree in total variation while tr[-[A,B]^2 rho] = "
                     f"{num['comm_state_norm']:.12g} and <[A,B]> = {num['comm_expect']:.12g}")
    report = {
        "theta": theta, "bloch": [x, y, z],
        "numeric": {k: _num(v) for k, v in num.items()},
        "closed_form": {k: _num(v) for k, v in closed.items()},
        "residuals": residuals,
        "bounds": {"lower": lower, "tv": num["tv"], "upper": upper,
                   "lower_slack": num["tv"] - lower, "upper_slack": upper - num["tv"]},
        "notes": notes,
    }
    text = json.dumps(report, indent=2)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "qubit_report.json").write_text(text + "\n")
        rows = surface(theta, args.grid)
        (outdir / "surface.csv").write_text(_csv(rows, ("x", "z", "tv", "lower", "upper")))
    print(text)
    return EXIT_OK


# -- lg-scan ---------------------------------------------------------------

def cmd_lg_scan(args) -> int:
    step = math.radians(args.step_deg)
    grid = lg.phase_grid(args.n, step)
    support = "spectrum" if args.restrict_spectrum else "full"
    rep = args.rep
    res = lg.lg_scan(np.array([1.0, 0.0]), 0.5 * SX, SZ, grid, grid, args.mode, rep,
                     support=support, tol=tolerance_from(args))
    closed = None
    if args.mode == "quasi":
        tag = res.mode
        # the restricted semi-symmetrized sum has its own closed form; every
        # other quasi reading reproduces the Kirkwood-Dirac landscape
        closed = lg.k_ss_closed if tag == "QUASI(SS)+SPECTRUM" else lg.k_kd_closed
    fields = ["t", "T", "C12", "C23", "C13", "K", "mode", "defined"]
    if args.restrict_spectrum:
        fields.append("midpoint_excluded")
    rows = []
    max_resid = 0.0
    for t, T, r in res.cells:
        row = {"t": t, "T": T, "C12": r.C12, "C23": r.C23, "C13": r.C13, "K": r.K,
               "mode": r.mode, "defined": r.defined}
        if args.restrict_spectrum:
            row["midpoint_excluded"] = bool(r.defined and r.excluded > 1e-12)
        rows.append(row)
        if closed is not None and r.defined:
            max_resid = max(max_resid, abs(r.K - closed(t, T)))
    if args.format == "json":
        _emit(json.dumps([{k: _num(v) for k, v in r.items()} for r in rows]) + "\n", args.out)
    elif args.out:
        _emit(_csv(rows, fields), args.out)
    t, T, best = res.argmax()
    summary = {"mode": res.mode, "K_max": best.K, "t": t, "T": T,
               "t_over_pi": t / math.pi, "T_over_pi": T / math.pi,
               "defined_cells": len(res.defined()), "cells": len(res.cells)}
    if closed is not None:
        summary["closed_form_max_residual"] = max_resid
    if args.restrict_spectrum:
        summary["cells_with_excluded_midpoints"] = sum(bool(r["midpoint_excluded"]) for r in rows)
    print(" ".join(f"{k}={fmt(v)}" for k, v in summary.items()))
    return EXIT_OK


# -- audit -----------------------------------------------------------------

def _qubit_grid_reports(tol) -> list[bd.AuditReport]:
    reps = []
    thetas = np.linspace(0.0, 2 * np.pi, 50, endpoint=False)
    for k, th in enumerate(thetas):
        a, b = make_observable(SZ), make_observable(sigma_theta(th))
        for j, (x, z) in enumerate(bloch_disk()):
            r = bd.audit_prob_order_lower(bloch_state(x, 0.0, z), a, b, tol=tol)
            r.trial, r.dim = k * 50 + j, 2
            reps.append(r)
    return reps


def cmd_audit(args) -> int:
    tol = tolerance_from(args)
    if args.all:
        ineqs = bd.CAMPAIGN_DEFAULT
    elif args.ineq:
        ineqs = tuple(s.strip().upper() for s in args.ineq.split(",") if s.strip())
        bad = [i for i in ineqs if i not in bd.INEQUALITIES]
        if bad:
            raise UsageError(f"unknown inequality: {', '.join(bad)}")
    else:
        raise UsageError("give --all or --ineq")
    if args.qubit_grid:
        if ineqs != ("PROB_ORDER_LOWER",):
            raise UsageError("--qubit-grid applies to --ineq prob_order_lower only")
        reports = _qubit_grid_reports(tol)
    else:
        seed = args.seed if args.seed is not None else default_seed()
        opt = OptimizerConfig(restarts=args.restarts, budget=args.budget, seed=seed)
        spec = bd.CampaignSpec(trials=args.trials, dims=args.dims, seed=seed, inequalities=ineqs,
                               workers=args.workers, tol=tol, opt=opt, alpha=args.alpha)
        reports = bd.run_campaign(spec)
    if args.out:
        _emit(bd.to_csv(reports) if args.format == "csv" else bd.to_jsonl(reports), args.out)
    summary = bd.summarize(reports)
    failed = 0
    for iid, s in summary.items():
        failed += s["failures"]
        print(f"{iid} n={s['n']} failures={s['failures']} min_slack={fmt(s['min_slack'])}")
    for r in reports:
        if not r.passed:
            print(f"FAIL {r.inequality_id} trial={r.trial} dim={r.dim} slack={fmt(r.slack)} "
                  f"witness={json.dumps(r.witness)}", file=sys.stderr)
    return EXIT_AUDIT if failed else EXIT_OK


# -- sample ----------------------------------------------------------------

def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    x, y, z = args.bloch
    rho = bloch_state(x, y, z)
    a, b = make_observable(SZ), make_observable(sigma_theta(args.theta))
    seed = args.seed if args.seed is not None else default_seed()
    rec = sample_sequential(rho, a, b, args.n, seed)
    exact = op_joint(rho, a, b).probs
    rows = []
    for i, av in enumerate(rec.a_values):
        for j, bv in enumerate(rec.b_values):
            p = exact[i, j]
            f = rec.counts[i, j] / rec.n
            sd = math.sqrt(p * (1 - p) / rec.n) if 0 < p < 1 else 0.0
            zsc = (f - p) / sd if sd > 0 else (0.0 if f == p else math.inf)
            rows.append({"a": av, "b": bv, "count": int(rec.counts[i, j]), "empirical": f,
                         "analytic": p, "z": zsc})
    fields = ("a", "b", "count", "empirical", "analytic", "z")
    if args.format == "json":
        _emit(json.dumps({"seed": seed, "n": rec.n, "cells": rows}) + "\n", args.out)
    else:
        _emit(_csv(rows, fields), args.out)
    return EXIT_OK


# -- weak-value ------------------------------------------------------------

def cmd_weak_value(args) -> int:
    tol = tolerance_from(args)
    if args.precession:
        # pre |z+>, post the +1 eigenvector of sigma_z(T), A = sigma_z(t), H = (omega/2) sigma_x
        prop = Propagator(0.5 * args.omega * SX)
        pre = pure_state(KET["z+"])
        post_vec = mk.dagger(prop(args.T)) @ KET["z+"]
        A = make_observable(SZ).conjugate_by(prop(args.t))
    else:
        if not (args.pre and args.post and args.obs):
            raise UsageError("give --pre, --post and --obs files, or --precession")
        pre_obj = load_json(args.pre)
        pre_m = vector_from_obj(pre_obj) if _is_vector(pre_obj) else operator_from_obj(pre_obj)
        pre = density_matrix(pre_m, tol=tol)
        post_vec = vector_from_obj(load_json(args.post))
        A = make_observable(operator_from_obj(load_json(args.obs)), tol=tol)
    wv = weak_value(pre, post_vec, A, tol=tol)
    out = {"observable_spectrum": A.values.tolist()}
    if isinstance(wv, Undefined):
        out.update({"undefined": True, "reason": wv.reason, "overlap": wv.magnitude})
    else:
        lo, hi = float(A.values[0]), float(A.values[-1])
        anomalous = abs(wv.imag) > 1e-12 or wv.real < lo - 1e-12 or wv.real > hi + 1e-12
        out.update({"undefined": False, "re": wv.real, "im": wv.imag, "anomalous": anomalous})
        # the same number from the KD table conditioned on the post-selection
        table = qjp(pre, post_selection_observable(post_vec), A, "KD", tol=tol)
        qce = quasi_cond_expect(table, 1.0, given="a", tol=tol)
        if not isinstance(qce, Undefined):
            out["kd_conditional"] = {"re": qce.real, "im": qce.imag}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def _is_vector(obj) -> bool:
    if isinstance(obj, dict):
        return np.asarray(obj["re"]).ndim == 1
    return np.asarray(obj).ndim == 1


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcorr", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("tolerances")
    g.add_argument("--herm-tol", type=float)
    g.add_argument("--cluster-tol", type=float)
    g.add_argument("--weight-floor", type=float)
    g.add_argument("--tol-audit", type=float)
    common.add_argument("--out", help="output path (directory for demo-qubit)")
    common.add_argument("--format", choices=("csv", "json"),
                        help="output format (audit: json lines; others: csv)")
    common.add_argument("--seed", type=lambda s: int(s, 0),
                        help=f"64-bit seed (default {DEFAULT_SEED}, or $QCORR_SEED)")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("demo-qubit", parents=[common], help="qubit example: numbers vs closed forms")
    d.add_argument("--theta", type=parse_angle, default=math.pi / 3)
    d.add_argument("--bloch", type=parse_triple, default=(1.0, 0.0, 0.0))
    d.add_argument("--grid", type=int, default=41, help="surface grid size per axis")
    d.set_defaults(func=cmd_demo_qubit)

    s = sub.add_parser("lg-scan", parents=[common], help="Leggett-Garg K over a (t, T) phase grid")
    s.add_argument("--rep", default="kd", help="kd, mh, ss or alpha:VALUE")
    s.add_argument("--mode", choices=("quasi", "operational", "algebraic"), default="quasi")
    s.add_argument("--n", type=int, default=200, help="grid points per axis")
    s.add_argument("--step-deg", type=float, default=1.5, help="phase step in degrees")
    s.add_argument("--restrict-spectrum", action="store_true",
                   help="sum conditionals over the spectrum of A3 only and flag excluded midpoints")
    s.set_defaults(func=cmd_lg_scan)

    a = sub.add_parser("audit", parents=[common], help="randomized inequality campaign")
    a.add_argument("--trials", type=int, default=1000)
    a.add_argument("--dims", type=parse_ints, default=(2, 3, 4, 6))
    a.add_argument("--ineq", help="comma-separated inequality ids, e.g. corr_upper,prob_lower")
    a.add_argument("--all", action="store_true", help="every campaign inequality (not sup_corr)")
    a.add_argument("--qubit-grid", action="store_true",
                   help="qubit theta x Bloch grid instead of random instances")
    a.add_argument("--alpha", type=float,
                   help="fixed ordering parameter instead of a random one per trial")
    a.add_argument("--budget", type=int, default=4000)
    a.add_argument("--restarts", type=int, default=8)
    a.add_argument("--workers", type=int, default=1)
    a.set_defaults(func=cmd_audit)

    m = sub.add_parser("sample", parents=[common], help="Monte Carlo sequential measurement")
    m.add_argument("--theta", type=parse_angle, default=math.pi / 3)
    m.add_argument("--bloch", type=parse_triple, default=(1.0, 0.0, 0.0))
    m.add_argument("--n", type=int, default=1_000_000)
    m.set_defaults(func=cmd_sample)

    w = sub.add_parser("weak-value", parents=[common], help="weak value of a pre/post-selected pair")
    w.add_argument("--pre", help="JSON state vector or density matrix")
    w.add_argument("--post", help="JSON post-selection vector")
    w.add_argument("--obs", help="JSON observable")
    w.add_argument("--precession", action="store_true",
                   help="pre |z+>, post +1 at T, sigma_z(t), H = (omega/2) sigma_x")
    w.add_argument("--t", type=parse_angle, default=math.pi / 3)
    w.add_argument("--T", type=parse_angle, default=2 * math.pi / 3)
    w.add_argument("--omega", type=float, default=1.0)
    w.set_defaults(func=cmd_weak_value)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for bad usage
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"qcorr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QcorrError, OSError, ValueError, KeyError) as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
