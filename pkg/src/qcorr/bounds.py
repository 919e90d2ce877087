"""Audits of the correlation and probability inequalities.

Each ``audit_*`` evaluates one inequality instance and returns an
``AuditReport`` whose ``slack`` is oriented so that ``slack >= -tol_audit``
means the inequality holds.  ``run_campaign`` draws random instances.

Total variation is the plain sum of absolute cell differences over the
union support (not halved).
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ensembles as en
from . import matkernel as mk
from .correlations import (
    alg_correlation,
    lueders_image,
    op_correlation,
    op_joint,
    parse_rep,
    qjp,
    tv_distance,
)
from .errors import DimensionMismatch
from .measures import OptimizerConfig, invasiveness_state, max_disturbance, maximize_pure
from .quantum import (
    DensityMatrix,
    Instrument,
    Observable,
    density_matrix,
    lueders_instrument,
    make_observable,
)
from .serialize import fmt, instrument_to_obj, operator_to_obj
from .tolerance import ToleranceProfile, resolve

INEQUALITIES = (
    "CORR_UPPER",
    "CORR_ORDER_UPPER",
    "SUP_CORR",
    "PROB_UPPER",
    "PROB_ORDER_UPPER",
    "PROB_LOWER",
    "PROB_ORDER_LOWER",
    "POVM_UPPER",
    "INV_DELTA_DUALITY",
)
CAMPAIGN_DEFAULT = tuple(i for i in INEQUALITIES if i != "SUP_CORR")


@dataclass
class AuditReport:
    inequality_id: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    witness: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    trial: int | None = None
    dim: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x)}")


def _report(iid, lhs, rhs, lower=False, tol=None, **kw) -> AuditReport:
    t = resolve(tol)
    slack = (lhs - rhs) if lower else (rhs - lhs)
    return AuditReport(iid, float(lhs), float(rhs), float(slack), bool(slack >= -t.tol_audit), **kw)


def _mat(x):
    return x.mat if isinstance(x, (Observable, DensityMatrix)) else np.asarray(x)


def _wit(**items) -> dict:
    out = {}
    for k, v in items.items():
        if isinstance(v, Instrument):
            out[k] = instrument_to_obj(v)
        elif isinstance(v, (Observable, DensityMatrix, np.ndarray)):
            out[k] = operator_to_obj(_mat(v))
        else:
            out[k] = v
    return out


def _inv_lueders(rho: DensityMatrix, A: Observable) -> float:
    return mk.trace_norm(lueders_image(rho, A).mat - rho.mat)


def _prep(rho, A, B):
    r, a, b = density_matrix(rho), make_observable(A), make_observable(B)
    if not (r.dim == a.dim == b.dim):
        raise DimensionMismatch(f"dims {r.dim}, {a.dim}, {b.dim}")
    return r, a, b


# -- correlations ----------------------------------------------------------

def audit_corr_upper(rho, A, B, alpha: float, tol: ToleranceProfile | None = None) -> AuditReport:
    """|<A->B>_op - <A o_alpha B>| <= ||A o_alpha B|| Inv_A(rho); also ||A|| ||B|| Inv_A for alpha in [0,1]."""
    r, a, b = _prep(rho, A, B)
    lhs = abs(op_correlation(r, a, b) - alg_correlation(r, a, b, alpha))
    inv = _inv_lueders(r, a)
    n_ord = mk.op_norm(mk.ordered_product(a.mat, b.mat, alpha))
    terms = {"inv_a": inv, "norm_ordered": n_ord, "bound_ordered": n_ord * inv}
    rhs = n_ord * inv
    if 0.0 <= alpha <= 1.0:
        terms["bound_product"] = mk.op_norm(a.mat) * mk.op_norm(b.mat) * inv
        rhs = min(rhs, terms["bound_product"])
    return _report("CORR_UPPER", lhs, rhs, tol=tol, terms=terms,
                   witness=_wit(rho=r, A=a, B=b, alpha=alpha))


def audit_corr_order_upper(rho, A, B, alpha: float, tol: ToleranceProfile | None = None) -> AuditReport:
    """|<A->B>_op - <B->A>_op| <= ||A o_alpha B|| (Inv_A + Inv_B)."""
    r, a, b = _prep(rho, A, B)
    lhs = abs(op_correlation(r, a, b) - op_correlation(r, b, a))
    inv_a, inv_b = _inv_lueders(r, a), _inv_lueders(r, b)
    n_ord = mk.op_norm(mk.ordered_product(a.mat, b.mat, alpha))
    rhs = n_ord * (inv_a + inv_b)
    return _report("CORR_ORDER_UPPER", lhs, rhs, tol=tol,
                   terms={"inv_a": inv_a, "inv_b": inv_b, "norm_ordered": n_ord},
                   witness=_wit(rho=r, A=a, B=b, alpha=alpha))


def _operational_kernel(A: Observable, B: Observable) -> np.ndarray:
    y = sum(v * p @ B.mat @ p for v, p in zip(A.values, A.projectors))
    return 0.5 * (y + mk.dagger(y))


def sup_operational_exact(A: Observable, B: Observable) -> float:
    """sup_rho |<A->B>_op| = ||sum_a a P_A(a) B P_A(a)||."""
    return mk.op_norm(_operational_kernel(A, B))


def numerical_radius(x: np.ndarray, n_phi: int = 720) -> float:
    """max_|v|=1 |<v|X|v>| = max_phi lambda_max(Re(e^{i phi} X)), refined on a phase grid."""
    from scipy.optimize import minimize_scalar

    def lam(phi):
        h = np.exp(1j * phi) * x
        return mk.eigvalsh(0.5 * (h + mk.dagger(h)))[-1]

    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    vals = [lam(p) for p in phis]
    k = int(np.argmax(vals))
    step = phis[1] - phis[0]
    res = minimize_scalar(lambda p: -lam(p), bounds=(phis[k] - step, phis[k] + step),
                          method="bounded", options={"xatol": 1e-12})
    return float(max(vals[k], -res.fun))


def audit_sup_correlation(A, B, alpha: float, cfg: OptimizerConfig | None = None,
                          tol: ToleranceProfile | None = None) -> AuditReport:
    """sup_rho |<A->B>_op| <= sup_rho |<A o_alpha B>|, both sides by pure-state search."""
    a, b = make_observable(A), make_observable(B)
    if a.dim != b.dim:
        raise DimensionMismatch("observables differ in dimension")
    cfg = cfg or OptimizerConfig()
    x = mk.ordered_product(a.mat, b.mat, alpha)
    # <A->B>_op(rho) = tr[rho Y] with Y = sum_a a P_A(a) B P_A(a); its extreme
    # eigenvectors are natural starting points for the operational side
    _, u = mk.eig_hermitian(_operational_kernel(a, b))
    seeds = [u[:, 0], u[:, -1]]
    lhs_opt = maximize_pure(lambda v: abs(op_correlation(DensityMatrix(np.outer(v, v.conj())), a, b)),
                            a.dim, cfg, starts=seeds)
    rhs_opt = maximize_pure(lambda v: abs(np.vdot(v, x @ v)), a.dim, cfg)
    # Lambda_A(rho*) is a state; the algebraic sup is at least its value there
    lam_img = lueders_image(lhs_opt.argmax_state, a)
    at_image = abs(alg_correlation(lam_img, a, b, alpha))
    rhs = max(rhs_opt.value, at_image)
    terms = {"lhs_exact": sup_operational_exact(a, b), "rhs_exact": numerical_radius(x),
             "rhs_at_lueders_image": at_image, "rhs_optimizer": rhs_opt.value,
             "budget_exhausted": bool(lhs_opt.budget_exhausted or rhs_opt.budget_exhausted)}
    return _report("SUP_CORR", lhs_opt.value, rhs, tol=tol, terms=terms,
                   witness=_wit(A=a, B=b, alpha=alpha, argmax_lhs=lhs_opt.argmax_state,
                                argmax_rhs=rhs_opt.argmax_state))


# -- probabilities ---------------------------------------------------------

def _cells(a: Observable, b: Observable, av: float, bv: float):
    return a.index_of(av), b.index_of(bv)


def audit_prob_upper(rho, A, B, a_val: float, b_val: float, alpha: float,
                     tol: ToleranceProfile | None = None) -> AuditReport:
    """|P^{A->B}(a->b) - P^alpha(a,b)| <= min{||[P_a,P_b]||, ||P_a o_alpha P_b||} Inv_A(rho)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    r, a, b = _prep(rho, A, B)
    i, j = _cells(a, b, a_val, b_val)
    pa, pb = a.projectors[i], b.projectors[j]
    p_op = op_joint(r, a, b).probs[i, j]
    p_al = qjp(r, a, b, parse_rep(f"alpha:{alpha!r}")).weights[i, j]
    lhs = abs(p_op - p_al)
    inv = _inv_lueders(r, a)
    n_comm = mk.op_norm(mk.commutator(pa, pb))
    n_ord = mk.op_norm(mk.ordered_product(pa, pb, alpha))
    rhs = min(n_comm, n_ord) * inv
    return _report("PROB_UPPER", lhs, rhs, tol=tol,
                   terms={"inv_a": inv, "norm_commutator": n_comm, "norm_ordered": n_ord,
                          "p_operational": float(p_op), "p_alpha": complex(p_al)},
                   witness=_wit(rho=r, A=a, B=b, a=float(a.values[i]), b=float(b.values[j]), alpha=alpha))


def audit_prob_order_upper(rho, A, B, a_val: float, b_val: float, alpha: float,
                           tol: ToleranceProfile | None = None) -> AuditReport:
    """|P^{A->B}(a->b) - P^{B->A}(b->a)| <= min{||[P_a,P_b]||, ||P_a o_alpha P_b||} (Inv_A + Inv_B)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    r, a, b = _prep(rho, A, B)
    i, j = _cells(a, b, a_val, b_val)
    pa, pb = a.projectors[i], b.projectors[j]
    lhs = abs(op_joint(r, a, b).probs[i, j] - op_joint(r, b, a).probs[j, i])
    inv_a, inv_b = _inv_lueders(r, a), _inv_lueders(r, b)
    n_comm = mk.op_norm(mk.commutator(pa, pb))
    n_ord = mk.op_norm(mk.ordered_product(pa, pb, alpha))
    rhs = min(n_comm, n_ord) * (inv_a + inv_b)
    return _report("PROB_ORDER_UPPER", lhs, rhs, tol=tol,
                   terms={"inv_a": inv_a, "inv_b": inv_b, "norm_commutator": n_comm, "norm_ordered": n_ord},
                   witness=_wit(rho=r, A=a, B=b, a=float(a.values[i]), b=float(b.values[j]), alpha=alpha))


def audit_prob_lower(rho, A, B, rep="MH", tol: ToleranceProfile | None = None) -> AuditReport:
    """||P^{A->B} - P^#||_TV >= Delta_A(B; rho)."""
    r, a, b = _prep(rho, A, B)
    table = qjp(r, a, b, rep)
    lhs = tv_distance(op_joint(r, a, b), table)
    rhs = max_disturbance(lueders_instrument(a), b, r)
    return _report("PROB_LOWER", lhs, rhs, lower=True, tol=tol,
                   terms={"rep": table.rep, "support_b": table.b_values.tolist()},
                   witness=_wit(rho=r, A=a, B=b, rep=table.rep))


def audit_prob_order_lower(rho, A, B, tol: ToleranceProfile | None = None) -> AuditReport:
    """||P^{A->B} - P^{B->A}||_TV >= max{Delta_A(B; rho), Delta_B(A; rho)}."""
    r, a, b = _prep(rho, A, B)
    lhs = tv_distance(op_joint(r, a, b), op_joint(r, b, a).transpose())
    d_ab = max_disturbance(lueders_instrument(a), b, r)
    d_ba = max_disturbance(lueders_instrument(b), a, r)
    comm = mk.commutator(a.mat, b.mat)
    comm_rho = float(np.real(np.trace(-(comm @ comm) @ r.mat)))
    notes = []
    if lhs <= 1e-12 and comm_rho > 1e-9:
        notes.append("orders agree in total variation although the state-dependent "
                     f"non-commutativity tr[-[A,B]^2 rho] = {comm_rho:.12g} is nonzero")
    return _report("PROB_ORDER_LOWER", lhs, max(d_ab, d_ba), lower=True, tol=tol,
                   terms={"delta_a_b": d_ab, "delta_b_a": d_ba, "comm_state_norm": comm_rho,
                          "comm_expect": complex(np.trace(r.mat @ comm))},
                   notes=notes, witness=_wit(rho=r, A=a, B=b))


def audit_povm_upper(rho, M: Instrument, N: Instrument, m, n, alpha: float,
                     tol: ToleranceProfile | None = None) -> AuditReport:
    """|P^{M->N}(m,n) - P^alpha(m,n)| <= ||E(m) o_alpha F(n)|| Inv_M(rho) + ||F(n)|| R_m(rho).

    R_m(rho) = ||M_m(rho) o_alpha Ebar - Mbar(rho) o_alpha E(m)||_1 with
    Ebar = sum_{m' != m} E(m') and Mbar = sum_{m' != m} M_m'; it vanishes
    for repeatable (e.g. Lueders) instruments.  The value with a plus sign
    between the two products is recorded as ``nonrepeat_plus``.
    """
    r = density_matrix(rho)
    if not (r.dim == M.dim == N.dim):
        raise DimensionMismatch(f"dims {r.dim}, {M.dim}, {N.dim}")
    im = M._index(m)
    e = M.povm(m)
    f = N.povm(n)
    ebar = np.eye(r.dim) - e
    sig = M.operation(m, r.mat)
    tau = M.channel(r.mat) - sig
    p_seq = float(np.real(np.trace(sig @ f)))
    p_al = complex(np.trace(r.mat @ mk.ordered_product(e, f, alpha)))
    lhs = abs(p_seq - p_al)
    inv = invasiveness_state(M, r)
    n_ord = mk.op_norm(mk.ordered_product(e, f, alpha))
    nonrep = mk.trace_norm(mk.ordered_product(sig, ebar, alpha) - mk.ordered_product(tau, e, alpha))
    nonrep_plus = mk.trace_norm(mk.ordered_product(sig, ebar, alpha) + mk.ordered_product(tau, e, alpha))
    n_f = mk.op_norm(f)
    rhs = n_ord * inv + n_f * nonrep
    return _report("POVM_UPPER", lhs, rhs, tol=tol,
                   terms={"invasiveness_term": n_ord * inv, "nonrepeat_term": n_f * nonrep,
                          "inv_m": inv, "nonrepeat": nonrep, "nonrepeat_plus": nonrep_plus,
                          "p_sequential": p_seq, "p_alpha": p_al},
                   witness=_wit(rho=r, M=M, N=N, m=M.labels[im], n=str(n), alpha=alpha))


def audit_inv_delta_duality(M: Instrument, rho, tol: ToleranceProfile | None = None) -> AuditReport:
    """Inv_M(rho) = Delta_M(A*; rho) with A* = sign(Lambda_M(rho) - rho)."""
    r = density_matrix(rho)
    if r.dim != M.dim:
        raise DimensionMismatch(f"dims {r.dim}, {M.dim}")
    diff = M.channel(r.mat) - r.mat
    a_star = make_observable(mk.sign_operator(0.5 * (diff + mk.dagger(diff))))
    lhs = mk.trace_norm(diff)
    rhs = max_disturbance(M, a_star, r)
    rep = _report("INV_DELTA_DUALITY", lhs, rhs, tol=tol,
                  terms={"spectrum_a_star": a_star.values.tolist()},
                  witness=_wit(rho=r, M=M, A_star=a_star))
    # equality: orient slack as -|lhs - rhs|
    rep.slack = -abs(lhs - rhs)
    rep.passed = bool(rep.slack >= -resolve(tol).tol_audit)
    return rep


# -- campaigns -------------------------------------------------------------

@dataclass(frozen=True)
class CampaignSpec:
    trials: int = 1000
    dims: tuple[int, ...] = (2, 3, 4, 6)
    seed: int = 20240917
    inequalities: tuple[str, ...] = CAMPAIGN_DEFAULT
    alpha_range: tuple[float, float] = (-1.0, 2.0)  # for CORR_* audits
    alpha: float | None = None  # fixed alpha instead of a random draw
    workers: int = 1
    tol: ToleranceProfile | None = None
    opt: OptimizerConfig | None = None


def _observable(d, rng):
    kind = rng.random()
    if kind < 0.6:
        return en.random_observable(d, rng)
    if kind < 0.8:
        return en.random_degenerate_observable(d, rng)
    return en.random_dichotomic(d, rng)


def _state(d, rng):
    return en.random_pure_state(d, rng) if rng.random() < 0.3 else en.random_state(d, rng)


def run_trial(iid: str, index: int, spec: CampaignSpec) -> AuditReport:
    rng = en.trial_rng(spec.seed, hash_ineq(iid) * 1_000_003 + index)
    d = spec.dims[index % len(spec.dims)]
    tol = spec.tol
    if iid in ("CORR_UPPER", "CORR_ORDER_UPPER"):
        lo, hi = spec.alpha_range
        alpha = float(rng.uniform(lo, hi))
        if spec.alpha is not None:
            alpha = spec.alpha
        fn = audit_corr_upper if iid == "CORR_UPPER" else audit_corr_order_upper
        rep = fn(_state(d, rng), _observable(d, rng), _observable(d, rng), alpha, tol=tol)
    elif iid in ("PROB_UPPER", "PROB_ORDER_UPPER"):
        a, b = _observable(d, rng), _observable(d, rng)
        av = float(a.values[rng.integers(len(a.values))])
        bv = float(b.values[rng.integers(len(b.values))])
        fn = audit_prob_upper if iid == "PROB_UPPER" else audit_prob_order_upper
        alpha = float(rng.random()) if spec.alpha is None else spec.alpha
        rep = fn(_state(d, rng), a, b, av, bv, alpha, tol=tol)
    elif iid == "PROB_LOWER":
        rep_tag = ["KD", "MH", "SS", f"alpha:{rng.uniform(-1, 2)!r}"][int(rng.integers(4))]
        rep = audit_prob_lower(_state(d, rng), _observable(d, rng), _observable(d, rng), rep_tag, tol=tol)
    elif iid == "PROB_ORDER_LOWER":
        rep = audit_prob_order_lower(_state(d, rng), _observable(d, rng), _observable(d, rng), tol=tol)
    elif iid == "POVM_UPPER":
        M = en.random_instrument(d, rng)
        N = en.random_instrument(d, rng)
        m = M.labels[int(rng.integers(len(M.labels)))]
        n = N.labels[int(rng.integers(len(N.labels)))]
        alpha = float(rng.random()) if spec.alpha is None else spec.alpha
        rep = audit_povm_upper(_state(d, rng), M, N, m, n, alpha, tol=tol)
    elif iid == "INV_DELTA_DUALITY":
        rep = audit_inv_delta_duality(en.random_instrument(d, rng), _state(d, rng), tol=tol)
    elif iid == "SUP_CORR":
        alpha = float(rng.uniform(0.0, 1.0)) if spec.alpha is None else spec.alpha
        rep = audit_sup_correlation(_observable(d, rng), _observable(d, rng), alpha,
                                    cfg=spec.opt or OptimizerConfig(restarts=8, budget=4000, seed=spec.seed + index),
                                    tol=tol)
    else:
        raise ValueError(f"unknown inequality {iid!r}")
    rep.trial = index
    rep.dim = d
    return rep


def hash_ineq(iid: str) -> int:
    return INEQUALITIES.index(iid) + 1


def _run_chunk(args):
    iid, indices, spec = args
    return [run_trial(iid, i, spec) for i in indices]


def run_campaign(spec: CampaignSpec) -> list[AuditReport]:
    """All trials for every requested inequality, ordered by (inequality, trial)."""
    for iid in spec.inequalities:
        if iid not in INEQUALITIES:
            raise ValueError(f"unknown inequality {iid!r}")
    jobs = []
    for iid in spec.inequalities:
        idx = list(range(spec.trials))
        nchunk = max(1, spec.workers)
        for c in range(nchunk):
            jobs.append((iid, idx[c::nchunk], spec))
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    reports = [r for part in parts for r in part]
    reports.sort(key=lambda r: (INEQUALITIES.index(r.inequality_id), r.trial))
    return reports


def summarize(reports) -> dict[str, dict]:
    out: dict[str, dict] = {}
    for r in reports:
        s = out.setdefault(r.inequality_id, {"n": 0, "failures": 0, "min_slack": np.inf})
        s["n"] += 1
        s["failures"] += int(not r.passed)
        s["min_slack"] = min(s["min_slack"], r.slack)
    return out


def to_jsonl(reports) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


CSV_FIELDS = ("inequality_id", "trial", "dim", "lhs", "rhs", "slack", "passed")


def to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        w.writerow([fmt(getattr(r, k)) if getattr(r, k) is not None else "" for k in CSV_FIELDS])
    return buf.getvalue()
