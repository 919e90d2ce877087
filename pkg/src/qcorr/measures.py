"""Invasiveness and disturbance of measurements.

* ``invasiveness_state``: Inv_M(rho) = ||Lambda_M(rho) - rho||_1
* ``invasiveness_sup``: sup over states, by multi-start search over pure states
  (the objective is convex in rho, so the sup sits on an extreme point)
* ``disturbance_operator``: delta_M(A) = Lambda_M^dag(A) - A
* ``max_disturbance``: Delta_M(A; rho), closed form over the finite spectrum
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linprog, minimize

from . import matkernel as mk
from .errors import DimensionMismatch
from .quantum import DensityMatrix, Instrument, Observable, density_matrix, make_observable
from .ensembles import haar_vector, trial_rng

DEFAULT_SEED = 20240917


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    budget: int = 10_000  # objective evaluations over all restarts
    seed: int = DEFAULT_SEED
    xatol: float = 1e-10
    fatol: float = 1e-13


@dataclass(frozen=True, eq=False)
class StateOptimum:
    value: float
    argmax_state: DensityMatrix
    iterations: int
    restarts: int
    budget_exhausted: bool = False
    argmax_vector: np.ndarray | None = None


def _check(inst: Instrument, d: int) -> None:
    if inst.dim != d:
        raise DimensionMismatch(f"instrument acts on dim {inst.dim}, state has dim {d}")


def invasiveness_state(M: Instrument, rho) -> float:
    r = density_matrix(rho).mat
    _check(M, r.shape[0])
    return mk.trace_norm(M.channel(r) - r)


# -- pure-state chart ------------------------------------------------------

def chart_dim(d: int) -> int:
    return 2 * (d - 1)


def chart_to_vector(x: np.ndarray, d: int) -> np.ndarray:
    """Hyperspherical amplitudes (d-1 angles) and relative phases (d-1)."""
    if d == 1:
        return np.ones(1, dtype=np.complex128)
    ang, ph = x[: d - 1], x[d - 1:]
    amp = np.empty(d)
    s = 1.0
    for k in range(d - 1):
        amp[k] = s * np.cos(ang[k])
        s *= np.sin(ang[k])
    amp[-1] = s
    v = amp.astype(np.complex128)
    v[1:] *= np.exp(1j * ph)
    return v


def vector_to_chart(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).ravel()
    d = v.shape[0]
    if d == 1:
        return np.zeros(0)
    v = v / np.linalg.norm(v)
    if abs(v[0]) > 0:
        v = v * np.exp(-1j * np.angle(v[0]))
    amp = np.abs(v)
    ang = np.empty(d - 1)
    rest = 1.0
    for k in range(d - 1):
        c = np.clip(amp[k] / rest, -1.0, 1.0) if rest > 1e-300 else 1.0
        ang[k] = np.arccos(c)
        rest = rest * np.sin(ang[k])
    ph = np.angle(v[1:])
    return np.concatenate([ang, ph])


def maximize_pure(objective: Callable[[np.ndarray], float], d: int, cfg: OptimizerConfig | None = None,
                  starts: list[np.ndarray] | None = None) -> StateOptimum:
    """Maximize ``objective(unit vector)`` by Nelder-Mead from several starts.

    Start vectors: the optional ``starts`` first, then Haar-random vectors
    up to ``cfg.restarts``.  Restart k draws from its own Philox stream, so
    the result is a deterministic function of (seed, restarts, budget).
    """
    cfg = cfg or OptimizerConfig()
    n = chart_dim(d)
    if n == 0:
        v = np.ones(1, dtype=np.complex128)
        return StateOptimum(float(objective(v)), DensityMatrix(np.ones((1, 1), complex)), 1, 1, False, v)
    starts = list(starts or [])
    nrest = max(cfg.restarts, len(starts), 1)
    per = max(cfg.budget // nrest, 20 * n)
    best_val, best_v, iters, exhausted = -np.inf, None, 0, False

    def f(x):
        return -objective(chart_to_vector(x, d))

    for k in range(nrest):
        v0 = starts[k] if k < len(starts) else haar_vector(d, trial_rng(cfg.seed, k))
        x0 = vector_to_chart(v0)
        # Nelder-Mead initial simplex edge of 0.3 rad; good coverage on the chart
        sim = np.vstack([x0] + [x0 + 0.3 * e for e in np.eye(n)])
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"maxfev": per, "xatol": cfg.xatol, "fatol": cfg.fatol,
                                "initial_simplex": sim})
        iters += int(res.nfev)
        if res.status == 1:
            exhausted = True
        for x, val in ((x0, f(x0)), (res.x, res.fun)):
            if -val > best_val:
                best_val, best_v = -val, chart_to_vector(x, d)
    rho = DensityMatrix(np.outer(best_v, best_v.conj()))
    return StateOptimum(float(best_val), rho, iters, nrest, exhausted, best_v)


def invasiveness_sup(M: Instrument, cfg: OptimizerConfig | None = None) -> StateOptimum:
    """Inv(M) = sup_rho Inv_M(rho), searched over pure states."""
    ks = M.all_kraus()
    return maximize_pure(lambda v: mk.invasiveness_pure(v, ks), M.dim, cfg)


# -- disturbance -----------------------------------------------------------

def disturbance_operator(M: Instrument, A) -> np.ndarray:
    am = A.mat if isinstance(A, Observable) else mk.as_matrix(A)
    _check(M, am.shape[0])
    return M.adjoint_channel(am) - am


def max_disturbance(M: Instrument, A, rho) -> float:
    """Delta_M(A; rho) = sum_a |tr[(Lambda_M(rho) - rho) P_A(a)]|.

    The sup over f with ||f(A)|| = max|f(a)| <= 1 of a linear functional
    sum_a f(a) c_a is attained at f(a) = sign(c_a); the c_a are real, so real
    and complex f give the same value.
    """
    r = density_matrix(rho).mat
    a = make_observable(A)
    _check(M, r.shape[0])
    diff = M.channel(r) - r
    return float(sum(abs(np.real(np.trace(diff @ p))) for p in a.projectors))


def disturbance_ratio(M: Instrument, A: Observable, rho: np.ndarray, f: np.ndarray) -> float:
    """|<delta_M(f(A))>_rho| / ||f(A)|| for values f on the spectrum of A."""
    fa = sum(fv * p for fv, p in zip(f, A.projectors))
    den = mk.op_norm(fa)
    if den == 0.0:
        return 0.0
    return abs(np.trace(rho @ disturbance_operator(M, fa))) / den


def max_disturbance_oracle(M: Instrument, A, rho) -> tuple[float, np.ndarray]:
    """Delta by linear programming over the l-infinity ball of real functions.

    Coefficients go through the Heisenberg-picture map Lambda^dag, which is
    independent of the Schroedinger-picture closed form.  Returns the value
    re-evaluated at the maximizer, and the maximizer f.
    """
    r = density_matrix(rho).mat
    a = make_observable(A)
    _check(M, r.shape[0])
    c = np.array([np.real(np.trace(r @ disturbance_operator(M, p))) for p in a.projectors])
    n = len(c)
    best, best_f = 0.0, np.ones(n)
    for sgn in (1.0, -1.0):
        res = linprog(-sgn * c, bounds=[(-1.0, 1.0)] * n, method="highs")
        if res.status == 0:
            val = disturbance_ratio(M, a, r, res.x)
            if val > best:
                best, best_f = val, res.x
    return best, best_f
