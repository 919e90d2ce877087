"""Leggett-Garg K = C12 + C23 - C13 under several readings of the correlators.

Modes
-----
``operational``   each C_ij from a two-time sequential Lueders measurement
``algebraic``     C_ij = Re tr[rho0 (A_i o_{1/2} A_j)]
``quasi``         measure at t1 and t3, replace the t2 value by the
                  quasi-conditional expectation E^#_{rho_a1}[A2 | a3]:

    K^# = sum_{a1,a3} (a1 E + E a3 - a1 a3) P^{A1->A3}(a1 -> a3)

With ``support="full"`` (default) every support point beta of the table's
second variable contributes its moment, (a1 + beta) * sum_a2 a2 W(a2, beta).
With ``support="spectrum"`` the sum runs over a3 in the spectrum of A3 only
and the mode tag gains a ``+SPECTRUM`` suffix.  The two differ only for the
semi-symmetrized table, whose support includes midpoints between eigenvalues
where the marginal vanishes: the full sum reproduces the Kirkwood-Dirac K,
the restricted one gives K^SS with maximum 1.

Times are phases when the generator is H = sigma_x / 2 (omega = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .correlations import alg_correlation, op_correlation, parse_rep, qjp
from .errors import NonDichotomic, TrivialObservable, UndefinedConditional
from .quantum import (
    DensityMatrix,
    Hamiltonian,
    Observable,
    Propagator,
    born_probs,
    density_matrix,
    hamiltonian,
    make_observable,
)
from .tolerance import ToleranceProfile, resolve

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class LgScenario:
    rho0: DensityMatrix
    H: Hamiltonian
    times: tuple[float, float, float]
    obs: Observable

    def __post_init__(self):
        t1, t2, t3 = self.times
        # t2 may coincide with t1 or t3 (grid edges); t1 < t3 is required
        if not (t1 <= t2 <= t3 and t1 < t3):
            raise ValueError(f"times must satisfy t1 <= t2 <= t3, t1 < t3: got {self.times}")


def scenario(rho0, H, times, obs) -> LgScenario:
    return LgScenario(density_matrix(rho0), hamiltonian(H), tuple(float(t) for t in times),
                      make_observable(obs))


def precession_scenario(t: float, T: float, omega: float = 1.0) -> LgScenario:
    """|z+>, sigma_z at times (0, t, T) under H = (omega/2) sigma_x."""
    return scenario(np.array([1.0, 0.0]), 0.5 * omega * SX, (0.0, t, T), SZ)


@dataclass
class KResult:
    mode: str
    C12: float
    C23: float
    C13: float
    K: float
    violates: bool
    imag: float = 0.0  # imaginary part of K (quasi modes)
    excluded: float = 0.0  # |K contribution| from support points left out of the sum
    defined: bool = True
    reason: str = ""
    meta: dict = field(default_factory=dict)


def _kresult(mode, c12, c23, c13, imag=0.0, excluded=0.0) -> KResult:
    k = c12 + c23 - c13
    return KResult(mode, float(c12), float(c23), float(c13), float(k), bool(k > 1 + 1e-9),
                   float(imag), float(excluded))


def undefined_result(mode: str, reason: str) -> KResult:
    nan = float("nan")
    return KResult(mode, nan, nan, nan, nan, False, nan, nan, False, reason)


def is_pm_one(obs: Observable, tol: float) -> bool:
    return all(min(abs(v - 1), abs(v + 1)) <= tol for v in obs.values)


def heisenberg_family(obs: Observable, prop: Propagator, times) -> list[Observable]:
    return [obs.conjugate_by(prop(t)) for t in times]


def mode_tag(mode: str, rep=None) -> str:
    m = mode.lower()
    if m == "operational":
        return "OPERATIONAL"
    if m in ("algebraic", "algebraic_sym"):
        return "ALGEBRAIC_SYM"
    if m == "quasi":
        return f"QUASI({parse_rep(rep or 'KD').tag})"
    raise ValueError(f"unknown mode {mode!r}")


def lg_k(s: LgScenario, mode: str = "quasi", rep="KD", *, support: str = "full",
         inequality: bool = True, alpha_convention: str = "mixture",
         tol: ToleranceProfile | None = None, _family=None) -> KResult:
    t = resolve(tol)
    if inequality and not is_pm_one(s.obs, t.cluster_tol):
        raise NonDichotomic(f"spectrum {s.obs.values.tolist()} not contained in {{-1, +1}}")
    a1, a2, a3 = _family or heisenberg_family(s.obs, Propagator(s.H), s.times)
    tag = mode_tag(mode, rep)
    rho = s.rho0
    if tag == "OPERATIONAL":
        return _kresult(tag, op_correlation(rho, a1, a2), op_correlation(rho, a2, a3),
                        op_correlation(rho, a1, a3))
    if tag == "ALGEBRAIC_SYM":
        return _kresult(tag, alg_correlation(rho, a1, a2, 0.5).real,
                        alg_correlation(rho, a2, a3, 0.5).real, alg_correlation(rho, a1, a3, 0.5).real)
    return _quasi_k(rho, a1, a2, a3, parse_rep(rep, alpha_convention), tag, support, t)


def _quasi_k(rho: DensityMatrix, a1: Observable, a2: Observable, a3: Observable, rp, tag: str,
             support: str, t: ToleranceProfile) -> KResult:
    if support not in ("spectrum", "full"):
        raise ValueError("support must be 'spectrum' or 'full'")
    p1 = born_probs(rho.mat, a1)
    c12 = c23 = c13 = 0.0 + 0.0j
    excluded = 0.0
    for i, v1 in enumerate(a1.values):
        if p1[i] <= t.weight_floor:
            continue  # a1 never occurs; its branch carries no weight
        proj = a1.projectors[i]
        post = proj @ rho.mat @ proj / p1[i]
        table = qjp(DensityMatrix(post), a2, a3, rp, tol=t)
        moments = table.a_values @ table.weights  # sum_a2 a2 W(a2, beta)
        marg = table.weights.sum(axis=0)
        in_spec = np.array([np.min(np.abs(a3.values - b)) <= t.cluster_tol for b in table.b_values])
        p3 = born_probs(post, a3)
        for j, beta in enumerate(table.b_values):
            if in_spec[j]:
                k3 = int(np.argmin(np.abs(a3.values - beta)))
                w3 = p3[k3]
                c13 += p1[i] * v1 * beta * w3
                if support == "full":
                    c12 += p1[i] * v1 * moments[j]
                    c23 += p1[i] * beta * moments[j]
                    continue
                if abs(marg[j]) < t.weight_floor:
                    if w3 > t.weight_floor:
                        raise UndefinedConditional(
                            f"quasi-conditional slice at a3={beta:g} vanishes ({abs(marg[j]):.3g})")
                    continue
                e = moments[j] / marg[j]
                c12 += p1[i] * v1 * e * w3
                c23 += p1[i] * e * beta * w3
            else:
                contrib = p1[i] * (v1 + beta) * moments[j]
                if support == "full":
                    c12 += p1[i] * v1 * moments[j]
                    c23 += p1[i] * beta * moments[j]
                else:
                    excluded += abs(contrib)
    res = _kresult(tag + "+SPECTRUM" if support == "spectrum" else tag, c12.real, c23.real, c13.real,
                   imag=(c12 + c23 - c13).imag, excluded=excluded)
    return res


# -- closed forms (omega = 1 phases) ---------------------------------------

def k_kd_closed(t, T):
    return 2 * np.cos(T / 2) * np.cos(T / 2 - t) - np.cos(T)


def k_ss_closed(t, T):
    return 0.5 * np.cos(t) + np.cos(T - t) + 0.5 * np.cos(2 * T - t) - np.cos(T)


def e_kd_closed(t, T):
    return np.cos(T / 2 - t) / np.cos(T / 2)


# -- scans -----------------------------------------------------------------

def phase_grid(n: int = 200, step: float = np.pi / 120) -> np.ndarray:
    """k * step for k = 0..n-1; the default step (1.5 degrees) hits pi/3 and 2pi/3."""
    return np.arange(n) * step


@dataclass
class ScanResult:
    mode: str
    t_grid: np.ndarray
    T_grid: np.ndarray
    cells: list[tuple[float, float, KResult]]

    def defined(self) -> list[tuple[float, float, KResult]]:
        return [c for c in self.cells if c[2].defined]

    def argmax(self) -> tuple[float, float, KResult]:
        return max(self.defined(), key=lambda c: c[2].K)

    def K_matrix(self) -> np.ndarray:
        out = np.full((len(self.t_grid), len(self.T_grid)), np.nan)
        nT = len(self.T_grid)
        for k, (_, _, r) in enumerate(self.cells):
            out[k // nT, k % nT] = r.K
        return out


def lg_scan(rho0, H, obs, t_grid, T_grid, mode: str = "quasi", rep="KD", *,
            support: str = "full", tol: ToleranceProfile | None = None) -> ScanResult:
    """K on the grid of times (0, t, T); row-major in t, then T.

    Cells with t > T or T = 0 are marked undefined, as are cells whose
    quasi-conditional expectation does not exist.
    """
    rho0 = density_matrix(rho0)
    obs = make_observable(obs)
    prop = Propagator(H)
    t_grid = np.asarray(t_grid, dtype=float)
    T_grid = np.asarray(T_grid, dtype=float)
    cache: dict[float, Observable] = {}

    def at(x):
        if x not in cache:
            cache[x] = obs.conjugate_by(prop(x))
        return cache[x]

    a1 = at(0.0)
    tag = mode_tag(mode, rep) + ("+SPECTRUM" if (mode == "quasi" and support == "spectrum") else "")
    t_ = resolve(tol)
    if not is_pm_one(obs, t_.cluster_tol):
        raise NonDichotomic(f"spectrum {obs.values.tolist()} not contained in {{-1, +1}}")
    cells = []
    for t in t_grid:
        for T in T_grid:
            if T <= 0.0 or t > T:
                cells.append((t, T, undefined_result(tag, "time ordering")))
                continue
            s = LgScenario(rho0, prop.h, (0.0, float(t), float(T)), obs)
            try:
                r = lg_k(s, mode, rep, support=support, tol=t_, _family=(a1, at(float(t)), at(float(T))))
            except UndefinedConditional as exc:
                r = undefined_result(tag, str(exc))
            cells.append((float(t), float(T), r))
    return ScanResult(tag, t_grid, T_grid, cells)


# -- dichotomy -------------------------------------------------------------

class DichotomyGap(NamedTuple):
    gap: float
    witness_B: np.ndarray
    witness_rho: DensityMatrix
    pair: tuple[float, float]


def dichotomy_gap(A, tol: ToleranceProfile | None = None) -> DichotomyGap:
    """Largest |<A->B>_op - <{A,B}/2>_rho| from the two-eigenvalue construction.

    For eigenvalues x != y with unit eigenvectors |x>, |y>, take
    B = |x><y| + |y><x| and rho = |psi><psi|, psi = (|x> + |y>)/sqrt(2).
    Then Lambda_A(rho) has no coherence between |x> and |y>, so the
    operational correlation is 0, while {A,B}/2 = (x+y)/2 B gives (x+y)/2.
    The pair maximizing |x + y| is used; the gap is 0 exactly for spectra
    {-a, +a}.
    """
    t = resolve(tol)
    a = make_observable(A)
    if len(a.values) < 2:
        raise TrivialObservable("observable has a single spectral point")
    best = None
    for i in range(len(a.values)):
        for j in range(i + 1, len(a.values)):
            s = abs(a.values[i] + a.values[j])
            if best is None or s > best[0] + t.cluster_tol:
                best = (s, i, j)
    _, i, j = best
    vx = _unit_in(a.projectors[i])
    vy = _unit_in(a.projectors[j])
    B = np.outer(vx, vy.conj()) + np.outer(vy, vx.conj())
    psi = (vx + vy) / np.sqrt(2)
    rho = DensityMatrix(np.outer(psi, psi.conj()))
    gap = abs(a.values[i] + a.values[j]) / 2
    if len(a.values) == 2 and abs(a.values[0] + a.values[1]) <= t.cluster_tol:
        gap = 0.0
    return DichotomyGap(float(gap), B, rho, (float(a.values[i]), float(a.values[j])))


def _unit_in(p: np.ndarray) -> np.ndarray:
    """A unit vector in the range of projector p (its dominant column, normalized)."""
    k = int(np.argmax(np.real(np.diagonal(p))))
    v = p[:, k]
    return v / np.linalg.norm(v)


def direct_gap(A, B, rho) -> float:
    """|<A->B>_op - <{A,B}/2>_rho| evaluated from the definitions."""
    return abs(op_correlation(rho, A, B) - alg_correlation(rho, A, B, 0.5))
