"""Operational and algebraic correlations and the quasi-joint probability tables.

Conventions
-----------
* Operational joint: ``P(a -> b) = tr[P_A(a) rho P_A(a) P_B(b)]``.
* Kirkwood-Dirac table: ``KD(a, b) = tr[rho P_A(a) P_B(b)]``.
* ``ALPHA(alpha)``: ``alpha*tr[rho P_A P_B] + (1-alpha)*tr[rho P_B P_A]``, i.e.
  ``Re KD + i(2 alpha - 1) Im KD``.  ``MH`` is ``ALPHA(1/2)``.
  ``alpha_convention="proof"`` switches to ``Re KD + alpha Im KD``.
* ``SS`` (semi-symmetrized, B split): weight at ``(a, (b + b')/2)`` is
  ``sum tr[rho P_B(b') P_A(a) P_B(b)]`` over spectral pairs with that midpoint.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from . import matkernel as mk
from .errors import (
    DimensionMismatch,
    NotPureState,
    Undefined,
    UnknownRepresentation,
    ValueNotInSupport,
)
from .quantum import (
    DensityMatrix,
    Observable,
    born_probs,
    density_matrix,
    lueders_channel,
    make_observable,
)
from .tolerance import ToleranceProfile, resolve

REPRESENTATIONS = ("KD", "ALPHA", "MH", "SS")


@dataclass(frozen=True)
class Representation:
    kind: str
    alpha: float | None = None
    alpha_convention: str = "mixture"

    @property
    def tag(self) -> str:
        if self.kind == "ALPHA":
            return f"ALPHA({self.alpha:g})"
        return self.kind

    def __str__(self) -> str:
        return self.tag


_ALPHA_RE = re.compile(r"^alpha[:(]\s*([^)]+?)\s*\)?$", re.IGNORECASE)


def parse_rep(rep, alpha_convention: str = "mixture") -> Representation:
    """Accepts ``"kd"``, ``"mh"``, ``"ss"``, ``"alpha:0.3"``, ``"ALPHA(0.3)"`` or a Representation."""
    if isinstance(rep, Representation):
        return rep
    if alpha_convention not in ("mixture", "proof"):
        raise UnknownRepresentation(f"unknown alpha convention {alpha_convention!r}")
    s = str(rep).strip()
    up = s.upper()
    if up in ("KD", "MH", "SS"):
        return Representation(up, 0.5 if up == "MH" else None, alpha_convention)
    m = _ALPHA_RE.match(s)
    if m:
        try:
            return Representation("ALPHA", float(m.group(1)), alpha_convention)
        except ValueError:
            pass
    raise UnknownRepresentation(f"unknown representation {rep!r}")


def _state(rho) -> np.ndarray:
    return density_matrix(rho).mat


def _obs(x) -> Observable:
    return make_observable(x)


def _check(rho: np.ndarray, *obs: Observable) -> None:
    d = rho.shape[0]
    for o in obs:
        if o.dim != d:
            raise DimensionMismatch(f"state has dim {d}, observable has dim {o.dim}")


@dataclass(frozen=True, eq=False)
class JointDistribution:
    a_values: np.ndarray
    b_values: np.ndarray
    probs: np.ndarray  # probs[i, j] for (a_values[i], b_values[j])

    def cells(self) -> dict[tuple[float, float], complex]:
        return {(float(a), float(b)): complex(self.probs[i, j])
                for i, a in enumerate(self.a_values) for j, b in enumerate(self.b_values)}

    def marginal_a(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.b_values, self.a_values, self.probs.T)


@dataclass(frozen=True, eq=False)
class QjpTable:
    representation: Representation
    a_values: np.ndarray
    b_values: np.ndarray
    weights: np.ndarray  # complex, weights[i, j] for (a_values[i], b_values[j])

    @property
    def rep(self) -> str:
        return self.representation.tag

    def cells(self) -> dict[tuple[float, float], complex]:
        return {(float(a), float(b)): complex(self.weights[i, j])
                for i, a in enumerate(self.a_values) for j, b in enumerate(self.b_values)}

    def marginal_a(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def total(self) -> complex:
        return complex(self.weights.sum())

    def to_json(self) -> str:
        return json.dumps({
            "rep": self.rep,
            "a": self.a_values.tolist(),
            "b": self.b_values.tolist(),
            "w_re": np.real(self.weights).tolist(),
            "w_im": np.imag(self.weights).tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "QjpTable":
        d = json.loads(text)
        w = np.asarray(d["w_re"], dtype=float) + 1j * np.asarray(d["w_im"], dtype=float)
        return cls(parse_rep(d["rep"]), np.asarray(d["a"], dtype=float),
                   np.asarray(d["b"], dtype=float), w)


def _lueders_branch(rho: np.ndarray, obs: Observable) -> list[np.ndarray]:
    return [p @ rho @ p for p in obs.projectors]


def op_joint(rho, A, B) -> JointDistribution:
    """Statistics of measuring A (Lueders) and then B."""
    r, a, b = _state(rho), _obs(A), _obs(B)
    _check(r, a, b)
    probs = np.array([[np.real(np.trace(br @ pb)) for pb in b.projectors]
                      for br in _lueders_branch(r, a)])
    probs = np.where((probs < 0) & (probs >= -1e-12), 0.0, probs)
    return JointDistribution(a.values, b.values, probs)


def op_correlation(rho, A, B) -> float:
    j = op_joint(rho, A, B)
    return float(j.a_values @ j.probs @ j.b_values)


def alg_correlation(rho, A, B, alpha: float) -> complex:
    """tr[rho (alpha AB + (1-alpha) BA)]."""
    r = _state(rho)
    am = A.mat if isinstance(A, Observable) else mk.as_matrix(A)
    bm = B.mat if isinstance(B, Observable) else mk.as_matrix(B)
    if am.shape != r.shape or bm.shape != r.shape:
        raise DimensionMismatch("state and observables differ in dimension")
    return complex(np.trace(r @ mk.ordered_product(am, bm, alpha)))


def _merge_sorted(values: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Cluster sorted-able values; returns (representatives, index of each input)."""
    order = np.argsort(values, kind="stable")
    reps: list[list[float]] = []
    idx = np.empty(len(values), dtype=int)
    for k in order:
        v = values[k]
        if reps and v - reps[-1][-1] <= tol:
            reps[-1].append(v)
        else:
            reps.append([v])
        idx[k] = len(reps) - 1
    return np.array([np.mean(g) for g in reps]), idx


def kd_weights(rho: np.ndarray, a: Observable, b: Observable) -> np.ndarray:
    return np.array([[np.trace(rho @ pa @ pb) for pb in b.projectors] for pa in a.projectors])


def qjp(rho, A, B, rep="KD", *, alpha_convention: str = "mixture",
        tol: ToleranceProfile | None = None) -> QjpTable:
    """Quasi-joint probability table of (A, B) in the state rho."""
    r, a, b = _state(rho), _obs(A), _obs(B)
    _check(r, a, b)
    rp = parse_rep(rep, alpha_convention)
    if rp.kind == "SS":
        return _ss_table(r, a, b, rp, resolve(tol).cluster_tol)
    kd = kd_weights(r, a, b)
    if rp.kind == "KD":
        w = kd
    else:
        al = rp.alpha
        if rp.alpha_convention == "proof":
            w = kd.real + 1j * al * kd.imag
        else:
            w = kd.real + 1j * (2.0 * al - 1.0) * kd.imag
    return QjpTable(rp, a.values, b.values, w)


def _ss_table(rho, a: Observable, b: Observable, rp: Representation, ctol: float) -> QjpTable:
    nb = len(b.values)
    pairs = [(i, j) for i in range(nb) for j in range(nb)]
    mids = np.array([(b.values[i] + b.values[j]) / 2.0 for i, j in pairs])
    mid_values, mid_idx = _merge_sorted(mids, ctol)
    w = np.zeros((len(a.values), len(mid_values)), dtype=complex)
    for ia, pa in enumerate(a.projectors):
        for k, (i, j) in enumerate(pairs):
            # tr[rho P_B(b_j) P_A(a) P_B(b_i)]
            w[ia, mid_idx[k]] += np.trace(rho @ b.projectors[j] @ pa @ b.projectors[i])
    return QjpTable(rp, a.values, mid_values, w)


def _find(values: np.ndarray, x: float, tol: float) -> int:
    hits = np.flatnonzero(np.abs(values - x) <= tol)
    if hits.size == 0:
        raise ValueNotInSupport(f"{x!r} not in support {values.tolist()}")
    return int(hits[0])


def cond_moments(table: QjpTable, value: float, given: str = "b",
                 tol: ToleranceProfile | None = None) -> tuple[complex, complex]:
    """(first moment, marginal) of the slice at ``value`` of the conditioning axis."""
    t = resolve(tol)
    if given == "b":
        j = _find(table.b_values, value, t.cluster_tol)
        col = table.weights[:, j]
        return complex(table.a_values @ col), complex(col.sum())
    if given == "a":
        i = _find(table.a_values, value, t.cluster_tol)
        row = table.weights[i, :]
        return complex(table.b_values @ row), complex(row.sum())
    raise ValueError("given must be 'a' or 'b'")


def quasi_cond_expect(table: QjpTable, value: float, given: str = "b",
                      weight_floor: float | None = None,
                      tol: ToleranceProfile | None = None):
    """Quasi-conditional expectation of one variable given the other.

    ``given="b"`` returns sum_a a W(a, b) / sum_a W(a, b).  For a KD table
    built as ``qjp(psi, B, A)`` and ``given="a"`` this is Aharonov's weak
    value <b|A|psi>/<b|psi>; with the axes the other way round it is the
    complex conjugate.  Returns ``Undefined`` when the marginal slice is
    smaller than the weight floor in modulus.
    """
    t = resolve(tol)
    floor = t.weight_floor if weight_floor is None else weight_floor
    moment, marginal = cond_moments(table, value, given, t)
    if abs(marginal) < floor:
        return Undefined("quasi-conditional marginal below floor", abs(marginal))
    return moment / marginal


def weak_value(pre, post_vector, A, weight_floor: float | None = None,
               tol: ToleranceProfile | None = None):
    """<b|A|psi> / <b|psi> for a pure pre-selected state and a post-selected vector."""
    t = resolve(tol)
    floor = t.weight_floor if weight_floor is None else weight_floor
    r = _state(pre)
    w, u = mk.eig_hermitian(r)
    if w[-1] < 1.0 - 1e-9:
        raise NotPureState(f"pre-selected state has largest eigenvalue {w[-1]:.12g} < 1")
    psi = u[:, -1]
    b = np.asarray(post_vector, dtype=np.complex128).ravel()
    if b.shape[0] != r.shape[0]:
        raise DimensionMismatch("post-selection vector has the wrong dimension")
    nb = np.linalg.norm(b)
    if abs(nb - 1.0) > 1e-9:
        raise ValueError(f"post-selection vector not normalized (norm {nb:.12g})")
    am = A.mat if isinstance(A, Observable) else mk.as_matrix(A)
    overlap = np.vdot(b, psi)
    if abs(overlap) ** 2 < floor:
        return Undefined("pre/post overlap below floor", abs(overlap))
    return complex(np.vdot(b, am @ psi) / overlap)


def post_selection_observable(post_vector) -> Observable:
    """|b><b| as an observable with spectrum {0, 1} (just {1} in dimension one)."""
    b = np.asarray(post_vector, dtype=np.complex128).ravel()
    p1 = np.outer(b, b.conj())
    d = b.shape[0]
    if d == 1:
        return Observable(p1, np.array([1.0]), (p1,))
    p0 = np.eye(d) - p1
    return Observable(p1.copy(), np.array([0.0, 1.0]), (p0, p1))


def tv_distance(p, q, tol: float = 1e-8) -> float:
    """Total variation sum |p - q| over the union support (not halved).

    ``p`` and ``q`` are JointDistribution / QjpTable objects or cell dicts
    ``{(a, b): weight}``.  Cells present on one side only count fully.
    """
    cp = p.cells() if hasattr(p, "cells") else dict(p)
    cq = q.cells() if hasattr(q, "cells") else dict(q)
    keys = list(cp) + list(cq)
    a_all = np.array([k[0] for k in keys])
    b_all = np.array([k[1] for k in keys])
    _, ia = _merge_sorted(a_all, tol)
    _, ib = _merge_sorted(b_all, tol)
    acc: dict[tuple[int, int], complex] = {}
    n = len(cp)
    for k, (key, w) in enumerate(cp.items()):
        cell = (ia[k], ib[k])
        acc[cell] = acc.get(cell, 0.0) + w
    for k, (key, w) in enumerate(cq.items()):
        cell = (ia[n + k], ib[n + k])
        acc[cell] = acc.get(cell, 0.0) - w
    return float(sum(abs(v) for v in acc.values()))


def three_point_ordered(rho, ops) -> complex:
    """tr[rho X1 X2 ... Xn] for a fixed operator ordering."""
    r = _state(rho)
    prod = np.eye(r.shape[0], dtype=complex)
    for x in ops:
        prod = prod @ (x.mat if isinstance(x, Observable) else np.asarray(x))
    return complex(np.trace(r @ prod))


@dataclass(frozen=True, eq=False)
class SampleRecord:
    seed: int
    n: int
    a_values: np.ndarray
    b_values: np.ndarray
    counts: np.ndarray = field(repr=False)

    def frequencies(self) -> np.ndarray:
        return self.counts / self.n


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))


def sample_sequential(rho, A, B, n: int, seed: int,
                      tol: ToleranceProfile | None = None) -> SampleRecord:
    """Simulate n runs of: measure A (Lueders update), then measure B.

    Each run consumes two uniforms from a Philox stream keyed by ``seed``:
    the first selects a from the Born distribution of A, the second selects
    b from the Born distribution of B in the post-measurement state.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = resolve(tol)
    r, a, b = _state(rho), _obs(A), _obs(B)
    _check(r, a, b)
    pa = born_probs(r, a)
    cond = np.empty((len(a.values), len(b.values)))
    for i, branch in enumerate(_lueders_branch(r, a)):
        w = float(np.real(np.trace(branch)))
        if w > t.weight_floor:
            cond[i] = np.clip(born_probs(branch / w, b), 0.0, None)
        else:
            cond[i] = 1.0 / len(b.values)  # never selected in practice
        cond[i] /= cond[i].sum()
    cum_a = np.cumsum(np.clip(pa, 0.0, None))
    cum_a /= cum_a[-1]
    cum_b = np.cumsum(cond, axis=1)
    cum_b /= cum_b[:, -1:]
    rng = make_rng(seed)
    u = rng.random((n, 2))
    ia = np.minimum(np.searchsorted(cum_a, u[:, 0], side="right"), len(cum_a) - 1)
    ib = np.empty(n, dtype=np.int64)
    for i in range(len(a.values)):
        sel = ia == i
        ib[sel] = np.minimum(np.searchsorted(cum_b[i], u[sel, 1], side="right"), len(b.values) - 1)
    counts = np.zeros((len(a.values), len(b.values)), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return SampleRecord(int(seed), int(n), a.values, b.values, counts)


def lueders_image(rho, A) -> DensityMatrix:
    """Lambda_A(rho) as a state."""
    r, a = _state(rho), _obs(A)
    out = lueders_channel(a, r)
    return DensityMatrix(0.5 * (out + mk.dagger(out)))
