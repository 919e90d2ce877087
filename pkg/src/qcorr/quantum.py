"""States, observables with spectral families, instruments and unitary evolution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matkernel as mk
from .errors import (
    DimensionMismatch,
    InvalidInstrument,
    NotAState,
    NotHermitian,
    Undefined,
    UnknownOutcome,
    ValueNotInSpectrum,
)
from .tolerance import ToleranceProfile, resolve


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.mat @ op))

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))


def density_matrix(m, tol: ToleranceProfile | None = None) -> DensityMatrix:
    """Validate ``m`` as a state (Hermitian, unit trace, PSD) and wrap it.

    A 1-D input is read as a state vector and normalized.
    """
    if isinstance(m, DensityMatrix):
        return m
    t = resolve(tol)
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        norm = np.linalg.norm(a)
        if norm == 0.0:
            raise NotAState("zero vector")
        a = np.outer(a, a.conj()) / norm**2
    a = mk.as_matrix(a, "state")
    try:
        w, _ = mk.eig_hermitian(a, herm_tol=t.state_tol)
    except NotHermitian as exc:
        raise NotAState(str(exc)) from exc
    tr = float(np.real(np.trace(a)))
    if abs(tr - 1.0) > t.state_tol:
        raise NotAState(f"trace {tr:.12g} != 1")
    if w[0] < -t.state_tol:
        raise NotAState(f"negative eigenvalue {w[0]:.3g}")
    a = 0.5 * (a + mk.dagger(a))
    a.setflags(write=False)
    return DensityMatrix(a)


def pure_state(vec) -> DensityMatrix:
    return density_matrix(np.asarray(vec, dtype=np.complex128).ravel())


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix with its clustered spectral family.

    ``values`` are strictly increasing; ``projectors[i]`` projects onto the
    eigenspace of ``values[i]``.
    """

    mat: np.ndarray
    values: np.ndarray
    projectors: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def spectrum(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.values.tolist(), self.projectors))

    def index_of(self, value: float, tol: float = 1e-8) -> int:
        hits = np.flatnonzero(np.abs(self.values - value) <= tol)
        if hits.size == 0:
            raise ValueNotInSpectrum(f"{value!r} not in spectrum {self.values.tolist()}")
        return int(hits[0])

    def projector(self, value: float, tol: float = 1e-8) -> np.ndarray:
        return self.projectors[self.index_of(value, tol)]

    def func(self, f) -> np.ndarray:
        """f(A) through the spectral family; ``f`` maps a value to a scalar."""
        out = np.zeros_like(self.mat)
        for a, p in zip(self.values, self.projectors):
            out = out + f(a) * p
        return out

    def conjugate_by(self, u: np.ndarray) -> "Observable":
        """Observable U^dag A U, carrying the spectral family along."""
        ud = mk.dagger(u)
        return Observable(ud @ self.mat @ u, self.values,
                          tuple(ud @ p @ u for p in self.projectors))

    def is_dichotomic(self, tol: float = 1e-8) -> bool:
        return len(self.values) == 2 and abs(self.values[0] + self.values[1]) <= tol


def make_observable(m, cluster_tol: float | None = None,
                    tol: ToleranceProfile | None = None) -> Observable:
    """Build the spectral family of a Hermitian matrix.

    Eigenvalues closer than ``cluster_tol`` to their neighbour are merged
    into one spectral point (degeneracy-weighted mean); its projector is the
    sum of the rank-1 projectors, so it does not depend on the eigenbasis
    chosen inside a degenerate eigenspace.
    """
    if isinstance(m, Observable):
        return m
    t = resolve(tol)
    ctol = t.cluster_tol if cluster_tol is None else cluster_tol
    a = mk.as_matrix(m, "observable")
    w, u = mk.eig_hermitian(a, tol=t)
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= ctol:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = np.array([w[g].mean() for g in groups])
    projectors = tuple(u[:, g] @ mk.dagger(u[:, g]) for g in groups)
    herm = 0.5 * (a + mk.dagger(a))
    return Observable(herm, values, projectors)


def observable_from_spectrum(values: Sequence[float], projectors: Sequence[np.ndarray]) -> Observable:
    vals = np.asarray(values, dtype=float)
    order = np.argsort(vals)
    projs = tuple(np.asarray(projectors[i], dtype=np.complex128) for i in order)
    mat = sum(v * p for v, p in zip(vals[order], projs))
    return Observable(mat, vals[order], projs)


@dataclass(frozen=True, eq=False)
class Instrument:
    """Labelled family of completely positive maps given by Kraus operators."""

    labels: tuple[str, ...]
    kraus: tuple[np.ndarray, ...]  # one (r_m, d, d) stack per outcome

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[1]

    def _index(self, label) -> int:
        key = str(label)
        try:
            return self.labels.index(key)
        except ValueError:
            pass
        # numeric labels from spectral points: match by value
        try:
            x = float(label)
        except (TypeError, ValueError):
            raise UnknownOutcome(label) from None
        for i, lab in enumerate(self.labels):
            try:
                if abs(float(lab) - x) <= 1e-8:
                    return i
            except ValueError:
                continue
        raise UnknownOutcome(label)

    def povm(self, label) -> np.ndarray:
        ks = self.kraus[self._index(label)]
        return np.einsum("kji,kjl->il", ks.conj(), ks)

    def povm_elements(self) -> list[np.ndarray]:
        return [self.povm(lab) for lab in self.labels]

    def all_kraus(self) -> np.ndarray:
        return np.concatenate(self.kraus, axis=0)

    def operation(self, label, rho: np.ndarray) -> np.ndarray:
        """Unnormalized M_m(rho)."""
        return mk.apply_kraus(self.kraus[self._index(label)], rho)

    def channel(self, rho: np.ndarray) -> np.ndarray:
        return mk.apply_kraus(self.all_kraus(), rho)

    def adjoint_channel(self, op: np.ndarray) -> np.ndarray:
        """Heisenberg-picture map sum K^dag X K."""
        ks = self.all_kraus()
        return np.einsum("kji,jl,klm->im", ks.conj(), op, ks)


def instrument(outcomes, tol: ToleranceProfile | None = None) -> Instrument:
    """Build an instrument from ``[(label, [K, ...]), ...]`` and check completeness."""
    t = resolve(tol)
    labels, stacks = [], []
    dim = None
    for label, ks in outcomes:
        stack = np.asarray([mk.as_matrix(k, "Kraus operator") for k in ks])
        if dim is None:
            dim = stack.shape[1]
        if stack.shape[1] != dim:
            raise DimensionMismatch("Kraus operators of different dimensions")
        labels.append(str(label))
        stacks.append(stack)
    if not stacks:
        raise InvalidInstrument("instrument needs at least one outcome")
    if len(set(labels)) != len(labels):
        raise InvalidInstrument("duplicate outcome labels")
    inst = Instrument(tuple(labels), tuple(stacks))
    total = sum(inst.povm_elements())
    defect = mk.op_norm(total - np.eye(dim))
    if defect > t.herm_tol:
        raise InvalidInstrument(f"Kraus completeness violated by {defect:.3g}")
    return inst


def format_value(x: float) -> str:
    """Label for a spectral point: shortest repr that round-trips."""
    x = float(x)
    if x == 0.0:
        x = 0.0
    return repr(x)


def lueders_instrument(obs: Observable) -> Instrument:
    """Projective measurement rho -> P(a) rho P(a), one outcome per spectral point."""
    obs = make_observable(obs)
    return Instrument(tuple(format_value(a) for a in obs.values),
                      tuple(p[None, :, :] for p in obs.projectors))


def check_dims(*items) -> int:
    dims = {x.dim if hasattr(x, "dim") else np.asarray(x).shape[0] for x in items}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def apply_selective(inst: Instrument, label, rho, weight_floor: float | None = None,
                    tol: ToleranceProfile | None = None):
    """(weight, post-state) for outcome ``label``; post-state is ``Undefined`` below the floor."""
    t = resolve(tol)
    floor = t.weight_floor if weight_floor is None else weight_floor
    r = density_matrix(rho, tol=t)
    check_dims(inst, r)
    out = inst.operation(label, r.mat)
    weight = float(np.real(np.trace(out)))
    if weight <= floor:
        return weight, Undefined("outcome weight below floor", weight)
    return weight, DensityMatrix(0.5 * (out + mk.dagger(out)) / weight)


def apply_nonselective(inst: Instrument, rho, tol: ToleranceProfile | None = None) -> DensityMatrix:
    r = density_matrix(rho, tol=tol)
    check_dims(inst, r)
    out = inst.channel(r.mat)
    return DensityMatrix(0.5 * (out + mk.dagger(out)))


def lueders_channel(obs: Observable, rho: np.ndarray) -> np.ndarray:
    """Lambda_A(rho) = sum_a P(a) rho P(a) on a raw matrix."""
    out = np.zeros_like(rho, dtype=np.complex128)
    for p in obs.projectors:
        out = out + p @ rho @ p
    return out


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def hamiltonian(m, tol: ToleranceProfile | None = None) -> Hamiltonian:
    if isinstance(m, Hamiltonian):
        return m
    a = mk.as_matrix(m, "Hamiltonian")
    mk.eig_hermitian(a, tol=tol)  # raises NotHermitian
    return Hamiltonian(0.5 * (a + mk.dagger(a)))


class Propagator:
    """exp(-iHt) from one spectral decomposition of H, reused for every t."""

    def __init__(self, h):
        self.h = hamiltonian(h)
        self._w, self._u = mk.eig_hermitian(self.h.mat)

    def __call__(self, t: float) -> np.ndarray:
        return (self._u * np.exp(-1j * self._w * t)) @ mk.dagger(self._u)


def propagator(h, t: float) -> np.ndarray:
    return Propagator(h)(t)


def evolve(rho, h, t: float) -> DensityMatrix:
    """U rho U^dag with U = exp(-iHt)."""
    r = density_matrix(rho)
    hh = hamiltonian(h)
    check_dims(r, hh)
    u = propagator(hh, t)
    out = u @ r.mat @ mk.dagger(u)
    return DensityMatrix(0.5 * (out + mk.dagger(out)))


def heisenberg(obs: Observable, h, t: float) -> Observable:
    """A(t) = U(t)^dag A U(t)."""
    return obs.conjugate_by(propagator(h, t))


def born(rho, obs) -> list[tuple[float, float]]:
    """[(a, tr[rho P(a)]), ...] in increasing order of a."""
    r = density_matrix(rho)
    o = make_observable(obs)
    check_dims(r, o)
    probs = born_probs(r.mat, o)
    return list(zip(o.values.tolist(), probs.tolist()))


def born_probs(rho: np.ndarray, obs: Observable) -> np.ndarray:
    p = np.array([np.real(np.trace(rho @ pa)) for pa in obs.projectors])
    return np.where((p < 0) & (p > -1e-12), 0.0, p)
