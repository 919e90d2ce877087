"""Random states, observables and instruments for property tests and campaigns.

Every sampler takes a ``numpy.random.Generator``; campaigns derive one per
trial from ``trial_rng(seed, index)`` so results do not depend on the order
or the process in which trials run.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .quantum import DensityMatrix, Instrument, Observable, make_observable, observable_from_spectrum


def trial_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1)


def haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_pure_state(d: int, rng: np.random.Generator) -> DensityMatrix:
    v = haar_vector(d, rng)
    return DensityMatrix(np.outer(v, v.conj()))


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Partial trace of a Haar pure state on C^d (x) C^k; k uniform in 1..d unless given."""
    k = int(rng.integers(1, d + 1)) if rank is None else rank
    g = haar_vector(d * k, rng).reshape(d, k)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.real(np.trace(rho)))


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (g + g.conj().T)


def random_observable(d: int, rng: np.random.Generator) -> Observable:
    return make_observable(random_hermitian(d, rng))


def random_degenerate_observable(d: int, rng: np.random.Generator, levels: int | None = None) -> Observable:
    """Observable with integer-spaced, usually degenerate spectrum in a Haar basis."""
    n = int(rng.integers(1, d + 1)) if levels is None else levels
    vals = rng.integers(-n, n + 1, size=d).astype(float)
    u = haar_unitary(d, rng)
    return make_observable((u * vals) @ u.conj().T)


def random_spectrum_observable(values, rng: np.random.Generator) -> Observable:
    vals = np.asarray(values, dtype=float)
    u = haar_unitary(len(vals), rng)
    return make_observable((u * vals) @ u.conj().T)


def random_dichotomic(d: int, rng: np.random.Generator, alpha: float | None = None) -> Observable:
    """Observable with spectrum {-alpha, +alpha}, both eigenspaces nonempty when d >= 2."""
    a = float(rng.uniform(0.2, 3.0)) if alpha is None else alpha
    k = int(rng.integers(1, d)) if d > 1 else 1
    u = haar_unitary(d, rng)
    p = u[:, :k] @ u[:, :k].conj().T
    q = np.eye(d) - p
    if d == 1:
        return observable_from_spectrum([a], [p])
    return observable_from_spectrum([-a, a], [q, p])


def random_instrument(d: int, rng: np.random.Generator, outcomes: int | None = None,
                      kraus_rank: int | None = None) -> Instrument:
    """Kraus blocks cut from a Haar isometry C^d -> C^(n*r*d)."""
    n = int(rng.integers(2, 4)) if outcomes is None else outcomes
    r = int(rng.integers(1, 3)) if kraus_rank is None else kraus_rank
    u = haar_unitary(n * r * d, rng)
    v = u[:, :d]  # isometry
    ks = v.reshape(n, r, d, d)
    return Instrument(tuple(str(m) for m in range(n)), tuple(ks[m] for m in range(n)))
