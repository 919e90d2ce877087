from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr import ensembles as en
from qcorr import matkernel as mk
from qcorr.errors import (
    DimensionMismatch,
    InvalidBloch,
    InvalidInstrument,
    NotAState,
    NotHermitian,
    UnknownOutcome,
    ValueNotInSpectrum,
)
from qcorr.quantum import (
    Undefined,
    apply_nonselective,
    apply_selective,
    born,
    density_matrix,
    evolve,
    heisenberg,
    instrument,
    lueders_instrument,
    make_observable,
    observable_from_spectrum,
    propagator,
    pure_state,
)
from qcorr.qubit import KET, SX, SY, SZ, bloch_state


def test_density_matrix_validation():
    with pytest.raises(NotAState):
        density_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(NotAState):
        density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(NotAState):
        density_matrix(np.array([[0.5, 0.5], [0, 0.5]]))
    with pytest.raises(NotAState):
        density_matrix(np.zeros(2))
    r = density_matrix([1, 1j])
    assert np.allclose(r.mat, np.array([[1, -1j], [1j, 1]]) / 2)
    assert r.purity() == pytest.approx(1.0)
    assert not r.mat.flags.writeable


def test_bloch_state_bounds():
    with pytest.raises(InvalidBloch):
        bloch_state(1.0, 0.1, 0.0)
    r = bloch_state(0, 0, -1)
    assert np.allclose(r.mat, np.diag([0, 1]))


def test_observable_clusters_near_degenerate_values():
    m = np.diag([1.0, 1.0 + 1e-10, -1.0])
    a = make_observable(m)
    assert len(a.values) == 2
    assert np.allclose(a.projectors[1], np.diag([1, 1, 0]))
    assert a.index_of(1.0) == 1
    with pytest.raises(ValueNotInSpectrum):
        a.projector(0.5)
    with pytest.raises(NotHermitian):
        make_observable(np.array([[0, 1], [0, 0]]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6))
def test_spectral_family_resolves_identity(seed, d):
    r = np.random.Generator(np.random.Philox(seed))
    a = en.random_degenerate_observable(d, r)
    assert np.allclose(sum(a.projectors), np.eye(d), atol=1e-10)
    assert np.allclose(sum(v * p for v, p in a.spectrum), a.mat, atol=1e-10)
    for p in a.projectors:
        assert np.allclose(p @ p, p, atol=1e-10)


def test_observable_from_spectrum_sorts():
    a = observable_from_spectrum([1.0, -1.0], [np.diag([1, 0]), np.diag([0, 1])])
    assert np.allclose(a.values, [-1, 1])
    assert np.allclose(a.mat, SZ)
    assert a.is_dichotomic()


def test_instrument_completeness_and_labels():
    with pytest.raises(InvalidInstrument):
        instrument([("0", [np.diag([1, 0])])])
    with pytest.raises(DimensionMismatch):
        instrument([("0", [np.eye(2)]), ("1", [np.eye(3)])])
    m = lueders_instrument(make_observable(SZ))
    assert m.labels == ("-1.0", "1.0")
    assert np.allclose(m.povm(1), np.diag([1, 0]))
    with pytest.raises(UnknownOutcome):
        m.povm("x")


def test_selective_and_nonselective_lueders():
    m = lueders_instrument(make_observable(SZ))
    plus = pure_state(KET["x+"])
    w, post = apply_selective(m, 1, plus)
    assert w == pytest.approx(0.5)
    assert np.allclose(post.mat, np.diag([1, 0]))
    assert np.allclose(apply_nonselective(m, plus).mat, np.eye(2) / 2)
    w, post = apply_selective(m, -1, pure_state(KET["z+"]))
    assert isinstance(post, Undefined) and not post


def test_random_instrument_is_complete(rng):
    for d in (2, 3, 5):
        m = en.random_instrument(d, rng)
        assert np.allclose(sum(m.povm_elements()), np.eye(d), atol=1e-10)
        rho = en.random_state(d, rng)
        assert np.real(np.trace(m.channel(rho.mat))) == pytest.approx(1.0)


def test_heisenberg_and_schroedinger_agree():
    h = 0.5 * SX
    t = 0.7
    rho = pure_state(KET["z+"])
    a_t = heisenberg(make_observable(SZ), h, t)
    lhs = np.real(np.trace(rho.mat @ a_t.mat))
    rhs = np.real(np.trace(evolve(rho, h, t).mat @ SZ))
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert lhs == pytest.approx(np.cos(t), abs=1e-12)
    u = propagator(h, t)
    assert np.allclose(u @ mk.dagger(u), np.eye(2))


def test_born_rule_and_dimension_check():
    (a0, p0), (a1, p1) = born(pure_state(KET["y+"]), SY)
    assert (a0, p0, a1, p1) == pytest.approx((-1.0, 0.0, 1.0, 1.0), abs=1e-12)
    with pytest.raises(DimensionMismatch):
        born(pure_state(KET["y+"]), np.eye(3))
