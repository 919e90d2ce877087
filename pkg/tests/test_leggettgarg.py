from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr import ensembles as en
from qcorr import leggettgarg as lg
from qcorr.correlations import qjp, quasi_cond_expect
from qcorr.errors import NonDichotomic, TrivialObservable, UndefinedConditional
from qcorr.quantum import Propagator, make_observable, pure_state
from qcorr.qubit import KET, SX, SZ

T3 = (np.pi / 3, 2 * np.pi / 3)


@pytest.mark.parametrize("mode, rep, support, k, excluded", [
    ("quasi", "KD", "full", 1.5, 0.0),
    ("quasi", "KD", "spectrum", 1.5, 0.0),
    ("quasi", "MH", "full", 1.5, 0.0),
    ("operational", None, "full", 1.5, 0.0),
    ("algebraic", None, "full", 1.5, 0.0),
    ("quasi", "SS", "spectrum", 0.75, 0.75),
    ("quasi", "SS", "full", 1.5, 0.0),
])
def test_k_at_maximal_violation(mode, rep, support, k, excluded):
    r = lg.lg_k(lg.precession_scenario(*T3), mode, rep, support=support)
    assert r.K == pytest.approx(k, abs=1e-12)
    assert r.excluded == pytest.approx(excluded, abs=1e-12)
    assert r.violates == (k > 1)


def test_mode_tags():
    assert lg.mode_tag("quasi", "kd") == "QUASI(KD)"
    assert lg.mode_tag("algebraic") == "ALGEBRAIC_SYM"
    assert lg.lg_k(lg.precession_scenario(*T3), "quasi", "SS").mode == "QUASI(SS)"
    assert lg.lg_k(lg.precession_scenario(*T3), "quasi", "SS", support="spectrum").mode == "QUASI(SS)+SPECTRUM"
    with pytest.raises(ValueError):
        lg.mode_tag("classical")


@settings(max_examples=40, deadline=None)
@given(t=st.floats(0, 3), dt=st.floats(0.01, 3))
def test_closed_forms(t, dt):
    T = t + dt
    if abs(np.cos(T / 2)) < 1e-3:
        return
    s = lg.precession_scenario(t, T)
    assert lg.lg_k(s, "quasi", "KD").K == pytest.approx(lg.k_kd_closed(t, T), abs=1e-9)
    assert lg.lg_k(s, "quasi", "SS", support="spectrum").K == pytest.approx(lg.k_ss_closed(t, T), abs=1e-9)
    assert lg.lg_k(s, "quasi", "SS").K == pytest.approx(lg.k_kd_closed(t, T), abs=1e-9)
    # dichotomic observables: operational and symmetrized correlators coincide
    assert lg.lg_k(s, "operational").K == pytest.approx(lg.lg_k(s, "algebraic").K, abs=1e-12)
    prop = Propagator(0.5 * SX)
    z = make_observable(SZ)
    tab = qjp(pure_state(KET["z+"]), z.conjugate_by(prop(t)), z.conjugate_by(prop(T)), "KD")
    assert quasi_cond_expect(tab, 1.0) == pytest.approx(lg.e_kd_closed(t, T), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), times=st.lists(st.floats(0, 6), min_size=3, max_size=3, unique=True))
def test_full_support_k_is_representation_independent(seed, times):
    r = np.random.Generator(np.random.Philox(seed))
    d = int(r.integers(2, 5))
    t1, t2, t3 = sorted(times)
    s = lg.scenario(en.random_state(d, r), en.random_hermitian(d, r), (t1, t2, t3), en.random_dichotomic(d, r, 1.0))
    try:
        ref = lg.lg_k(s, "quasi", "KD")
        ks = [lg.lg_k(s, "quasi", rep).K for rep in ("MH", "SS", *(f"alpha:{float(a)!r}" for a in r.uniform(-1, 2, 3)))]
    except UndefinedConditional:
        return
    assert max(abs(k - ref.K) for k in ks) <= 1e-9


def test_operational_k_never_exceeds_three_halves():
    g = lg.phase_grid(60, np.pi / 20)
    res = lg.lg_scan(KET["z+"], 0.5 * SX, SZ, g, g, "operational")
    assert max(r.K for _, _, r in res.defined()) <= 1.5 + 1e-9


def test_zero_probability_slice_is_skipped():
    # at omega T = pi the a3 = +1 slice has zero weight and is left out
    r = lg.lg_k(lg.precession_scenario(0.3, np.pi), "quasi", "KD")
    assert r.defined and r.K == pytest.approx(lg.k_kd_closed(0.3, np.pi), abs=1e-12)


def test_scenario_validation():
    with pytest.raises(ValueError):
        lg.precession_scenario(1.0, 0.5)
    with pytest.raises(ValueError):
        lg.precession_scenario(0.0, 0.0)
    lg.precession_scenario(0.0, 0.0 + 1e-3)  # t2 = t1 is allowed
    s = lg.scenario(KET["z+"], 0.5 * SX, (0, 1, 2), np.diag([1.0, 2.0]))
    with pytest.raises(NonDichotomic):
        lg.lg_k(s)
    assert lg.lg_k(s, inequality=False).defined


def test_scan_layout_and_undefined_cells():
    g = lg.phase_grid(6)
    res = lg.lg_scan(KET["z+"], 0.5 * SX, SZ, g, g, "quasi", "KD")
    km = res.K_matrix()
    assert km.shape == (6, 6)
    assert np.isnan(km[0, 0]) and np.isnan(km[3, 1])
    assert len(res.defined()) == 6 * 7 // 2 - 1
    assert res.mode == "QUASI(KD)"
    assert np.allclose(lg.phase_grid(200)[[40, 80]], T3)


def test_dichotomy_gap_values(rng):
    assert lg.dichotomy_gap(np.diag([-2.0, 2.0, 2.0])).gap == 0.0
    g = lg.dichotomy_gap(np.diag([0.0, 1.0]))
    assert g.gap == pytest.approx(0.5)
    assert lg.direct_gap(np.diag([0.0, 1.0]), g.witness_B, g.witness_rho) == pytest.approx(0.5)
    g = lg.dichotomy_gap(np.diag([-1.0, 1.0, 2.0]))
    assert g.gap == pytest.approx(1.5) and set(g.pair) == {1.0, 2.0}
    with pytest.raises(TrivialObservable):
        lg.dichotomy_gap(np.eye(3))
    a = en.random_spectrum_observable([-0.7, 0.2, 1.1, 1.1], rng)
    g = lg.dichotomy_gap(a)
    assert lg.direct_gap(a, g.witness_B, g.witness_rho) == pytest.approx(g.gap, abs=1e-12)
