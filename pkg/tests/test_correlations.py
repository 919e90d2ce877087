from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr import ensembles as en
from qcorr.correlations import (
    QjpTable,
    alg_correlation,
    cond_moments,
    make_rng,
    op_correlation,
    op_joint,
    parse_rep,
    post_selection_observable,
    qjp,
    quasi_cond_expect,
    sample_sequential,
    three_point_ordered,
    tv_distance,
    weak_value,
)
from qcorr.errors import NotPureState, Undefined, UnknownRepresentation, ValueNotInSupport
from qcorr.quantum import make_observable, pure_state
from qcorr.qubit import KET, SX, SY, SZ, sigma_theta

seeds = st.integers(0, 2**32 - 1)


def _instance(seed, d):
    r = np.random.Generator(np.random.Philox(seed))
    return r, en.random_state(d, r), en.random_observable(d, r), en.random_degenerate_observable(d, r)


def test_parse_rep():
    assert parse_rep("kd").tag == "KD"
    assert parse_rep("MH").alpha == 0.5
    assert parse_rep("ALPHA(0.25)").alpha == 0.25
    assert parse_rep("alpha:-1").alpha == -1.0
    with pytest.raises(UnknownRepresentation):
        parse_rep("wigner")
    with pytest.raises(UnknownRepresentation):
        parse_rep("KD", alpha_convention="other")


def test_kd_table_closed_form_on_y_plus():
    # tr[rho P(a) P(b)] = (1 + ab e^{i theta}) / 4 for rho = |y+><y+|
    th = np.pi / 3
    t = qjp(pure_state(KET["y+"]), SZ, sigma_theta(th), "KD")
    a, b = np.meshgrid(t.a_values, t.b_values, indexing="ij")
    assert np.allclose(t.weights, (1 + a * b * np.exp(1j * th)) / 4, atol=1e-14)
    mh = qjp(pure_state(KET["y+"]), SZ, sigma_theta(th), "MH")
    assert np.allclose(mh.weights, (1 + a * b * np.cos(th)) / 4, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(2, 5), alpha=st.floats(-1, 2))
def test_alpha_tables_have_born_marginals(seed, d, alpha):
    _, rho, a, b = _instance(seed, d)
    t = qjp(rho, a, b, f"alpha:{alpha!r}")
    assert np.allclose(t.marginal_a(), [np.trace(rho.mat @ p).real for p in a.projectors], atol=1e-12)
    assert np.allclose(t.marginal_b(), [np.trace(rho.mat @ p).real for p in b.projectors], atol=1e-12)
    assert abs(t.total() - 1) < 1e-12
    # first moment reproduces the ordered correlation
    first = t.a_values @ t.weights @ t.b_values
    assert abs(first - alg_correlation(rho, a, b, alpha)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=st.integers(2, 5))
def test_alpha_conventions(seed, d):
    _, rho, a, b = _instance(seed, d)
    kd = qjp(rho, a, b, "KD").weights
    assert np.allclose(qjp(rho, a, b, "alpha:1").weights, kd, atol=1e-14)
    assert np.allclose(qjp(rho, a, b, "alpha:0").weights, kd.conj(), atol=1e-14)
    pr = qjp(rho, a, b, "alpha:0.3", alpha_convention="proof").weights
    assert np.allclose(pr, kd.real + 0.3j * kd.imag, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=st.integers(2, 5))
def test_ss_table_midpoints_and_marginal(seed, d):
    _, rho, a, b = _instance(seed, d)
    t = qjp(rho, a, b, "SS")
    mids = {(x + y) / 2 for x in b.values for y in b.values}
    assert len(t.b_values) <= len(mids)
    assert np.allclose(t.marginal_a(), [np.trace(rho.mat @ p).real for p in a.projectors], atol=1e-12)
    # the midpoint mean is the symmetrized correlation
    assert abs(t.a_values @ t.weights @ t.b_values - alg_correlation(rho, a, b, 0.5)) < 1e-10


def test_ss_merges_coincident_midpoints():
    b = make_observable(np.diag([-1.0, 0.0, 1.0]))
    t = qjp(np.eye(3) / 3, np.eye(3), b, "SS")
    assert np.allclose(t.b_values, [-1, -0.5, 0, 0.5, 1])


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(2, 5))
def test_operational_joint_is_a_distribution(seed, d):
    _, rho, a, b = _instance(seed, d)
    j = op_joint(rho, a, b)
    assert np.all(j.probs >= 0)
    assert j.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(j.marginal_a(), [np.trace(rho.mat @ p).real for p in a.projectors], atol=1e-12)
    assert op_correlation(rho, a, b) == pytest.approx(float(j.a_values @ j.probs @ j.b_values))


def test_commuting_observables_give_equal_orders():
    rho = pure_state(KET["x+"])
    a = make_observable(SZ)
    b = make_observable(np.diag([2.0, -3.0]))
    assert tv_distance(op_joint(rho, a, b), op_joint(rho, b, a).transpose()) < 1e-14
    assert op_correlation(rho, a, b) == pytest.approx(alg_correlation(rho, a, b, 0.5).real)


def test_tv_distance_union_support():
    p = {(1.0, 1.0): 0.5, (1.0, -1.0): 0.5}
    q = {(1.0, 1.0 + 1e-12): 0.5, (2.0, 0.0): 0.5}
    assert tv_distance(p, q) == pytest.approx(1.0)
    assert tv_distance(p, p) == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(2, 5))
def test_weak_value_equals_kd_conditional(seed, d):
    r = np.random.Generator(np.random.Philox(seed))
    psi = en.haar_vector(d, r)
    post = en.haar_vector(d, r)
    a = en.random_observable(d, r)
    pre = pure_state(psi)
    wv = weak_value(pre, post, a)
    proj = post_selection_observable(post)
    e_a = quasi_cond_expect(qjp(pre, proj, a, "KD"), 1.0, given="a")
    e_b = quasi_cond_expect(qjp(pre, a, proj, "KD"), 1.0, given="b")
    direct = np.vdot(post, a.mat @ psi) / np.vdot(post, psi)
    assert abs(wv - direct) < 1e-9 * max(1, abs(direct))
    assert abs(e_a - wv) < 1e-9 * max(1, abs(wv))
    assert abs(e_b - np.conj(wv)) < 1e-9 * max(1, abs(wv))


def test_conditionals_undefined_and_errors():
    t = qjp(pure_state(KET["z+"]), SX, SZ, "KD")
    assert isinstance(quasi_cond_expect(t, -1.0), Undefined)
    with pytest.raises(ValueNotInSupport):
        cond_moments(t, 0.5)
    with pytest.raises(ValueError):
        cond_moments(t, 1.0, given="c")
    assert isinstance(weak_value(pure_state(KET["z+"]), KET["z-"], SX), Undefined)
    with pytest.raises(NotPureState):
        weak_value(np.eye(2) / 2, KET["z+"], SX)
    with pytest.raises(ValueError):
        weak_value(pure_state(KET["z+"]), [1, 1], SX)


def test_qjp_json_roundtrip():
    t = qjp(pure_state(KET["y+"]), SZ, sigma_theta(0.4), "alpha:0.2")
    back = QjpTable.from_json(t.to_json())
    assert back.rep == t.rep
    assert np.array_equal(back.weights, t.weights)
    assert np.array_equal(back.b_values, t.b_values)


def test_three_point_ordered():
    rho = pure_state(KET["z+"])
    assert three_point_ordered(rho, [SX, SY, SZ]) == pytest.approx(1j)


def test_sampling_reproducible_and_seed_sensitive():
    rho = pure_state(KET["x+"])
    a, b = SZ, sigma_theta(0.9)
    r1 = sample_sequential(rho, a, b, 5000, seed=1)
    r2 = sample_sequential(rho, a, b, 5000, seed=1)
    r3 = sample_sequential(rho, a, b, 5000, seed=2)
    assert np.array_equal(r1.counts, r2.counts)
    assert not np.array_equal(r1.counts, r3.counts)
    assert r1.frequencies().sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sample_sequential(rho, a, b, 0, seed=1)


def test_make_rng_frozen_stream():
    # frozen first draws of the Philox stream for seed 20240917
    x = make_rng(20240917).random(3)
    assert x.tolist() == [0.673828412725407, 0.6379416313986529, 0.9540219418102591]
    assert np.array_equal(x, make_rng(20240917 + 2**64).random(3))
