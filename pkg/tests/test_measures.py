from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr import ensembles as en
from qcorr.errors import DimensionMismatch
from qcorr.measures import (
    OptimizerConfig,
    chart_dim,
    chart_to_vector,
    disturbance_ratio,
    invasiveness_state,
    invasiveness_sup,
    max_disturbance,
    max_disturbance_oracle,
    maximize_pure,
    vector_to_chart,
)
from qcorr.quantum import instrument, lueders_instrument, make_observable, pure_state
from qcorr.qubit import KET, SZ, sigma_theta


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6))
def test_chart_roundtrip_up_to_phase(seed, d):
    v = en.haar_vector(d, np.random.Generator(np.random.Philox(seed)))
    x = vector_to_chart(v)
    assert x.shape == (chart_dim(d),)
    w = chart_to_vector(x, d)
    assert np.linalg.norm(w) == pytest.approx(1.0)
    assert abs(np.vdot(v, w)) == pytest.approx(1.0, abs=1e-10)


def test_invasiveness_state_values():
    m = lueders_instrument(make_observable(SZ))
    assert invasiveness_state(m, pure_state(KET["x+"])) == pytest.approx(1.0, abs=1e-12)
    assert invasiveness_state(m, pure_state(KET["z-"])) == pytest.approx(0.0, abs=1e-12)
    ident = instrument([("id", [np.eye(2)])])
    assert invasiveness_state(ident, pure_state(KET["y+"])) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        invasiveness_state(m, np.eye(3) / 3)


@pytest.mark.parametrize("d", [3, 4])
def test_full_dephasing_sup_is_attained_at_uniform_superposition(d):
    # sup is 2(1 - 1/d), reached by the uniform superposition
    m = lueders_instrument(make_observable(np.diag(np.arange(d, dtype=float))))
    uniform = np.ones(d) / np.sqrt(d)
    assert invasiveness_state(m, pure_state(uniform)) == pytest.approx(2 * (1 - 1 / d))
    opt = invasiveness_sup(m)
    assert opt.value == pytest.approx(2 * (1 - 1 / d), abs=1e-6)
    assert invasiveness_state(m, opt.argmax_state) == pytest.approx(opt.value, abs=1e-12)


def test_optimizer_is_deterministic_and_respects_budget():
    m = lueders_instrument(make_observable(np.diag([0.0, 1.0, 2.0])))
    cfg = OptimizerConfig(restarts=4, budget=400, seed=3)
    a, b = invasiveness_sup(m, cfg), invasiveness_sup(m, cfg)
    assert a.value == b.value and np.array_equal(a.argmax_vector, b.argmax_vector)
    assert a.restarts == 4
    assert a.iterations <= 4 * max(100, 20 * chart_dim(3)) + 4


def test_maximize_pure_with_seed_start():
    target = KET["y+"]
    opt = maximize_pure(lambda v: abs(np.vdot(target, v)) ** 2, 2, OptimizerConfig(restarts=1, budget=200),
                        starts=[target])
    assert opt.value == pytest.approx(1.0, abs=1e-12)


def test_disturbance_qubit_value():
    th = np.pi / 3
    m = lueders_instrument(make_observable(SZ))
    rho = pure_state(KET["x+"])
    assert max_disturbance(m, sigma_theta(th), rho) == pytest.approx(np.sin(th), abs=1e-12)
    val, f = max_disturbance_oracle(m, make_observable(sigma_theta(th)), rho)
    assert val == pytest.approx(np.sin(th), abs=1e-12)
    assert np.allclose(np.abs(f), 1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4))
def test_closed_form_dominates_every_feasible_f(seed, d):
    r = np.random.Generator(np.random.Philox(seed))
    m = en.random_instrument(d, r)
    a = en.random_degenerate_observable(d, r)
    rho = en.random_state(d, r)
    best = max_disturbance(m, a, rho)
    for _ in range(5):
        f = r.uniform(-1, 1, size=len(a.values))
        assert disturbance_ratio(m, a, rho.mat, f) <= best + 1e-10
    assert abs(max_disturbance_oracle(m, a, rho)[0] - best) <= 1e-8
