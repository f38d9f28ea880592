import math

import numpy as np
import pytest
from pydantic import ValidationError

from contraction_rnn.exceptions import ConfigError
from contraction_rnn.models.schemas import ActivationSpec
from contraction_rnn.services.activation import F_at_zero, act_deriv, act_eval, apply_F, apply_F_dot

SOFTPLUS = ActivationSpec(kind="softplus", alpha=0.05)
IDENTITY = ActivationSpec(kind="identity", alpha=1.0)
TANH = ActivationSpec(kind="scaled_tanh", alpha=0.3)


@pytest.fixture
def samples():
    return np.random.default_rng(0).uniform(-1e3, 1e3, size=10_000)


def test_softplus_values():
    assert act_eval(SOFTPLUS, 0.0) == pytest.approx(math.log(2.0) / 0.05)
    assert act_eval(SOFTPLUS, -1e6) < 1e-300
    assert act_eval(SOFTPLUS, 1e6) == pytest.approx(1e6, rel=1e-9)


def test_derivative_values():
    for alpha in (0.05, 1.0, 7.0):
        assert act_deriv(ActivationSpec(kind="softplus", alpha=alpha), 0.0) == pytest.approx(0.5)
    assert act_deriv(IDENTITY, 7.3) == 1.0
    h = 1e-5
    fd = (act_eval(SOFTPLUS, 2.0 + h) - act_eval(SOFTPLUS, 2.0 - h)) / (2 * h)
    assert abs(act_deriv(SOFTPLUS, 2.0) - fd) < 1e-7


@pytest.mark.parametrize("spec", [SOFTPLUS, IDENTITY, TANH])
def test_derivative_admissible(spec, samples):
    d = act_deriv(spec, samples)
    assert np.all(d >= 0.0)
    assert np.all(d <= 1.0)


@pytest.mark.parametrize("spec", [SOFTPLUS, IDENTITY, TANH])
def test_lipschitz_one(spec, samples):
    u1, u2 = samples[:5000], samples[5000:]
    diff = np.abs(act_eval(spec, u1) - act_eval(spec, u2))
    assert np.all(diff <= np.abs(u1 - u2) * (1 + 1e-12) + 1e-9)


def test_alpha_must_be_positive():
    with pytest.raises(ValidationError):
        ActivationSpec(kind="softplus", alpha=0.0)
    bad = ActivationSpec.model_construct(kind=SOFTPLUS.kind, alpha=-1.0)
    with pytest.raises(ConfigError):
        act_eval(bad, 1.0)


def test_matrix_application_commutes_with_transpose():
    U = np.random.default_rng(1).standard_normal((4, 6)) * 10
    assert np.array_equal(apply_F(SOFTPLUS, U.T), apply_F(SOFTPLUS, U).T)
    assert np.array_equal(apply_F_dot(SOFTPLUS, U.T), apply_F_dot(SOFTPLUS, U).T)


def test_per_column_activations():
    U = np.array([[1.0, -2.0], [3.0, 4.0]])
    F = apply_F([IDENTITY, SOFTPLUS], U)
    assert np.array_equal(F[:, 0], U[:, 0])
    assert np.allclose(F[:, 1], act_eval(SOFTPLUS, U[:, 1]))
    F0 = F_at_zero([IDENTITY, SOFTPLUS], 3, 2)
    assert np.allclose(F0[:, 0], 0.0)
    assert np.allclose(F0[:, 1], math.log(2.0) / 0.05)
