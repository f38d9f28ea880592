"""
Funções de ativação admissíveis (0 <= f'(u) <= 1) e sua aplicação por coluna.

F(U) aplica f_j à coluna j de U; uma única ActivationSpec vale para todos os neurônios.
"""
import logging
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from contraction_rnn.exceptions import ConfigError, ShapeError
from contraction_rnn.models.schemas import ActivationKind, ActivationSpec
from contraction_rnn.utils.validators import ensure_matrix

logger = logging.getLogger(__name__)

ActivationLike = Union[ActivationSpec, Sequence[ActivationSpec]]


def _check(spec: ActivationSpec) -> None:
    if not spec.alpha > 0:
        raise ConfigError("alpha da ativação deve ser positivo", field="alpha")


def _as_output(u, out: np.ndarray):
    return float(out) if np.ndim(u) == 0 else out


def act_eval(spec: ActivationSpec, u):
    _check(spec)
    x = np.asarray(u, dtype=float)
    a = spec.alpha
    if spec.kind == ActivationKind.SOFTPLUS:
        # logaddexp(0, t) = ln(1 + e^t) sem overflow
        out = np.logaddexp(0.0, a * x) / a
    elif spec.kind == ActivationKind.IDENTITY:
        out = x.copy()
    elif spec.kind == ActivationKind.SCALED_TANH:
        out = np.tanh(a * x) / a
    else:
        raise ConfigError(f"Ativação desconhecida: {spec.kind}", field="kind")
    return _as_output(u, out)


def act_deriv(spec: ActivationSpec, u):
    _check(spec)
    x = np.asarray(u, dtype=float)
    a = spec.alpha
    if spec.kind == ActivationKind.SOFTPLUS:
        out = expit(a * x)
    elif spec.kind == ActivationKind.IDENTITY:
        out = np.ones_like(x)
    elif spec.kind == ActivationKind.SCALED_TANH:
        out = 1.0 - np.tanh(a * x) ** 2
    else:
        raise ConfigError(f"Ativação desconhecida: {spec.kind}", field="kind")
    return _as_output(u, out)


def _per_column(activation: ActivationLike, n_cols: int):
    if isinstance(activation, ActivationSpec):
        return [activation] * n_cols
    specs = list(activation)
    if len(specs) != n_cols:
        raise ShapeError(f"{len(specs)} ativações para {n_cols} neurônios")
    return specs


def _apply(fn, activation: ActivationLike, U: np.ndarray) -> np.ndarray:
    U = ensure_matrix("U", U)
    if isinstance(activation, ActivationSpec):
        return np.asarray(fn(activation, U), dtype=float)
    specs = _per_column(activation, U.shape[1])
    out = np.empty_like(U)
    for j, spec in enumerate(specs):
        out[:, j] = fn(spec, U[:, j])
    return out


def apply_F(activation: ActivationLike, U: np.ndarray) -> np.ndarray:
    return _apply(act_eval, activation, U)


def apply_F_dot(activation: ActivationLike, U: np.ndarray) -> np.ndarray:
    return _apply(act_deriv, activation, U)


def F_at_zero(activation: ActivationLike, n_obs: int, n_neurons: int) -> np.ndarray:
    return apply_F(activation, np.zeros((n_obs, n_neurons)))
