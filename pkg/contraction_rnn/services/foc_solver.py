"""
Motor de treino por contração amortecida sobre as condições de primeira ordem reduzidas.

Cada passo:
  1. W(U, μ) em forma fechada (ou a versão restrita)
  2. B1 = 1b' + F(U)W,  B2 = Yβ' + Ḟ(U)∘(μW')
  3. solução parcial do par linear U = Qμ + B1, μ = −Uββ' + B2
  4. (U, μ) ← (1 − δ)(U, μ) + δ(U_B, μ_B)
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from contraction_rnn.config import settings
from contraction_rnn.exceptions import ConfigError, DivergenceError, NonFiniteError, ShapeError
from contraction_rnn.models.domain import Dataset, IterState, WeightSet
from contraction_rnn.models.schemas import ModelConfig, ParamDeltaMetric
from contraction_rnn.services import model_core
from contraction_rnn.services.activation import ActivationLike, apply_F, apply_F_dot
from contraction_rnn.services.constraints import (
    ConstraintSet,
    constrained_assemble,
    constrained_W,
    recover_V_constrained,
)
from contraction_rnn.services.matrix_kit import WoodburyFactor, spectral_norm, woodbury_apply, woodbury_factor
from contraction_rnn.utils.validators import ensure_matrix

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, IterState, np.ndarray], None]


class QOperator:
    """
    Q = Z·Z'/θ_V em forma fatorada (Z = X, ou X vezes uma base de col(N)).

    Com poucas colunas em Z, Q·M é calculado como Z·((Z'·M)/θ_V), sem formar a
    matriz n_obs × n_obs.
    """

    def __init__(self, Z: np.ndarray, theta_V: float):
        if theta_V <= 0:
            raise ConfigError("theta_V deve ser positivo", field="theta_V")
        self.Z = ensure_matrix("Z", Z)
        self.theta_V = float(theta_V)
        self._factors: Dict[float, WoodburyFactor] = {}

    @property
    def n_obs(self) -> int:
        return self.Z.shape[0]

    @property
    def rank_dim(self) -> int:
        return self.Z.shape[1]

    def dense(self) -> np.ndarray:
        return self.Z @ self.Z.T / self.theta_V

    def apply(self, M: np.ndarray) -> np.ndarray:
        if M.shape[0] != self.n_obs:
            raise ShapeError(f"Q é {self.n_obs}x{self.n_obs}, M tem {M.shape[0]} linhas")
        if self.rank_dim < self.n_obs:
            return self.Z @ ((self.Z.T @ M) / self.theta_V)
        return self.dense() @ M

    def norm(self) -> float:
        return spectral_norm(self.Z) ** 2 / self.theta_V

    def shifted_solve(self, M: np.ndarray, ctc: float) -> np.ndarray:
        """(I + c'c·Q)⁻¹·M pela identidade de Woodbury (fator interno em cache)."""
        s = float(ctc) / self.theta_V
        factor = self._factors.get(s)
        if factor is None:
            factor = woodbury_factor(self.Z, s)
            self._factors[s] = factor
        return woodbury_apply(self.Z, s, M, factor=factor)

    def inverse_shifted_apply(self, M: np.ndarray, ctc: float) -> np.ndarray:
        """(I + c'c·Q)⁻¹·Q·M."""
        return self.shifted_solve(self.apply(M), ctc)


@dataclass(frozen=True, eq=False)
class TrainResult:
    weights: WeightSet
    state: IterState
    iterations: int
    sse_trace: np.ndarray
    param_delta_trace: np.ndarray
    converged: bool
    foc_report: model_core.FocReport
    delta: float
    stop_reason: str

    @property
    def final_sse(self) -> float:
        return float(self.sse_trace[-1]) if self.sse_trace.size else float("nan")


def closed_form_W(U: np.ndarray, mu: np.ndarray, theta_W: float, activation: ActivationLike) -> np.ndarray:
    """W = (1/θ_W)·F(U)'μ / (1 + ‖F(U)'μ‖_F²)^½, sempre com ‖W‖_F < 1/θ_W."""
    A = apply_F(activation, U).T @ mu
    return A / (theta_W * np.sqrt(1.0 + float(np.sum(A**2))))


def assemble_B(
    U: np.ndarray,
    mu: np.ndarray,
    W: np.ndarray,
    b: np.ndarray,
    Y: np.ndarray,
    beta: np.ndarray,
    activation: ActivationLike,
) -> Tuple[np.ndarray, np.ndarray]:
    b = np.asarray(b, dtype=float).reshape(-1)
    Y = np.asarray(Y, dtype=float).reshape(-1)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    n = b.shape[0]
    if U.shape != mu.shape or U.shape[1] != n or W.shape != (n, n) or Y.shape[0] != U.shape[0]:
        raise ShapeError(f"Dimensões incompatíveis: U {U.shape}, mu {mu.shape}, W {W.shape}, Y {Y.shape}")
    B1 = b[None, :] + apply_F(activation, U) @ W
    B2 = np.outer(Y, beta) + apply_F_dot(activation, U) * (mu @ W.T)
    return B1, B2


def partial_solve(
    B1: np.ndarray,
    B2: np.ndarray,
    Q: QOperator,
    beta: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resolve U = Q·μ + B1, μ = −U·ββ' + B2:

        U_B = D1 − (I + β'β·Q)⁻¹·Q·D1·ββ',   D1 = B1 + Q·B2
        μ_B = D2 − (I + β'β·Q)⁻¹·Q·D2·ββ',   D2 = B2 − B1·ββ'
    """
    beta = np.asarray(beta, dtype=float).reshape(-1)
    ctc = float(beta @ beta)
    D1 = B1 + Q.apply(B2)
    D2 = B2 - np.outer(B1 @ beta, beta)
    U_B = D1 - np.outer(Q.inverse_shifted_apply(D1, ctc) @ beta, beta)
    mu_B = D2 - np.outer(Q.inverse_shifted_apply(D2, ctc) @ beta, beta)
    return U_B, mu_B


def recover_V(X: np.ndarray, mu: np.ndarray, theta_V: float) -> np.ndarray:
    return X.T @ mu / theta_V


def _W_at(state: IterState, config: ModelConfig, constraints: Optional[ConstraintSet]) -> np.ndarray:
    if constraints is None:
        return closed_form_W(state.U, state.mu, config.theta_W, config.activation)
    return constrained_W(state.U, state.mu, config.theta_W, constraints, config.activation)


def weights_at(
    state: IterState,
    data: Dataset,
    config: ModelConfig,
    constraints: Optional[ConstraintSet] = None,
) -> WeightSet:
    """(W, V) recuperados no estado (U, μ); b é fixo."""
    W = _W_at(state, config, constraints)
    if constraints is None:
        V = recover_V(data.X, state.mu, config.theta_V)
    else:
        V = recover_V_constrained(data.X, state.mu, config.theta_V, constraints)
    return WeightSet(W=W, V=V, b=config.b_vec)


def build_q_operator(data: Dataset, config: ModelConfig, constraints: Optional[ConstraintSet] = None) -> QOperator:
    if constraints is None or constraints.n_basis is None:
        return QOperator(data.X, config.theta_V)
    return QOperator(data.X @ constraints.n_basis, config.theta_V)


def contraction_step(
    state: IterState,
    delta: float,
    data: Dataset,
    config: ModelConfig,
    constraints: Optional[ConstraintSet] = None,
    q_operator: Optional[QOperator] = None,
) -> IterState:
    if not 0.0 <= delta <= 1.0:
        raise ConfigError(f"delta deve estar em [0, 1] (recebido {delta})", field="delta")
    if delta == 0.0:
        return state
    U, mu = state.U, state.mu
    W = _W_at(state, config, constraints)
    if constraints is None:
        B1, B2 = assemble_B(U, mu, W, config.b_vec, data.Y, config.beta_vec, config.activation)
        Q = q_operator or QOperator(data.X, config.theta_V)
    else:
        B1, B2, Q_hat = constrained_assemble(U, mu, W, data, config, constraints)
        Q = q_operator or Q_hat
    U_B, mu_B = partial_solve(B1, B2, Q, config.beta_vec)
    if delta == 1.0:
        return IterState(U=U_B, mu=mu_B)
    return IterState(U=(1.0 - delta) * U + delta * U_B, mu=(1.0 - delta) * mu + delta * mu_B)


def _weights_delta(prev: WeightSet, new: WeightSet) -> float:
    return float(np.sum((new.W - prev.W) ** 2) + np.sum((new.V - prev.V) ** 2))


def train(
    data: Dataset,
    config: ModelConfig,
    constraints: Optional[ConstraintSet] = None,
    initial_state: Optional[IterState] = None,
    callback: Optional[StepCallback] = None,
) -> TrainResult:
    """
    Itera a contração até o delta de parâmetros ficar <= outer_tol ou atingir max_outer_iters.

    Se o estado ficar não finito e `delta_guard` estiver ativo, δ é reduzido à
    metade e o passo é refeito; abaixo de `min_delta` o treino falha com DivergenceError.
    """
    state = initial_state or model_core.initial_state(data, config)
    if state.U.shape != (data.n_obs, config.n_neurons):
        raise ShapeError(f"Estado inicial deve ser {data.n_obs}x{config.n_neurons} (recebido {state.U.shape})")
    Q = build_q_operator(data, config, constraints)
    beta = config.beta_vec
    by_weights = config.param_delta_metric == ParamDeltaMetric.WEIGHTS
    delta = config.delta
    weights = weights_at(state, data, config, constraints) if by_weights else None

    logger.info(
        "Iniciando treino: n_obs=%d n_in=%d n_neurons=%d delta=%s restrito=%s",
        data.n_obs, data.n_in, config.n_neurons, delta, constraints is not None,
    )
    sse_trace, delta_trace = [], []
    converged = False
    iteration = 0
    while iteration < config.max_outer_iters:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                new_state = contraction_step(state, delta, data, config, constraints, q_operator=Q)
                new_weights = weights_at(new_state, data, config, constraints) if by_weights else None
        except NonFiniteError:
            if config.delta_guard and delta / 2.0 >= config.min_delta:
                delta /= 2.0
                logger.warning("Estado não finito na iteração %d; reduzindo delta para %.3e", iteration + 1, delta)
                continue
            raise DivergenceError(f"Treino divergiu na iteração {iteration + 1}", iteration=iteration + 1)

        iteration += 1
        if by_weights:
            param_delta = _weights_delta(weights, new_weights)
            weights = new_weights
        else:
            param_delta = new_state.distance_sq(state)
        state = new_state
        eps = data.Y - state.U @ beta
        sse_trace.append(float(eps @ eps))
        delta_trace.append(param_delta)
        if callback is not None:
            callback(iteration, state, weights.W if by_weights else _W_at(state, config, constraints))
        if iteration % settings.LOG_EVERY == 0:
            logger.debug("Iteração %d: SSE=%.6g delta_param=%.3e", iteration, sse_trace[-1], param_delta)
        if param_delta <= config.outer_tol:
            converged = True
            break

    final_weights = weights_at(state, data, config, constraints)
    report = model_core.foc_residuals(state, final_weights, data, config, constraints)
    stop_reason = "tolerance" if converged else "max_iters"
    logger.info(
        "Treino finalizado: iterações=%d convergiu=%s SSE=%.6g resíduo FOC=%.3e",
        iteration, converged, sse_trace[-1] if sse_trace else float("nan"), report.aggregate,
    )
    return TrainResult(
        weights=final_weights,
        state=state,
        iterations=iteration,
        sse_trace=np.asarray(sse_trace, dtype=float),
        param_delta_trace=np.asarray(delta_trace, dtype=float),
        converged=converged,
        foc_report=report,
        delta=delta,
        stop_reason=stop_reason,
    )
