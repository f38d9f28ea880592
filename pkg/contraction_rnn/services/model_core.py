"""
O modelo estatístico no domínio de ativação:

    U = X·V + 1b' + F(U)·W          (equação de forward empilhada)
    Y = U·β + ε

com perda ½ε'ε + penalidade semicircular em W + (θ_V/2)·Tr(V'V).
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Optional, Tuple

import numpy as np

from contraction_rnn.config import settings
from contraction_rnn.exceptions import (
    ContractionPreconditionError,
    DomainError,
    NonConvergenceError,
    ShapeError,
)
from contraction_rnn.models.domain import Dataset, IterState, WeightSet
from contraction_rnn.models.schemas import ModelConfig
from contraction_rnn.services.activation import ActivationLike, apply_F, apply_F_dot
from contraction_rnn.services.matrix_kit import frobenius_norm, spectral_norm, unvec, vec
from contraction_rnn.utils.validators import ensure_finite, ensure_matrix

if TYPE_CHECKING:
    from contraction_rnn.services.constraints import ConstraintSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FocReport:
    """Normas de Frobenius dos seis resíduos das condições de primeira ordem."""

    eps_lambda: float
    w_stationarity: float
    v_stationarity: float
    forward_constraint: float
    output_constraint: float
    mu_stationarity: float
    aggregate: float
    constrained: bool = False


def _forward_base(X: np.ndarray, weights: WeightSet) -> np.ndarray:
    if X.shape[1] != weights.V.shape[0]:
        raise ShapeError(f"X tem {X.shape[1]} colunas, V espera {weights.V.shape[0]}")
    return X @ weights.V + weights.b[None, :]


def forward_iterations(
    data_X: np.ndarray,
    weights: WeightSet,
    activation: ActivationLike,
    U0: Optional[np.ndarray] = None,
) -> Iterator[Tuple[np.ndarray, float]]:
    """
    Gera (U_k, ‖U_k − G(U_k)‖_F) para U_{k+1} = G(U_k) = XV + 1b' + F(U_k)W.

    Gerador infinito: quem consome decide quando parar.
    """
    X = ensure_finite("X", ensure_matrix("X", data_X))
    base = _forward_base(X, weights)
    U = base.copy() if U0 is None else ensure_finite("U0", np.array(U0, dtype=float))
    if U.shape != base.shape:
        raise ShapeError(f"U0 deve ter shape {base.shape} (recebido {U.shape})")
    while True:
        G = base + apply_F(activation, U) @ weights.W
        residual = frobenius_norm(U - G)
        yield U, residual
        U = G


def solve_U_forward(
    data_X: np.ndarray,
    weights: WeightSet,
    activation: ActivationLike,
    tol: float = settings.FORWARD_TOL,
    max_iters: int = settings.FORWARD_MAX_ITERS,
    U0: Optional[np.ndarray] = None,
) -> np.ndarray:
    w_norm = spectral_norm(weights.W)
    if w_norm >= 1.0:
        raise ContractionPreconditionError(
            f"‖W‖ = {w_norm:.6g} >= 1: a equação de forward não é uma contração"
        )
    residual = float("inf")
    for k, (U, residual) in enumerate(forward_iterations(data_X, weights, activation, U0)):
        if not np.isfinite(residual):
            break
        if residual <= tol:
            logger.debug("Forward convergiu em %d iterações (resíduo %.3e)", k, residual)
            return U
        if k >= max_iters:
            break
    raise NonConvergenceError(
        f"Forward não convergiu em {max_iters} iterações (resíduo {residual:.3e})",
        last_residual=residual,
    )


def w_penalty(W: np.ndarray, theta_W: float, scale: float = 0.5) -> float:
    """(scale/θ_W)·(1 − (1 − θ_W²·Tr(W'W))^½); scale=½ é a penalidade semicircular."""
    t = theta_W**2 * float(np.sum(np.asarray(W) ** 2))
    if t > 1.0:
        raise DomainError(f"θ_W²·Tr(W'W) = {t:.6g} > 1: W fora do domínio semicircular")
    return scale / theta_W * (1.0 - np.sqrt(1.0 - t))


def w_penalty_grad(W: np.ndarray, theta_W: float, scale: float = 0.5) -> np.ndarray:
    """Gradiente de `w_penalty`: scale·θ_W·(1 − θ_W²·Tr(W'W))^(−½)·W."""
    W = np.asarray(W, dtype=float)
    t = theta_W**2 * float(np.sum(W**2))
    if t >= 1.0:
        raise DomainError(f"θ_W²·Tr(W'W) = {t:.6g} >= 1: gradiente indefinido")
    return scale * theta_W * W / np.sqrt(1.0 - t)


def loss(
    state_U: np.ndarray,
    weights: WeightSet,
    data: Dataset,
    config: ModelConfig,
    w_penalty_scale: float = 0.5,
) -> float:
    """
    ½ε'ε + (1/(2θ_W))(1 − (1 − θ_W²Tr(W'W))^½) + (θ_V/2)Tr(V'V), com ε = Y − Uβ.

    `w_penalty_scale=1.0` dá a versão cuja estacionariedade em W é exatamente a
    condição θ_W(1 − θ_W²Tr(W'W))^(−½)W = F(U)'μ usada pelo treino.
    """
    U = ensure_matrix("U", state_U)
    eps = data.Y - U @ config.beta_vec
    reg_W = w_penalty(weights.W, config.theta_W, w_penalty_scale)
    reg_V = 0.5 * config.theta_V * float(np.sum(weights.V**2))
    return 0.5 * float(eps @ eps) + reg_W + reg_V


def predict(
    new_X: np.ndarray,
    weights: WeightSet,
    beta: np.ndarray,
    activation: ActivationLike,
    tol: float = settings.FORWARD_TOL,
    max_iters: int = settings.FORWARD_MAX_ITERS,
) -> np.ndarray:
    U = solve_U_forward(new_X, weights, activation, tol=tol, max_iters=max_iters)
    return U @ np.asarray(beta, dtype=float).reshape(-1)


def initial_state(data: Dataset, config: ModelConfig) -> IterState:
    """U⁰ = 1b', μ⁰ = (Y − U⁰β)β' (o ponto W = 0, V = 0)."""
    beta = config.beta_vec
    U0 = np.tile(config.b_vec, (data.n_obs, 1))
    mu0 = np.outer(data.Y - U0 @ beta, beta)
    return IterState(U=U0, mu=mu0)


def foc_residuals(
    state: IterState,
    weights: WeightSet,
    data: Dataset,
    config: ModelConfig,
    constraints: Optional["ConstraintSet"] = None,
) -> FocReport:
    """
    Resíduos das condições de primeira ordem, com ε := Y − Uβ e λ := −ε.

    Com restrições, a linha de W é projetada por P (elimina o multiplicador de
    R·vec(W) = r) e a linha de V vira N'(θ_V·V − X'μ).
    """
    U, mu = state.U, state.mu
    W, V = weights.W, weights.V
    beta = config.beta_vec
    n = weights.n_neurons
    if U.shape != (data.n_obs, n) or V.shape != (data.n_in, n):
        raise ShapeError(
            f"Dimensões incompatíveis: U {U.shape}, V {V.shape}, dados {data.X.shape}"
        )
    eps = data.Y - U @ beta
    lam = -eps
    FU = apply_F(config.activation, U)

    t = config.theta_W**2 * float(np.sum(W**2))
    if t < 1.0:
        w_line = config.theta_W * W / np.sqrt(1.0 - t) - FU.T @ mu
    else:
        w_line = np.full_like(W, np.inf)
    v_line = config.theta_V * V - data.X.T @ mu
    constrained = constraints is not None
    if constrained:
        if np.all(np.isfinite(w_line)):
            w_line = unvec(constraints.P @ vec(w_line), n, n)
        if constraints.n_basis is not None:
            v_line = constraints.n_basis.T @ v_line

    forward = U - data.X @ V - config.b_vec[None, :] - FU @ W
    output = data.Y - U @ beta - eps
    mu_line = np.outer(lam, beta) + mu - apply_F_dot(config.activation, U) * (mu @ W.T)

    norms = [
        float(np.linalg.norm(eps + lam)),
        frobenius_norm(w_line),
        frobenius_norm(v_line),
        frobenius_norm(forward),
        float(np.linalg.norm(output)),
        frobenius_norm(mu_line),
    ]
    aggregate = max(norms) / (1.0 + float(np.linalg.norm(data.Y)))
    return FocReport(*norms, aggregate=aggregate, constrained=constrained)
