"""
Diagnósticos de convergência: limites das variáveis, limiares de θ_W para
existência/unicidade do ponto fixo e estimativa amostral do fator de contração.

Os limiares são condições suficientes; os relatórios são apenas informativos e
nunca interrompem um treino.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from contraction_rnn.exceptions import (
    InfeasibleConstraintsError,
    SingularMatrixError,
    UndefinedConditionError,
)
from contraction_rnn.models.domain import Dataset, IterState
from contraction_rnn.models.schemas import ModelConfig
from contraction_rnn.services.activation import F_at_zero
from contraction_rnn.services.constraints import ConstraintSet, OmegaReport, verify_omega
from contraction_rnn.services.foc_solver import build_q_operator, contraction_step
from contraction_rnn.services.matrix_kit import condition_number, spectral_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundsReport:
    sup_W: float
    sup_mu: float
    sup_U: float
    sup_FU: float
    warnings: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ConditionReport:
    kind: str
    threshold: float
    theta_W: float
    satisfied: bool
    kappa_GXbeta: float
    norm_GUmu: float
    ratio_term: float
    kappa_omega: float = 1.0
    projector_norm: Optional[float] = None
    omega: Optional[OmegaReport] = None


def lemma3_bounds(data: Dataset, config: ModelConfig) -> BoundsReport:
    theta = config.theta_W
    sup_W = 1.0 / theta
    if theta <= 1.0:
        msg = f"theta_W={theta} <= 1: limites de μ e U não são finitos"
        logger.warning(msg)
        return BoundsReport(sup_W, math.inf, math.inf, math.inf, warnings=(msg,))

    beta, b = config.beta_vec, config.b_vec
    k = theta / (theta - 1.0)
    err = float(np.linalg.norm(data.Y - float(b @ beta)))
    beta_norm = float(np.linalg.norm(beta))
    # ‖1b'‖ = sqrt(n_obs)·‖b‖ (matriz de posto 1)
    ones_b = math.sqrt(data.n_obs) * float(np.linalg.norm(b))
    f0 = spectral_norm(F_at_zero(config.activation, data.n_obs, config.n_neurons))
    x_sq = spectral_norm(data.X) ** 2

    sup_mu = k * err * beta_norm
    sup_U = k**2 * x_sq * err * beta_norm / config.theta_V + k * ones_b + f0 / (theta - 1.0)
    return BoundsReport(sup_W=sup_W, sup_mu=sup_mu, sup_U=sup_U, sup_FU=sup_U + f0)


def g_u_mu_norm(sup_fu: float, sup_mu: float, scale: float = 1.0) -> float:
    """‖I + scale·vv'‖ com v = (sup F(U), sup μ): autovalores 1 e 1 + scale·‖v‖²."""
    return 1.0 + scale * (sup_fu**2 + sup_mu**2)


def kappa_g_x_beta(beta: np.ndarray, q_norm: float) -> float:
    """κ(I + ββ'⊗Q) = 1 + β'β·‖Q‖ para Q semidefinida positiva."""
    beta = np.asarray(beta, dtype=float)
    return 1.0 + float(beta @ beta) * q_norm


def ratio_term(beta: np.ndarray, q_norm: float) -> float:
    beta = np.asarray(beta, dtype=float)
    btb = float(beta @ beta)
    if btb == 0.0 or q_norm == 0.0:
        raise UndefinedConditionError(f"Razão indefinida: β'β={btb:.6g}, ‖Q‖={q_norm:.6g}")
    return (1.0 + btb + q_norm) / (btb * q_norm)


def theorem1_report(data: Dataset, config: ModelConfig) -> ConditionReport:
    q_norm = build_q_operator(data, config).norm()
    ratio = ratio_term(config.beta_vec, q_norm)
    kappa = kappa_g_x_beta(config.beta_vec, q_norm)
    bounds = lemma3_bounds(data, config)
    g_norm = g_u_mu_norm(bounds.sup_FU, bounds.sup_mu)
    threshold = kappa * ratio * g_norm
    return ConditionReport(
        kind="theorem1",
        threshold=threshold,
        theta_W=config.theta_W,
        satisfied=bool(config.theta_W > threshold),
        kappa_GXbeta=kappa,
        norm_GUmu=g_norm,
        ratio_term=ratio,
    )


def _kappa_omega(Omega: np.ndarray) -> float:
    kappa = condition_number(Omega)
    if math.isinf(kappa):
        raise SingularMatrixError("Omega")
    return kappa


def theorem2_report(
    data: Dataset,
    config: ModelConfig,
    Omega: np.ndarray,
    W: Optional[np.ndarray] = None,
) -> ConditionReport:
    kappa_omega = _kappa_omega(Omega)
    q_norm = build_q_operator(data, config).norm()
    ratio = ratio_term(config.beta_vec, q_norm)
    kappa = kappa_g_x_beta(config.beta_vec, q_norm)
    threshold = kappa * kappa_omega * ratio
    return ConditionReport(
        kind="theorem2",
        threshold=threshold,
        theta_W=config.theta_W,
        satisfied=bool(config.theta_W > threshold),
        kappa_GXbeta=kappa,
        norm_GUmu=1.0,
        ratio_term=ratio,
        kappa_omega=kappa_omega,
        omega=verify_omega(Omega, W) if W is not None else None,
    )


def assemble_G_hat_X(Q_hat: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Matriz em blocos [[I, −I⊗Q̂], [ββ'⊗I, I]] (vec empilhando colunas)."""
    n_obs = Q_hat.shape[0]
    beta = np.asarray(beta, dtype=float)
    m = n_obs * beta.shape[0]
    upper = np.hstack([np.eye(m), -np.kron(np.eye(beta.shape[0]), Q_hat)])
    lower = np.hstack([np.kron(np.outer(beta, beta), np.eye(n_obs)), np.eye(m)])
    return np.vstack([upper, lower])


def constrained_condition_report(
    data: Dataset,
    config: ModelConfig,
    cs: ConstraintSet,
    Omega: Optional[np.ndarray] = None,
    W: Optional[np.ndarray] = None,
) -> ConditionReport:
    if not cs.is_feasible(config.theta_W):
        raise InfeasibleConstraintsError(f"‖W2‖_F = {cs.w2_norm:.6g} >= 1/θ_W")
    Q_hat = build_q_operator(data, config, cs)
    q_norm = Q_hat.norm()
    ratio = ratio_term(config.beta_vec, q_norm)
    kappa = condition_number(assemble_G_hat_X(Q_hat.dense(), config.beta_vec))
    projector_norm = spectral_norm(cs.P)

    if Omega is None:
        bounds = lemma3_bounds(data, config)
        scale = math.sqrt(1.0 - config.theta_W**2 * cs.w2_norm**2) * projector_norm
        g_norm = g_u_mu_norm(bounds.sup_FU, bounds.sup_mu, scale)
        threshold = kappa * ratio * g_norm
        kind, kappa_omega, omega = "constrained_a", 1.0, None
    else:
        kappa_omega = _kappa_omega(Omega)
        g_norm = 1.0
        threshold = kappa * kappa_omega * ratio
        kind = "constrained_b"
        omega = verify_omega(Omega, W) if W is not None else None
    return ConditionReport(
        kind=kind,
        threshold=threshold,
        theta_W=config.theta_W,
        satisfied=bool(config.theta_W > threshold),
        kappa_GXbeta=kappa,
        norm_GUmu=g_norm,
        ratio_term=ratio,
        kappa_omega=kappa_omega,
        projector_norm=projector_norm,
        omega=omega,
    )


def _sample_ball(rng: np.random.Generator, shape: Tuple[int, int], radius: float) -> np.ndarray:
    d = shape[0] * shape[1]
    g = rng.standard_normal(shape)
    return g / np.linalg.norm(g) * radius * rng.uniform() ** (1.0 / d)


def empirical_contraction_factor(
    data: Dataset,
    config: ModelConfig,
    constraints: Optional[ConstraintSet] = None,
    n_pairs: int = 50,
    seed: int = 0,
    delta: Optional[float] = None,
    radius: Optional[float] = None,
) -> float:
    """
    max ‖T(p1) − T(p2)‖_F / ‖p1 − p2‖_F sobre pares amostrados uniformemente nas
    bolas de Frobenius ‖U‖ <= sup U, ‖μ‖ <= sup μ (ou ambas com raio `radius`).
    """
    if n_pairs < 1:
        raise ValueError("n_pairs deve ser >= 1")
    delta = config.delta if delta is None else delta
    if radius is None:
        bounds = lemma3_bounds(data, config)
        fallback = 1.0 + float(np.linalg.norm(data.Y))
        r_U, r_mu = bounds.sup_U, bounds.sup_mu
        if not (math.isfinite(r_U) and r_U > 0) or not (math.isfinite(r_mu) and r_mu > 0):
            logger.warning("Limites não finitos ou nulos; amostrando em bolas de raio %.6g", fallback)
            r_U = r_U if math.isfinite(r_U) and r_U > 0 else fallback
            r_mu = r_mu if math.isfinite(r_mu) and r_mu > 0 else fallback
    else:
        r_U = r_mu = float(radius)

    rng = np.random.default_rng(seed)
    Q = build_q_operator(data, config, constraints)
    shape = (data.n_obs, config.n_neurons)
    q = 0.0
    done = 0
    while done < n_pairs:
        p1 = IterState(U=_sample_ball(rng, shape, r_U), mu=_sample_ball(rng, shape, r_mu))
        p2 = IterState(U=_sample_ball(rng, shape, r_U), mu=_sample_ball(rng, shape, r_mu))
        dist = math.sqrt(p1.distance_sq(p2))
        if dist == 0.0:
            continue
        t1 = contraction_step(p1, delta, data, config, constraints, q_operator=Q)
        t2 = contraction_step(p2, delta, data, config, constraints, q_operator=Q)
        q = max(q, math.sqrt(t1.distance_sq(t2)) / dist)
        done += 1
    logger.debug("Fator de contração empírico: %.6g (%d pares)", q, n_pairs)
    return q


def _plain(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return _plain(value.item())
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def report_to_dict(report: Any) -> Dict[str, Any]:
    """Dataclass de relatório -> dict serializável em JSON (inf/nan viram string)."""
    if report is None:
        return {}
    if isinstance(report, dict):
        return _plain(report)
    return _plain(dataclasses.asdict(report))


def report_to_text(title: str, report: Any) -> str:
    lines = [f"[{title}]"]

    def walk(prefix: str, payload: Dict[str, Any]) -> None:
        for key, value in payload.items():
            if isinstance(value, dict):
                walk(f"{prefix}{key}.", value)
            elif isinstance(value, float):
                lines.append(f"{prefix}{key} = {value:.10g}")
            else:
                lines.append(f"{prefix}{key} = {value}")

    walk("", report_to_dict(report))
    return "\n".join(lines)
