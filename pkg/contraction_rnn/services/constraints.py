"""
Restrições lineares sobre os pesos:

    V = N·V_r + V0          (V num hiperplano; N = None representa a identidade)
    R·vec(W) = r            (sistema linear sobre vec(W), vec empilhando colunas)

P = I − R'(RR')⁻¹R e W2 = vec⁻¹(R'(RR')⁻¹r) dependem só das restrições e são
calculados uma vez na construção.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spla

from contraction_rnn.exceptions import (
    ConfigError,
    InfeasibleConstraintsError,
    RankDeficientError,
    ShapeError,
)
from contraction_rnn.models.domain import Dataset
from contraction_rnn.models.schemas import ConstraintsBlock, ModelConfig
from contraction_rnn.services.activation import ActivationLike, apply_F, apply_F_dot
from contraction_rnn.services.matrix_kit import condition_number, frobenius_norm, unvec, vec
from contraction_rnn.utils.validators import ensure_finite, ensure_matrix

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-12
NONNEG_TOL = -1e-12


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    N: Optional[np.ndarray]
    V0: np.ndarray
    R: np.ndarray
    r: np.ndarray
    P: np.ndarray
    W2: np.ndarray
    # base ortonormal de col(N); None quando N é a identidade
    n_basis: Optional[np.ndarray]
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_in(self) -> int:
        return self.V0.shape[0]

    @property
    def n_neurons(self) -> int:
        return self.V0.shape[1]

    @property
    def q(self) -> int:
        return self.R.shape[0]

    @property
    def w2_norm(self) -> float:
        return frobenius_norm(self.W2)

    def is_feasible(self, theta_W: float) -> bool:
        return self.w2_norm < 1.0 / theta_W

    def projector_N(self) -> np.ndarray:
        """Projetor ortogonal sobre col(N), igual a N·N⁺."""
        if self.n_basis is None:
            return np.eye(self.n_in)
        return self.n_basis @ self.n_basis.T

    @property
    def is_empty(self) -> bool:
        return self.q == 0 and self.n_basis is None and not np.any(self.V0)


@dataclass(frozen=True)
class OmegaReport:
    invertible: bool
    left_ok: bool
    right_ok: bool
    kappa: float

    @property
    def ok(self) -> bool:
        return self.invertible and self.left_ok and self.right_ok


def _orthonormal_basis(N: np.ndarray) -> np.ndarray:
    if N.shape[1] == 0:
        return np.zeros((N.shape[0], 0))
    U, s, _ = spla.svd(N, full_matrices=False, check_finite=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((N.shape[0], 0))
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    return U[:, :rank]


def build_constraints(
    N: Optional[np.ndarray],
    V0: np.ndarray,
    R: np.ndarray,
    r: np.ndarray,
    theta_W: Optional[float] = None,
) -> ConstraintSet:
    V0 = ensure_finite("V0", ensure_matrix("V0", V0))
    n_in, n = V0.shape
    R = ensure_finite("R", np.asarray(R, dtype=float).reshape(-1, n * n))
    r = ensure_finite("r", np.asarray(r, dtype=float).reshape(-1))
    q = R.shape[0]
    if r.shape[0] != q:
        raise ShapeError(f"R tem {q} linhas, r tem {r.shape[0]} entradas")

    n_basis = None
    if N is not None:
        N = ensure_finite("N", np.asarray(N, dtype=float))
        if N.ndim != 2 or N.shape[0] != n_in:
            raise ShapeError(f"N deve ter {n_in} linhas (recebido shape {N.shape})")
        n_basis = _orthonormal_basis(N)

    if q == 0:
        P = np.eye(n * n)
        W2 = np.zeros((n, n))
    else:
        if np.linalg.matrix_rank(R) < q:
            raise RankDeficientError(f"R ({q}x{n * n}) não tem posto completo de linhas")
        RRt = R @ R.T
        P = np.eye(n * n) - R.T @ spla.solve(RRt, R, assume_a="pos")
        P = 0.5 * (P + P.T)
        W2 = unvec(R.T @ spla.solve(RRt, r, assume_a="pos"), n, n)

    warnings: List[str] = []
    if theta_W is not None and frobenius_norm(W2) >= 1.0 / theta_W:
        msg = f"‖W2‖_F = {frobenius_norm(W2):.6g} >= 1/θ_W = {1.0 / theta_W:.6g}: restrições inviáveis"
        logger.warning(msg)
        warnings.append(msg)
    return ConstraintSet(N=N, V0=V0, R=R, r=r, P=P, W2=W2, n_basis=n_basis, warnings=tuple(warnings))


def empty_constraints(n_in: int, n_neurons: int, theta_W: Optional[float] = None) -> ConstraintSet:
    return build_constraints(
        None,
        np.zeros((n_in, n_neurons)),
        np.zeros((0, n_neurons * n_neurons)),
        np.zeros(0),
        theta_W=theta_W,
    )


def constrained_W(
    U: np.ndarray,
    mu: np.ndarray,
    theta_W: float,
    cs: ConstraintSet,
    activation: ActivationLike,
) -> np.ndarray:
    """
    W = (1/θ_W)·((1 − θ_W²‖W2‖²)/(1 + ‖W1‖²))^½·W1 + W2, com W1 = vec⁻¹(P·vec(F(U)'μ)).
    """
    if not cs.is_feasible(theta_W):
        raise InfeasibleConstraintsError(
            f"‖W2‖_F = {cs.w2_norm:.6g} >= 1/θ_W: não existe W viável no domínio semicircular"
        )
    n = cs.n_neurons
    A = apply_F(activation, U).T @ mu
    W1 = unvec(cs.P @ vec(A), n, n)
    shrink = np.sqrt(1.0 - theta_W**2 * float(np.sum(cs.W2**2)))
    return shrink * W1 / (theta_W * np.sqrt(1.0 + float(np.sum(W1**2)))) + cs.W2


def constrained_assemble(
    U: np.ndarray,
    mu: np.ndarray,
    W: np.ndarray,
    data: Dataset,
    config: ModelConfig,
    cs: ConstraintSet,
):
    """
    Retorna (B̂1, B̂2, Q̂) com Q̂ = X·P_N·X'/θ_V e B̂1 = X(I − P_N)V0 + 1b' + F(U)W.
    """
    from contraction_rnn.services.foc_solver import QOperator

    FU = apply_F(config.activation, U)
    B1 = config.b_vec[None, :] + FU @ W
    if cs.n_basis is None:
        Z = data.X
    else:
        Z = data.X @ cs.n_basis
        residual_V0 = cs.V0 - cs.n_basis @ (cs.n_basis.T @ cs.V0)
        B1 = data.X @ residual_V0 + B1
    B2 = np.outer(data.Y, config.beta_vec) + apply_F_dot(config.activation, U) * (mu @ W.T)
    return B1, B2, QOperator(Z, config.theta_V)


def layer_index(layer_sizes: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(layer_sizes)), layer_sizes)


def fnn_mask_constraints(layer_sizes: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fixa em zero toda entrada W[i, j] exceto as de neurônio i na camada ℓ para
    neurônio j na camada ℓ+1 (neurônios numerados camada a camada).
    """
    if len(layer_sizes) == 0 or any(size < 1 for size in layer_sizes):
        raise ConfigError("layer_sizes deve ter ao menos uma camada positiva", field="fnn_layers")
    layers = layer_index(layer_sizes)
    n = layers.shape[0]
    # free[i, j] <=> layer(j) == layer(i) + 1
    free = layers[None, :] == layers[:, None] + 1
    pinned = np.flatnonzero(~vec(free).astype(bool))
    R = np.zeros((pinned.shape[0], n * n))
    R[np.arange(pinned.shape[0]), pinned] = 1.0
    return R, np.zeros(pinned.shape[0])


def verify_omega(Omega: np.ndarray, W: np.ndarray) -> OmegaReport:
    Omega = ensure_finite("Omega", ensure_matrix("Omega", Omega))
    W = ensure_finite("W", ensure_matrix("W", W))
    if Omega.shape[0] != Omega.shape[1] or Omega.shape != W.shape:
        raise ShapeError(f"Omega {Omega.shape} e W {W.shape} devem ser quadradas do mesmo tamanho")
    kappa = condition_number(Omega)
    return OmegaReport(
        invertible=bool(np.isfinite(kappa)),
        left_ok=bool(np.all(Omega @ W >= NONNEG_TOL)),
        right_ok=bool(np.all(W @ Omega >= NONNEG_TOL)),
        kappa=kappa,
    )


def recover_V_constrained(
    X: np.ndarray,
    mu: np.ndarray,
    theta_V: float,
    cs: ConstraintSet,
) -> np.ndarray:
    """V = N·V_r + V0 com V_r = (N'N)⁻¹(N'X'μ/θ_V − N'V0) (mínimos quadrados se N não tem posto completo)."""
    target = X.T @ mu / theta_V
    if cs.N is None:
        return target
    if cs.N.shape[1] == 0:
        return cs.V0.copy()
    V_r = np.linalg.pinv(cs.N) @ (target - cs.V0)
    return cs.N @ V_r + cs.V0


def constraints_from_block(
    block: ConstraintsBlock,
    n_in: int,
    n_neurons: int,
    theta_W: Optional[float] = None,
) -> ConstraintSet:
    N = None
    if block.N is not None:
        N = np.array(block.N, dtype=float).reshape(n_in, -1) if len(block.N) else np.zeros((n_in, 0))
    V0 = np.zeros((n_in, n_neurons)) if block.V0 is None else np.array(block.V0, dtype=float)
    if V0.shape != (n_in, n_neurons):
        raise ConfigError(f"V0 deve ser {n_in}x{n_neurons} (recebido {V0.shape})", field="constraints.V0")
    if block.fnn_layers is not None:
        if sum(block.fnn_layers) != n_neurons:
            raise ConfigError(
                f"fnn_layers soma {sum(block.fnn_layers)}, esperado n_neurons={n_neurons}",
                field="constraints.fnn_layers",
            )
        R, r = fnn_mask_constraints(block.fnn_layers)
    elif block.R is not None:
        R = np.array(block.R, dtype=float).reshape(-1, n_neurons * n_neurons)
        r = np.array(block.r, dtype=float)
    else:
        R, r = np.zeros((0, n_neurons * n_neurons)), np.zeros(0)
    return build_constraints(N, V0, R, r, theta_W=theta_W)
