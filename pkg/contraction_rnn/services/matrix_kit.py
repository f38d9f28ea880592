"""
Utilitários de álgebra linear densa usados pelo método de contração.

Convenções:
  - normas sem índice são espectrais (norma de operador 2); `frobenius_norm` é a de Frobenius
  - `vec` empilha colunas (ordem Fortran), de modo que vec(A·X·C) = (C' ⊗ A)·vec(X)
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as spla

from contraction_rnn.exceptions import ShapeError, SingularMatrixError, UndefinedConditionError
from contraction_rnn.utils.validators import ensure_finite, ensure_matrix, ensure_square

logger = logging.getLogger(__name__)

# sigma_min < SINGULAR_RTOL * sigma_max => "singular"
SINGULAR_RTOL = 1e-12


def vec(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=float).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape((rows, cols), order="F")


def frobenius_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(M, dtype=float)))


def spectral_norm(M: np.ndarray) -> float:
    """Maior valor singular de M (0.0 para matrizes vazias)."""
    arr = ensure_finite("M", ensure_matrix("M", M))
    if arr.size == 0:
        return 0.0
    return float(spla.svdvals(arr, check_finite=False)[0])


def condition_number(M: np.ndarray) -> float:
    """
    sigma_max / sigma_min de uma matriz quadrada.

    Retorna `math.inf` quando sigma_min < SINGULAR_RTOL * sigma_max (matriz singular).
    """
    arr = ensure_finite("M", ensure_square("M", M))
    if arr.size == 0:
        return 1.0
    s = spla.svdvals(arr, check_finite=False)
    s_max, s_min = float(s[0]), float(s[-1])
    if s_max == 0.0 or s_min < SINGULAR_RTOL * s_max:
        return math.inf
    return s_max / s_min


def is_singular(M: np.ndarray) -> bool:
    return math.isinf(condition_number(M))


@dataclass(frozen=True)
class WoodburyFactor:
    """Fator de Cholesky da matriz interna k×k (I + s·X'X)."""

    s: float
    k: int
    cho: Optional[Tuple[np.ndarray, bool]]


def woodbury_factor(X: np.ndarray, s: float) -> WoodburyFactor:
    X = ensure_finite("X", ensure_matrix("X", X))
    if s < 0:
        raise ValueError("s deve ser não negativo")
    k = X.shape[1]
    if k == 0 or s == 0.0:
        return WoodburyFactor(s=float(s), k=k, cho=None)
    inner = np.eye(k) + s * (X.T @ X)
    if is_singular(inner):
        raise SingularMatrixError("I + s·X'X")
    try:
        cho = spla.cho_factor(inner, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError("I + s·X'X", f"Falha ao fatorar I + s·X'X: {e}") from e
    return WoodburyFactor(s=float(s), k=k, cho=cho)


def woodbury_apply(
    X: np.ndarray,
    s: float,
    B: np.ndarray,
    factor: Optional[WoodburyFactor] = None,
) -> np.ndarray:
    """
    Calcula (I + s·X·X')⁻¹·B pela identidade de Woodbury:

        (I + s·XX')⁻¹ = I - s·X·(I + s·X'X)⁻¹·X'

    Só a matriz interna k×k é fatorada; a inversa n×n nunca é formada.
    """
    X = ensure_matrix("X", X)
    B = ensure_finite("B", ensure_matrix("B", B))
    if X.shape[0] != B.shape[0]:
        raise ShapeError(f"X {X.shape} e B {B.shape} não são compatíveis")
    if factor is None:
        factor = woodbury_factor(X, s)
    elif factor.k != X.shape[1] or factor.s != float(s):
        raise ValueError("Fator de Woodbury não corresponde a (X, s)")
    if factor.cho is None:
        return B.copy()
    inner_rhs = X.T @ B
    correction = spla.cho_solve(factor.cho, inner_rhs, check_finite=False)
    return B - s * (X @ correction)


def sylvester_pair_solve(
    A: np.ndarray,
    c: np.ndarray,
    B1: np.ndarray,
    B2: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resolve o par acoplado

        X1 = A·X2 + B1
        X2 = -X1·cc' + B2

    via a forma fechada X = D - (I + c'c·A)⁻¹·A·D·cc', com D1 = B1 + A·B2 e
    D2 = B2 - B1·cc' (cada equação é uma Sylvester X + A·X·cc' = D).
    """
    A = ensure_finite("A", ensure_square("A", A))
    c = ensure_finite("c", np.asarray(c, dtype=float).reshape(-1))
    B1 = ensure_finite("B1", ensure_matrix("B1", B1))
    B2 = ensure_finite("B2", ensure_matrix("B2", B2))
    n, m = B1.shape
    if A.shape[0] != n or B2.shape != (n, m) or c.shape[0] != m:
        raise ShapeError(
            f"Dimensões incompatíveis: A {A.shape}, c {c.shape}, B1 {B1.shape}, B2 {B2.shape}"
        )
    cc = np.outer(c, c)
    ctc = float(c @ c)
    D1 = B1 + A @ B2
    D2 = B2 - B1 @ cc
    M = np.eye(n) + ctc * A
    if is_singular(M):
        raise SingularMatrixError("I + c'c·A")
    lu = spla.lu_factor(M, check_finite=False)
    X1 = D1 - spla.lu_solve(lu, A @ D1, check_finite=False) @ cc
    X2 = D2 - spla.lu_solve(lu, A @ D2, check_finite=False) @ cc
    return X1, X2


def lemma2_bound(A: np.ndarray, c: np.ndarray) -> float:
    """
    Fator de Lipschitz κ(I + cc'⊗A)·(1 + c'c + ‖A‖)/(c'c·‖A‖) do par de Sylvester.

    Para A semidefinida positiva κ(I + cc'⊗A) = 1 + c'c·‖A‖ (forma fechada).
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    ctc = float(c @ c)
    a_norm = spectral_norm(A)
    if ctc == 0.0 or a_norm == 0.0:
        raise UndefinedConditionError("Razão indefinida: c'c·‖A‖ = 0")
    kappa = 1.0 + ctc * a_norm
    return kappa * (1.0 + ctc + a_norm) / (ctc * a_norm)
