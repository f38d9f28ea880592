"""
Contêineres numéricos imutáveis (numpy) usados pelos serviços.

Y, beta e b são vetores 1-D; termos como λβ' são produtos externos (np.outer).
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from contraction_rnn.exceptions import ShapeError
from contraction_rnn.utils.validators import ensure_finite, ensure_matrix


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    x_columns: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        X = ensure_finite("X", ensure_matrix("X", self.X))
        Y = ensure_finite("Y", np.asarray(self.Y, dtype=float).reshape(-1))
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ShapeError(f"X deve ter ao menos 1 observação e 1 coluna (recebido {X.shape})")
        if Y.shape[0] != X.shape[0]:
            raise ShapeError(f"Y tem {Y.shape[0]} linhas, X tem {X.shape[0]}")
        if self.x_columns is not None and len(self.x_columns) != X.shape[1]:
            raise ShapeError("x_columns não corresponde ao número de colunas de X")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if self.x_columns is not None:
            object.__setattr__(self, "x_columns", tuple(self.x_columns))

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def n_in(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class WeightSet:
    W: np.ndarray
    V: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = ensure_finite("W", ensure_matrix("W", self.W))
        V = ensure_finite("V", ensure_matrix("V", self.V))
        b = ensure_finite("b", np.asarray(self.b, dtype=float).reshape(-1))
        n = b.shape[0]
        if W.shape != (n, n) or V.shape[1] != n:
            raise ShapeError(f"Pesos incompatíveis: W {W.shape}, V {V.shape}, b {b.shape}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "b", b)

    @property
    def n_neurons(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class IterState:
    U: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        U = ensure_finite("U", ensure_matrix("U", self.U))
        mu = ensure_finite("mu", ensure_matrix("mu", self.mu))
        if U.shape != mu.shape:
            raise ShapeError(f"U {U.shape} e mu {mu.shape} devem ter o mesmo shape")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "mu", mu)

    def distance_sq(self, other: "IterState") -> float:
        return float(np.sum((self.U - other.U) ** 2) + np.sum((self.mu - other.mu) ** 2))
