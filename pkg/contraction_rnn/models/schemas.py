import logging
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)


# ==== Ativação ====
class ActivationKind(str, Enum):
    SOFTPLUS = "softplus"
    IDENTITY = "identity"
    SCALED_TANH = "scaled_tanh"


class ActivationSpec(BaseModel):
    """Ativação com derivada em [0, 1]; `alpha` controla a inclinação."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ActivationKind = ActivationKind.SOFTPLUS
    alpha: float = 0.05

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v: float) -> float:
        if not np.isfinite(v) or v <= 0:
            raise ValueError("alpha deve ser positivo e finito")
        return v


ActivationConfig = Union[ActivationSpec, List[ActivationSpec]]


class ParamDeltaMetric(str, Enum):
    WEIGHTS = "weights"
    STATE = "state"


# ==== Modelo ====
class ModelConfig(BaseModel):
    """Hiperparâmetros do treino. Os padrões reproduzem o experimento polinomial."""

    model_config = ConfigDict(extra="forbid")

    n_neurons: int = Field(3, ge=1)
    theta_W: float = Field(1.2, gt=0)
    theta_V: float = Field(0.05, gt=0)
    beta: List[float] = Field(default_factory=lambda: [1.0, 1.0, 1.0])
    b: List[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0])
    activation: ActivationConfig = Field(default_factory=ActivationSpec)
    delta: float = Field(0.001, gt=0, le=1)
    max_outer_iters: int = Field(20000, ge=1)
    outer_tol: float = Field(1e-3, gt=0)
    inner_tol: float = Field(1e-10, gt=0)
    inner_max_iters: int = Field(10000, ge=1)
    param_delta_metric: ParamDeltaMetric = ParamDeltaMetric.WEIGHTS
    delta_guard: bool = True
    min_delta: float = Field(1e-12, gt=0)

    @model_validator(mode="after")
    def check_dimensions(self) -> "ModelConfig":
        if len(self.beta) != self.n_neurons:
            raise ValueError(f"beta deve ter {self.n_neurons} entradas (recebido {len(self.beta)})")
        if len(self.b) != self.n_neurons:
            raise ValueError(f"b deve ter {self.n_neurons} entradas (recebido {len(self.b)})")
        if isinstance(self.activation, list) and len(self.activation) != self.n_neurons:
            raise ValueError(
                f"lista de ativações deve ter {self.n_neurons} entradas (recebido {len(self.activation)})"
            )
        if not all(np.isfinite(self.beta)) or not all(np.isfinite(self.b)):
            raise ValueError("beta e b devem ser finitos")
        if float(np.dot(self.beta, self.beta)) == 0.0:
            logger.warning("β'β = 0: diagnósticos de convergência ficam indefinidos")
        if self.theta_W <= 1.0:
            logger.warning("theta_W=%s <= 1: limites de variáveis não são finitos", self.theta_W)
        return self

    @property
    def beta_vec(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=float)

    @property
    def b_vec(self) -> np.ndarray:
        return np.asarray(self.b, dtype=float)


# ==== Dados ====
class PolynomialSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # grau decrescente: [1, 1, -10, 0] -> x^3 + x^2 - 10x
    coefficients: List[float] = Field(default_factory=lambda: [1.0, 1.0, -10.0, 0.0], min_length=1)
    domain: Tuple[float, float] = (-5.0, 5.0)
    n_points: int = Field(50, ge=2)
    include_constant_column: bool = True

    @field_validator("domain")
    @classmethod
    def validate_domain(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = v
        if not lo < hi:
            raise ValueError("domain deve satisfazer lo < hi")
        return v


class CsvDataSource(BaseModel):
    model_config = ConfigDict(extra="forbid")

    csv_path: str
    x_columns: List[str] = Field(..., min_length=1)
    y_column: str


class GeneratorDataSource(BaseModel):
    model_config = ConfigDict(extra="forbid")

    generator: PolynomialSpec


class ConstraintsBlock(BaseModel):
    """Restrições lineares: blocos densos (N, V0, R, r) ou o atalho `fnn_layers`."""

    model_config = ConfigDict(extra="forbid")

    N: Optional[List[List[float]]] = None
    V0: Optional[List[List[float]]] = None
    R: Optional[List[List[float]]] = None
    r: Optional[List[float]] = None
    fnn_layers: Optional[List[int]] = None

    @field_validator("fnn_layers")
    @classmethod
    def validate_layers(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (len(v) == 0 or any(size < 1 for size in v)):
            raise ValueError("fnn_layers deve ter ao menos uma camada com tamanho positivo")
        return v

    @model_validator(mode="after")
    def check_exclusive(self) -> "ConstraintsBlock":
        if self.fnn_layers is not None and (self.R is not None or self.r is not None):
            raise ValueError("use fnn_layers ou R/r, não ambos")
        if (self.R is None) != (self.r is None):
            raise ValueError("R e r devem ser informados juntos")
        return self


# ==== Execução ====
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelConfig = Field(default_factory=ModelConfig)
    data: Union[CsvDataSource, GeneratorDataSource]
    constraints: Optional[ConstraintsBlock] = None
    output_dir: Optional[str] = None
    emit_plots: bool = True
    diagnostics: bool = True
    seed: int = 0
    omega: Optional[List[List[float]]] = None
    plot_log_sse: bool = True
    data_csv_name: str = "data.csv"

    @field_validator("omega")
    @classmethod
    def validate_omega(cls, v: Optional[List[List[float]]]) -> Optional[List[List[float]]]:
        if v is not None and any(len(row) != len(v) for row in v):
            raise ValueError("omega deve ser uma matriz quadrada")
        return v

    @model_validator(mode="after")
    def check_omega_size(self) -> "RunConfig":
        if self.omega is not None and len(self.omega) != self.model.n_neurons:
            raise ValueError(f"omega deve ser {self.model.n_neurons}x{self.model.n_neurons}")
        return self


class WeightsDocument(BaseModel):
    """Arquivo de pesos autodescritivo (matrizes em ordem de linhas)."""

    model_config = ConfigDict(extra="forbid")

    format_version: int = 1
    W: List[List[float]]
    V: List[List[float]]
    b: List[float]
    beta: List[float]
    theta_W: float
    theta_V: float
    activation: ActivationConfig
    x_columns: List[str]
