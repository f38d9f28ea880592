"""
Hierarquia de erros do pacote.

Cada erro carrega `detail` (mensagem para o usuário) e `exit_code`, que a CLI
usa como código de saída do processo.
"""
from typing import Optional


class ContractionError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return self.detail


class ShapeError(ContractionError):
    pass


class NonFiniteError(ContractionError):
    pass


class SingularMatrixError(ContractionError):
    def __init__(self, matrix_name: str, detail: Optional[str] = None):
        super().__init__(detail or f"Matriz numericamente singular: {matrix_name}")
        self.matrix_name = matrix_name


class ContractionPreconditionError(ContractionError):
    pass


class NonConvergenceError(ContractionError):
    def __init__(self, detail: str, last_residual: float):
        super().__init__(detail)
        self.last_residual = last_residual


class DivergenceError(ContractionError):
    def __init__(self, detail: str, iteration: int):
        super().__init__(detail)
        self.iteration = iteration


class DomainError(ContractionError):
    pass


class InfeasibleConstraintsError(ContractionError):
    pass


class RankDeficientError(ContractionError):
    pass


class UndefinedConditionError(ContractionError):
    pass


class ConfigError(ContractionError):
    def __init__(self, detail: str, field: Optional[str] = None):
        super().__init__(detail)
        self.field = field


class DataError(ContractionError):
    pass
