from typing import Iterable, List, Optional

import numpy as np
from pydantic import ValidationError


def format_float(value: float) -> str:
    # repr de float é a representação mais curta que volta ao mesmo double
    return repr(float(value))


def matrix_to_rows(M: np.ndarray) -> List[List[float]]:
    """Matriz numpy -> lista de linhas de floats (ordem de linhas, pronta para JSON)."""
    return [[float(v) for v in row] for row in np.asarray(M, dtype=float)]


def rows_to_matrix(rows: Iterable[Iterable[float]], n_cols: Optional[int] = None) -> np.ndarray:
    rows = [list(r) for r in rows]
    if not rows:
        return np.zeros((0, n_cols or 0))
    return np.array(rows, dtype=float)


def validation_error_field(error: ValidationError) -> Optional[str]:
    """Caminho (ex.: 'model.delta') do primeiro campo inválido de um ValidationError."""
    errors = error.errors()
    if not errors:
        return None
    loc = [str(part) for part in errors[0].get("loc", ())]
    return ".".join(loc) or None


def validation_error_message(error: ValidationError) -> str:
    first = error.errors()[0] if error.errors() else {}
    field = validation_error_field(error)
    msg = first.get("msg", str(error))
    return f"Configuração inválida em '{field}': {msg}" if field else f"Configuração inválida: {msg}"
