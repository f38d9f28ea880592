import numpy as np

from contraction_rnn.exceptions import NonFiniteError, ShapeError


def ensure_finite(name: str, value: np.ndarray) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"'{name}' contém valores não finitos (NaN/Inf)")
    return arr


def ensure_matrix(name: str, value: np.ndarray) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f"'{name}' deve ser uma matriz 2D (recebido ndim={arr.ndim})")
    return arr


def ensure_square(name: str, value: np.ndarray) -> np.ndarray:
    arr = ensure_matrix(name, value)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"'{name}' deve ser quadrada (recebido {arr.shape})")
    return arr
