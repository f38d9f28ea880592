"""
Leitura e escrita de artefatos: configuração JSON, tabelas CSV, pesos e relatórios.

CSVs são escritos com cabeçalho, ponto decimal, fim de linha LF e floats na
representação mais curta que preserva o double (ida e volta bit a bit).
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from contraction_rnn.exceptions import ConfigError, DataError
from contraction_rnn.models.domain import Dataset
from contraction_rnn.models.schemas import RunConfig, WeightsDocument
from contraction_rnn.utils.helpers import format_float, validation_error_field, validation_error_message

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def ensure_output_dir(path: PathLike) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"Não foi possível criar o diretório de saída {out}: {e}") from e
    return out


def _read_json(path: PathLike, what: str) -> Any:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"Arquivo de {what} não encontrado: {p}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON inválido em {p}: {e}") from e
    except OSError as e:
        raise ConfigError(f"Erro ao ler {p}: {e}") from e


def read_run_config(path: PathLike) -> RunConfig:
    payload = _read_json(path, "configuração")
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(validation_error_message(e), field=validation_error_field(e)) from e


def read_weights(path: PathLike) -> WeightsDocument:
    payload = _read_json(path, "pesos")
    try:
        return WeightsDocument.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(validation_error_message(e), field=validation_error_field(e)) from e


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    p = Path(path)
    p.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8", newline="\n")
    return p


def write_weights(path: PathLike, doc: WeightsDocument) -> Path:
    return write_json(path, doc.model_dump(mode="json"))


def write_text(path: PathLike, text: str) -> Path:
    p = Path(path)
    p.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8", newline="\n")
    return p


def read_table_from_file(path: PathLike, usecols: Optional[List[str]] = None) -> pd.DataFrame:
    """Lê um CSV em DataFrame; qualquer falha vira DataError com o caminho."""
    p = Path(path)
    if p.suffix.lower() != ".csv":
        raise DataError(f"Formato não suportado (use .csv): {p}")
    try:
        df = pd.read_csv(p, usecols=usecols, float_precision="round_trip")
    except FileNotFoundError as e:
        raise DataError(f"Arquivo CSV não encontrado: {p}") from e
    except ValueError as e:
        raise DataError(f"Colunas ausentes ou CSV inválido em {p}: {e}") from e
    except Exception as e:
        logger.exception("Erro ao ler arquivo %s", p)
        raise DataError(f"Erro ao ler CSV {p}: {e}") from e
    return df


def _numeric_column(df: pd.DataFrame, name: str, path: PathLike) -> np.ndarray:
    try:
        values = pd.to_numeric(df[name], errors="raise").to_numpy(dtype=float)
    except (ValueError, TypeError) as e:
        raise DataError(f"Coluna '{name}' de {path} não é numérica") from e
    if not np.all(np.isfinite(values)):
        raise DataError(f"Coluna '{name}' de {path} contém valores ausentes ou não finitos")
    return values


def load_dataset_csv(path: PathLike, x_columns: Sequence[str], y_column: Optional[str]) -> Dataset:
    """Constrói um Dataset a partir das colunas nomeadas (y_column=None -> Y zerado)."""
    return dataset_from_table(read_table_from_file(path), x_columns, y_column, path)


def dataset_from_table(
    df: pd.DataFrame,
    x_columns: Sequence[str],
    y_column: Optional[str],
    path: PathLike,
) -> Dataset:
    wanted = list(x_columns) + ([y_column] if y_column else [])
    missing = [c for c in wanted if c not in df.columns]
    if missing:
        raise DataError(f"Colunas {missing} não encontradas em {path}")
    if df.empty:
        raise DataError(f"CSV sem linhas de dados: {path}")
    X = np.column_stack([_numeric_column(df, c, path) for c in x_columns])
    Y = _numeric_column(df, y_column, path) if y_column else np.zeros(X.shape[0])
    logger.info("Dados carregados de %s: %d linhas, colunas %s", path, X.shape[0], list(x_columns))
    return Dataset(X=X, Y=Y, x_columns=tuple(x_columns))


def write_csv(path: PathLike, columns: Dict[str, np.ndarray]) -> Path:
    """Escreve colunas numéricas (na ordem do dict) em CSV determinístico."""
    df = pd.DataFrame({name: [format_float(v) for v in np.asarray(values, dtype=float)] for name, values in columns.items()})
    p = Path(path)
    df.to_csv(p, index=False, lineterminator="\n")
    return p


def write_trace_csv(path: PathLike, name: str, values: np.ndarray) -> Path:
    values = np.asarray(values, dtype=float)
    p = Path(path)
    df = pd.DataFrame({
        "iteration": np.arange(1, values.shape[0] + 1),
        name: [format_float(v) for v in values],
    })
    df.to_csv(p, index=False, lineterminator="\n")
    return p


def write_dataset_csv(path: PathLike, data: Dataset, y_name: str = "y") -> Path:
    columns = {name: data.X[:, j] for j, name in enumerate(data.x_columns or _default_columns(data.n_in))}
    columns[y_name] = data.Y
    return write_csv(path, columns)


def write_predictions_csv(
    path: PathLike,
    X: np.ndarray,
    x_columns: Sequence[str],
    y_hat: np.ndarray,
    y: Optional[np.ndarray] = None,
) -> Path:
    columns = {name: X[:, j] for j, name in enumerate(x_columns)}
    if y is not None:
        columns["y"] = y
    columns["y_hat"] = y_hat
    return write_csv(path, columns)


def _default_columns(n: int) -> List[str]:
    return [f"x{j}" for j in range(n)]
