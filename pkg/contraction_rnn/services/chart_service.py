"""
Gráficos estáticos em SVG: ajuste (dados vs modelo) e SSE por iteração.

Os SVGs são determinísticos: hashsalt fixo, sem data nos metadados, texto sem
conversão para paths.
"""
import logging
from pathlib import Path
from typing import Dict, Union

import matplotlib

matplotlib.use("Agg")  # headless
import matplotlib.pyplot as plt
import numpy as np

from contraction_rnn.config import settings
from contraction_rnn.exceptions import DataError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SVG_RC = {
    "svg.hashsalt": settings.SVG_HASHSALT,
    "svg.fonttype": "none",
    "path.simplify": False,
}


def _save_svg(fig, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise DataError(f"Erro ao gravar gráfico {path}: {e}") from e
    finally:
        plt.close(fig)
    return path


def render_fit_svg(x: np.ndarray, y: np.ndarray, y_hat: np.ndarray, path: PathLike, title: str = "Modelo vs Dados") -> Path:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if x.size == 0 or x.shape != y.shape or x.shape != y_hat.shape:
        raise DataError("Previsões vazias ou com tamanhos diferentes; gráfico de ajuste não gerado")
    order = np.argsort(x, kind="stable")
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 5))
        (data_line,) = ax.plot(x[order], y[order], color="tab:blue", label="dados")
        (model_line,) = ax.plot(x[order], y_hat[order], color="tab:orange", linestyle="--", label="modelo")
        data_line.set_gid("data-line")
        model_line.set_gid("model-line")
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.grid(linestyle="--", alpha=0.3)
        ax.legend()
        plt.tight_layout()
        return _save_svg(fig, Path(path))


def render_sse_svg(sse_trace: np.ndarray, path: PathLike, log_scale: bool = True) -> Path:
    sse = np.asarray(sse_trace, dtype=float)
    if sse.size == 0:
        raise DataError("Trace de SSE vazio; gráfico não gerado")
    if log_scale and np.any(sse <= 0):
        logger.warning("SSE com valores <= 0; usando escala linear")
        log_scale = False
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 5))
        (line,) = ax.plot(np.arange(1, sse.size + 1), sse, color="tab:blue")
        line.set_gid("sse-line")
        if log_scale:
            ax.set_yscale("log")
        ax.set_title("Soma dos Quadrados dos Erros")
        ax.set_xlabel("iteração")
        ax.set_ylabel("SSE")
        ax.grid(linestyle="--", alpha=0.3)
        plt.tight_layout()
        return _save_svg(fig, Path(path))


def emit_plots(
    sse_trace: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    y_hat: np.ndarray,
    out_dir: PathLike,
    log_sse: bool = True,
) -> Dict[str, Path]:
    """Gera fit.svg e sse.svg; valida tudo antes de gravar qualquer arquivo."""
    if np.asarray(sse_trace).size == 0:
        raise DataError("Trace de SSE vazio; nenhum gráfico gerado")
    if np.asarray(x).size == 0:
        raise DataError("Previsões vazias; nenhum gráfico gerado")
    out = Path(out_dir)
    files: Dict[str, Path] = {
        "fit.svg": render_fit_svg(x, y, y_hat, out / "fit.svg"),
        "sse.svg": render_sse_svg(sse_trace, out / "sse.svg", log_scale=log_sse),
    }
    logger.info("Gráficos gerados em %s", out)
    return files


def fit_abscissa(X: np.ndarray) -> np.ndarray:
    """Primeira coluna não constante de X (ou a primeira coluna, se todas forem constantes)."""
    X = np.asarray(X, dtype=float)
    for j in range(X.shape[1]):
        if np.ptp(X[:, j]) > 0:
            return X[:, j]
    return X[:, 0]
