"""
Orquestração das execuções da CLI: geração de dados, treino, previsão,
diagnósticos e emissão de artefatos.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

from contraction_rnn.config import settings
from contraction_rnn.exceptions import ConfigError, ContractionError
from contraction_rnn.models.domain import Dataset, WeightSet
from contraction_rnn.models.schemas import (
    CsvDataSource,
    GeneratorDataSource,
    PolynomialSpec,
    RunConfig,
    WeightsDocument,
)
from contraction_rnn.services import chart_service, file_service
from contraction_rnn.services.constraints import ConstraintSet, constraints_from_block
from contraction_rnn.services.convergence_analysis import (
    constrained_condition_report,
    empirical_contraction_factor,
    lemma3_bounds,
    report_to_dict,
    report_to_text,
    theorem1_report,
    theorem2_report,
)
from contraction_rnn.services.foc_solver import TrainResult, train
from contraction_rnn.services.model_core import predict
from contraction_rnn.utils.helpers import matrix_to_rows, rows_to_matrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EXIT_CONVERGED = 0
EXIT_ITERATION_CAP = 2

PREDICTIONS_FORWARD = "forward"
PREDICTIONS_FINAL_STATE = "final_state"


@dataclass
class RunOutcome:
    exit_code: int
    output_dir: Path
    files: Dict[str, Path] = field(default_factory=dict)
    result: Optional[TrainResult] = None


def generate_polynomial_dataset(spec: PolynomialSpec) -> Dataset:
    """Grade uniforme (extremos inclusos) com Y = polinômio(x); coeficientes em grau decrescente."""
    lo, hi = spec.domain
    grid = np.linspace(lo, hi, spec.n_points)
    Y = np.polyval(np.asarray(spec.coefficients, dtype=float), grid)
    if spec.include_constant_column:
        return Dataset(X=np.column_stack([np.ones_like(grid), grid]), Y=Y, x_columns=("const", "x"))
    return Dataset(X=grid[:, None], Y=Y, x_columns=("x",))


def resolve_output_dir(cfg: Optional[RunConfig], override: Optional[PathLike]) -> Path:
    if override is not None:
        return file_service.ensure_output_dir(override)
    if cfg is not None and cfg.output_dir:
        return file_service.ensure_output_dir(cfg.output_dir)
    return file_service.ensure_output_dir(settings.OUTPUT_DIR)


def load_data(cfg: RunConfig, base_dir: PathLike) -> Dataset:
    source = cfg.data
    if isinstance(source, GeneratorDataSource):
        return generate_polynomial_dataset(source.generator)
    if isinstance(source, CsvDataSource):
        csv_path = Path(source.csv_path)
        if not csv_path.is_absolute():
            csv_path = Path(base_dir) / csv_path
        return file_service.load_dataset_csv(csv_path, source.x_columns, source.y_column)
    raise ConfigError("Bloco 'data' inválido", field="data")


def load_constraints(cfg: RunConfig, data: Dataset) -> Optional[ConstraintSet]:
    if cfg.constraints is None:
        return None
    return constraints_from_block(cfg.constraints, data.n_in, cfg.model.n_neurons, cfg.model.theta_W)


def weights_document(result: TrainResult, cfg: RunConfig, data: Dataset) -> WeightsDocument:
    model = cfg.model
    return WeightsDocument(
        W=matrix_to_rows(result.weights.W),
        V=matrix_to_rows(result.weights.V),
        b=[float(v) for v in result.weights.b],
        beta=list(model.beta),
        theta_W=model.theta_W,
        theta_V=model.theta_V,
        activation=model.activation,
        x_columns=list(data.x_columns or [f"x{j}" for j in range(data.n_in)]),
    )


def _training_predictions(result: TrainResult, cfg: RunConfig, data: Dataset) -> Tuple[np.ndarray, str]:
    """ŷ = U(X)·β pelo forward nos pesos treinados; se o forward falhar, U·β do estado final."""
    try:
        y_hat = predict(
            data.X,
            result.weights,
            cfg.model.beta_vec,
            cfg.model.activation,
            tol=cfg.model.inner_tol,
            max_iters=cfg.model.inner_max_iters,
        )
    except ContractionError as e:
        logger.warning("Previsão por forward falhou (%s); usando U·β do estado final", e.detail)
        return result.state.U @ cfg.model.beta_vec, PREDICTIONS_FINAL_STATE
    return y_hat, PREDICTIONS_FORWARD


def _advisory(name: str, fn: Callable[[], Any]) -> Dict[str, Any]:
    """Executa um diagnóstico; falhas viram {'error': ...} sem abortar a execução."""
    try:
        return report_to_dict(fn())
    except ContractionError as e:
        logger.warning("Diagnóstico '%s' indisponível: %s", name, e.detail)
        return {"error": e.detail}


def collect_diagnostics(
    cfg: RunConfig,
    data: Dataset,
    constraints: Optional[ConstraintSet],
    W: Optional[np.ndarray] = None,
) -> Dict[str, Dict[str, Any]]:
    model = cfg.model
    omega = rows_to_matrix(cfg.omega) if cfg.omega is not None else np.eye(model.n_neurons)
    sections: Dict[str, Dict[str, Any]] = {
        "bounds": _advisory("bounds", lambda: lemma3_bounds(data, model)),
    }
    if constraints is None:
        sections["theorem1"] = _advisory("theorem1", lambda: theorem1_report(data, model))
        sections["theorem2"] = _advisory("theorem2", lambda: theorem2_report(data, model, omega, W))
    else:
        sections["constrained_a"] = _advisory(
            "constrained_a", lambda: constrained_condition_report(data, model, constraints)
        )
        sections["constrained_b"] = _advisory(
            "constrained_b", lambda: constrained_condition_report(data, model, constraints, omega, W)
        )
        sections["constraints"] = {
            "q": constraints.q,
            "w2_norm": constraints.w2_norm,
            "feasible": constraints.is_feasible(model.theta_W),
            "warnings": list(constraints.warnings),
        }
    sections["contraction"] = _advisory(
        "contraction",
        lambda: {
            "q": empirical_contraction_factor(
                data, model, constraints, n_pairs=settings.DIAGNOSTIC_PAIRS, seed=cfg.seed
            ),
            "n_pairs": settings.DIAGNOSTIC_PAIRS,
            "seed": cfg.seed,
        },
    )
    return sections


def write_diagnostics(out_dir: Path, sections: Dict[str, Dict[str, Any]]) -> Dict[str, Path]:
    text = "\n\n".join(report_to_text(name, payload) for name, payload in sections.items())
    return {
        "diagnostics.txt": file_service.write_text(out_dir / "diagnostics.txt", text),
        "diagnostics.json": file_service.write_json(out_dir / "diagnostics.json", report_to_dict(sections)),
    }


def run_experiment(
    config_path: PathLike,
    output_dir: Optional[PathLike] = None,
    emit_plots: Optional[bool] = None,
) -> RunOutcome:
    """Treina conforme o JSON de configuração e grava todos os artefatos da execução."""
    config_path = Path(config_path)
    cfg = file_service.read_run_config(config_path)
    data = load_data(cfg, config_path.parent)
    constraints = load_constraints(cfg, data)
    out = resolve_output_dir(cfg, output_dir)

    result = train(data, cfg.model, constraints)
    y_hat, predictions_source = _training_predictions(result, cfg, data)
    x_columns = list(data.x_columns or [f"x{j}" for j in range(data.n_in)])

    files: Dict[str, Path] = {
        "weights.json": file_service.write_weights(out / "weights.json", weights_document(result, cfg, data)),
        "sse_trace.csv": file_service.write_trace_csv(out / "sse_trace.csv", "sse", result.sse_trace),
        "param_delta_trace.csv": file_service.write_trace_csv(
            out / "param_delta_trace.csv", "param_delta", result.param_delta_trace
        ),
        "predictions.csv": file_service.write_predictions_csv(
            out / "predictions.csv", data.X, x_columns, y_hat, y=data.Y
        ),
    }

    sections: Dict[str, Dict[str, Any]] = {
        "run": {
            "iterations": result.iterations,
            "converged": result.converged,
            "stop_reason": result.stop_reason,
            "final_sse": result.final_sse,
            "delta": result.delta,
            "predictions_source": predictions_source,
        },
        "foc": report_to_dict(result.foc_report),
    }
    if cfg.diagnostics:
        sections.update(collect_diagnostics(cfg, data, constraints, result.weights.W))
    files.update(write_diagnostics(out, sections))

    if cfg.emit_plots if emit_plots is None else emit_plots:
        files.update(
            chart_service.emit_plots(
                result.sse_trace,
                chart_service.fit_abscissa(data.X),
                data.Y,
                y_hat,
                out,
                log_sse=cfg.plot_log_sse,
            )
        )

    exit_code = EXIT_CONVERGED if result.converged else EXIT_ITERATION_CAP
    logger.info("Execução concluída em %s (código %d)", out, exit_code)
    return RunOutcome(exit_code=exit_code, output_dir=out, files=files, result=result)


def weights_from_document(doc: WeightsDocument) -> WeightSet:
    return WeightSet(W=rows_to_matrix(doc.W), V=rows_to_matrix(doc.V), b=np.asarray(doc.b, dtype=float))


def predict_from_files(weights_path: PathLike, data_csv: PathLike, out_csv: PathLike) -> Path:
    """Lê pesos e um CSV com as colunas de X do treino; grava x..., [y], y_hat."""
    doc = file_service.read_weights(weights_path)
    table = file_service.read_table_from_file(data_csv)
    y_column = "y" if "y" in table.columns else None
    data = file_service.dataset_from_table(table, doc.x_columns, y_column, data_csv)
    y_hat = predict(
        data.X,
        weights_from_document(doc),
        np.asarray(doc.beta, dtype=float),
        doc.activation,
        tol=settings.FORWARD_TOL,
        max_iters=settings.FORWARD_MAX_ITERS,
    )
    out = Path(out_csv)
    file_service.ensure_output_dir(out.parent)
    return file_service.write_predictions_csv(
        out, data.X, doc.x_columns, y_hat, y=data.Y if y_column else None
    )


def diagnose(config_path: PathLike, output_dir: Optional[PathLike] = None) -> Dict[str, Path]:
    """Avalia limites, limiares e fator de contração sem treinar."""
    config_path = Path(config_path)
    cfg = file_service.read_run_config(config_path)
    data = load_data(cfg, config_path.parent)
    constraints = load_constraints(cfg, data)
    out = resolve_output_dir(cfg, output_dir)
    return write_diagnostics(out, collect_diagnostics(cfg, data, constraints))


def generate_dataset_file(config_path: PathLike, output_dir: Optional[PathLike] = None) -> Path:
    cfg = file_service.read_run_config(config_path)
    if not isinstance(cfg.data, GeneratorDataSource):
        raise ConfigError("gen-poly requer um bloco 'data.generator'", field="data.generator")
    data = generate_polynomial_dataset(cfg.data.generator)
    out = resolve_output_dir(cfg, output_dir)
    path = file_service.write_dataset_csv(out / cfg.data_csv_name, data)
    logger.info("Dataset polinomial gravado em %s (%d pontos)", path, data.n_obs)
    return path
