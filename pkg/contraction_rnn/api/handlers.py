import argparse
import logging
import sys

from contraction_rnn.exceptions import ContractionError
from contraction_rnn.services import experiment_service

logger = logging.getLogger(__name__)


def handle_train(args: argparse.Namespace) -> int:
    outcome = experiment_service.run_experiment(
        args.config,
        output_dir=args.output_dir,
        emit_plots=False if args.no_plots else None,
    )
    result = outcome.result
    status = "convergiu" if result.converged else "parou no limite de iterações"
    print(f"Treino {status} após {result.iterations} iterações; artefatos em {outcome.output_dir}")
    return outcome.exit_code


def handle_predict(args: argparse.Namespace) -> int:
    path = experiment_service.predict_from_files(args.weights, args.data, args.out)
    print(f"Previsões gravadas em {path}")
    return 0


def handle_diagnose(args: argparse.Namespace) -> int:
    files = experiment_service.diagnose(args.config, output_dir=args.output_dir)
    print(f"Diagnósticos gravados em {files['diagnostics.txt'].parent}")
    return 0


def handle_gen_poly(args: argparse.Namespace) -> int:
    path = experiment_service.generate_dataset_file(args.config, output_dir=args.output_dir)
    print(f"Dataset gravado em {path}")
    return 0


def dispatch(args: argparse.Namespace) -> int:
    """Executa o handler do subcomando e traduz exceções em códigos de saída."""
    try:
        return args.handler(args)
    except ContractionError as e:
        logger.debug("Falha controlada: %s", e.detail)
        print(f"❌ {e.detail}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("Erro inesperado no comando %s", getattr(args, "command", "?"))
        print(f"❌ Erro inesperado: {e}", file=sys.stderr)
        return 1
