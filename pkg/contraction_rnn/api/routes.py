import argparse

from contraction_rnn.api.handlers import handle_diagnose, handle_gen_poly, handle_predict, handle_train
from contraction_rnn.config import settings


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output-dir", default=None, help="diretório dos artefatos (sobrepõe a configuração)")
    parser.add_argument("--no-plots", action="store_true", help="não gera os gráficos SVG")
    parser.add_argument("--verbose", action="store_true", help="log em nível DEBUG")


def create_parser() -> argparse.ArgumentParser:
    """Tabela de subcomandos da CLI; cada um registra seu handler em `handler`."""
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Treino de redes recorrentes por contração sobre as condições de primeira ordem.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    train = subparsers.add_parser("train", help="treina a partir de um JSON de configuração")
    train.add_argument("config")
    _common_flags(train)
    train.set_defaults(handler=handle_train)

    predict = subparsers.add_parser("predict", help="aplica pesos treinados a um CSV")
    predict.add_argument("weights")
    predict.add_argument("data")
    predict.add_argument("out")
    _common_flags(predict)
    predict.set_defaults(handler=handle_predict)

    diagnose = subparsers.add_parser("diagnose", help="avalia condições de convergência sem treinar")
    diagnose.add_argument("config")
    _common_flags(diagnose)
    diagnose.set_defaults(handler=handle_diagnose)

    gen_poly = subparsers.add_parser("gen-poly", help="gera o dataset polinomial em CSV")
    gen_poly.add_argument("config")
    _common_flags(gen_poly)
    gen_poly.set_defaults(handler=handle_gen_poly)

    return parser
