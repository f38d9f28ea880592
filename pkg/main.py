# main.py: ponto de entrada da CLI
import sys
from typing import List, Optional

from contraction_rnn.api.handlers import dispatch
from contraction_rnn.api.routes import create_parser
from contraction_rnn.config import configure_logging


def main(argv: Optional[List[str]] = None) -> int:
    """
    Interpreta os argumentos, configura o logging e executa o subcomando.

    Códigos de saída: 0 sucesso/convergência, 2 parada pelo limite de iterações, 1 erro.
    """
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
