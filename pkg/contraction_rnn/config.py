import os
import logging
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


class Config:
    APP_NAME = os.getenv("APP_NAME", "contraction-rnn")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "runs")
    # periodo (em iteracoes externas) dos logs de progresso do treino
    LOG_EVERY = int(os.getenv("LOG_EVERY", 1000))
    DIAGNOSTIC_PAIRS = int(os.getenv("DIAGNOSTIC_PAIRS", 50))
    # fixa os ids gerados pelo matplotlib -> SVG identico byte a byte
    SVG_HASHSALT = os.getenv("SVG_HASHSALT", "contraction-rnn")
    FORWARD_TOL = float(os.getenv("FORWARD_TOL", 1e-10))
    FORWARD_MAX_ITERS = int(os.getenv("FORWARD_MAX_ITERS", 10000))


settings = Config()


def configure_logging(level: Optional[str] = None) -> None:
    """Configura logger básico se não houver configuração externa."""
    level = (level or settings.LOG_LEVEL).upper()
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(
            level=level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
    root.setLevel(level)
