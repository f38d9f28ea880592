"""Treino de redes neurais recorrentes por contração amortecida sobre as condições de primeira ordem."""

__version__ = "0.1.0"
