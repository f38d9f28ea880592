# contraction_rnn/api/__init__.py

# Este arquivo inicializa o pacote da CLI (subcomandos e handlers).
