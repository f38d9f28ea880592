# contraction_rnn/models/__init__.py

# Este arquivo inicializa o pacote de modelos.
