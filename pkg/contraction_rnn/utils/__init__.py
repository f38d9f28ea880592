# contraction_rnn/utils/__init__.py

# Este arquivo inicializa o pacote de utilitários.
