# contraction_rnn/services/__init__.py

# Este arquivo inicializa o pacote de serviços.
