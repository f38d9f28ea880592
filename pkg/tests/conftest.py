import json

import numpy as np
import pytest
from scipy.optimize import minimize

from contraction_rnn.models.domain import Dataset, IterState, WeightSet
from contraction_rnn.models.schemas import ActivationSpec, ModelConfig, PolynomialSpec
from contraction_rnn.services.activation import apply_F_dot
from contraction_rnn.services.experiment_service import generate_polynomial_dataset
from contraction_rnn.services.foc_solver import build_q_operator, contraction_step
from contraction_rnn.services.matrix_kit import spectral_norm, unvec, vec
from contraction_rnn.services.model_core import loss, solve_U_forward

IDENTITY = ActivationSpec(kind="identity", alpha=1.0)


# ==== Oráculos densos (somente testes) ====
def random_psd(rng, n, rank=None):
    G = rng.standard_normal((n, rank or n))
    return G @ G.T


def kron_sylvester_oracle(A, c, B1, B2):
    """Resolve (I + cc'⊗A)·vec(X) = vec(D) montando a matriz de Kronecker."""
    c = np.asarray(c, dtype=float)
    cc = np.outer(c, c)
    D1 = B1 + A @ B2
    D2 = B2 - B1 @ cc
    n, m = B1.shape
    M = np.eye(n * m) + np.kron(cc, A)
    X1 = np.linalg.solve(M, vec(D1)).reshape((n, m), order="F")
    X2 = np.linalg.solve(M, vec(D2)).reshape((n, m), order="F")
    return X1, X2


def dense_G_X(Q, beta):
    beta = np.asarray(beta, dtype=float)
    return np.eye(Q.shape[0] * beta.shape[0]) + np.kron(np.outer(beta, beta), Q)


def descent_oracle(
    data: Dataset,
    config: ModelConfig,
    w_penalty_scale: float = 1.0,
    maxiter: int = 2000,
) -> WeightSet:
    """
    Minimiza a perda regularizada por L-BFGS-B com gradiente por diferenças finitas,
    resolvendo a equação de forward a cada avaliação. W = A/(θ_W·(1 + ‖A‖²)^½)
    mantém W dentro do domínio semicircular.

    w_penalty_scale=0.5 é a perda do modelo; 1.0 é a perda cujos pontos
    estacionários são os pontos fixos da contração.
    """
    n, n_in, theta = config.n_neurons, data.n_in, config.theta_W

    def unpack(z):
        A = z[: n * n].reshape(n, n)
        W = A / (theta * np.sqrt(1.0 + np.sum(A**2)))
        V = z[n * n:].reshape(n_in, n)
        return WeightSet(W=W, V=V, b=config.b_vec)

    def objective(z):
        weights = unpack(z)
        U = solve_U_forward(data.X, weights, config.activation, tol=1e-12, max_iters=100000)
        return loss(U, weights, data, config, w_penalty_scale=w_penalty_scale)

    res = minimize(objective, np.zeros(n * n + n_in * n), method="L-BFGS-B", options={"maxiter": maxiter})
    return unpack(res.x)


def fitted_sse(data: Dataset, config: ModelConfig, weights: WeightSet) -> float:
    U = solve_U_forward(data.X, weights, config.activation, tol=1e-12, max_iters=100000)
    eps = data.Y - U @ config.beta_vec
    return float(eps @ eps)


def fixed_point_multiplier(U: np.ndarray, W: np.ndarray, data: Dataset, config: ModelConfig) -> np.ndarray:
    """μ que resolve μ − Ḟ(U)∘(μW') = (Y − Uβ)β', com vec(μW') = (W ⊗ I)·vec(μ)."""
    n_obs, n = U.shape
    f_dot = vec(apply_F_dot(config.activation, U))
    M = np.eye(n_obs * n) - f_dot[:, None] * np.kron(W, np.eye(n_obs))
    rhs = vec(np.outer(data.Y - U @ config.beta_vec, config.beta_vec))
    return unvec(np.linalg.solve(M, rhs), n_obs, n)


def step_jacobian(state: IterState, data: Dataset, config: ModelConfig, rel_step: float = 1e-6) -> np.ndarray:
    """Jacobiano por diferenças centrais do passo não amortecido em (vec U, vec μ)."""
    n_obs, n = state.U.shape
    m = n_obs * n
    Q = build_q_operator(data, config)
    x0 = np.concatenate([vec(state.U), vec(state.mu)])

    def step(x):
        point = IterState(U=unvec(x[:m], n_obs, n), mu=unvec(x[m:], n_obs, n))
        out = contraction_step(point, 1.0, data, config, q_operator=Q)
        return np.concatenate([vec(out.U), vec(out.mu)])

    J = np.zeros((2 * m, 2 * m))
    for k in range(2 * m):
        h = rel_step * max(1.0, abs(x0[k]))
        e = np.zeros(2 * m)
        e[k] = h
        J[:, k] = (step(x0 + e) - step(x0 - e)) / (2.0 * h)
    return J


# ==== Fixtures ====
@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def polynomial_config():
    return ModelConfig()


@pytest.fixture
def poly_data():
    return generate_polynomial_dataset(PolynomialSpec())


def make_witness_data(seed: int = 7) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 2))
    X *= np.sqrt(1.2) / spectral_norm(X)
    Y = 0.1 * rng.standard_normal(5)
    return Dataset(X=X, Y=Y, x_columns=("x0", "x1"))


def make_witness_config(**overrides) -> ModelConfig:
    params = dict(
        n_neurons=2,
        theta_W=50.0,
        theta_V=1.0,
        beta=[0.5, 0.5],
        b=[0.0, 0.0],
        activation=IDENTITY,
        delta=0.5,
        max_outer_iters=2000,
        outer_tol=1e-24,
        param_delta_metric="state",
    )
    params.update(overrides)
    return ModelConfig(**params)


@pytest.fixture
def witness_data():
    """Instância pequena em que θ_W fica bem acima do limiar de convergência."""
    return make_witness_data()


@pytest.fixture
def witness_config():
    return make_witness_config()


@pytest.fixture
def witness_csv_config(tmp_path, witness_data):
    """Configuração JSON + CSV para a instância pequena (rápida o bastante para a CLI)."""
    csv_path = tmp_path / "witness.csv"
    lines = ["x0,x1,y"]
    for row, y in zip(witness_data.X, witness_data.Y):
        lines.append(",".join(repr(float(v)) for v in (*row, y)))
    csv_path.write_text("\n".join(lines) + "\n")
    cfg = {
        "model": make_witness_config(outer_tol=1e-20).model_dump(mode="json"),
        "data": {"csv_path": "witness.csv", "x_columns": ["x0", "x1"], "y_column": "y"},
        "diagnostics": True,
        "seed": 3,
    }
    cfg_path = tmp_path / "witness.json"
    cfg_path.write_text(json.dumps(cfg))
    return cfg_path
