# solvers/services.py
from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from linalg.models import HermitianMatrix, Permutation, as_dense, as_vector
from linalg.services import energy_seminorm_sq, is_unit_diagonal, residual_norm
from orderings.models import OrderingStrategy, RngState
from orderings.services import sweep_order

from .models import IterationHistory, SolverConfig

logger = logging.getLogger(__name__)

UNIT_ROW_TOLERANCE = 1e-10


def _require_unit_diagonal(b_matrix: HermitianMatrix) -> None:
    if not is_unit_diagonal(b_matrix):
        raise ValueError("diagonal is not all ones: call rescale_unit_diagonal first")


def _require_unit_rows(a: np.ndarray) -> None:
    norms = np.linalg.norm(a, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_ROW_TOLERANCE):
        raise ValueError("rows of A must have unit norm (normalize the factor first)")


def _check_order(order, n: int) -> np.ndarray:
    order = np.asarray(order, dtype=np.intp)
    if order.shape != (n,) or (n and (order.min() < 0 or order.max() >= n)):
        raise ValueError(f"sweep order must be {n} indices from 0..{n - 1}")
    return order


# -------- single sweeps --------
def sor_sweep(b_matrix: HermitianMatrix, b, y, omega: float, order) -> np.ndarray:
    """
    One SOR sweep in projection form: for each i in `order`,
    y[i] += omega * (b[i] - <row_i(B), y>), always using the latest y.
    """
    _require_unit_diagonal(b_matrix)
    n = b_matrix.n
    order = _check_order(order, n)
    rows = b_matrix.entries
    rhs = as_vector(b, name="right-hand side")
    y = as_vector(y, name="iterate")
    if rhs.shape[0] != n or y.shape[0] != n:
        raise ValueError(f"vectors must have length {n}")
    for i in order:
        y[i] += omega * (rhs[i] - rows[i] @ y)
    return y


def kaczmarz_sweep(a, b, x, omega: float, order) -> np.ndarray:
    """Relaxed projections x += omega * (b[i] - <a_i, x>) * conj(a_i) in the given row order."""
    a = as_dense(a, name="factor")
    _require_unit_rows(a)
    order = _check_order(order, a.shape[0])
    rhs = as_vector(b, name="right-hand side")
    x = as_vector(x, name="iterate")
    if rhs.shape[0] != a.shape[0] or x.shape[0] != a.shape[1]:
        raise ValueError("dimension mismatch between A, b and x")
    conj_rows = a.conj()
    for i in order:
        x += omega * (rhs[i] - a[i] @ x) * conj_rows[i]
    return x


# -------- drivers --------
def _drive(
    strategy: OrderingStrategy,
    n: int,
    config: SolverConfig,
    state: np.ndarray,
    sweep: Callable[[np.ndarray, np.ndarray], np.ndarray],
    measure: Callable[[np.ndarray], tuple[float, float]],
) -> IterationHistory:
    strategy.check_size(n)
    rng = RngState(config.seed)
    history = IterationHistory(strategy=str(strategy.kind.value))
    if config.record_orders:
        history.orders = []
    history.record(*measure(state))
    for k in range(1, config.max_sweeps + 1):
        if history.errors_sq[-1] <= config.target_error_sq:
            break
        order = sweep_order(strategy, n, rng)
        if history.orders is not None:
            history.orders.append(order.copy())
        state = sweep(state, order)
        history.record(*measure(state))
        logger.debug("%s sweep %d: error_sq=%.6e", history.strategy, k, history.errors_sq[-1])
    history.final_iterate = state
    return history


def run_solver(
    b_matrix: HermitianMatrix, b, y0, ybar, config: SolverConfig, strategy: OrderingStrategy, factor=None
) -> IterationHistory:
    """
    SOR iteration on By = b; errors are measured against the planted solution ybar.

    With `factor` (A, B = AA*) the error is taken as ||A*(ybar - y)||^2, which
    stays accurate below the rounding level of <B e, e> when e has a large
    kernel component.
    """
    _require_unit_diagonal(b_matrix)
    n = b_matrix.n
    rhs = as_vector(b, name="right-hand side")
    ybar = as_vector(ybar, name="solution")
    y = as_vector(y0, name="start vector")
    if not (rhs.shape[0] == ybar.shape[0] == y.shape[0] == n):
        raise ValueError(f"vectors must have length {n}")
    if factor is not None:
        factor_adj = as_dense(factor, name="factor").conj().T
        if factor_adj.shape[1] != n:
            raise ValueError(f"factor must have {n} rows")

    def error_sq(state):
        if factor is None:
            return energy_seminorm_sq(b_matrix, ybar - state)
        return float(np.linalg.norm(factor_adj @ (ybar - state)) ** 2)

    def measure(state):
        return error_sq(state), residual_norm(b_matrix, rhs, state)

    def sweep(state, order):
        return sor_sweep(b_matrix, rhs, state, config.omega, order)

    return _drive(strategy, n, config, y, sweep, measure)


def run_kaczmarz(a, b, x0, xbar, config: SolverConfig, strategy: OrderingStrategy) -> IterationHistory:
    """Kaczmarz iteration on Ax = b; errors are ||xbar - x^(k)||^2."""
    a = as_dense(a, name="factor")
    _require_unit_rows(a)
    rows, cols = a.shape
    rhs = as_vector(b, name="right-hand side")
    xbar = as_vector(xbar, name="solution")
    x = as_vector(x0, name="start vector")
    if rhs.shape[0] != rows or xbar.shape[0] != cols or x.shape[0] != cols:
        raise ValueError("dimension mismatch between A, b and x")

    def measure(state):
        return (
            float(np.linalg.norm(xbar - state) ** 2),
            float(np.linalg.norm(rhs - a @ state)),
        )

    def sweep(state, order):
        return kaczmarz_sweep(a, rhs, state, config.omega, order)

    return _drive(strategy, rows, config, x, sweep, measure)


# -------- error operator --------
def _validate_omega(omega: float) -> None:
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")


def _lower_factor(b_matrix: HermitianMatrix, omega: float, idx: np.ndarray) -> np.ndarray:
    """I + omega * L_sigma."""
    b_sigma = b_matrix.entries[np.ix_(idx, idx)]
    return np.eye(b_matrix.n) + omega * np.tril(b_sigma, -1)


def error_iteration_matrix(b_matrix: HermitianMatrix, omega: float, sigma: Permutation) -> np.ndarray:
    """Q_sigma = I - omega * P*(I + omega L_sigma)^{-1} P B, in the original indexing."""
    _require_unit_diagonal(b_matrix)
    _validate_omega(omega)
    if sigma.n != b_matrix.n:
        raise ValueError(f"permutation length {sigma.n} does not match n={b_matrix.n}")
    idx = sigma.as_array()
    z = solve_triangular(
        _lower_factor(b_matrix, omega, idx), b_matrix.entries[idx, :], lower=True, unit_diagonal=True
    )
    w = np.empty_like(z)
    w[idx] = z
    return np.eye(b_matrix.n) - omega * w


def sweep_energy_drop(b_matrix: HermitianMatrix, omega: float, sigma: Permutation, v) -> float:
    """omega(2 - omega) ||(I + omega L_sigma)^{-1} P_sigma B v||^2; equals |v|_B^2 - |Q_sigma v|_B^2."""
    _validate_omega(omega)
    idx = sigma.as_array()
    bv = b_matrix.entries @ as_vector(v)
    z = solve_triangular(_lower_factor(b_matrix, omega, idx), bv[idx], lower=True, unit_diagonal=True)
    return float(omega * (2.0 - omega) * np.vdot(z, z).real)


# -------- rates --------
def empirical_rate(history: IterationHistory | Sequence[float], window: int = 5) -> float:
    """Geometric mean of errors_sq[k+1] / errors_sq[k] over the last `window` sweeps."""
    errors = history.errors_sq if isinstance(history, IterationHistory) else list(history)
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(errors) < window + 1:
        raise ValueError(f"need at least {window + 1} recorded errors, got {len(errors)}")
    tail = errors[-(window + 1):]
    if min(tail) <= 0.0:
        return 0.0
    return math.exp((math.log(tail[-1]) - math.log(tail[0])) / window)
