"""Short-time Lanczos propagation of exp(-i H dt) |psi> for Hermitian sparse H."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import math

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator

from .config import TOL


class KrylovStepRejected(RuntimeError):
    def __init__(self, dt, error):
        super().__init__(f"Krylov error estimate {error:.3g} above tolerance at dt={dt:.6g}")
        self.dt = dt
        self.error = error


class RowPartitionedOperator(LinearOperator):
    """CSR matrix whose products are split by row blocks over a thread pool.

    Blocks are disjoint row slices, so workers never write to shared memory.
    """

    def __init__(self, matrix: sp.csr_matrix, threads: int = 1):
        matrix = sp.csr_matrix(matrix)
        super().__init__(dtype=matrix.dtype, shape=matrix.shape)
        self.matrix = matrix
        self.threads = max(1, threads)
        bounds = np.linspace(0, matrix.shape[0], self.threads + 1).astype(int)
        self.blocks = [matrix[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def _matvec(self, x):
        if self._pool is None:
            return self.matrix @ x
        return np.concatenate(list(self._pool.map(lambda block: block @ x, self.blocks)))

    def _adjoint(self):
        return RowPartitionedOperator(self.matrix.conj().T.tocsr(), self.threads)


def krylov_step(H, psi: np.ndarray, dt: float, krylov_dim: int = 30,
                tol: float = TOL.krylov_residual) -> np.ndarray:
    """One step psi -> exp(-i H dt) psi in a Lanczos subspace.

    Raises KrylovStepRejected when the a-posteriori error estimate
    beta_m |e_m^T exp(-i dt T_m) e_1| exceeds ``tol`` times the norm of psi.
    """
    dim = psi.shape[0]
    m = min(krylov_dim, dim)
    beta0 = np.linalg.norm(psi)
    if beta0 == 0:
        return psi.copy()
    V = np.empty((m, dim), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = psi / beta0
    size = m
    breakdown = False
    for k in range(m):
        w = np.asarray(H @ V[k], dtype=complex)
        alpha[k] = np.vdot(V[k], w).real
        # full reorthogonalisation, applied twice
        for _ in range(2):
            w -= V[:k + 1].T @ (V[:k + 1].conj() @ w)
        beta[k] = np.linalg.norm(w)
        if beta[k] <= 1e-13 * (abs(alpha[k]) + 1.0):
            size, breakdown = k + 1, True
            break
        if k + 1 < m:
            V[k + 1] = w / beta[k]
    if size == 1:
        y = np.array([np.exp(-1j * dt * alpha[0])])
    else:
        lam, S = eigh_tridiagonal(alpha[:size], beta[:size - 1])
        y = S @ (np.exp(-1j * dt * lam) * S[0])
    if not breakdown:
        error = beta[size - 1] * abs(y[-1])
        if error > tol:
            raise KrylovStepRejected(dt, error)
    return beta0 * (V[:size].T @ y)


def propagate(H, psi: np.ndarray, duration: float, max_dt: float,
              krylov_dim: int = 30, tol: float = TOL.krylov_residual) -> np.ndarray:
    """exp(-i H duration) psi with equal substeps no longer than max_dt."""
    if duration == 0:
        return psi.copy()
    n = max(1, math.ceil(abs(duration) / max_dt - 1e-12))
    dt = duration / n
    for _ in range(n):
        psi = _adaptive_step(H, psi, dt, krylov_dim, tol)
    return psi


def _adaptive_step(H, psi, dt, krylov_dim, tol, depth=0):
    try:
        return krylov_step(H, psi, dt, krylov_dim, tol)
    except KrylovStepRejected:
        if depth >= 30:
            raise
        half = _adaptive_step(H, psi, dt / 2, krylov_dim, tol, depth + 1)
        return _adaptive_step(H, half, dt / 2, krylov_dim, tol, depth + 1)


def evolve_vector(H, psi: np.ndarray, t_final: float, dt: float, t_start: float = 0.0,
                  krylov_dim: int = 30, tol: float = TOL.krylov_residual):
    """Yield (t, psi) at t_start, t_start + dt, ..., t_final.

    The last interval is shortened to land on t_final. Rejected steps are
    retried as two half steps.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    span = t_final - t_start
    n = max(0, math.ceil(span / dt - 1e-9))
    yield t_start, psi
    prev = t_start
    for k in range(1, n + 1):
        t = t_final if k == n else t_start + k * dt
        psi = _adaptive_step(H, psi, t - prev, krylov_dim, tol)
        prev = t
        yield t, psi
