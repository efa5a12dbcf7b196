"""Collective-spin states of N two-mode bosons in the Dicke basis.

A state is stored as the amplitude vector over the J_z eigenstates |n>,
n = -N/2, ..., N/2. The eigenvalue n lives in storage slot ``n + N/2`` so that
slot 0 holds |-N/2> and slot N holds |+N/2>.

Rotations use R(theta) = exp(-i theta J_y) acting as psi -> R psi, i.e. the
unitary conjugation rho -> R rho R^dagger on the density matrix. With this
convention a coherent state along +x is carried onto |-N/2>.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .config import TOL


class DegenerateSpinError(ValueError):
    """Mean spin too short to define an orthogonal plane."""


@dataclass(frozen=True)
class DickeState:
    n_particles: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be positive, got {self.n_particles}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.n_particles + 1,):
            raise ValueError(
                f"expected {self.n_particles + 1} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def j(self) -> float:
        return self.n_particles / 2

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.n_particles + 1) - self.n_particles / 2

    def slot(self, n: float) -> int:
        """Storage index of the J_z eigenvalue ``n``."""
        k = n + self.n_particles / 2
        if k != int(k) or not 0 <= k <= self.n_particles:
            raise ValueError(f"{n} is not a J_z eigenvalue for N={self.n_particles}")
        return int(k)

    def eigenvalue(self, slot: int) -> float:
        return slot - self.n_particles / 2

    def amplitude(self, n: float) -> complex:
        return complex(self.amplitudes[self.slot(n)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class WignerMatrix:
    j: float
    theta: float
    entries: np.ndarray


@dataclass(frozen=True)
class SpinSummary:
    mean_spin: np.ndarray
    covariance: np.ndarray


def log_binomial(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def binomial_weights(N: int) -> np.ndarray:
    """binom(N, k) / 2**N for k = 0..N, evaluated in log space."""
    k = np.arange(N + 1)
    return np.exp(log_binomial(N, k) - N * math.log(2.0))


def make_css(N: int, phi: float = 0.0) -> DickeState:
    """Coherent spin state with all qubits along (cos phi, -sin phi, 0).

    The global phase is fixed so that |-N/2> carries a real positive amplitude:
    c_n = exp(i phi (n + N/2)) 2**(-N/2) sqrt(binom(N, N/2 + n)).
    """
    if N < 2 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    k = np.arange(N + 1)
    amps = np.sqrt(binomial_weights(N)) * np.exp(1j * phi * k)
    return DickeState(N, amps)


def evolve_oat(state: DickeState, tau: float) -> DickeState:
    """Apply exp(-i tau J_z^2)."""
    m = state.m_values
    return DickeState(state.n_particles, state.amplitudes * np.exp(-1j * tau * m * m))


def _ladder_elements(two_j: int) -> np.ndarray:
    # <m+1|J_+|m> for m = -j .. j-1
    j = two_j / 2
    m = np.arange(two_j) - j
    return np.sqrt((j - m) * (j + m + 1))


@lru_cache(maxsize=64)
def _wigner_entries(two_j: int, theta: float) -> np.ndarray:
    if theta == 0.0:
        d = np.eye(two_j + 1)
        d.setflags(write=False)
        return d
    # J_x is real symmetric tridiagonal; J_y = D J_x D^dagger with
    # D = exp(-i pi/2 J_z), so exp(-i theta J_y) = D exp(-i theta J_x) D^dagger.
    off = 0.5 * _ladder_elements(two_j)
    _, vecs = eigh_tridiagonal(np.zeros(two_j + 1), off)
    # spectrum of J_x is exactly -j..j, ascending as returned by LAPACK
    lam = np.arange(two_j + 1) - two_j / 2
    cos_part = (vecs * np.cos(theta * lam)) @ vecs.T
    sin_part = (vecs * np.sin(theta * lam)) @ vecs.T
    k = np.subtract.outer(np.arange(two_j + 1), np.arange(two_j + 1)) % 4
    d = np.select([k == 0, k == 1, k == 2], [cos_part, -sin_part, -cos_part], sin_part)
    d.setflags(write=False)
    return d


def wigner_d(j: float, theta: float) -> WignerMatrix:
    """Matrix d^j_{nm}(theta) = <n| exp(-i theta J_y) |m>.

    Rows and columns are indexed by slot n + j. Entries come from the
    eigendecomposition of the tridiagonal J_x, which stays finite and
    orthogonal to ~1e-13 for spins in the thousands where factorial
    formulas overflow.
    """
    two_j = round(2 * j)
    if two_j < 1 or abs(2 * j - two_j) > 1e-12:
        raise ValueError(f"j must be a positive half-integer, got {j}")
    return WignerMatrix(two_j / 2, float(theta), _wigner_entries(two_j, float(theta)))


def rotate_y(state: DickeState, theta: float) -> DickeState:
    d = wigner_d(state.j, theta).entries
    return DickeState(state.n_particles, d @ state.amplitudes)


@lru_cache(maxsize=32)
def spin_operators(N: int) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """Sparse (J_x, J_y, J_z) in the Dicke basis of N particles."""
    jp = raising_operator(N)
    jm = jp.T.tocsr()
    jx = ((jp + jm) / 2).tocsr()
    jy = ((jp - jm) / 2j).tocsr()
    jz = sp.diags(np.arange(N + 1) - N / 2, 0, format="csr")
    return jx, jy, jz


@lru_cache(maxsize=32)
def raising_operator(N: int) -> sp.csr_matrix:
    return sp.diags(_ladder_elements(N), -1, format="csr")


def spin_moments(psi: np.ndarray, ops) -> SpinSummary:
    """Mean and symmetrized covariance of three Hermitian operators."""
    images = [op @ psi for op in ops]
    mean = np.array([np.vdot(psi, v).real for v in images])
    second = np.array([[np.vdot(u, v).real for v in images] for u in images])
    cov = second - np.outer(mean, mean)
    return SpinSummary(mean, (cov + cov.T) / 2)


def spin_summary(state: DickeState) -> SpinSummary:
    return spin_moments(state.amplitudes, spin_operators(state.n_particles))


def xi2_from_summary(summary: SpinSummary, N: int) -> float:
    mean = summary.mean_spin
    length = float(np.linalg.norm(mean))
    if length < TOL.degeneracy * N:
        raise DegenerateSpinError(
            f"mean spin length {length:.3g} too small to define a direction")
    axis = mean / length
    # any vector not parallel to the mean spin seeds the orthogonal plane
    seed = np.eye(3)[np.argmin(np.abs(axis))]
    e1 = np.cross(axis, seed)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    basis = np.stack([e1, e2], axis=1)
    (a, b), (_, c) = basis.T @ summary.covariance @ basis
    var_min = (a + c) / 2 - math.hypot((a - c) / 2, b)
    return N * max(var_min, 0.0) / length**2


def squeezing_xi2(state: DickeState) -> float:
    """Wineland squeezing parameter N * min transverse variance / |<J>|^2."""
    return xi2_from_summary(spin_summary(state), state.n_particles)
