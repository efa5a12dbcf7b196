"""Closed-form approximations to the OAT Bell correlator."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .bell import ExtremePair, bell_depth


@dataclass(frozen=True)
class RevivalSpec:
    """Time tau_q = pi/q at which OAT forms a q-component cat state."""

    q: int
    n_particles: int

    def __post_init__(self):
        _require_even_q(self.q)

    @property
    def tau_q(self) -> float:
        return math.pi / self.q


def _require_even_q(q):
    if q < 2 or q % 2:
        raise ValueError(f"q must be an even integer >= 2, got {q}")


def log_gaussian_correlator(N: int, tau: float) -> float:
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    s = 1 + (tau * N / 2) ** 2
    return math.log(4) - 2 * math.log(s) - math.pi**2 * N / (8 * s)


def gaussian_correlator(N: int, tau: float) -> float:
    """Short-time estimate 4/(1+k^2)^2 exp(-pi^2 N / (8 (1+k^2))), k = tau N / 2."""
    return math.exp(log_gaussian_correlator(N, tau))


def tau_crit_approx(N: int) -> float:
    if N < 4:
        raise ValueError(f"N must be >= 4, got {N}")
    return 2 / N * math.sqrt(math.pi**2 / (8 * math.log(2)) - 1)


def tau_s(N: int) -> float:
    """Time scale N^(-2/3) of optimal squeezing."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    return N ** (-2 / 3)


def revival_coeffs(N: int, q: int) -> ExtremePair:
    """Extreme coefficients at tau = pi/q from the q-term cat-state sums.

    The pair equals exp(i pi/4) times the |-N/2> and |+N/2> amplitudes of the
    rotated OAT state, so relative to ``extreme_coeffs_exact(N, pi/q)``
    c_- differs by exp(i pi/4) and c_+ by exp(i pi/4) (-1)^(N/2).
    """
    _require_even_q(q)
    if N < 2 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    if q > N:
        raise ValueError(f"q must not exceed N, got q={q}, N={N}")
    tau_q = math.pi / q
    l = np.arange(q)
    phase = np.exp(1j * tau_q * l * l)
    c_minus = (phase * np.cos(tau_q * l) ** N).sum() / math.sqrt(q)
    c_plus = 1j**N * (phase * np.sin(tau_q * l) ** N).sum() / math.sqrt(q)
    return ExtremePair(complex(c_minus), complex(c_plus))


def revival_correlator(q: int) -> float:
    _require_even_q(q)
    return 1 / q**2


def revival_estimate(tau: float) -> float:
    """1/q^2 with q = pi/tau, the plateau law read as a function of time."""
    return min(0.25, (tau / math.pi) ** 2)


def shorttime_depth_estimate(N: int, tau: float) -> int:
    """Bell depth predicted without solving the dynamics.

    Past the squeezing time the plateau law 1/q^2 (q = pi/tau) is used; before
    it the Gaussian short-time form.
    """
    if tau >= tau_s(N):
        estimate = revival_estimate(tau)
    else:
        estimate = gaussian_correlator(N, tau)
    return bell_depth(estimate, N)
