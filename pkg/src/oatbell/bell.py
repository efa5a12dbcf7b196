"""Many-body Bell correlator |<J_+^N>/N!|^2 and the depth certificates it implies."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
import math

import mpmath
import numpy as np
from scipy.optimize import brentq

from .config import TOL
from .dicke import DickeState, binomial_weights, raising_operator


class NoCrossingError(RuntimeError):
    """The correlator never exceeds the local bound on the searched interval."""


@dataclass(frozen=True)
class ExtremePair:
    """Amplitudes of |-N/2> and |+N/2> after the pi/2 rotation about y."""

    c_minus: complex
    c_plus: complex

    @property
    def correlator(self) -> float:
        return abs(self.c_minus * self.c_plus) ** 2


@dataclass(frozen=True)
class BellReport:
    correlator: float
    n_particles: int
    lhv_bound: float
    separable_bound: float
    bell_depth: int
    entanglement_depth: int

    @property
    def bell_correlated(self) -> bool:
        return self.bell_depth >= 3

    @property
    def entangled(self) -> bool:
        return self.entanglement_depth >= 2


def _require_even(N):
    if N < 2 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")


@lru_cache(maxsize=16)
def _half_binomials(N: int) -> tuple[int, ...]:
    # binom(N, N/2 + n) for n = 0..N/2
    return tuple(math.comb(N, N // 2 + n) for n in range(N // 2 + 1))


def _sums_float(N, tau):
    w = binomial_weights(N)
    n = np.arange(N + 1) - N // 2
    terms = w * np.exp(-1j * tau * n * n)
    return terms.sum(), (terms * (1 - 2 * (n % 2))).sum()


def _sums_mp(N, tau, dps):
    # terms are even in n, so fold the sum onto n >= 0
    with mpmath.workdps(dps):
        t = mpmath.mpf(tau)
        c_minus = mpmath.mpc(0)
        c_plus = mpmath.mpc(0)
        for n, b in enumerate(_half_binomials(N)):
            term = b * mpmath.expj(-t * n * n)
            if n:
                term *= 2
            c_minus += term
            c_plus += -term if n % 2 else term
        scale = mpmath.ldexp(mpmath.mpf(1), -N)
        return c_minus * scale, c_plus * scale


def _extreme_sums(N, tau):
    """Both phase sums, as floats when they are resolved in double precision
    and as mpmath numbers otherwise."""
    if tau == 0:
        return complex(1.0), complex(0.0)
    c_minus, c_plus = _sums_float(N, tau)
    if min(abs(c_minus), abs(c_plus)) >= TOL.cancellation:
        return complex(c_minus), complex(c_plus)
    # alternating binomial sums cancel down to ~2^-N; keep doubling the working
    # precision until the smaller sum is resolved or falls below 4^-N
    dps_max = math.ceil(2 * N * math.log10(2)) + 40
    dps = 40
    while True:
        c_minus, c_plus = _sums_mp(N, tau, dps)
        smallest = min(abs(c_minus), abs(c_plus))
        if smallest > mpmath.mpf(10) ** (20 - dps) or dps >= dps_max:
            return c_minus, c_plus
        dps = min(2 * dps, dps_max)


def extreme_coeffs_exact(N: int, tau: float) -> ExtremePair:
    """Binomial phase sums

        c_-(tau) = 2^-N sum_n binom(N, N/2+n) exp(-i tau n^2)
        c_+(tau) = 2^-N sum_n binom(N, N/2+n) (-1)^n exp(-i tau n^2)

    The rotated OAT state has exactly c_- in slot |-N/2> and (-1)^(N/2) c_+ in
    slot |+N/2>.
    """
    _require_even(N)
    c_minus, c_plus = _extreme_sums(N, tau)
    return ExtremePair(complex(c_minus), complex(c_plus))


def bell_correlator_oat(N: int, tau: float) -> float:
    return extreme_coeffs_exact(N, tau).correlator


def log2_bell_correlator_oat(N: int, tau: float) -> float:
    """log2 of the OAT correlator; finite well below the double underflow."""
    _require_even(N)
    c_minus, c_plus = _extreme_sums(N, tau)
    if c_minus == 0 or c_plus == 0:
        return -math.inf
    return float(2 * (mpmath.log(abs(c_minus), 2) + mpmath.log(abs(c_plus), 2)))


def jplus_power_correlator(jp, psi: np.ndarray, N: int) -> float:
    """|<psi| jp^N |psi> / N!|^2 by N sparse applications of ``jp``.

    Each application is divided by its step index, and the running vector is
    renormalised with the scale kept in log form, so neither N! nor the
    intermediate binomial growth overflows.
    """
    v = psi.copy()
    log_scale = 0.0
    for k in range(1, N + 1):
        v = (jp @ v) / k
        peak = np.abs(v).max()
        if peak == 0:
            return 0.0
        v /= peak
        log_scale += math.log(peak)
    overlap = np.vdot(psi, v)
    if overlap == 0:
        return 0.0
    return math.exp(2 * (math.log(abs(overlap)) + log_scale))


def correlator_from_jplus(state: DickeState) -> float:
    """|<J_+^N>/N!|^2 of a Dicke-space state, without any rotation."""
    N = state.n_particles
    return jplus_power_correlator(raising_operator(N), state.amplitudes, N)


def _max_exponent_below(correlator):
    """Largest integer p with 2**p < correlator (exact, no log rounding)."""
    if correlator == 0:
        return -math.inf
    frac, exp = math.frexp(correlator)
    return exp - 2 if frac == 0.5 else exp - 1


def _max_exponent_below_log2(log2_correlator):
    if log2_correlator == -math.inf:
        return -math.inf
    return math.ceil(log2_correlator) - 1


def _check_correlator(correlator):
    if correlator < 0 or math.isnan(correlator):
        raise ValueError(f"correlator must be nonnegative, got {correlator}")


def _bell_depth_from_exponent(p, N):
    # E > 2^-3 2^-(N-k)  <=>  k - N - 3 <= p
    if p < -N:
        return 0
    return int(min(N, p + N + 3))


def _entanglement_depth_from_exponent(p, N):
    # E > 2^-4 4^-(N-k)  <=>  2k - 2N - 4 <= p
    if p < -2 * N:
        return 1
    return int(min(N, (p + 2 * N + 4) // 2))


def bell_depth(correlator: float, N: int) -> int:
    """Number of qubits the Bell correlations provably span.

    Returns 0 when the correlator is within the local-realistic bound 2^-N,
    otherwise the largest k <= N with E > 2^-(N-k+3).
    """
    _check_correlator(correlator)
    return _bell_depth_from_exponent(_max_exponent_below(correlator), N)


def entanglement_depth(correlator: float, N: int) -> int:
    """Returns 1 within the fully separable bound 4^-N, otherwise the largest
    k <= N with E > 4^-(N-k) / 16."""
    _check_correlator(correlator)
    return _entanglement_depth_from_exponent(_max_exponent_below(correlator), N)


def bell_depth_log2(log2_correlator: float, N: int) -> int:
    return _bell_depth_from_exponent(_max_exponent_below_log2(log2_correlator), N)


def entanglement_depth_log2(log2_correlator: float, N: int) -> int:
    return _entanglement_depth_from_exponent(_max_exponent_below_log2(log2_correlator), N)


def bell_report(correlator: float, N: int) -> BellReport:
    return BellReport(
        correlator=correlator,
        n_particles=N,
        lhv_bound=math.ldexp(1.0, -N),
        separable_bound=math.ldexp(1.0, -2 * N),
        bell_depth=bell_depth(correlator, N),
        entanglement_depth=entanglement_depth(correlator, N),
    )


def tau_crit_exact(N: int, bracket_hint: float | None = None) -> float:
    """First time at which the OAT correlator reaches the local bound 2^-N.

    The search starts from ``bracket_hint`` (default: the short-time estimate),
    walks geometrically to an adjacent bracket, then refines with Brent's
    method on log2(E) + N.
    """
    _require_even(N)
    if N < 4:
        raise ValueError("N = 2 never exceeds the local bound; need N >= 4")
    from .analytic import tau_crit_approx

    def excess(tau):
        return log2_bell_correlator_oat(N, tau) + N

    limit = math.pi / 2
    guess = min(bracket_hint or tau_crit_approx(N), limit)
    if excess(guess) >= 0:
        hi, lo = guess, guess / 2
        while excess(lo) >= 0:
            hi, lo = lo, lo / 2
            if lo < 1e-300:
                raise NoCrossingError(f"correlator above 2^-N arbitrarily close to 0 (N={N})")
    else:
        lo, hi = guess, min(1.5 * guess, limit)
        while excess(hi) <= 0:
            if hi >= limit:
                raise NoCrossingError(f"no crossing of 2^-N in (0, pi/2] for N={N}")
            lo, hi = hi, min(1.5 * hi, limit)
    return brentq(excess, lo, hi, xtol=1e-300, rtol=1e-10)


def lhv_strategy_values(N: int):
    """Exact |sigma_+^(1) ... sigma_+^(N)|^2 for every deterministic strategy.

    Each party fixes (sigma_1, sigma_2) in {+1, -1}^2; sigma_+ = (sigma_1 + i sigma_2)/2.
    """
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if N > 8:
        raise ValueError(f"brute force limited to N <= 8 (4^N strategies), got {N}")
    for signs in product((1, -1), repeat=2 * N):
        re, im = 1, 0
        for s1, s2 in zip(signs[::2], signs[1::2]):
            re, im = re * s1 - im * s2, re * s2 + im * s1
        yield Fraction(re * re + im * im, 4**N)


def lhv_max_bruteforce(N: int) -> float:
    return float(max(lhv_strategy_values(N)))
