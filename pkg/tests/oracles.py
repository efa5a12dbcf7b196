"""Reference computations that share no code with the package."""

import math

import mpmath
import numpy as np
from scipy.linalg import expm


def wigner_d_sum(j2, n2, m2, theta, dps=50):
    """<n|exp(-i theta J_y)|m> from the factorial sum, arguments doubled (2j, 2n, 2m)."""
    f = mpmath.factorial
    with mpmath.workdps(dps):
        jpn, jmn = (j2 + n2) // 2, (j2 - n2) // 2
        jpm, jmm = (j2 + m2) // 2, (j2 - m2) // 2
        nm = (n2 - m2) // 2
        pref = mpmath.sqrt(f(jpn) * f(jmn) * f(jpm) * f(jmm))
        c, s = mpmath.cos(mpmath.mpf(theta) / 2), mpmath.sin(mpmath.mpf(theta) / 2)
        total = mpmath.mpf(0)
        for k in range(j2 + 1):
            a, b, d = jpm - k, jmn - k, k + nm
            if min(a, b, d) < 0:
                continue
            sign = -1 if d % 2 else 1
            total += sign * c ** (j2 - 2 * k - nm) * s ** (2 * k + nm) / (f(a) * f(k) * f(b) * f(d))
        return float(pref * total)


def dense_spin(N):
    j = N / 2
    m = np.arange(N + 1) - j
    up = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(up, -1)
    return (jp + jp.T) / 2, (jp - jp.T) / 2j, np.diag(m), jp


def dense_rotated_oat(N, tau):
    """Amplitudes of exp(-i pi/2 J_y) exp(-i tau J_z^2) |css_x>, via dense expm."""
    jx, jy, jz, _ = dense_spin(N)
    css = np.array([math.sqrt(math.comb(N, k)) for k in range(N + 1)]) / 2 ** (N / 2)
    m = np.diag(jz)
    return expm(-1j * math.pi / 2 * jy) @ (np.exp(-1j * tau * m * m) * css)


def binomial_sums_mp(N, tau, dps=None):
    """Both phase sums, term by term over all N + 1 slots at generous precision."""
    dps = dps or int(0.7 * N) + 60
    with mpmath.workdps(dps):
        t = mpmath.mpf(tau)
        cm = cp = mpmath.mpc(0)
        for k in range(N + 1):
            n = k - N // 2
            w = mpmath.mpf(math.comb(N, k)) / mpmath.mpf(2) ** N
            term = w * mpmath.exp(-1j * t * n * n)
            cm += term
            cp += term * (-1) ** n
        return cm, cp


def log2_correlator_mp(N, tau):
    cm, cp = binomial_sums_mp(N, tau)
    return float(2 * mpmath.log(abs(cm * cp), 2))
