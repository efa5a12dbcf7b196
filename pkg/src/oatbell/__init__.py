"""One-axis twisting, many-body Bell correlations and their lattice realisation."""

__version__ = "0.1.0"

from .dicke import (DickeState, SpinSummary, WignerMatrix, evolve_oat, make_css, rotate_y,
                    spin_summary, squeezing_xi2, wigner_d)
from .bell import (BellReport, ExtremePair, bell_correlator_oat, bell_depth, bell_report,
                   correlator_from_jplus, entanglement_depth, extreme_coeffs_exact,
                   lhv_max_bruteforce, tau_crit_exact)
from .analytic import (RevivalSpec, gaussian_correlator, revival_coeffs, revival_correlator,
                       shorttime_depth_estimate, tau_crit_approx, tau_s)
from .lattice import (BHParams, build_basis, build_hamiltonian, effective_chi,
                      lattice_bell_correlator, lattice_trajectory, prepare_initial,
                      superfluid_preset)

__all__ = [
    "DickeState", "SpinSummary", "WignerMatrix", "evolve_oat", "make_css", "rotate_y",
    "spin_summary", "squeezing_xi2", "wigner_d",
    "BellReport", "ExtremePair", "bell_correlator_oat", "bell_depth", "bell_report",
    "correlator_from_jplus", "entanglement_depth", "extreme_coeffs_exact",
    "lhv_max_bruteforce", "tau_crit_exact",
    "RevivalSpec", "gaussian_correlator", "revival_coeffs", "revival_correlator",
    "shorttime_depth_estimate", "tau_crit_approx", "tau_s",
    "BHParams", "build_basis", "build_hamiltonian", "effective_chi",
    "lattice_bell_correlator", "lattice_trajectory", "prepare_initial", "superfluid_preset",
]
