"""Two-component Bose-Hubbard chain in a fixed-particle-number Fock basis.

Modes 0..M-1 hold species a on sites 0..M-1 and modes M..2M-1 hold species b.
Energies are in recoil units with hbar = 1.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache
import hashlib
import json
import math
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, expm_multiply

from .bell import jplus_power_correlator
from .dicke import SpinSummary, spin_moments, xi2_from_summary
from .krylov import RowPartitionedOperator, evolve_vector, propagate

BOUNDARIES = ("open", "periodic")
DEFAULT_DIMENSION_CAP = 2_000_000
CHECKPOINT_SCHEMA = 1


class DimensionCapExceeded(ValueError):
    pass


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class BHParams:
    n_sites: int
    n_atoms: int
    j_hop: float
    u_aa: float
    u_bb: float
    u_ab: float
    boundary: str = "open"
    v0: float | None = None

    def __post_init__(self):
        if self.n_sites < 1 or self.n_atoms < 1:
            raise ValueError("n_sites and n_atoms must be positive")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def hopping_from_depth(v0: float) -> float:
    return 4 / math.sqrt(math.pi) * v0**0.75 * math.exp(-2 * math.sqrt(v0))


def interaction_from_depth(v0: float, scattering_length: float) -> float:
    return math.sqrt(8 / math.pi) * scattering_length * v0**0.25


def lattice_params(v0: float, a_aa: float, a_ab_ratio: float = 0.95, *,
                   n_sites: int = 8, n_atoms: int = 8, boundary: str = "open") -> BHParams:
    """Couplings of a lattice of depth v0 (recoil units) with equal intra-species
    scattering lengths a_aa and inter-species length a_ab_ratio * a_aa."""
    if v0 <= 0:
        raise ValueError(f"lattice depth must be positive, got {v0}")
    u = interaction_from_depth(v0, a_aa)
    return BHParams(
        n_sites=n_sites,
        n_atoms=n_atoms,
        j_hop=hopping_from_depth(v0),
        u_aa=u,
        u_bb=u,
        u_ab=interaction_from_depth(v0, a_ab_ratio * a_aa),
        boundary=boundary,
        v0=v0,
    )


def superfluid_preset(n_atoms: int, n_sites: int, u_over_j: float = 0.1,
                      uab_ratio: float = 0.95, boundary: str = "periodic") -> BHParams:
    """Hopping-dominated couplings with J = 1 and U_ab = uab_ratio * U."""
    u = u_over_j
    return BHParams(n_sites, n_atoms, 1.0, u, u, uab_ratio * u, boundary)


def effective_chi(params: BHParams) -> float:
    """Twisting rate of the zero-quasi-momentum mode, (U - U_ab) / M."""
    return (params.u_aa - params.u_ab) / params.n_sites


@lru_cache(maxsize=64)
def _compositions(total: int, modes: int) -> np.ndarray:
    # all occupations of `modes` modes summing to `total`, descending lex order
    if modes == 1:
        return np.array([[total]], dtype=np.int16)
    blocks = []
    for v in range(total, -1, -1):
        rest = _compositions(total - v, modes - 1)
        head = np.full((rest.shape[0], 1), v, dtype=np.int16)
        blocks.append(np.hstack([head, rest]))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def _count(total, modes):
    if modes == 0:
        return int(total == 0)
    return math.comb(total + modes - 1, modes - 1)


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation vectors (n_a1..n_aM, n_b1..n_bM) with N bosons in total.

    States are in descending lexicographic order; ``index`` inverts the
    enumeration with a combinatorial ranking table, O(2M) per state.
    """

    n_atoms: int
    n_sites: int
    occupations: np.ndarray
    _rank_table: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.occupations.shape[0]

    @property
    def n_modes(self) -> int:
        return 2 * self.n_sites

    def index(self, occ) -> np.ndarray:
        occ = np.atleast_2d(np.asarray(occ, dtype=np.int64))
        if occ.shape[1] != self.n_modes:
            raise ValueError(f"expected {self.n_modes} modes, got {occ.shape[1]}")
        if (occ < 0).any() or (occ.sum(axis=1) != self.n_atoms).any():
            raise ValueError("occupations must be nonnegative and sum to N")
        return self._rank(occ)

    def _rank(self, occ):
        remaining = self.n_atoms - np.cumsum(occ, axis=1) + occ
        modes_left = np.arange(self.n_modes, 0, -1)
        return self._rank_table[modes_left, remaining, occ].sum(axis=1)

    def lookup(self, i: int) -> np.ndarray:
        return self.occupations[i]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n_atoms}:{self.n_sites}:".encode())
        h.update(np.ascontiguousarray(self.occupations).tobytes())
        return h.hexdigest()


def basis_dimension(N: int, M: int) -> int:
    return math.comb(N + 2 * M - 1, N)


def build_basis(N: int, M: int, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> FockBasis:
    if N < 1 or M < 1:
        raise ValueError("need N >= 1 and M >= 1")
    dim = basis_dimension(N, M)
    if dim > dimension_cap:
        raise DimensionCapExceeded(f"basis dimension {dim} exceeds cap {dimension_cap}")
    modes = 2 * M
    # table[K, r, v]: states preceding occupation v on a mode with K modes and
    # r atoms left, i.e. those carrying more than v atoms on that mode
    table = np.zeros((modes + 1, N + 1, N + 1), dtype=np.int64)
    for K in range(1, modes + 1):
        for r in range(N + 1):
            acc = 0
            for v in range(r, -1, -1):
                table[K, r, v] = acc
                acc += _count(r - v, K - 1)
    table.setflags(write=False)
    return FockBasis(N, M, _compositions(N, modes), table)


def _bonds(M, boundary):
    bonds = [(j, j + 1) for j in range(M - 1)]
    # literal sum over j of a_j^dag a_{j+1} with j+1 taken mod M; M = 2 doubles the bond
    if boundary == "periodic" and M >= 2:
        bonds.append((M - 1, 0))
    return bonds


def _transfer(basis: FockBasis, pairs, weight=1.0) -> sp.csr_matrix:
    """Sum over (src, dst) mode pairs of weight * a_dst^dag a_src."""
    occ = basis.occupations.astype(np.int64)
    rows, cols, vals = [], [], []
    for src, dst in pairs:
        col = np.flatnonzero(occ[:, src] > 0)
        new = occ[col].copy()
        amp = np.sqrt(new[:, src] * (new[:, dst] + 1.0))
        new[:, src] -= 1
        new[:, dst] += 1
        rows.append(basis._rank(new))
        cols.append(col)
        vals.append(weight * amp)
    D = basis.dimension
    if not rows:
        return sp.csr_matrix((D, D))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(D, D))


def build_hamiltonian(params: BHParams, basis: FockBasis) -> sp.csr_matrix:
    """Real symmetric CSR matrix of H_a + H_b + H_ab."""
    if (params.n_atoms, params.n_sites) != (basis.n_atoms, basis.n_sites):
        raise ValueError("params and basis disagree on N or M")
    M = params.n_sites
    occ = basis.occupations.astype(float)
    na, nb = occ[:, :M], occ[:, M:]
    diag = (params.u_aa / 2 * (na * (na - 1)).sum(axis=1)
            + params.u_bb / 2 * (nb * (nb - 1)).sum(axis=1)
            + params.u_ab * (na * nb).sum(axis=1))
    pairs = []
    for offset in (0, M):
        for i, k in _bonds(M, params.boundary):
            pairs += [(offset + i, offset + k), (offset + k, offset + i)]
    hop = _transfer(basis, pairs, -params.j_hop)
    H = (sp.diags(diag) + hop).tocsr()
    H.sum_duplicates()
    return H


def translation_sector(basis: FockBasis) -> sp.csr_matrix:
    """Isometry P onto the zero-quasi-momentum states of a ring.

    Column c is the normalised equal-weight sum over one orbit of Fock states
    under cyclic shifts of all sites (both species together). For a periodic
    Hamiltonian, P^T H P is exact on this sector, which holds the ground state
    and everything the collective spin operators reach from it.
    """
    M, D = basis.n_sites, basis.dimension
    shift = np.roll(np.arange(M), 1)
    perm = np.concatenate([shift, M + shift])
    image = basis._rank(basis.occupations[:, perm].astype(np.int64))
    # label each orbit by its smallest member
    label = np.arange(D)
    cur = np.arange(D)
    for _ in range(M - 1):
        cur = image[cur]
        np.minimum(label, cur, out=label)
    _, col = np.unique(label, return_inverse=True)
    sizes = np.bincount(col)
    return sp.csr_matrix((1 / np.sqrt(sizes[col]), (np.arange(D), col)),
                         shape=(D, sizes.size))


def restrict(op: sp.spmatrix, P: sp.csr_matrix) -> sp.csr_matrix:
    return (P.T @ op @ P).tocsr()


@dataclass(frozen=True, eq=False)
class LatticeState:
    basis: FockBasis
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class CollectiveOperators:
    j_plus: sp.csr_matrix
    jx: sp.csr_matrix
    jy: sp.csr_matrix
    jz: sp.csr_matrix
    n_a: np.ndarray
    n_b: np.ndarray


@lru_cache(maxsize=4)
def collective_operators(basis: FockBasis) -> CollectiveOperators:
    """J_+ = sum_j a_j^dag b_j and the Cartesian components built from it."""
    M = basis.n_sites
    jp = _transfer(basis, [(M + j, j) for j in range(M)])
    jm = jp.T.tocsr()
    occ = basis.occupations.astype(float)
    n_a, n_b = occ[:, :M].sum(axis=1), occ[:, M:].sum(axis=1)
    return CollectiveOperators(
        j_plus=jp,
        jx=((jp + jm) / 2).tocsr(),
        jy=((jp - jm) / 2j).tocsr(),
        jz=sp.diags((n_a - n_b) / 2).tocsr(),
        n_a=n_a,
        n_b=n_b,
    )


def rotate_collective_y(state: LatticeState, theta: float) -> LatticeState:
    """Apply exp(-i theta J_y); the generator -theta (J_+ - J_-)/2 is real."""
    jp = collective_operators(state.basis).j_plus
    gen = (-theta / 2) * (jp - jp.T)
    return LatticeState(state.basis, expm_multiply(gen.tocsr(), state.amplitudes))


def _ground_state(H):
    if H.shape[0] <= 800:
        _, vecs = eigh(H.toarray(), subset_by_index=[0, 0])
        return vecs[:, 0]
    try:
        _, vecs = eigsh(H, k=1, which="SA", tol=1e-12, maxiter=20_000)
    except ArpackNoConvergence as exc:
        raise EigensolverError(f"ground state did not converge: {exc}") from exc
    return vecs[:, 0]


def prepare_initial(params: BHParams, basis: FockBasis,
                    H: sp.csr_matrix | None = None) -> LatticeState:
    """Ground state with every atom in species a, then a pi/2 pulse about y.

    The result is a coherent spin state along +x whose spatial part is the
    interacting single-species ground state.
    """
    if H is None:
        H = build_hamiltonian(params, basis)
    M = basis.n_sites
    sector = np.flatnonzero(basis.occupations[:, M:].sum(axis=1) == 0)
    ground = _ground_state(H[sector][:, sector])
    # fix the arbitrary eigenvector sign so runs are reproducible
    ground = ground * np.sign(ground[np.argmax(np.abs(ground))])
    psi = np.zeros(basis.dimension, dtype=complex)
    psi[sector] = ground / np.linalg.norm(ground)
    return rotate_collective_y(LatticeState(basis, psi), math.pi / 2)


def lattice_spin_summary(state: LatticeState) -> SpinSummary:
    ops = collective_operators(state.basis)
    return spin_moments(state.amplitudes, (ops.jx, ops.jy, ops.jz))


def lattice_xi2(state: LatticeState) -> float:
    return xi2_from_summary(lattice_spin_summary(state), state.basis.n_atoms)


def lattice_bell_correlator(state: LatticeState) -> float:
    """|<J_+^N>/N!|^2 of the state after a collective pi/2 rotation about y."""
    jp = collective_operators(state.basis).j_plus
    psi = rotate_collective_y(state, math.pi / 2).amplitudes
    return jplus_power_correlator(jp, psi, state.basis.n_atoms)


def evolve_krylov(state: LatticeState, H, t_final: float, dt: float, *,
                  t_start: float = 0.0, krylov_dim: int = 30, tol: float = 1e-12):
    """Yield (t, LatticeState) along exp(-i H t) from t_start to t_final."""
    for t, psi in evolve_vector(H, state.amplitudes, t_final, dt, t_start=t_start,
                                krylov_dim=krylov_dim, tol=tol):
        yield t, LatticeState(state.basis, psi)


def lattice_trajectory(params: BHParams, basis: FockBasis, times, *, H=None,
                       state: LatticeState | None = None, t_start: float = 0.0,
                       dt: float = 0.5, krylov_dim: int = 30, threads: int = 1,
                       use_symmetry: bool | None = None):
    """Yield (t, LatticeState) at each of the increasing ``times``.

    Starts from ``state`` at ``t_start`` (default: ``prepare_initial`` at 0).
    On a ring the propagation runs in the zero-quasi-momentum sector, about
    M times smaller, and each yielded state is embedded in the full basis.
    """
    if H is None:
        H = build_hamiltonian(params, basis)
    if state is None:
        state = prepare_initial(params, basis, H)
    if use_symmetry is None:
        use_symmetry = params.boundary == "periodic" and basis.n_sites > 1
    psi = state.amplitudes
    if use_symmetry:
        P = translation_sector(basis)
        op = restrict(H, P)
        reduced = P.T @ psi
        if np.linalg.norm(P @ reduced - psi) > 1e-8:
            raise ValueError("state has weight outside the zero-quasi-momentum sector")
        psi = reduced
    else:
        P, op = None, H
    op = RowPartitionedOperator(op, threads)
    t_prev = t_start
    for t in times:
        if t < t_prev:
            raise ValueError("times must be increasing and not before t_start")
        psi = propagate(op, psi, t - t_prev, dt, krylov_dim)
        t_prev = t
        yield t, LatticeState(basis, psi if P is None else P @ psi)


def save_checkpoint(path, state: LatticeState, params: BHParams, t: float, step: int,
                    extra: dict | None = None) -> None:
    """Write an .npz holding the amplitudes and a JSON header.

    Header keys: schema, basis_hash, params, t, step, dimension, plus any
    caller-supplied ``extra`` entries.
    """
    meta = {
        **(extra or {}),
        "schema": CHECKPOINT_SCHEMA,
        "basis_hash": state.basis.fingerprint(),
        "params": params.to_dict(),
        "t": t,
        "step": step,
        "dimension": state.basis.dimension,
    }
    with open(path, "wb") as fh:
        np.savez(fh, amplitudes=state.amplitudes, meta=np.array(json.dumps(meta, sort_keys=True)))


def read_checkpoint_meta(path) -> dict:
    with np.load(Path(path)) as data:
        return json.loads(str(data["meta"]))


def load_checkpoint(path, params: BHParams, basis: FockBasis) -> tuple[float, int, LatticeState]:
    with np.load(Path(path)) as data:
        meta = json.loads(str(data["meta"]))
        amps = data["amplitudes"]
    if meta.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"unsupported checkpoint schema {meta.get('schema')}")
    if meta["basis_hash"] != basis.fingerprint():
        raise ValueError("checkpoint was written for a different basis")
    if meta["params"] != params.to_dict():
        raise ValueError("checkpoint was written for different lattice parameters")
    return meta["t"], meta["step"], LatticeState(basis, amps)
