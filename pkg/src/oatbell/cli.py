"""Command-line front end: ``oatbell {oat,lattice,classify,compare,lhv}``.

Values can also come from a flat ``key = value`` config file (``--config``);
flags given on the command line take precedence. Exit status is 0 on success,
2 for usage errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import json
import logging
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .analytic import (gaussian_correlator, log_gaussian_correlator, revival_correlator,
                       tau_crit_approx, tau_s)
from .bell import (NoCrossingError, bell_correlator_oat, bell_depth, bell_depth_log2,
                   bell_report, entanglement_depth, entanglement_depth_log2,
                   lhv_max_bruteforce, log2_bell_correlator_oat, tau_crit_exact)
from .dicke import DegenerateSpinError, evolve_oat, make_css, squeezing_xi2
from .krylov import KrylovStepRejected
from .lattice import (DEFAULT_DIMENSION_CAP, BHParams, DimensionCapExceeded, EigensolverError,
                      build_basis, build_hamiltonian, effective_chi, lattice_bell_correlator,
                      lattice_params, lattice_trajectory, lattice_xi2, load_checkpoint,
                      read_checkpoint_meta, save_checkpoint)

log = logging.getLogger("oatbell")

SCHEMA_VERSION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

OAT_COLUMNS = ["tau", "correlator", "log10_correlator", "gaussian", "revival_q", "revival",
               "xi2", "bell_depth", "entanglement_depth"]
LATTICE_COLUMNS = ["t", "tau_eff", "lattice_correlator", "oat_correlator", "xi2_lattice",
                   "xi2_oat", "bell_depth_lattice", "entanglement_depth_lattice",
                   "bell_depth_oat"]
COMPARE_COLUMNS = ["quantity", "exact", "approximation", "relative_error"]


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    mode: str
    n_atoms: int | None = None
    taus: tuple = ()
    lattice: BHParams | None = None
    out: Path | None = None
    fmt: str = "csv"
    threads: int = 1
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- config

DEFAULTS = {
    "tau_start": 0.0,
    "tau_stop": math.pi / 2,
    "tau_points": 101,
    "format": "csv",
    "uab_ratio": 0.95,
    "a_aa": 0.005,
    "m_sites": None,
    "boundary": "open",
    "dt": 0.5,
    "krylov_dim": 30,
    "checkpoint_every": 0,
    "grid": "tau",
    "max_dim": DEFAULT_DIMENSION_CAP,
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, dashes in keys become
    underscores."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _merge(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            merged.update(read_config_file(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
    merged.update({k: v for k, v in vars(args).items() if v is not None})
    return merged


def _as(kind, merged, key, required=False):
    value = merged.get(key)
    if value is None:
        if required:
            raise UsageError(f"missing required value --{key.replace('_', '-')}")
        return None
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for --{key.replace('_', '-')}: {value!r}") from exc


def tau_grid(merged: dict) -> tuple:
    explicit = merged.get("tau_list")
    if explicit is not None:
        try:
            taus = [float(x) for x in str(explicit).split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --tau-list: {explicit!r}") from exc
    else:
        points = _as(int, merged, "tau_points")
        start, stop = _as(float, merged, "tau_start"), _as(float, merged, "tau_stop")
        if points < 2:
            raise UsageError(f"--tau-points must be >= 2, got {points}")
        taus = np.linspace(start, stop, points).tolist()
    if len(taus) < 2:
        raise UsageError(f"tau grid needs at least 2 points, got {len(taus)}")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise UsageError("tau grid must be strictly increasing")
    if any(not math.isfinite(t) or t < 0 for t in taus):
        raise UsageError("tau values must be finite and nonnegative")
    return tuple(taus)


def _even_n(merged):
    N = _as(int, merged, "n", required=True)
    if N < 2 or N % 2:
        raise UsageError(f"--n must be a positive even integer, got {N}")
    return N


def _threads(merged):
    threads = _as(int, merged, "threads")
    return threads if threads else (os.cpu_count() or 1)


def _lattice_params(merged, N):
    M = _as(int, merged, "m_sites") or N
    boundary = merged["boundary"]
    if boundary not in ("open", "periodic"):
        raise UsageError(f"--boundary must be open or periodic, got {boundary!r}")
    ratio = _as(float, merged, "uab_ratio")
    j_hop, u = _as(float, merged, "j_hop"), _as(float, merged, "u")
    if j_hop is not None and u is not None:
        return BHParams(M, N, j_hop, u, u, ratio * u, boundary)
    v0 = _as(float, merged, "v0", required=True)
    if v0 <= 0:
        raise UsageError(f"--v0 must be positive, got {v0}")
    return lattice_params(v0, _as(float, merged, "a_aa"), ratio,
                          n_sites=M, n_atoms=N, boundary=boundary)


def build_config(args: argparse.Namespace) -> RunConfig:
    merged = _merge(args)
    mode = args.command
    fmt = merged["format"]
    if fmt not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {fmt!r}")
    out = Path(merged["out"]) if merged.get("out") else None
    cfg = RunConfig(mode=mode, out=out, fmt=fmt)
    if mode == "oat":
        cfg.n_atoms = _even_n(merged)
        cfg.taus = tau_grid(merged)
        cfg.threads = _threads(merged)
    elif mode == "lattice":
        cfg.n_atoms = _even_n(merged)
        cfg.taus = tau_grid(merged)
        cfg.lattice = _lattice_params(merged, cfg.n_atoms)
        cfg.threads = _threads(merged)
        cfg.extra = {
            "dt": _as(float, merged, "dt"),
            "krylov_dim": _as(int, merged, "krylov_dim"),
            "checkpoint_every": _as(int, merged, "checkpoint_every"),
            "checkpoint": merged.get("checkpoint"),
            "resume": merged.get("resume"),
            "stop_after": _as(int, merged, "stop_after"),
            "grid": merged["grid"],
            "max_dim": _as(int, merged, "max_dim"),
        }
        if cfg.extra["grid"] not in ("tau", "time"):
            raise UsageError("--grid must be tau or time")
        if cfg.extra["dt"] <= 0:
            raise UsageError("--dt must be positive")
    elif mode == "classify":
        cfg.n_atoms = _as(int, merged, "n", required=True)
        if cfg.n_atoms < 1:
            raise UsageError("--n must be positive")
        E = _as(float, merged, "e", required=True)
        if not 0 <= E <= 0.25 + 1e-12:
            raise UsageError(f"correlator must lie in [0, 1/4], got {E}")
        cfg.extra = {"correlator": E}
    elif mode == "compare":
        cfg.n_atoms = _even_n(merged)
        if cfg.n_atoms < 4:
            raise UsageError("compare needs --n >= 4")
    elif mode == "lhv":
        cfg.n_atoms = _as(int, merged, "n", required=True)
        if not 1 <= cfg.n_atoms <= 8:
            raise UsageError(f"brute force supports 1 <= N <= 8, got {cfg.n_atoms}")
    return cfg


# ---------------------------------------------------------------- output

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else f"{float(value):.17g}"
    return str(value)


def _plain(value):
    # python scalar that survives a JSON round trip exactly, NaN included
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) or math.isinf(value) else float(f"{value:.17g}")
    return value


def render(kind: str, columns, rows, meta: dict, fmt: str) -> str:
    meta = {"schema": f"oatbell-{kind}/{SCHEMA_VERSION}", "version": __version__, **meta}
    if fmt == "json":
        doc = {**meta, "columns": list(columns),
               "rows": [[_json_value(v) for v in row] for row in rows]}
        return json.dumps(doc, indent=1) + "\n"
    header = " ".join(f"{k}={_cell(v)}" for k, v in meta.items())
    lines = [f"# {header}", ",".join(columns)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


PLOT_TEMPLATE = '''"""Plot {data}. Generated by oatbell {version}; run with python."""
import csv
import math
import sys

import matplotlib.pyplot as plt

x_col, y_cols = {x!r}, {ys!r}
with open({data!r}) as fh:
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
x = [float(r[x_col]) for r in rows]
fig, ax = plt.subplots()
for col in y_cols:
    y = [float(r[col]) if r[col] not in ("", "nan") else math.nan for r in rows]
    ax.semilogy(x, y, label=col)
ax.axhline(2.0 ** -{n}, color="grey", ls="--", label="2^-N")
ax.set_xlabel(x_col)
ax.legend()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else {png!r})
'''


def write_output(cfg: RunConfig, text: str, plot: tuple | None = None) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
        return
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    cfg.out.write_text(text)
    if plot and cfg.fmt == "csv":
        x, ys = plot
        script = PLOT_TEMPLATE.format(data=str(cfg.out), version=__version__, x=x, ys=ys,
                                      n=cfg.n_atoms, png=str(cfg.out.with_suffix(".png")))
        cfg.out.with_suffix(".plot.py").write_text(script)


# ---------------------------------------------------------------- commands

def _nearest_even_q(tau, N):
    if tau <= 0:
        return None
    q = 2 * max(1, round(math.pi / tau / 2))
    return min(q, N - N % 2)


def _depths(N, E, log2E):
    # subnormal or underflowed correlators are classified from the log value
    if E < 1e-300:
        return bell_depth_log2(log2E, N), entanglement_depth_log2(log2E, N)
    return bell_depth(E, N), entanglement_depth(E, N)


def oat_row(N: int, tau: float) -> list:
    log2E = log2_bell_correlator_oat(N, tau)
    E = bell_correlator_oat(N, tau)
    q = _nearest_even_q(tau, N)
    try:
        xi2 = squeezing_xi2(evolve_oat(make_css(N), tau))
    except DegenerateSpinError:
        xi2 = math.nan
    bd, ed = _depths(N, E, log2E)
    return [tau, E, log2E * math.log10(2), gaussian_correlator(N, tau), q,
            revival_correlator(q) if q else math.nan, xi2, bd, ed]


def _parallel_map(fn, args, threads):
    if threads <= 1 or len(args) < 2:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *zip(*args), chunksize=max(1, len(args) // (4 * threads))))


def cmd_oat(cfg: RunConfig) -> int:
    N = cfg.n_atoms
    rows = _parallel_map(oat_row, [(N, t) for t in cfg.taus], cfg.threads)
    text = render("oat", OAT_COLUMNS, rows, {"N": N}, cfg.fmt)
    write_output(cfg, text, plot=("tau", ["correlator", "gaussian", "revival"]))
    return 0


def _oat_reference(N, tau):
    state = evolve_oat(make_css(N), tau)
    try:
        xi2 = squeezing_xi2(state)
    except DegenerateSpinError:
        xi2 = math.nan
    return bell_correlator_oat(N, tau), xi2


def cmd_lattice(cfg: RunConfig) -> int:
    params = cfg.lattice
    N = params.n_atoms
    extra = cfg.extra
    chi = effective_chi(params)
    if extra["grid"] == "tau":
        if chi == 0:
            raise UsageError("effective chi is zero; pass --grid time to sweep physical time")
        times = [tau / chi for tau in cfg.taus]
    else:
        times = list(cfg.taus)
    basis = build_basis(N, params.n_sites, extra["max_dim"])
    H = build_hamiltonian(params, basis)
    log.info("lattice N=%d M=%d dim=%d chi=%.6g", N, params.n_sites, basis.dimension, chi)

    rows, start, t_prev, state = [], 0, 0.0, None
    if extra["resume"]:
        try:
            t_prev, step, state = load_checkpoint(extra["resume"], params, basis)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot resume from {extra['resume']}: {exc}") from exc
        rows = read_checkpoint_meta(extra["resume"]).get("rows", [])
        start = step + 1
    ckpt = Path(extra["checkpoint"]) if extra["checkpoint"] else (
        cfg.out.with_suffix(".ckpt.npz") if cfg.out else Path("oatbell_lattice.ckpt.npz"))

    stop = len(times) if not extra["stop_after"] else min(len(times), start + extra["stop_after"])
    trajectory = lattice_trajectory(params, basis, times[start:stop], H=H, state=state,
                                    t_start=t_prev, dt=extra["dt"],
                                    krylov_dim=extra["krylov_dim"], threads=cfg.threads)
    for i, (t, state) in enumerate(trajectory, start):
        E = lattice_bell_correlator(state)
        try:
            xi2 = lattice_xi2(state)
        except DegenerateSpinError:
            xi2 = math.nan
        tau_eff = t * chi
        E_oat, xi2_oat = _oat_reference(N, tau_eff)
        rows.append([t, tau_eff, E, E_oat, xi2, xi2_oat, bell_depth(E, N),
                     entanglement_depth(E, N), bell_depth(E_oat, N)])
        every = extra["checkpoint_every"]
        if every and ((i + 1) % every == 0 or i + 1 == stop):
            # rows so far ride along so a resumed run emits the full table
            save_checkpoint(ckpt, state, params, t, i,
                            extra={"rows": [[_plain(v) for v in r] for r in rows]})
    if stop < len(times):
        log.info("stopped after grid point %d; resume from %s", stop - 1, ckpt)
    meta = {"N": N, "M": params.n_sites, "boundary": params.boundary, "v0": params.v0,
            "j_hop": params.j_hop,
            "u_aa": params.u_aa, "u_ab": params.u_ab, "chi": chi}
    text = render("lattice", LATTICE_COLUMNS, rows, meta, cfg.fmt)
    write_output(cfg, text, plot=("tau_eff" if chi else "t",
                                  ["lattice_correlator", "oat_correlator"]))
    return 0


def classify_lines(E: float, N: int) -> list[str]:
    rep = bell_report(E, N)
    k_bell = rep.bell_depth
    k_ent = rep.entanglement_depth

    def bound(value, exponent):
        # 4^-N leaves double range near N = 540; fall back to the exponent
        return _cell(value) if value > 0 else f"2^-{exponent} (below double range)"

    lines = [
        f"N = {N}",
        f"correlator E = {_cell(E)}",
        f"local-realistic bound 2^-N = {bound(rep.lhv_bound, N)}",
        f"fully separable bound 4^-N = {bound(rep.separable_bound, 2 * N)}",
        f"all-qubit Bell-correlation bound 1/8 = {_cell(0.125)}",
        f"whole-system entanglement bound 1/16 = {_cell(0.0625)}",
    ]
    if k_bell == 0:
        lines.append("Bell depth = 0 (E <= 2^-N: reproducible by local hidden variables)")
    else:
        lines.append(f"Bell depth = {k_bell} (largest k with E > 2^-(N-k) / 8)")
    if k_ent == 1:
        lines.append("entanglement depth = 1 (E <= 4^-N: reproducible by a fully separable state)")
    else:
        lines.append(f"entanglement depth = {k_ent} (largest k with E > 4^-(N-k) / 16)")
    return lines


def cmd_classify(cfg: RunConfig) -> int:
    E, N = cfg.extra["correlator"], cfg.n_atoms
    if cfg.fmt == "json":
        rep = bell_report(E, N)
        text = json.dumps({
            "schema": f"oatbell-classify/{SCHEMA_VERSION}", "version": __version__,
            "N": N, "correlator": E, "lhv_bound": rep.lhv_bound,
            "separable_bound": rep.separable_bound, "all_qubit_bell_bound": 0.125,
            "whole_system_entanglement_bound": 0.0625, "bell_depth": rep.bell_depth,
            "entanglement_depth": rep.entanglement_depth}, indent=1) + "\n"
    else:
        text = "\n".join(classify_lines(E, N)) + "\n"
    write_output(cfg, text)
    return 0


def compare_rows(N: int) -> list:
    exact = tau_crit_exact(N)
    approx = tau_crit_approx(N)
    rows = [["tau_crit", exact, approx, abs(approx - exact) / exact],
            ["tau_crit_times_N", exact * N, approx * N, abs(approx - exact) / exact],
            ["tau_s", math.nan, tau_s(N), math.nan]]
    for q in range(2, min(N, 10) + 1, 2):
        E = bell_correlator_oat(N, math.pi / q)
        rows.append([f"plateau_q{q}", E, revival_correlator(q),
                     abs(revival_correlator(q) - E) / E])
    grid = np.linspace(0.5 / N, 4 / N, 50)
    worst = max(abs(log_gaussian_correlator(N, t) - log2_bell_correlator_oat(N, t) * math.log(2))
                for t in grid)
    rows.append(["max_abs_dlnE_shorttime", 0.0, worst, math.nan])
    return rows


def cmd_compare(cfg: RunConfig) -> int:
    rows = compare_rows(cfg.n_atoms)
    write_output(cfg, render("compare", COMPARE_COLUMNS, rows, {"N": cfg.n_atoms}, cfg.fmt))
    return 0


def cmd_lhv(cfg: RunConfig) -> int:
    N = cfg.n_atoms
    best = lhv_max_bruteforce(N)
    bound = 2.0 ** -N
    ok = best == bound
    text = (f"N = {N}\nstrategies = {4 ** N}\nbrute-force maximum = {_cell(best)}\n"
            f"2^-N = {_cell(bound)}\nequal = {ok}\n")
    write_output(cfg, text)
    return 0 if ok else EXIT_NUMERICAL


COMMANDS = {"oat": cmd_oat, "lattice": cmd_lattice, "classify": cmd_classify,
            "compare": cmd_compare, "lhv": cmd_lhv}


# ---------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)


def _add_grid(p):
    p.add_argument("--tau-start", type=float)
    p.add_argument("--tau-stop", type=float)
    p.add_argument("--tau-points", type=int)
    p.add_argument("--tau-list", help="comma-separated explicit grid")
    p.add_argument("--threads", type=int, help="worker count (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oatbell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oat", help="exact OAT sweep with analytic comparisons")
    p.add_argument("--n", type=int)
    _add_grid(p)
    _add_common(p)

    p = sub.add_parser("lattice", help="two-component Bose-Hubbard sweep against OAT")
    p.add_argument("--n", type=int)
    p.add_argument("--m-sites", type=int, help="lattice sites (default: N)")
    p.add_argument("--v0", type=float, help="lattice depth in recoil energies")
    p.add_argument("--a-aa", type=float, help="intra-species scattering length")
    p.add_argument("--uab-ratio", type=float, help="U_ab / U (default 0.95)")
    p.add_argument("--j-hop", type=float, help="override: tunnelling J")
    p.add_argument("--u", type=float, help="override: on-site U_aa = U_bb")
    p.add_argument("--boundary", choices=("open", "periodic"))
    p.add_argument("--grid", choices=("tau", "time"),
                   help="interpret the grid as effective tau (default) or time")
    p.add_argument("--dt", type=float, help="largest Krylov step")
    p.add_argument("--krylov-dim", type=int)
    p.add_argument("--checkpoint-every", type=int, help="grid points between checkpoints")
    p.add_argument("--checkpoint", help="checkpoint file path")
    p.add_argument("--resume", help="continue from a checkpoint file")
    p.add_argument("--stop-after", type=int, help="stop after this many grid points")
    p.add_argument("--max-dim", type=int, help="largest Fock-space dimension to build")
    _add_grid(p)
    _add_common(p)

    p = sub.add_parser("classify", help="Bell and entanglement depth of a correlator value")
    p.add_argument("--e", type=float, help="correlator value")
    p.add_argument("--n", type=int)
    _add_common(p)

    p = sub.add_parser("compare", help="exact OAT against the closed-form approximations")
    p.add_argument("--n", type=int)
    _add_common(p)

    p = sub.add_parser("lhv", help="brute-force local-realistic maximum")
    p.add_argument("--n", type=int)
    _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.mode](cfg)
    except UsageError as exc:
        print(f"oatbell {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoCrossingError, EigensolverError, KrylovStepRejected, DimensionCapExceeded,
            NumericalFailure, FloatingPointError) as exc:
        print(f"oatbell {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
