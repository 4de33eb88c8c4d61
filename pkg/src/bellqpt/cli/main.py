"""``bellqpt`` command line.

Every option can also come from a flat config file (``--config``); flags
override the file, which overrides the built-in defaults.  Energies are in
units of the tunneling field (Omega = 1) and U = gamma / N.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .. import __version__
from ..errors import ConvergenceError, DomainError, SizeError
from ..harmonic import bell_onset_gamma, v_eff
from ..model import LatticeCoordinate, ModelParams, build_hamiltonian
from ..spectral import diagonalize, parity_project
from ..thermal import beta_from_gap_fraction, critical_temperature
from .config import ConfigError, load_config
from .rows import compute_row, ordered_columns, render
from .sweep import DEFAULT_COLUMNS, GammaRange, GapFractionRule, SweepSpec, run_sweep, write_atomic

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5

_TEMPERATURE_KEYS = ("beta", "t_fraction", "t_ref_gamma")


class UsageError(Exception):
    pass


def _int(v):
    return int(v)


def _float(v):
    return float(v)


def _list(conv):
    def parse(v):
        items = [x.strip() for x in str(v).split(",") if x.strip()]
        if not items:
            raise ValueError("empty list")
        return [conv(x) for x in items]

    return parse


CONVERTERS = {
    "n": _list(_int),
    "gamma": _list(_float),
    "beta": _list(_float),
    "t_fraction": _float,
    "t_ref_gamma": _float,
    "levels": _int,
    "workers": _int,
    "m": _int,
    "gamma_start": _float,
    "gamma_stop": _float,
    "gamma_step": _float,
    "columns": _list(str),
    "out": str,
    "format": str,
}


def _defaults() -> dict:
    return {"levels": "8", "format": "csv", "workers": str(os.cpu_count() or 1)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellqpt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="flat key=value file (looked up in $BELLQPT_CONFIG_DIR too)")
    shared.add_argument("--n", help="qubit number N (comma list for sweep)")
    shared.add_argument("--gamma", help="gamma = U N / Omega (comma list for sweep)")
    temp = shared.add_argument_group("temperature (either --beta or the gap-fraction rule)")
    temp.add_argument("--beta", help="inverse temperature in 1/Omega; 'inf' for T=0 (comma list for sweep)")
    temp.add_argument("--t-fraction", dest="t_fraction", help="k_B T as a fraction of delta_1(--t-ref-gamma)")
    temp.add_argument("--t-ref-gamma", dest="t_ref_gamma", help="gamma at which delta_1 is taken")
    shared.add_argument("--levels", help="number of lowest levels (default 8)")
    shared.add_argument("--out", help="output file (default stdout)")
    shared.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    shared.add_argument("--workers", help="parallel workers for sweeps (default: all cores)")

    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    sub.add_parser("spectrum", parents=[shared], help="lowest energies E_i and gaps delta_i")
    sub.add_parser("groundstate", parents=[shared], help="ground-state amplitudes and V_eff on the lattice")
    p = sub.add_parser("bell", parents=[shared], help="Bell correlator Q_mu (exact, peak, analytic)")
    p.add_argument("--m", help="correlation order (default mu from the well position)")
    sub.add_parser("ha-compare", parents=[shared], help="harmonic approximation vs exact: dE_i, F_i")
    sub.add_parser("thermal", parents=[shared], help="thermal Bell correlator")
    p = sub.add_parser("sweep", parents=[shared], help="grid sweep over N, gamma, beta")
    p.add_argument("--gamma-start", dest="gamma_start")
    p.add_argument("--gamma-stop", dest="gamma_stop")
    p.add_argument("--gamma-step", dest="gamma_step")
    p.add_argument("--columns", help="comma list of columns (N, gamma, beta always included)")
    sub.add_parser("onset", parents=[shared], help="root of f(gamma); with --n also k_B T*")
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """defaults < config file < flags, converted to typed values."""
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config")}
    layered = _defaults()
    if args.config:
        cfg = load_config(args.config)
        cfg.pop("config", None)
        if any(k in flags for k in _TEMPERATURE_KEYS):
            for k in _TEMPERATURE_KEYS:
                cfg.pop(k, None)
        layered.update(cfg)
    layered.update(flags)
    out = {}
    for key, raw in layered.items():
        if key not in CONVERTERS:
            raise UsageError(f"unknown option {key!r}")
        try:
            out[key] = CONVERTERS[key](raw)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r} ({exc})") from None
    if out["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {out['format']!r}")
    if out["levels"] < 1:
        raise UsageError(f"--levels must be >= 1, got {out['levels']}")
    if out["workers"] < 1:
        raise UsageError(f"--workers must be >= 1, got {out['workers']}")
    if "beta" in out and ("t_fraction" in out or "t_ref_gamma" in out):
        raise UsageError("give either --beta or --t-fraction/--t-ref-gamma, not both")
    if ("t_fraction" in out) != ("t_ref_gamma" in out):
        raise UsageError("--t-fraction and --t-ref-gamma go together")
    return out


def _single(opts, key):
    if key not in opts:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    values = opts[key]
    if len(values) != 1:
        raise UsageError(f"--{key} takes a single value for this command")
    return values[0]


def _point(opts):
    N = _single(opts, "n")
    if N < 1:
        raise UsageError(f"--n must be >= 1, got {N}")
    return N, _single(opts, "gamma")


def _beta(opts, N, required=False) -> float:
    if "beta" in opts:
        beta = _single(opts, "beta")
        if not beta >= 0:
            raise DomainError(f"beta must be >= 0, got {beta}")
        return beta
    if "t_fraction" in opts:
        return beta_from_gap_fraction(N, opts["t_fraction"], opts["t_ref_gamma"])
    if required:
        raise UsageError("give --beta or --t-fraction with --t-ref-gamma")
    return math.inf


def _meta(command: str, **extra) -> dict:
    meta = {"bellqpt": __version__, "command": command}
    meta.update({k: repr(v) if isinstance(v, float) else v for k, v in extra.items()})
    return meta


def cmd_spectrum(opts) -> str:
    N, gamma = _point(opts)
    k = min(opts["levels"], N + 1)
    dec = diagonalize(build_hamiltonian(ModelParams.from_gamma(N, gamma)), k=k)
    rows = [{"i": i, "E_i": float(dec.eigenvalues[i]), "delta_i": float(dec.excitations[i])} for i in range(k)]
    return render(rows, ["i", "E_i", "delta_i"], opts["format"], _meta("spectrum", N=N, gamma=gamma))


def cmd_groundstate(opts) -> str:
    N, gamma = _point(opts)
    dec = parity_project(diagonalize(build_hamiltonian(ModelParams.from_gamma(N, gamma)), k=min(N + 1, 2)))
    z = LatticeCoordinate.for_n(N).z_values
    psi = np.real(dec.vectors[:, 0])
    v = v_eff(z, gamma)
    rows = [{"n": n, "z_n": float(z[n]), "psi_n": float(psi[n]), "V_eff": float(v[n])} for n in range(N + 1)]
    return render(rows, ["n", "z_n", "psi_n", "V_eff"], opts["format"], _meta("groundstate", N=N, gamma=gamma))


def _row_command(opts, command, columns, beta, m=None) -> str:
    N, gamma = _point(opts)
    cols = ordered_columns(columns)
    row = compute_row(N, gamma, beta, cols, m=m)
    return render([row], cols, opts["format"], _meta(command))


def cmd_bell(opts) -> str:
    N, _ = _point(opts)
    thermal = "beta" in opts or "t_fraction" in opts
    beta = _beta(opts, N)
    cols = ["mu", "q_mu_exact", "q_mu_peak", "q_mu_analytic", "depth_k", "z0", "omega_well"]
    if thermal:
        cols.append("q_mu_thermal")
    return _row_command(opts, "bell", cols, beta, m=opts.get("m"))


def cmd_ha_compare(opts) -> str:
    _point(opts)
    return _row_command(opts, "ha-compare", ["dE0_pct", "dE1_pct", "F0_pct", "F1_pct"], math.inf)


def cmd_thermal(opts) -> str:
    N, _ = _point(opts)
    beta = _beta(opts, N, required=True)
    return _row_command(opts, "thermal", ["mu", "q_mu_exact", "q_mu_thermal", "delta_1"], beta)


def sweep_spec(opts) -> SweepSpec:
    if "n" not in opts:
        raise UsageError("--n is required")
    range_keys = ("gamma_start", "gamma_stop", "gamma_step")
    if any(k in opts for k in range_keys):
        if "gamma" in opts:
            raise UsageError("give either --gamma or --gamma-start/--gamma-stop/--gamma-step")
        missing = [k for k in range_keys if k not in opts]
        if missing:
            raise UsageError("missing " + ", ".join("--" + k.replace("_", "-") for k in missing))
        grid = GammaRange(opts["gamma_start"], opts["gamma_stop"], opts["gamma_step"])
    elif "gamma" in opts:
        grid = tuple(opts["gamma"])
    else:
        raise UsageError("a gamma grid is required")
    if "beta" in opts:
        beta_spec = tuple(opts["beta"])
    elif "t_fraction" in opts:
        beta_spec = GapFractionRule(opts["t_fraction"], opts["t_ref_gamma"])
    else:
        beta_spec = None
    columns = tuple(opts.get("columns", DEFAULT_COLUMNS))
    try:
        return SweepSpec(
            tuple(opts["n"]), grid, beta_spec, columns, opts.get("out"), opts["format"], opts["workers"]
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(opts) -> str | None:
    spec = sweep_spec(opts)
    text = run_sweep(spec)
    return text if spec.output_path in (None, "-") else None


def cmd_onset(opts) -> str:
    g0 = bell_onset_gamma()
    if "n" not in opts:
        return repr(g0) + "\n"
    rows = []
    for N in opts["n"]:
        # any gamma past the onset selects the same reference point
        ct = critical_temperature(ModelParams.from_gamma(N, g0 - 1.0))
        rows.append({"N": N, "gamma_onset": g0, "delta_1": ct.delta1, "kT_star": ct.kT})
    return render(rows, ["N", "gamma_onset", "delta_1", "kT_star"], opts["format"], _meta("onset"))


HANDLERS = {
    "spectrum": cmd_spectrum,
    "groundstate": cmd_groundstate,
    "bell": cmd_bell,
    "ha-compare": cmd_ha_compare,
    "thermal": cmd_thermal,
    "sweep": cmd_sweep,
    "onset": cmd_onset,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        opts = resolve_options(args)
        text = HANDLERS[args.command](opts)
        if text is not None:
            out = opts.get("out")
            if args.command != "sweep" and out not in (None, "-"):
                write_atomic(out, text)
            else:
                sys.stdout.write(text)
    except (UsageError, ConfigError) as exc:
        print(f"bellqpt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SizeError) as exc:
        print(f"bellqpt {args.command}: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"bellqpt {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"bellqpt {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
