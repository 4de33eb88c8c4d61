"""Per-point computation and delimited output shared by the CLI commands."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..bell import depth_bound, jplus_moment, q_m, q_mu_peak, select_mu
from ..harmonic import (
    delta_e,
    fidelity,
    ha_energies,
    ha_excited_state,
    ha_ground_state,
    q_mu_analytic,
    well_parameters,
)
from ..model import ModelParams, build_hamiltonian
from ..spectral import SpectralDecomposition, diagonalize, parity_project
from ..thermal import thermal_density, thermal_q_mu

N_GAPS = 7

COLUMNS = (
    ["N", "gamma", "beta", "mu", "q_mu_exact", "q_mu_peak", "q_mu_analytic", "q_mu_thermal"]
    + [f"delta_{i}" for i in range(1, N_GAPS + 1)]
    + ["dE0_pct", "dE1_pct", "F0_pct", "F1_pct", "depth_k", "z0", "omega_well"]
)
KEY_COLUMNS = ("N", "gamma", "beta")
ERROR_COLUMN = "error"
_BROKEN_PHASE = {
    "mu", "q_mu_exact", "q_mu_peak", "q_mu_analytic", "q_mu_thermal",
    "dE0_pct", "dE1_pct", "F0_pct", "F1_pct", "depth_k", "z0", "omega_well",
}


@dataclass
class ResultRow:
    N: int
    gamma: float
    beta: float = math.inf
    values: dict = field(default_factory=dict)
    error: str | None = None

    def record(self, columns) -> dict:
        rec = {"N": self.N, "gamma": self.gamma, "beta": self.beta}
        for c in columns:
            if c not in KEY_COLUMNS:
                rec[c] = self.values.get(c)
        return rec


def ordered_columns(selected) -> list[str]:
    """Known columns in canonical order; the key columns are always present."""
    unknown = [c for c in selected if c not in COLUMNS]
    if unknown:
        raise ValueError(f"unknown column(s): {', '.join(unknown)}")
    chosen = set(selected) | set(KEY_COLUMNS)
    return [c for c in COLUMNS if c in chosen]


def _levels_needed(columns) -> int:
    k = 1
    if any(c.startswith("delta_") for c in columns):
        k = max(k, 1 + max(int(c.split("_")[1]) for c in columns if c.startswith("delta_")))
    if {"dE0_pct", "dE1_pct", "F0_pct", "F1_pct"} & set(columns):
        k = max(k, 2)
    return k


def ha_compare_values(N, gamma, exact: SpectralDecomposition, ha=None, states=None) -> dict:
    """dE_i and F_i for i = 0, 1; ``ha`` and ``states`` override the harmonic inputs."""
    if ha is None:
        ha = ha_energies(N, gamma, 2)
    if states is None:
        states = (ha_ground_state(N, gamma), ha_excited_state(N, gamma))
    return {
        "dE0_pct": delta_e(0, exact, ha),
        "dE1_pct": delta_e(1, exact, ha),
        "F0_pct": fidelity(0, exact, states[0]),
        "F1_pct": fidelity(1, exact, states[1]),
    }


def compute_row(N: int, gamma: float, beta: float, columns, field_strength: float = 1.0, m=None) -> ResultRow:
    """Evaluate the requested columns at one grid point.

    ``m`` overrides the correlation order used by the correlator columns.
    """
    row = ResultRow(N, gamma, beta)
    wanted = set(columns) - set(KEY_COLUMNS)
    params = ModelParams.from_gamma(N, gamma, field_strength)
    vals = row.values
    dec = None
    needs_full = "q_mu_thermal" in wanted and not math.isinf(beta)
    needs_dec = wanted - {"q_mu_analytic", "z0", "omega_well", "mu"}
    if needs_dec:
        k = N + 1 if needs_full else min(N + 1, _levels_needed(wanted))
        dec = parity_project(diagonalize(build_hamiltonian(params), k=k))
    for i in range(1, N_GAPS + 1):
        name = f"delta_{i}"
        if name in wanted and i < len(dec):
            vals[name] = float(dec.excitations[i])

    if not wanted & _BROKEN_PHASE:
        return row
    w = well_parameters(gamma)
    mu = select_mu(gamma, N) if m is None else int(m)
    vals["mu"] = mu
    vals["z0"] = w.z0
    vals["omega_well"] = w.omega
    vals["q_mu_analytic"] = q_mu_analytic(N, gamma)
    if dec is not None:
        psi = dec.vectors[:, 0]
        exact = q_m(jplus_moment(psi[: N + 1 - mu] * psi[mu:], mu, N), mu, N)
        vals["q_mu_exact"] = exact.q
        if (N - mu) % 2 == 0:
            vals["q_mu_peak"] = q_mu_peak(psi[(N - mu) // 2] * psi[(N + mu) // 2], mu, N)
        if math.isfinite(exact.q):
            vals["depth_k"] = depth_bound(exact.q, mu)
        if "q_mu_thermal" in wanted:
            if math.isinf(beta):
                vals["q_mu_thermal"] = exact.q
            elif m is None:
                vals["q_mu_thermal"] = thermal_q_mu(params, beta, dec=dec).q
            else:
                rho = thermal_density(dec, beta)
                vals["q_mu_thermal"] = q_m(jplus_moment(rho.band(mu), mu, N), mu, N).q
        if {"dE0_pct", "dE1_pct", "F0_pct", "F1_pct"} & wanted and len(dec) >= 2:
            vals.update(ha_compare_values(N, gamma, dec))
    return row


# -- formatting ---------------------------------------------------------------


def format_value(v) -> str:
    """Shortest round-trip text; missing or undefined values are empty."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    return v


def render(rows, columns, fmt: str = "csv", meta: dict | None = None, with_error: bool = False) -> str:
    """CSV (one ``#`` metadata line, header, rows) or line-delimited JSON.

    Metadata values must not contain whitespace.
    """
    cols = list(columns) + ([ERROR_COLUMN] if with_error else [])
    buf = io.StringIO()
    if fmt == "csv":
        if meta:
            buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in rows:
            rec = r.record(columns) if isinstance(r, ResultRow) else r
            line = [format_value(rec.get(c)) for c in columns]
            if with_error:
                line.append(r.error or "" if isinstance(r, ResultRow) else rec.get(ERROR_COLUMN) or "")
            writer.writerow(line)
    elif fmt == "json":
        if meta is not None:
            buf.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for r in rows:
            rec = r.record(columns) if isinstance(r, ResultRow) else dict(r)
            if with_error and isinstance(r, ResultRow):
                rec[ERROR_COLUMN] = r.error
            buf.write(json.dumps({c: _json_value(rec.get(c)) for c in cols}) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def parse_csv(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`render` for CSV: metadata and rows with floats restored."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                meta[key] = value
        else:
            body.append(line)
    reader = csv.DictReader(body)
    rows = []
    for rec in reader:
        out = {}
        for k, v in rec.items():
            if v == "" or k == ERROR_COLUMN:
                out[k] = v or None
            elif k in ("N", "mu", "depth_k"):
                out[k] = int(v)
            else:
                out[k] = float(v)
        rows.append(out)
    return meta, rows

