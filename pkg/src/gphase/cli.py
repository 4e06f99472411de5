"""Command-line front end: presets, parameter sweeps, CSV/JSON output.

Experiments
-----------
trace         sample the two-level bath decoherence factor over one cycle
gp-curve      geometric phase for one parameter set (or a sweep of one axis)
correction    baseline-subtracted phase correction across a field sweep,
              protocol simulation plus the theory column
ising-sweep   exact chain pipeline vs 2nd/3rd order approximations over lambda
ising-approx  2nd/3rd order approximations only (fast)
trotter-check minimum fidelity over the field range per step count

Outputs are deterministic: identical configurations produce byte-identical
files regardless of worker count, and every row carries the configuration
hash.  Wall-clock information goes to the stderr log only, never into the
payload.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import ConfigParseError, GphaseError, ValidationError
from .gp import SystemParams, build_trace, geometric_phase
from .ising import IsingBathParams, decoherence_product
from .perturbative import gp_approx_ising
from .protocol import (
    Decomposition,
    ProtocolParams,
    correction_experiment,
    cycle_fidelity,
)
from .two_level import CouplingConvention, TwoLevelBathParams, decoherence_factor_oracle

log = logging.getLogger("gphase")

EXPERIMENTS = ("trace", "gp-curve", "ising-sweep", "ising-approx", "trotter-check", "correction")

_OMEGA_REF = 100.0 * np.pi  # rad/s; all other reference scales are ratios of this

# Bundled parameter sets.  Frequencies are angular (rad/s); since every other
# scale is a ratio of omega the physics output is invariant under rescaling.
PRESETS: dict[str, dict] = {
    "paper-fig1c": {
        "experiment": "correction",
        "omega": _OMEGA_REF,
        "theta": np.pi / 4.0,
        "delta_gap": 0.02 * _OMEGA_REF,
        "coupling": 0.1 * _OMEGA_REF,
        "b_min": -0.2 * _OMEGA_REF,
        "b_max": 0.2 * _OMEGA_REF,
        "b_points": 21,
        "trotter_steps": 64,
        "decomposition": "exact",
        "samples": 64,
    },
    "paper-figA": {
        "experiment": "ising-sweep",
        "n_spins": 100,
        "j_coupling": 1.0,
        "coupling": 5e-5,
        "omega_over_j": 1.0,
        "theta": np.pi / 4.0,
        "lambda_min": 0.0,
        "lambda_max": 2.0,
        "lambda_points": 41,
        "samples": 4096,
    },
    "trotter-claim": {
        "experiment": "trotter-check",
        "omega": _OMEGA_REF,
        "theta": np.pi / 4.0,
        "delta_gap": 0.02 * _OMEGA_REF,
        "coupling": 0.1 * _OMEGA_REF,
        "b_min": -0.2 * _OMEGA_REF,
        "b_max": 0.2 * _OMEGA_REF,
        "b_points": 21,
        "fidelity_threshold": 0.997,
        "max_steps": 512,
    },
}


def presets() -> list[str]:
    """Names of the bundled parameter presets."""
    return list(PRESETS)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration."""

    experiment: str
    parameters: dict
    output: str | None
    fmt: str
    sweep: tuple[str, float, float, int] | None
    workers: int
    keep_going: bool

    @property
    def config_hash(self) -> str:
        payload = {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "sweep": self.sweep,
            "format": self.fmt,
        }
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_DEFAULTS: dict[str, dict] = {
    "trace": {
        "omega": _OMEGA_REF, "theta": np.pi / 4.0, "delta_gap": 0.02 * _OMEGA_REF,
        "coupling": 0.1 * _OMEGA_REF, "b_field": 0.05 * _OMEGA_REF, "znu": 1.0,
        "convention": "zz", "samples": 256,
    },
    "gp-curve": {
        "omega": _OMEGA_REF, "theta": np.pi / 4.0, "delta_gap": 0.02 * _OMEGA_REF,
        "coupling": 0.1 * _OMEGA_REF, "b_field": 0.05 * _OMEGA_REF, "znu": 1.0,
        "convention": "zz", "samples": 1024,
    },
    "correction": {
        "omega": _OMEGA_REF, "theta": np.pi / 4.0, "delta_gap": 0.02 * _OMEGA_REF,
        "coupling": 0.1 * _OMEGA_REF, "b_min": -0.2 * _OMEGA_REF,
        "b_max": 0.2 * _OMEGA_REF, "b_points": 21, "trotter_steps": 64,
        "decomposition": "exact", "samples": 64, "znu": 1.0, "convention": "zz",
    },
    "ising-sweep": {
        "n_spins": 100, "j_coupling": 1.0, "coupling": 5e-5, "omega_over_j": 1.0,
        "theta": np.pi / 4.0, "lambda_min": 0.0, "lambda_max": 2.0,
        "lambda_points": 41, "samples": 4096,
    },
    "ising-approx": {
        "n_spins": 100, "j_coupling": 1.0, "coupling": 5e-5, "omega_over_j": 1.0,
        "theta": np.pi / 4.0, "lambda_min": 0.0, "lambda_max": 2.0,
        "lambda_points": 41,
    },
    "trotter-check": {
        "omega": _OMEGA_REF, "theta": np.pi / 4.0, "delta_gap": 0.02 * _OMEGA_REF,
        "coupling": 0.1 * _OMEGA_REF, "b_min": -0.2 * _OMEGA_REF,
        "b_max": 0.2 * _OMEGA_REF, "b_points": 21, "fidelity_threshold": 0.997,
        "max_steps": 512,
    },
}

_COLUMNS: dict[str, list[str]] = {
    "trace": ["t", "re_r", "im_r", "abs_r", "phase", "config_hash"],
    "gp-curve": ["phi_total", "phi_unitary", "correction", "integral_part",
                 "arctan_part", "eps_plus_final", "config_hash"],
    "correction": ["b_over_omega", "dphi_protocol", "dphi_theory", "config_hash"],
    "ising-sweep": ["lambda", "dphi_exact_norm", "dphi_order2_norm",
                    "dphi_order3_norm", "config_hash"],
    "ising-approx": ["lambda", "dphi_order2_norm", "dphi_order3_norm", "config_hash"],
    "trotter-check": ["n_steps", "min_fidelity", "config_hash"],
}


def _two_level_bath(params: dict) -> TwoLevelBathParams:
    conv = (CouplingConvention.PROJECTOR if params.get("convention", "zz") == "projector"
            else CouplingConvention.ZZ_TARGET)
    base = TwoLevelBathParams(
        delta_gap=params["delta_gap"], lam=0.0, coupling=params["coupling"],
        znu=params.get("znu", 1.0), convention=conv,
    )
    return base.with_b_field(params.get("b_field", 0.0))


def _validate(config: RunConfig) -> None:
    """Fail fast: construct every parameter object the run will need."""
    p = config.parameters
    if config.experiment in ("trace", "gp-curve", "correction", "trotter-check"):
        SystemParams(omega=p["omega"], theta=p["theta"])
        _two_level_bath({**p, "b_field": p.get("b_field", p.get("b_min", 0.0))})
    if config.experiment in ("ising-sweep", "ising-approx"):
        IsingBathParams(
            n_spins=int(p["n_spins"]), j_coupling=p["j_coupling"],
            lam=p["lambda_min"], coupling=p["coupling"],
        )
        if p["omega_over_j"] <= 0:
            raise ValidationError("omega_over_j must be positive")
    if config.sweep is not None and config.sweep[3] < 1:
        raise ValidationError("sweep points must be >= 1")
    for key in ("b_points", "lambda_points", "samples"):
        if key in p and int(p[key]) < 1:
            raise ValidationError(f"{key} must be >= 1")


# ---------------------------------------------------------------------------
# per-sweep-point workers (top level: picklable for process pools)

def _ising_exact_dphi_norm(params: dict, lam: float) -> float:
    bath = IsingBathParams(
        n_spins=int(params["n_spins"]), j_coupling=params["j_coupling"],
        lam=lam, coupling=params["coupling"],
    )
    sysp = SystemParams(omega=params["omega_over_j"] * params["j_coupling"], theta=params["theta"])
    samples = int(params["samples"])
    trace = build_trace(lambda t: decoherence_product(bath, t), sysp, samples)
    phi = geometric_phase(trace, sysp).phi_total
    ones = build_trace(lambda t: np.ones_like(t, dtype=complex), sysp, samples)
    baseline = geometric_phase(ones, sysp).phi_total
    return (phi - baseline) / (bath.n_spins * bath.coupling**2)


def _ising_orders_norm(params: dict, lam: float) -> tuple[float, float]:
    bath = IsingBathParams(
        n_spins=int(params["n_spins"]), j_coupling=params["j_coupling"],
        lam=lam, coupling=params["coupling"],
    )
    sysp = SystemParams(omega=params["omega_over_j"] * params["j_coupling"], theta=params["theta"])
    phi0 = np.pi * (1.0 - np.cos(sysp.theta))
    norm = bath.n_spins * bath.coupling**2
    o2 = (gp_approx_ising(bath, sysp, order=2) - phi0) / norm
    o3 = (gp_approx_ising(bath, sysp, order=3) - phi0) / norm
    return o2, o3


def _point_ising_sweep(args) -> list[float]:
    params, lam = args
    o2, o3 = _ising_orders_norm(params, lam)
    return [lam, _ising_exact_dphi_norm(params, lam), o2, o3]


def _point_ising_approx(args) -> list[float]:
    params, lam = args
    o2, o3 = _ising_orders_norm(params, lam)
    return [lam, o2, o3]


def _point_correction(args) -> list[float]:
    params, b = args
    sysp = SystemParams(omega=params["omega"], theta=params["theta"])
    bath = _two_level_bath({**params, "b_field": b})
    proto = ProtocolParams(
        sys=sysp, bath=bath, trotter_steps=int(params["trotter_steps"]),
        decomposition=Decomposition(params["decomposition"]),
    )
    rec = correction_experiment(proto, [b])[0]
    if rec.error is not None:
        raise GphaseError(rec.error)
    return [b / params["omega"], rec.dphi, rec.dphi_theory]


def _point_trotter(args) -> list[float]:
    params, n = args
    sysp = SystemParams(omega=params["omega"], theta=params["theta"])
    bath = _two_level_bath(params)
    worst = 1.0
    for b in np.linspace(params["b_min"], params["b_max"], int(params["b_points"])):
        proto = ProtocolParams(
            sys=sysp, bath=bath.with_b_field(b), trotter_steps=int(n),
            decomposition=Decomposition.COARSE_TROTTER,
        )
        worst = min(worst, cycle_fidelity(proto))
    return [float(n), worst]


def _point_gp_curve(args) -> list[float]:
    params, _ = args
    sysp = SystemParams(omega=params["omega"], theta=params["theta"])
    bath = _two_level_bath(params)
    trace = build_trace(lambda t: decoherence_factor_oracle(bath, t), sysp, int(params["samples"]))
    g = geometric_phase(trace, sysp)
    return [g.phi_total, g.phi_unitary, g.correction, g.integral_part,
            g.arctan_part, g.eps_plus_final]


_POINT_FUNCS = {
    "ising-sweep": _point_ising_sweep,
    "ising-approx": _point_ising_approx,
    "correction": _point_correction,
    "trotter-check": _point_trotter,
    "gp-curve": _point_gp_curve,
}


def _sweep_values(config: RunConfig) -> tuple[str | None, list]:
    p = config.parameters
    if config.sweep is not None:
        axis, lo, hi, n = config.sweep
        return axis, list(np.linspace(lo, hi, int(n)))
    if config.experiment in ("ising-sweep", "ising-approx"):
        return "lambda", list(np.linspace(p["lambda_min"], p["lambda_max"], int(p["lambda_points"])))
    if config.experiment == "correction":
        return "b_field", list(np.linspace(p["b_min"], p["b_max"], int(p["b_points"])))
    if config.experiment == "trotter-check":
        n, steps = 1, []
        while n <= int(p["max_steps"]):
            steps.append(n)
            n *= 2
        return "n_steps", steps
    return None, [None]


def _failure_row(config: RunConfig, params: dict, value) -> list[float]:
    """Row emitted for a failed sweep point under --keep-going."""
    width = len(_COLUMNS[config.experiment]) - 1  # config_hash appended later
    if config.experiment == "correction":
        return [float(value) / params["omega"]] + [np.nan] * (width - 1)
    if config.experiment in ("ising-sweep", "ising-approx", "trotter-check"):
        return [float(value)] + [np.nan] * (width - 1)
    return [np.nan] * width


def _run_points(config: RunConfig, axis: str | None, values: list) -> list[list[float]]:
    func = _POINT_FUNCS[config.experiment]
    tasks = []
    for v in values:
        params = dict(config.parameters)
        if axis is not None and config.sweep is not None:
            params[axis.replace("-", "_")] = v
        tasks.append((params, v))

    rows: list[list[float]] = []
    failures: list[str] = []

    def handle(result, params, value):
        if isinstance(result, Exception):
            msg = f"point {value!r}: {type(result).__name__}: {result}"
            failures.append(msg)
            log.warning("point failed: %s", msg)
            rows.append(_failure_row(config, params, value))
        else:
            rows.append(result)

    if config.workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(func, t) for t in tasks]
            for fut, (pp, v) in zip(futures, tasks):
                try:
                    handle(fut.result(), pp, v)
                except concurrent.futures.process.BrokenProcessPool:
                    raise
                except Exception as exc:
                    handle(exc, pp, v)
    else:
        for pp, v in tasks:
            try:
                handle(func((pp, v)), pp, v)
            except Exception as exc:
                handle(exc, pp, v)

    if failures and not config.keep_going:
        raise GphaseError(failures[0])
    return rows


def _run_trace(config: RunConfig) -> list[list[float]]:
    p = config.parameters
    sysp = SystemParams(omega=p["omega"], theta=p["theta"])
    bath = _two_level_bath(p)
    trace = build_trace(lambda t: decoherence_factor_oracle(bath, t), sysp, int(p["samples"]))
    return [
        [t, r.real, r.imag, m, ph]
        for t, r, m, ph in zip(trace.times, trace.r_values, trace.magnitude, trace.phase_unwrapped)
    ]


def _fmt_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _render_csv(columns: list[str], rows: list[list]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def _render_json(config: RunConfig, columns: list[str], rows: list[list]) -> str:
    doc = {
        "config": {
            "experiment": config.experiment,
            "parameters": {k: config.parameters[k] for k in sorted(config.parameters)},
            "sweep": list(config.sweep) if config.sweep else None,
            "format": config.fmt,
        },
        "provenance": {"version": __version__, "config_hash": config.config_hash},
        "columns": columns,
        "rows": [[x if isinstance(x, str) else float(x) for x in row] for row in rows],
    }
    return json.dumps(doc, sort_keys=True, indent=1, default=float) + "\n"


def run(config: RunConfig) -> int:
    """Execute a validated configuration and write its output. Returns exit code."""
    _validate(config)
    log.info("run start experiment=%s hash=%s at %s",
             config.experiment, config.config_hash,
             datetime.now(timezone.utc).isoformat())

    if config.experiment == "trace":
        rows = _run_trace(config)
    else:
        axis, values = _sweep_values(config)
        rows = _run_points(config, axis, values)

    columns = list(_COLUMNS[config.experiment])
    if config.experiment == "gp-curve" and config.sweep is not None:
        columns = [config.sweep[0]] + columns
        rows = [[v] + row for v, row in zip(np.linspace(*config.sweep[1:3], int(config.sweep[3])), rows)]
    rows = [row + [config.config_hash] for row in rows]

    text = (_render_csv(columns, rows) if config.fmt == "csv"
            else _render_json(config, columns, rows))
    if config.output is None:
        sys.stdout.write(text)
    else:
        with open(config.output, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        log.info("wrote %s (%d rows)", config.output, len(rows))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gphase",
        description="Geometric phase of a dephased qubit near a critical bath.",
    )
    ap.add_argument("experiment", choices=EXPERIMENTS + ("presets",),
                    help="experiment to run, or 'presets' to list bundled parameter sets")
    ap.add_argument("--preset", choices=list(PRESETS), help="start from a bundled parameter set")
    ap.add_argument("--output", help="output file (default: stdout)")
    ap.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    ap.add_argument("--workers", type=int,
                    default=int(os.environ.get("GPHASE_WORKERS", "1")),
                    help="parallel sweep workers (env GPHASE_WORKERS)")
    ap.add_argument("--keep-going", action="store_true",
                    help="flag failed sweep points instead of aborting")
    ap.add_argument("--sweep", nargs=4, metavar=("AXIS", "MIN", "MAX", "POINTS"),
                    help="sweep a named parameter axis")
    ap.add_argument("--verbose", action="store_true", help="log progress to stderr")

    phys = ap.add_argument_group("physical parameters")
    phys.add_argument("--omega", type=float, help="system angular frequency, rad/s")
    phys.add_argument("--theta", type=float, help="Bloch polar angle, rad")
    phys.add_argument("--delta-gap", dest="delta_gap", type=float, help="bath minimum gap, rad/s")
    phys.add_argument("--coupling", type=float,
                      help="dephasing coupling (rad/s; dimensionless for ising)")
    phys.add_argument("--b-field", dest="b_field", type=float, help="bath field B, rad/s")
    phys.add_argument("--znu", type=float, help="critical exponent product")
    phys.add_argument("--convention", choices=("zz", "projector"))
    phys.add_argument("--samples", type=int, help="trace samples per cycle")
    phys.add_argument("--b-min", dest="b_min", type=float)
    phys.add_argument("--b-max", dest="b_max", type=float)
    phys.add_argument("--b-points", dest="b_points", type=int)
    phys.add_argument("--trotter-steps", dest="trotter_steps", type=int)
    phys.add_argument("--decomposition", choices=[d.value for d in Decomposition])
    phys.add_argument("--n-spins", dest="n_spins", type=int)
    phys.add_argument("--j-coupling", dest="j_coupling", type=float)
    phys.add_argument("--omega-over-j", dest="omega_over_j", type=float)
    phys.add_argument("--lambda-min", dest="lambda_min", type=float)
    phys.add_argument("--lambda-max", dest="lambda_max", type=float)
    phys.add_argument("--lambda-points", dest="lambda_points", type=int)
    phys.add_argument("--fidelity-threshold", dest="fidelity_threshold", type=float)
    phys.add_argument("--max-steps", dest="max_steps", type=int)
    return ap


_PARAM_KEYS = (
    "omega", "theta", "delta_gap", "coupling", "b_field", "znu", "convention",
    "samples", "b_min", "b_max", "b_points", "trotter_steps", "decomposition",
    "n_spins", "j_coupling", "omega_over_j", "lambda_min", "lambda_max",
    "lambda_points", "fidelity_threshold", "max_steps",
)


def parse_config(argv) -> RunConfig | None:
    """Resolve argv into a RunConfig (None for the 'presets' listing)."""
    args = _build_parser().parse_args(argv)
    if args.experiment == "presets":
        for name, spec in PRESETS.items():
            print(f"{name}: {spec['experiment']}  "
                  + " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                             for k, v in spec.items() if k != "experiment"))
        return None

    experiment = args.experiment
    params = dict(_DEFAULTS[experiment])
    if args.preset:
        preset = dict(PRESETS[args.preset])
        preset_exp = preset.pop("experiment")
        if preset_exp != experiment:
            raise ConfigParseError(
                f"preset {args.preset!r} targets experiment {preset_exp!r}, not {experiment!r}"
            )
        params.update(preset)
    for key in _PARAM_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    params = {k: v for k, v in params.items() if k in _DEFAULTS[experiment] or k in _PARAM_KEYS}

    sweep = None
    if args.sweep:
        axis, lo, hi, n = args.sweep
        try:
            sweep = (axis, float(lo), float(hi), int(n))
        except ValueError as exc:
            raise ConfigParseError(f"bad sweep specification: {exc}") from exc

    if args.workers < 1:
        raise ConfigParseError("--workers must be >= 1")
    return RunConfig(
        experiment=experiment,
        parameters=params,
        output=args.output,
        fmt=args.fmt,
        sweep=sweep,
        workers=args.workers,
        keep_going=args.keep_going,
    )


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    if "--verbose" in argv:
        log.setLevel(logging.INFO)
    try:
        config = parse_config(argv)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if config is None:
        return 0
    try:
        return run(config)
    except ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 3
    except GphaseError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
