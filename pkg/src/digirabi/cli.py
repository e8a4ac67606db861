"""Command-line entry point: ``digirabi <command> --config <path>``.

Each run writes ``<command>.csv`` and ``summary.json`` to the output
directory (``--out``, then the config's ``out_dir``, then ``$DIGIRABI_OUT``,
then ``./digirabi_out``). ``--plot`` additionally renders ``<command>.png``.

Exit status: 0 ok, 1 runtime failure, 2 invalid configuration, 3 degraded
(Fock truncation flag raised while ``fail_on_truncation`` is set).
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, RunSpec, parse_config, validate
from .dynamics import (
    IntegratorError,
    build_schedule,
    digital_scan,
    evolve_exact,
    run_schedule_lindblad,
    run_schedule_unitary,
)
from .hamiltonians import (
    DickeParams,
    DiracParams,
    PhysicalParams,
    RabiParams,
    build_dicke,
    build_dirac,
    build_rabi,
    build_tavis_cummings_steps,
    map_physical_to_simulated,
)
from .hilbert import QuantumState, SpaceLayout, basis_state
from .resources import ResourceQuery, dicke_norm_bound, gate_count_bound, spectral_norm, trotter_error_estimate

log = logging.getLogger("digirabi")

SCHEMA_VERSION = 1
ENV_OUT = "DIGIRABI_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGRADED = 0, 1, 2, 3


@dataclass
class RunResult:
    command: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    status: str = "ok"


def fmt(x) -> str:
    """17 significant digits: lossless for doubles."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def initial_state(spec: RunSpec, layout: SpaceLayout) -> QuantumState:
    """Named initial states; ``fock`` keeps the qubits excited and puts the mode in ``|m>``."""
    init = spec.initial
    n = layout.n_qubits
    if init["name"] == "excited-vacuum":
        return basis_state(layout, "e" * n, 0)
    if init["name"] == "ground-vacuum":
        return basis_state(layout, "g" * n, 0)
    if init["name"] == "fock":
        return basis_state(layout, "e" * n, init["fock"])
    amps = []
    for a in init["amplitudes"]:
        amps.append(complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a))
    vec = np.array(amps, dtype=complex)
    if vec.shape != (layout.dim,):
        raise ConfigError([f"initial_amplitudes needs {layout.dim} entries, got {len(vec)}"])
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ConfigError(["initial_amplitudes must not all be zero"])
    return QuantumState.pure(layout, vec / norm)


def _model_setup(spec: RunSpec):
    """(protocol params, layout, reference Hamiltonian)."""
    model = spec.model
    if isinstance(model, PhysicalParams):
        layout = SpaceLayout(1, spec.fock_cutoff)
        return model, layout, build_rabi(map_physical_to_simulated(model), layout)
    if isinstance(model, DickeParams):
        layout = SpaceLayout(model.n_qubits, spec.fock_cutoff)
        return model, layout, build_dicke(model, layout)
    if isinstance(model, DiracParams):
        layout = SpaceLayout(1, spec.fock_cutoff)
        return model, layout, build_rabi(model.to_rabi(), layout)
    layout = SpaceLayout(1, spec.fock_cutoff)
    return model, layout, build_rabi(model, layout)


def _qubit_columns(obs: dict) -> list[str]:
    return sorted((k for k in obs if k.startswith("sz_")), key=lambda k: int(k[3:]))


def run_simulation(spec: RunSpec) -> RunResult:
    params, layout, H_ref = _model_setup(spec)
    psi0 = initial_state(spec, layout)
    dirac = isinstance(params, DiracParams)
    if spec.mode == "ideal":
        times = np.linspace(0.0, spec.t_max, spec.samples)
        traj = digital_scan(params, times, spec.n_steps, psi0, reference=H_ref, split=spec.split)
        exact = evolve_exact(H_ref, psi0, times)
        obs = traj.observables
        if dirac:
            # Dirac frame: position = -p and momentum = x of the Rabi-frame field
            ex_d = evolve_exact(build_dirac(params, layout), psi0, times)
            columns = ["time_ns", "x", "p", "x_exact", "sz", "n_phot", "fidelity"]
            data = [times, -obs["p"], obs["x"], ex_d.observables["x"], obs["sz"], obs["n_phot"], obs["fidelity"]]
        else:
            qcols = _qubit_columns(obs)
            columns = ["time_ns", "sz", "n_phot", "fidelity", "x", "p", "sz_exact", "n_phot_exact"] + qcols
            data = [times, obs["sz"], obs["n_phot"], obs["fidelity"], obs["x"], obs["p"],
                    exact.observables["sz"], exact.observables["n_phot"]] + [obs[c] for c in qcols]
        truncation = max(traj.truncation, exact.truncation)
    else:
        sched = build_schedule(
            params, spec.t_max, spec.n_steps, "pulsed", layout=layout,
            envelope=spec.envelope, split=spec.split, pulse_with_jc=spec.pulse_with_jc,
        )
        if spec.noise.is_zero:
            traj = run_schedule_unitary(sched, psi0, reference=H_ref)
            t_sim, t_proto = traj.times, traj.protocol_times
        else:
            traj = run_schedule_lindblad(sched, psi0, spec.noise, spec.samples_per_segment, reference=H_ref)
            t_sim, t_proto = traj.observables["t_sim"], traj.times
        obs = traj.observables
        qcols = _qubit_columns(obs)
        columns = ["time_ns", "protocol_time_ns", "sz", "n_phot", "fidelity", "x", "p"]
        data = [t_sim, t_proto, obs["sz"], obs["n_phot"], obs["fidelity"]]
        data += [-obs["p"], obs["x"]] if dirac else [obs["x"], obs["p"]]
        if "trace" in obs:
            columns.append("trace")
            data.append(obs["trace"])
        columns += qcols
        data += [obs[c] for c in qcols]
        truncation = traj.truncation
    rows = [list(r) for r in zip(*data)]
    final = {c: float(d[-1]) for c, d in zip(columns, data)}
    flagged = truncation > spec.truncation_threshold
    status = "degraded" if (flagged and spec.fail_on_truncation) else "ok"
    summary = {
        "final": final,
        "fidelity_final": final.get("fidelity"),
        "truncation": truncation,
        "truncation_flag": flagged,
        "n_steps": spec.n_steps,
        "mode": spec.mode,
    }
    return RunResult(spec.command, columns, rows, summary, status)


def run_resources(spec: RunSpec) -> RunResult:
    dp = spec.model
    q = ResourceQuery(dp, spec.fock_cutoff, spec.t, spec.epsilon, spec.k)
    layout = SpaceLayout(dp.n_qubits, spec.fock_cutoff)
    h_norm = spectral_norm(build_dicke(dp, layout).matrix)
    s1, s2 = build_tavis_cummings_steps(dp, spec.split)
    trotter = trotter_error_estimate(s1.effective(layout), s2.effective(layout), spec.t, spec.n_steps)
    values = {
        "norm_bound": dicke_norm_bound(q),
        "spectral_norm": h_norm,
        "gate_count": gate_count_bound(q),
        "trotter_error": trotter,
    }
    columns = ["n_qubits", "fock_cutoff", "t_ns", "epsilon", "fractal_depth", "n_steps"] + list(values)
    row = [dp.n_qubits, spec.fock_cutoff, spec.t, spec.epsilon, spec.k, spec.n_steps] + list(values.values())
    return RunResult(spec.command, columns, [row], dict(values))


def execute(spec: RunSpec) -> RunResult:
    if spec.command == "resources":
        return run_resources(spec)
    if spec.command == "sweep":
        return run_sweep(spec)
    return run_simulation(spec)


def sweep_cells(spec: RunSpec) -> list[dict]:
    """Grid cells in deterministic order; duplicate axis values are dropped with a warning."""
    if spec.sweep_cells:
        return [dict(c) for c in spec.sweep_cells]
    axes = {}
    for key, values in spec.sweep_axes.items():
        values = values if isinstance(values, list) else [values]
        unique = []
        for v in values:
            if v in unique:
                log.warning("sweep axis %s: duplicate value %r ignored", key, v)
            else:
                unique.append(v)
        axes[key] = unique
    keys = list(axes)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def _run_cell(raw: dict):
    try:
        res = execute(validate(raw))
        return res.columns, res.rows, res.summary, res.status, None
    except (ConfigError, IntegratorError, ValueError, ArithmeticError) as exc:
        return [], [], {}, "error", f"{type(exc).__name__}: {exc}"


def run_sweep(spec: RunSpec, workers: Optional[int] = None) -> RunResult:
    cells = sweep_cells(spec)
    base = {k: v for k, v in spec.raw.items() if k not in ("sweep_command", "sweep_axes", "sweep_cells", "workers")}
    base["command"] = spec.sweep_command
    raws = [{**base, **cell} for cell in cells]
    workers = spec.workers if workers is None else workers
    if workers > 1 and len(raws) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, raws))
    else:
        results = [_run_cell(r) for r in raws]
    axis_keys = list(dict.fromkeys(k for c in cells for k in c))
    inner_cols: list[str] = []
    for cols, *_ in results:
        inner_cols += [c for c in cols if c not in inner_cols]
    columns = ["cell"] + axis_keys + inner_cols
    rows, cell_rows = [], []
    statuses = []
    for i, (cell, (cols, crow, summary, status, error)) in enumerate(zip(cells, results)):
        prefix = [i] + [cell.get(k, "") for k in axis_keys]
        for r in crow:
            by_name = dict(zip(cols, r))
            rows.append(prefix + [by_name.get(c, "") for c in inner_cols])
        final = summary.get("final", summary)
        cell_rows.append({
            "cell": i, **{k: cell.get(k, "") for k in axis_keys},
            "status": status, "error": error or "",
            "fidelity_final": final.get("fidelity", ""),
            "sz_final": final.get("sz", ""),
            "n_phot_final": final.get("n_phot", ""),
            "truncation": summary.get("truncation", ""),
            **({k: summary[k] for k in ("norm_bound", "gate_count", "trotter_error")} if "gate_count" in summary else {}),
        })
        statuses.append(status)
    status = "ok" if all(s == "ok" for s in statuses) else ("error" if "error" in statuses else "degraded")
    summary = {"cells": cell_rows, "n_cells": len(cells), "sweep_command": spec.sweep_command}
    return RunResult("sweep", columns, rows, summary, status)


def write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def resolve_out_dir(flag: Optional[str], spec_dir: str = "") -> Path:
    return Path(flag or spec_dir or os.environ.get(ENV_OUT) or "digirabi_out")


def write_outputs(result: RunResult, spec: RunSpec, out: Path, wall: float, plot: bool = False) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{result.command}.csv"
    write_csv(csv_path, result.columns, result.rows)
    outputs = {"csv": csv_path.name}
    if result.command == "sweep":
        cells = result.summary["cells"]
        keys = list(dict.fromkeys(k for c in cells for k in c))
        write_csv(out / "sweep_summary.csv", keys, [[c.get(k, "") for k in keys] for c in cells])
        outputs["summary_csv"] = "sweep_summary.csv"
    if plot:
        from .plotting import render

        fig = render(result, out / f"{result.command}.png")
        if fig is not None:
            outputs["figure"] = fig.name
    summary = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": result.command,
        "status": result.status,
        **result.summary,
        "wall_clock_s": wall,
        "outputs": outputs,
        "settings": spec.raw,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2)
    return summary


def run(spec: RunSpec, out: Optional[Path] = None, plot: bool = False) -> int:
    """Execute a validated spec and write its artifacts; returns the exit status."""
    out = out or resolve_out_dir(None, spec.out_dir)
    start = time.perf_counter()
    result = execute(spec)
    wall = time.perf_counter() - start
    write_outputs(result, spec, out, wall, plot)
    if result.status == "degraded":
        log.warning("run degraded: Fock truncation flag exceeded (see summary.json)")
        return EXIT_DEGRADED
    if result.status == "error":
        return EXIT_FAIL
    return EXIT_OK


def _error(out: Optional[Path], kind: str, message: str, problems=None) -> dict:
    payload = {"schema_version": SCHEMA_VERSION, "status": "error", "error_type": kind, "message": message}
    if problems:
        payload["problems"] = problems
    print(json.dumps(payload), file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(json.dumps(payload, indent=2))
        except OSError:
            pass
    return payload


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="digirabi", description="Digital quantum Rabi/Dicke simulator")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="TOML config (or a previous summary.json)")
    ap.add_argument("--out", help=f"output directory (default: config out_dir, ${ENV_OUT}, ./digirabi_out)")
    ap.add_argument("--steps", type=int, help="override n_steps")
    ap.add_argument("--mode", choices=("ideal", "pulsed"), help="override mode")
    ap.add_argument("--workers", type=int, help="override sweep worker count")
    ap.add_argument("--plot", action="store_true", help="also render a PNG figure next to the CSV")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    out = Path(args.out) if args.out else None
    try:
        overrides = {"n_steps": args.steps, "mode": args.mode}
        if args.command == "sweep":
            overrides["workers"] = args.workers
        spec = parse_config(args.config, args.command, overrides)
    except ConfigError as exc:
        _error(out, "ConfigError", str(exc), exc.problems)
        return EXIT_CONFIG
    out = resolve_out_dir(args.out, spec.out_dir)
    try:
        return run(spec, out, plot=args.plot)
    except ConfigError as exc:
        _error(out, "ConfigError", str(exc), exc.problems)
        return EXIT_CONFIG
    except (IntegratorError, ValueError, ArithmeticError) as exc:
        _error(out, type(exc).__name__, str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
