"""Run configuration: flat TOML (or a JSON summary's settings echo).

Every frequency key carries its unit (``_ghz``, ``_mhz``, ``_khz``) and is an
ordinary frequency; parsing converts to angular rad/ns. Unknown keys are
rejected so that typos fail fast.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import NoiseParams, PulseEnvelope, TRUNCATION_THRESHOLD
from .hamiltonians import DickeParams, DiracParams, PhysicalParams, RabiParams
from .units import to_angular

COMMANDS = ("simulate-rabi", "simulate-dicke", "simulate-dirac", "resources", "sweep")

PHYSICAL_KEYS = ("resonator_ghz", "qubit1_ghz", "qubit2_ghz", "frame_ghz", "coupling_mhz")
RABI_KEYS = ("rabi_resonator_mhz", "rabi_qubit_mhz", "rabi_coupling_mhz")
DIRAC_KEYS = ("mass_energy_mhz", "light_speed_mhz")

# key -> (type, default); default None means required for the commands that use it
_COMMON = {
    "command": (str, None),
    "out_dir": (str, ""),
    "fock_cutoff": (int, None),
}
_SIMULATE = {
    "n_steps": (int, None),
    "t_max_ns": (float, None),
    "samples": (int, 41),
    "mode": (str, "ideal"),
    "initial_state": (str, "excited-vacuum"),
    "initial_fock": (int, 0),
    "initial_amplitudes": (list, []),
    "kappa_khz": (float, 0.0),
    "gamma_phi_khz": (float, 0.0),
    "gamma_minus_khz": (float, 0.0),
    "pulse_ns": (float, 10.0),
    "pulse_shape": (str, "sin2"),
    "pulse_with_jc": (bool, False),
    "samples_per_segment": (int, 2),
    "qubit_split": (str, "symmetric"),
    "truncation_threshold": (float, TRUNCATION_THRESHOLD),
    "fail_on_truncation": (bool, True),
}
_RESOURCES = {
    "t_ns": (float, None),
    "epsilon": (float, None),
    "fractal_depth": (int, 1),
    "n_steps": (int, 10),
    "qubit_split": (str, "symmetric"),
}
_SWEEP = {
    "sweep_command": (str, None),
    "sweep_axes": (dict, {}),
    "sweep_cells": (list, []),
    "workers": (int, 1),
}
_MODEL = {k: (float, None) for k in PHYSICAL_KEYS + RABI_KEYS + DIRAC_KEYS}
_MODEL["n_qubits"] = (int, 1)

ALL_KEYS = {**_COMMON, **_SIMULATE, **_RESOURCES, **_SWEEP, **_MODEL}


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists every issue found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class RunSpec:
    command: str
    raw: dict
    family: str = ""
    model: Any = None
    fock_cutoff: int = 0
    n_steps: int = 0
    mode: str = "ideal"
    t_max: float = 0.0
    samples: int = 0
    initial: dict = field(default_factory=dict)
    noise: NoiseParams = field(default_factory=NoiseParams)
    envelope: Optional[PulseEnvelope] = None
    pulse_with_jc: bool = False
    samples_per_segment: int = 2
    split: str = "symmetric"
    truncation_threshold: float = TRUNCATION_THRESHOLD
    fail_on_truncation: bool = True
    t: float = 0.0
    epsilon: float = 0.0
    k: int = 1
    sweep_command: str = ""
    sweep_axes: dict = field(default_factory=dict)
    sweep_cells: list = field(default_factory=list)
    workers: int = 1
    out_dir: str = ""


def _no_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ConfigError([f"duplicate key: {k}"])
        seen[k] = v
    return seen


def load_raw(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text, object_pairs_hook=_no_duplicates) if text.strip() else {}
        if isinstance(data, dict) and "settings" in data and "schema_version" in data:
            data = data["settings"]
        return dict(data)
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"cannot parse {path}: {exc}"]) from None


def parse_config(path, command: Optional[str] = None, overrides: Optional[dict] = None) -> RunSpec:
    raw = load_raw(path)
    if command is not None:
        raw["command"] = command
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return validate(raw)


def _typed(key: str, value, problems: list[str]):
    kind = ALL_KEYS[key][0]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{key} must be a number, got {value!r}")
            return None
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            problems.append(f"{key} must be an integer, got {value!r}")
            return None
        return value
    if not isinstance(value, kind):
        problems.append(f"{key} must be of type {kind.__name__}, got {value!r}")
        return None
    return value


def _family(raw: dict, command: str, problems: list[str]) -> str:
    present = {
        name: [k for k in keys if k in raw]
        for name, keys in (("physical", PHYSICAL_KEYS), ("rabi", RABI_KEYS), ("dirac", DIRAC_KEYS))
    }
    used = [name for name, keys in present.items() if keys]
    allowed = {"simulate-dirac": ("dirac",), "simulate-dicke": ("rabi",), "resources": ("rabi",)}.get(
        command, ("physical", "rabi")
    )
    if len(used) > 1:
        problems.append(f"exactly one model-parameter family allowed, found {', '.join(used)}")
        return ""
    if not used:
        want = {"physical": PHYSICAL_KEYS, "rabi": RABI_KEYS, "dirac": DIRAC_KEYS}[allowed[-1]]
        problems.append("missing keys: " + ", ".join(want))
        return ""
    fam = used[0]
    if fam not in allowed:
        problems.append(f"command {command} does not accept {fam} parameters")
        return ""
    want = {"physical": PHYSICAL_KEYS, "rabi": RABI_KEYS, "dirac": DIRAC_KEYS}[fam]
    missing = [k for k in want if k not in raw]
    if missing:
        problems.append("missing keys: " + ", ".join(missing))
        return ""
    return fam


def _build_model(fam: str, v: dict, n_qubits: int):
    if fam == "physical":
        return PhysicalParams(
            omega_r=to_angular(v["resonator_ghz"], "ghz"),
            omega_q1=to_angular(v["qubit1_ghz"], "ghz"),
            omega_q2=to_angular(v["qubit2_ghz"], "ghz"),
            g=to_angular(v["coupling_mhz"], "mhz"),
            omega_tilde=to_angular(v["frame_ghz"], "ghz"),
        )
    if fam == "rabi":
        rp = RabiParams(
            to_angular(v["rabi_resonator_mhz"], "mhz"),
            to_angular(v["rabi_qubit_mhz"], "mhz"),
            to_angular(v["rabi_coupling_mhz"], "mhz"),
        )
        return DickeParams(rp, n_qubits) if n_qubits > 1 else rp
    return DiracParams(to_angular(v["mass_energy_mhz"], "mhz"), to_angular(v["light_speed_mhz"], "mhz"))


def validate(raw: dict) -> RunSpec:
    """Check a raw key/value mapping and convert it to a :class:`RunSpec`."""
    problems: list[str] = []
    unknown = sorted(k for k in raw if k not in ALL_KEYS)
    if unknown:
        problems.append("unknown keys: " + ", ".join(unknown))
    command = raw.get("command")
    if command is None:
        raise ConfigError(problems + ["missing keys: command"])
    if command not in COMMANDS:
        raise ConfigError(problems + [f"unknown command {command!r}"])

    if command == "sweep":
        allowed = {**_COMMON, **_SWEEP}
        inner = raw.get("sweep_command")
        if inner not in COMMANDS[:4]:
            problems.append("missing keys: sweep_command" if inner is None else f"bad sweep_command {inner!r}")
            raise ConfigError(problems)
        if not raw.get("sweep_axes") and not raw.get("sweep_cells"):
            problems.append("missing keys: sweep_axes or sweep_cells")
        for k in list(raw.get("sweep_axes", {})) + [k for c in raw.get("sweep_cells", []) for k in c]:
            if k not in ALL_KEYS or k in _SWEEP or k == "command":
                problems.append(f"cannot sweep over {k!r}")
        base = {k: v for k, v in raw.items() if k not in _SWEEP and k != "command"}
        # check the base together with the first cell, since cells may supply required keys
        cells = raw.get("sweep_cells") or [{}]
        axes = raw.get("sweep_axes") or {}
        first = {k: (v[0] if isinstance(v, list) and v else v) for k, v in axes.items()}
        first.update(cells[0] if isinstance(cells[0], dict) else {})
        try:
            validate({**base, **first, "command": inner})
        except ConfigError as exc:
            problems += exc.problems
        if problems:
            raise ConfigError(sorted(set(problems), key=problems.index))
        return RunSpec(
            command="sweep",
            raw=dict(raw),
            sweep_command=inner,
            sweep_axes=dict(raw.get("sweep_axes", {})),
            sweep_cells=list(raw.get("sweep_cells", [])),
            workers=int(raw.get("workers", 1)),
            out_dir=raw.get("out_dir", ""),
        )

    schema = {**_COMMON, **_MODEL}
    schema.update(_RESOURCES if command == "resources" else _SIMULATE)
    for k in raw:
        if k in ALL_KEYS and k not in schema:
            problems.append(f"key {k} is not used by command {command}")
    v: dict[str, Any] = {}
    for k, (kind, default) in schema.items():
        if k in raw:
            v[k] = _typed(k, raw[k], problems)
        elif default is not None:
            v[k] = default
    fam = _family(raw, command, problems)
    required = [k for k, (_, d) in schema.items() if d is None and k not in _MODEL and k not in raw]
    if required:
        problems.append("missing keys: " + ", ".join(required))
    if problems:
        raise ConfigError(problems)

    if v["fock_cutoff"] < 1:
        problems.append("fock_cutoff must be >= 1")
    if command == "simulate-dicke" and v["n_qubits"] < 1:
        problems.append("n_qubits must be >= 1")
    if command != "simulate-dicke" and command != "resources" and v.get("n_qubits", 1) != 1:
        problems.append(f"n_qubits is only meaningful for simulate-dicke and resources")
    spec = RunSpec(command=command, raw=dict(raw), family=fam, out_dir=v.get("out_dir", ""))
    spec.fock_cutoff = v["fock_cutoff"]
    if command == "resources":
        if not v["epsilon"] > 0:
            problems.append("epsilon must be > 0")
        if v["t_ns"] < 0:
            problems.append("t_ns must be >= 0")
        if v["fractal_depth"] < 1:
            problems.append("fractal_depth must be >= 1")
        spec.t, spec.epsilon, spec.k = v["t_ns"], v["epsilon"], v["fractal_depth"]
        spec.n_steps, spec.split = v["n_steps"], v["qubit_split"]
    else:
        for rate in ("kappa_khz", "gamma_phi_khz", "gamma_minus_khz"):
            if v[rate] < 0:
                problems.append(f"{rate} must be >= 0")
        if v["samples"] < 2:
            problems.append("samples must be >= 2")
        if v["n_steps"] < 1:
            problems.append("n_steps must be >= 1")
        if not v["t_max_ns"] > 0:
            problems.append("t_max_ns must be > 0")
        if v["mode"] not in ("ideal", "pulsed"):
            problems.append(f"mode must be 'ideal' or 'pulsed', got {v['mode']!r}")
        if v["initial_state"] not in ("excited-vacuum", "ground-vacuum", "fock", "custom"):
            problems.append(f"unknown initial_state {v['initial_state']!r}")
        if v["qubit_split"] not in ("symmetric", "second-resonant"):
            problems.append(f"unknown qubit_split {v['qubit_split']!r}")
        if v["pulse_shape"] not in ("sin2", "rect"):
            problems.append(f"unknown pulse_shape {v['pulse_shape']!r}")
        if not v["pulse_ns"] > 0:
            problems.append("pulse_ns must be > 0")
        if v["samples_per_segment"] < 1:
            problems.append("samples_per_segment must be >= 1")
        spec.n_steps, spec.mode = v["n_steps"], v["mode"]
        spec.t_max, spec.samples = v["t_max_ns"], v["samples"]
        spec.initial = {
            "name": v["initial_state"],
            "fock": v["initial_fock"],
            "amplitudes": v["initial_amplitudes"],
        }
        spec.split = v["qubit_split"]
        spec.pulse_with_jc = v["pulse_with_jc"]
        spec.samples_per_segment = v["samples_per_segment"]
        spec.truncation_threshold = v["truncation_threshold"]
        spec.fail_on_truncation = v["fail_on_truncation"]
    if problems:
        raise ConfigError(problems)
    try:
        spec.model = _build_model(fam, v, v.get("n_qubits", 1))
        if command == "resources" and isinstance(spec.model, RabiParams):
            spec.model = DickeParams(spec.model, 1)
        if command == "simulate-dicke" and isinstance(spec.model, RabiParams):
            spec.model = DickeParams(spec.model, 1)
        if command != "resources":
            spec.noise = NoiseParams(
                to_angular(v["kappa_khz"], "khz"),
                to_angular(v["gamma_phi_khz"], "khz"),
                to_angular(v["gamma_minus_khz"], "khz"),
            )
            spec.envelope = PulseEnvelope(v["pulse_ns"], v["pulse_shape"])
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    return spec
