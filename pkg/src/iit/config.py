"""Config files and the serialization primitives shared by all outputs.

Configs are JSON with schema_version 1. Complex numbers are [re, im] pairs
throughout (bare numbers are accepted on read and mean a real value). All
file writes go through an atomic temp-then-replace so a crash never leaves
a truncated output behind.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from datetime import datetime, timezone

from .errors import ConfigError, IITError
from .grids import Grid, SupportSpec, make_grid
from .protocol import (
    CouplingSchedule,
    GaussianSpec,
    Preparation,
    ProtocolConfig,
)

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_from_json(v, where: str = "value") -> complex:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number or [re, im], got a bool")
    if isinstance(v, (int, float)):
        return complex(float(v))
    if (
        isinstance(v, (list, tuple))
        and len(v) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    ):
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"{where}: expected a number or [re, im], got {v!r}")


def atomic_write_text(path: str, text: str) -> None:
    """Write text to `path` via a temp file in the same directory."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


def make_manifest(profile: str, seed: int | None = None) -> dict:
    """Run provenance block: the only place timestamps (and the seed) live,
    so the report block itself stays byte-identical across reruns."""
    return {
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tool_version": TOOL_VERSION,
        "profile": profile,
        "seed": seed,
    }


def default_config(profile: str | None = None) -> ProtocolConfig:
    """The worked reference setup: balanced branches two units apart, unit
    carriers, unit couplings over unit windows, projector onto the balanced
    superposition."""
    inv_sqrt2 = math.sqrt(0.5)
    prep = Preparation(
        a=complex(inv_sqrt2),
        b=complex(inv_sqrt2),
        psi_plus=SupportSpec(-2.5, -1.5),
        psi_minus=SupportSpec(1.5, 2.5),
        phi0=GaussianSpec(mean=0.0, variance=1.0),
    )
    sched = CouplingSchedule(
        t0=0.0, t1=1.0, t2=1.0, t3=2.0, t4=2.0, g12=1.0, g23=1.0
    )
    return ProtocolConfig(
        preparation=prep,
        schedule=sched,
        beta2=1.0,
        observable=[[0.5, 0.5], [0.5, 0.5]],
        alice_switch=True,
        detection_threshold=1e-4,
        profile=profile,
    )


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return obj[key]


def _real(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a real number, got {v!r}")
    return float(v)


def _bool(v, where: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{where}: expected true or false, got {v!r}")
    return v


def _choice(v, where: str, allowed: tuple[str, ...]) -> str:
    if v not in allowed:
        raise ConfigError(f"{where}: expected one of {allowed}, got {v!r}")
    return v


def _check_keys(obj: dict, known: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {', '.join(unknown)}")


def _support_from(obj, where: str) -> SupportSpec:
    _check_keys(obj, {"lo", "hi"}, where)
    try:
        return SupportSpec(
            _real(_need(obj, "lo", where), f"{where}.lo"),
            _real(_need(obj, "hi", where), f"{where}.hi"),
        )
    except IITError as e:
        raise ConfigError(f"{where}: {e}") from e


def _matrix_from(obj, where: str) -> list[list[complex]]:
    if not (isinstance(obj, list) and len(obj) == 2):
        raise ConfigError(f"{where}: expected 2 rows")
    rows = []
    for i, row in enumerate(obj):
        if not (isinstance(row, list) and len(row) == 2):
            raise ConfigError(f"{where}[{i}]: expected 2 entries")
        rows.append(
            [complex_from_json(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)]
        )
    return rows


def config_from_dict(obj: dict) -> ProtocolConfig:
    """Build a run config from parsed JSON, rejecting unknown keys."""
    _check_keys(
        obj,
        {
            "schema_version",
            "preparation",
            "schedule",
            "carol",
            "observable",
            "alice_switch",
            "detection_threshold",
            "profile",
            "gamma_convention",
            "gaussian_convention",
            "grids",
        },
        "config",
    )
    ver = obj.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        raise ConfigError(
            f"config: unsupported schema_version {ver!r}; this build reads"
            f" {SCHEMA_VERSION}"
        )

    prep_obj = _need(obj, "preparation", "config")
    _check_keys(
        prep_obj, {"a", "b", "psi_plus", "psi_minus", "phi0"}, "preparation"
    )
    phi0_obj = _need(prep_obj, "phi0", "preparation")
    _check_keys(phi0_obj, {"mean", "variance"}, "preparation.phi0")
    prep = Preparation(
        a=complex_from_json(_need(prep_obj, "a", "preparation"), "preparation.a"),
        b=complex_from_json(_need(prep_obj, "b", "preparation"), "preparation.b"),
        psi_plus=_support_from(
            _need(prep_obj, "psi_plus", "preparation"), "preparation.psi_plus"
        ),
        psi_minus=_support_from(
            _need(prep_obj, "psi_minus", "preparation"), "preparation.psi_minus"
        ),
        phi0=GaussianSpec(
            mean=_real(_need(phi0_obj, "mean", "preparation.phi0"), "phi0.mean"),
            variance=_real(
                _need(phi0_obj, "variance", "preparation.phi0"), "phi0.variance"
            ),
        ),
    )

    sched_obj = _need(obj, "schedule", "config")
    _check_keys(
        sched_obj,
        {"t0", "t1", "t2", "t3", "t4", "g12", "g23", "vr_active_during_vn23"},
        "schedule",
    )
    sched = CouplingSchedule(
        t0=_real(_need(sched_obj, "t0", "schedule"), "schedule.t0"),
        t1=_real(_need(sched_obj, "t1", "schedule"), "schedule.t1"),
        t2=_real(_need(sched_obj, "t2", "schedule"), "schedule.t2"),
        t3=_real(_need(sched_obj, "t3", "schedule"), "schedule.t3"),
        t4=_real(_need(sched_obj, "t4", "schedule"), "schedule.t4"),
        g12=_real(_need(sched_obj, "g12", "schedule"), "schedule.g12"),
        g23=_real(_need(sched_obj, "g23", "schedule"), "schedule.g23"),
        vr_active_during_vn23=_bool(
            sched_obj.get("vr_active_during_vn23", True),
            "schedule.vr_active_during_vn23",
        ),
    )

    carol_obj = _need(obj, "carol", "config")
    _check_keys(carol_obj, {"beta2"}, "carol")
    beta2 = _real(_need(carol_obj, "beta2", "carol"), "carol.beta2")

    obs_obj = _need(obj, "observable", "config")
    _check_keys(obs_obj, {"matrix"}, "observable")
    matrix = _matrix_from(_need(obs_obj, "matrix", "observable"), "observable.matrix")

    grids_obj = obj.get("grids")
    grids: tuple[Grid, Grid, Grid] | None = None
    if grids_obj is not None:
        if not (isinstance(grids_obj, list) and len(grids_obj) == 3):
            raise ConfigError("grids: expected null or a list of 3 grid objects")
        built = []
        for i, g in enumerate(grids_obj):
            _check_keys(g, {"min", "max", "n"}, f"grids[{i}]")
            n = _need(g, "n", f"grids[{i}]")
            if isinstance(n, bool) or not isinstance(n, int):
                raise ConfigError(f"grids[{i}].n: expected an integer, got {n!r}")
            try:
                built.append(
                    make_grid(
                        _real(_need(g, "min", f"grids[{i}]"), f"grids[{i}].min"),
                        _real(_need(g, "max", f"grids[{i}]"), f"grids[{i}].max"),
                        n,
                    )
                )
            except IITError as e:
                raise ConfigError(f"grids[{i}]: {e}") from e
        grids = (built[0], built[1], built[2])

    profile = obj.get("profile")
    if profile is not None and not isinstance(profile, str):
        raise ConfigError(f"profile: expected null or a string, got {profile!r}")

    return ProtocolConfig(
        preparation=prep,
        schedule=sched,
        beta2=beta2,
        observable=matrix,
        alice_switch=_bool(obj.get("alice_switch", True), "alice_switch"),
        detection_threshold=_real(
            obj.get("detection_threshold", 1e-4), "detection_threshold"
        ),
        profile=profile,
        gamma_convention=_choice(
            obj.get("gamma_convention", "normalized"),
            "gamma_convention",
            ("normalized", "raw"),
        ),
        gaussian_convention=_choice(
            obj.get("gaussian_convention", "density"),
            "gaussian_convention",
            ("density", "amplitude"),
        ),
        grids=grids,
    )


def config_to_dict(config: ProtocolConfig) -> dict:
    p, s = config.preparation, config.schedule
    m = config.observable
    return {
        "schema_version": SCHEMA_VERSION,
        "preparation": {
            "a": complex_to_json(p.a),
            "b": complex_to_json(p.b),
            "psi_plus": {"lo": p.psi_plus.lo, "hi": p.psi_plus.hi},
            "psi_minus": {"lo": p.psi_minus.lo, "hi": p.psi_minus.hi},
            "phi0": {"mean": p.phi0.mean, "variance": p.phi0.variance},
        },
        "schedule": {
            "t0": s.t0,
            "t1": s.t1,
            "t2": s.t2,
            "t3": s.t3,
            "t4": s.t4,
            "g12": s.g12,
            "g23": s.g23,
            "vr_active_during_vn23": s.vr_active_during_vn23,
        },
        "carol": {"beta2": config.beta2},
        "observable": {
            "matrix": [[complex_to_json(m[i, j]) for j in range(2)] for i in range(2)]
        },
        "alice_switch": config.alice_switch,
        "detection_threshold": config.detection_threshold,
        "profile": config.profile,
        "gamma_convention": config.gamma_convention,
        "gaussian_convention": config.gaussian_convention,
        "grids": None
        if config.grids is None
        else [g.descriptor() for g in config.grids],
    }


def load_config(path: str) -> ProtocolConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    return config_from_dict(obj)


def save_config(config: ProtocolConfig, path: str) -> None:
    atomic_write_json(path, config_to_dict(config))
