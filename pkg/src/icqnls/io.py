"""Config schema, binary checkpoints and CSV/JSON emission."""
from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math
import struct
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .diagnostics import DiagnosticsRecord
from .grid import Grid2D, WaveField
from .scenarios import ConfigError, FieldParams, InitialData, ScenarioConfig

SCHEMA_VERSION = 1
MAGIC = b"ICQN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIdd")  # magic, version, n, L, t
HEADER_BYTES = _HEADER.size  # 28


class CheckpointError(ValueError):
    pass


# --- checkpoints ------------------------------------------------------------------

def checkpoint_bytes(u: WaveField, t: float) -> bytes:
    g = u.grid
    payload = np.ascontiguousarray(u.samples, dtype="<c16").tobytes()
    return _HEADER.pack(MAGIC, FORMAT_VERSION, g.n, g.L, float(t)) + payload


def checkpoint_write(u: WaveField, t: float, path) -> None:
    Path(path).write_bytes(checkpoint_bytes(u, t))


def checkpoint_header(data: bytes) -> dict:
    if len(data) < 12 or data[:4] != MAGIC:
        raise CheckpointError("not an ICQN checkpoint")
    _, version, n = struct.unpack_from("<4sII", data, 0)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(data) < HEADER_BYTES:
        raise CheckpointError("payload length mismatch")
    _, _, _, L, t = _HEADER.unpack_from(data, 0)
    return {"magic": MAGIC.decode(), "version": version, "n": n, "L": L, "t": t}


def checkpoint_parse(data: bytes) -> tuple[WaveField, float]:
    hdr = checkpoint_header(data)
    n = hdr["n"]
    start = HEADER_BYTES
    if len(data) - start != 16 * n * n:
        raise CheckpointError("payload length mismatch")
    try:
        grid = Grid2D(n, hdr["L"])
    except ValueError as exc:
        raise CheckpointError(f"invalid header: {exc}") from exc
    arr = np.frombuffer(data, dtype="<c16", offset=start).reshape(n, n).astype(np.complex128)
    return WaveField(grid, arr), hdr["t"]


def checkpoint_read(path) -> tuple[WaveField, float]:
    return checkpoint_parse(Path(path).read_bytes())


# --- diagnostics CSV ------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v)) if not math.isfinite(v) else f"{float(v):.17g}"


def diagnostics_csv(records: Iterable[DiagnosticsRecord]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DiagnosticsRecord.columns())
    for r in records:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def emit_diagnostics(records: Iterable[DiagnosticsRecord], path) -> None:
    Path(path).write_text(diagnostics_csv(records))


def read_diagnostics(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != DiagnosticsRecord.columns():
        raise ValueError("unexpected diagnostics header")
    return [DiagnosticsRecord(*map(float, row)) for row in rows[1:]]


# --- JSON ----------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# --- config schema --------------------------------------------------------------

@dataclasses.dataclass
class OutputConfig:
    directory: str = "out"
    checkpoint_stride: int = 0
    emit_plots_data: bool = False


@dataclasses.dataclass
class RunConfigFile:
    scenario: ScenarioConfig
    output: OutputConfig
    seed: int = 0
    schema_version: int = SCHEMA_VERSION


_SECTIONS = {
    "schema_version": None, "seed": None, "grid": {"n", "L"},
    "fields": {f.name for f in dataclasses.fields(FieldParams)},
    "evolve": {"dt", "T", "record_stride", "blowup_gradient_threshold", "tail_energy_threshold", "dealias"},
    "scenario": {"kind", "initial", "knobs"},
    "output": {f.name for f in dataclasses.fields(OutputConfig)},
}
_INITIAL_KEYS = {f.name for f in dataclasses.fields(InitialData)}


def _strict(section: str, d: Any, allowed: set[str]) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{section}: expected a mapping")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key {section}.{extra[0]}")
    return d


def _num(section: str, key: str, v, kind=float, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(f"{section}.{key} must be an integer, got {v!r}")
    v = kind(v)
    if not math.isfinite(v):
        raise ConfigError(f"{section}.{key} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{section}.{key} must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(f"{section}.{key} must be >= 0, got {v}")
    return v


def parse_config(doc: dict) -> RunConfigFile:
    """Validate a config document; errors name the offending field."""
    _strict("config", doc, set(_SECTIONS))
    ver = doc.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {ver!r}")
    seed = _num("config", "seed", doc.get("seed", 0), int, nonneg=True)
    grid = _strict("grid", doc.get("grid", {}), _SECTIONS["grid"])
    fields_d = _strict("fields", doc.get("fields", {}), _SECTIONS["fields"])
    ev = _strict("evolve", doc.get("evolve", {}), _SECTIONS["evolve"])
    sc = _strict("scenario", doc.get("scenario"), _SECTIONS["scenario"]) if "scenario" in doc else None
    if sc is None or "kind" not in sc:
        raise ConfigError("scenario.kind is required")
    out = _strict("output", doc.get("output", {}), _SECTIONS["output"])

    fp = {}
    for k, v in fields_d.items():
        if k.startswith("sign"):
            if v not in (1, -1) or isinstance(v, bool):
                raise ConfigError(f"fields.{k} must be +1 or -1, got {v!r}")
            fp[k] = int(v)
        elif k.startswith("cap"):
            fp[k] = None if v is None else _num("fields", k, v, positive=True)
        elif k.startswith("b"):
            fp[k] = _num("fields", k, v, nonneg=True)
        else:
            fp[k] = _num("fields", k, v, nonneg=True)
    init_d = _strict("scenario.initial", sc.get("initial", {}), _INITIAL_KEYS)
    init = {}
    for k, v in init_d.items():
        if k == "family":
            init[k] = str(v)
        elif k in ("center", "momentum"):
            if not (isinstance(v, list) and len(v) == 2):
                raise ConfigError(f"scenario.initial.{k} must be a pair of numbers")
            init[k] = tuple(_num("scenario.initial", k, x) for x in v)
        elif k == "mode":
            init[k] = _num("scenario.initial", k, v, int, nonneg=True)
        elif k == "h_theta_norm":
            init[k] = None if v is None else _num("scenario.initial", k, v, positive=True)
        else:
            init[k] = _num("scenario.initial", k, v)
    evk = {}
    for k, v in ev.items():
        if k == "dealias":
            if not isinstance(v, bool):
                raise ConfigError("evolve.dealias must be a boolean")
            evk[k] = v
        elif k == "record_stride":
            evk[k] = _num("evolve", k, v, int, positive=True)
        else:
            evk[k] = _num("evolve", k, v, positive=True)
    knobs = sc.get("knobs", {})
    if not isinstance(knobs, dict):
        raise ConfigError("scenario.knobs: expected a mapping")
    try:
        scfg = ScenarioConfig(
            kind=sc["kind"],
            n=_num("grid", "n", grid.get("n", 256), int, positive=True),
            L=_num("grid", "L", grid.get("L", 12.0), positive=True),
            fields=FieldParams(**fp), initial=InitialData(**init), knobs=dict(knobs), **evk)
    except ConfigError as exc:
        msg = str(exc)
        if msg.startswith("unknown knobs"):
            raise ConfigError(f"scenario.knobs: {msg}") from exc
        raise
    scfg.grid()
    scfg.fields.build(scfg.grid())
    odir = out.get("directory", "out")
    if not isinstance(odir, str):
        raise ConfigError("output.directory must be a string")
    ocfg = OutputConfig(directory=odir,
                        checkpoint_stride=_num("output", "checkpoint_stride", out.get("checkpoint_stride", 0),
                                               int, nonneg=True),
                        emit_plots_data=bool(out.get("emit_plots_data", False)))
    return RunConfigFile(scfg, ocfg, seed)


def load_config(path) -> RunConfigFile:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def config_document(rc: RunConfigFile) -> dict:
    """Inverse of :func:`parse_config` (canonical form)."""
    s = rc.scenario
    init = dataclasses.asdict(s.initial)
    init["center"] = list(init["center"])
    init["momentum"] = list(init["momentum"])
    return {
        "schema_version": rc.schema_version, "seed": rc.seed,
        "grid": {"n": s.n, "L": s.L},
        "fields": dataclasses.asdict(s.fields),
        "evolve": {"dt": s.dt, "T": s.T, "record_stride": s.record_stride,
                   "blowup_gradient_threshold": s.blowup_gradient_threshold,
                   "tail_energy_threshold": s.tail_energy_threshold, "dealias": s.dealias},
        "scenario": {"kind": s.kind, "initial": init, "knobs": s.knobs},
        "output": dataclasses.asdict(rc.output),
    }
