"""Plain-text file formats, run configuration, and plot-data export.

All files are comma-separated UTF-8 with one ``#`` header line and 17
significant digits per number, so read-after-write reproduces every record
exactly.  Writes go through a temporary file and an atomic rename.

Formats
-------
tube        ``# stefan-tube v1, M=<M>, dt=<dt>[, key=value ...]`` then rows
            ``t, a_{-M}, ..., a_{-1}, a_0, a_1, ..., a_M``.
schedule    ``# stefan-schedule v1, um0=<u_m(0)>`` then rows ``t, u_m, du_m``
            (the last row repeats the final slope).
snapshot    ``# t=<t_k>`` then rows ``x, y, v`` per mesh vertex.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .forward import SCHEDULE_PRESETS, MeltingSchedule, SpaceTimeTube
from .geometry import FourierBoundary, boundary_angles, radius

__all__ = [
    "ConfigError",
    "write_text_atomic",
    "write_tube",
    "read_tube",
    "write_schedule",
    "read_schedule",
    "write_snapshots",
    "export_plot_data",
    "write_boundary_svg",
    "GeometryConfig",
    "TimeConfig",
    "ScheduleConfig",
    "NoiseConfig",
    "InverseConfig",
    "PathsConfig",
    "RunConfig",
    "config_from_dict",
    "load_config",
]

_FMT = "%.17g"


class ConfigError(ValueError):
    """A run configuration field is missing or out of range."""


def write_text_atomic(path, text: str):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _row(values) -> str:
    return ", ".join(_FMT % v for v in values)


def _parse_header(line: str, tag: str) -> dict:
    line = line.strip()
    if not line.startswith("#"):
        raise ValueError(f"missing header line (expected '# {tag} ...')")
    parts = [p.strip() for p in line[1:].split(",")]
    if not parts or parts[0] != tag:
        raise ValueError(f"bad header {parts[:1]!r}, expected {tag!r}")
    meta = {}
    for item in parts[1:]:
        if "=" not in item:
            raise ValueError(f"malformed header field {item!r}")
        key, value = item.split("=", 1)
        meta[key.strip()] = value.strip()
    return meta


def write_tube(path, tube: SpaceTimeTube, extra: Optional[dict] = None):
    """Write a boundary-record file; ``extra`` key/values join the header."""
    fields = {"M": str(tube.order), "dt": _FMT % tube.dt}
    for key, value in (extra or {}).items():
        fields[str(key)] = str(value)
    header = "# stefan-tube v1, " + ", ".join(f"{k}={v}" for k, v in fields.items())
    lines = [header]
    for t, row in zip(tube.times, tube.coeffs):
        lines.append(_row([t, *row]))
    write_text_atomic(path, "\n".join(lines) + "\n")


def read_tube(path) -> tuple[SpaceTimeTube, dict]:
    """Read a tube file back; returns the tube and the header metadata."""
    with open(path, encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    meta = _parse_header(lines[0], "stefan-tube v1")
    if "M" not in meta or "dt" not in meta:
        raise ValueError("tube header must carry M and dt")
    order = int(meta["M"])
    width = 2 * order + 2
    times, rows = [], []
    for line in lines[1:]:
        values = [float(tok) for tok in line.split(",")]
        if len(values) != width:
            raise ValueError(
                f"row has {len(values)} fields, header M={order} implies {width}"
            )
        times.append(values[0])
        rows.append(values[1:])
    tube = SpaceTimeTube(np.array(times), np.array(rows), order)
    if abs(tube.dt - float(meta["dt"])) > 1e-9 * tube.dt:
        raise ValueError("header dt disagrees with record times")
    return tube, meta


def write_schedule(path, schedule: MeltingSchedule, extra: Optional[dict] = None):
    fields = {"um0": _FMT % schedule.values[0]}
    for key, value in (extra or {}).items():
        fields[str(key)] = str(value)
    header = "# stefan-schedule v1, " + ", ".join(f"{k}={v}" for k, v in fields.items())
    slopes = np.append(schedule.slopes, schedule.slopes[-1])
    lines = [header]
    for t, u, du in zip(schedule.times, schedule.values, slopes):
        lines.append(_row([t, u, du]))
    write_text_atomic(path, "\n".join(lines) + "\n")


def read_schedule(path) -> tuple[MeltingSchedule, dict]:
    with open(path, encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    meta = _parse_header(lines[0], "stefan-schedule v1")
    data = np.array([[float(tok) for tok in line.split(",")] for line in lines[1:]])
    if data.shape[1] != 3:
        raise ValueError(f"schedule rows need 3 fields, got {data.shape[1]}")
    schedule = MeltingSchedule(data[:, 0], data[:, 1], data[:-1, 2])
    return schedule, meta


def write_snapshots(directory, tube: SpaceTimeTube, fields, meshes):
    """One ``x, y, v`` file per record under ``directory``."""
    os.makedirs(directory, exist_ok=True)
    for k, (values, mesh) in enumerate(zip(fields, meshes)):
        lines = ["# t=" + _FMT % tube.times[k]]
        for (x, y), v in zip(mesh.vertices, values):
            lines.append(_row([x, y, v]))
        write_text_atomic(os.path.join(directory, f"snapshot_{k:04d}.csv"),
                      "\n".join(lines) + "\n")


def export_plot_data(directory, tube: Optional[SpaceTimeTube] = None,
                     schedules: Optional[dict] = None, samples: int = 256):
    """Figure-ready data files: front outlines and temperature curves.

    Writes ``tube_outlines.csv`` (one ``# t=...`` block of ``x, y`` rows per
    record, sampled at ``samples`` equidistant angles) when a tube is given,
    and ``um_curves.csv`` / ``dum_curves.csv`` (column per labelled schedule,
    shared time grid) when schedules are given.  Returns the written paths.
    """
    os.makedirs(directory, exist_ok=True)
    written = []
    if tube is not None:
        phi = boundary_angles(samples)
        unit = np.column_stack([np.cos(phi), np.sin(phi)])
        lines = []
        for k in range(len(tube)):
            lines.append("# t=" + _FMT % tube.times[k])
            r = np.asarray(radius(tube.boundary(k), phi))
            for x, y in r[:, None] * unit:
                lines.append(_row([x, y]))
        path = os.path.join(directory, "tube_outlines.csv")
        write_text_atomic(path, "\n".join(lines) + "\n")
        written.append(path)
    if schedules:
        labels = list(schedules)
        grid = schedules[labels[0]].times
        for label in labels:
            if schedules[label].times.shape != grid.shape or \
                    np.max(np.abs(schedules[label].times - grid)) > 1e-9:
                raise ValueError(f"schedule {label!r} is not on the shared time grid")
        for name, pick in (("um_curves.csv", lambda s: s.values),
                           ("dum_curves.csv", lambda s: np.append(s.slopes, s.slopes[-1]))):
            lines = ["# t, " + ", ".join(labels)]
            columns = [pick(schedules[label]) for label in labels]
            for i, t in enumerate(grid):
                lines.append(_row([t, *(col[i] for col in columns)]))
            path = os.path.join(directory, name)
            write_text_atomic(path, "\n".join(lines) + "\n")
            written.append(path)
    return written


def write_boundary_svg(path, boundaries, samples: int = 256, size: int = 480):
    """Minimal SVG with one closed path per boundary curve (first dark, rest faded)."""
    phi = boundary_angles(samples)
    curves = []
    extent = 0.0
    for b in boundaries:
        r = np.asarray(radius(b, phi))
        pts = r[:, None] * np.column_stack([np.cos(phi), np.sin(phi)])
        extent = max(extent, float(np.max(np.abs(pts))))
        curves.append(pts)
    scale = (size / 2 - 10) / max(extent, 1e-12)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    ]
    for i, pts in enumerate(curves):
        xy = pts * scale * np.array([1.0, -1.0]) + size / 2
        d = "M " + " L ".join(f"{x:.2f} {y:.2f}" for x, y in xy) + " Z"
        shade = 20 + int(200 * i / max(1, len(curves) - 1)) if len(curves) > 1 else 20
        parts.append(
            f'<path d="{d}" fill="none" stroke="rgb({shade},{shade},{shade})" '
            f'stroke-width="1"/>'
        )
    parts.append("</svg>")
    write_text_atomic(path, "\n".join(parts) + "\n")


# --- run configuration ----------------------------------------------------

_MODES = ("forward", "invert", "perturb", "roundtrip")


@dataclass
class GeometryConfig:
    order: int = 7
    boundary_vertices: int = 128
    rings: int = 16
    initial_coeffs: Optional[list] = None
    seed: Optional[int] = None
    amplitude: float = 0.3


@dataclass
class TimeConfig:
    dt: float = 0.05
    final_time: float = 5.0


@dataclass
class ScheduleConfig:
    preset: Optional[str] = None
    times: Optional[list] = None
    values: Optional[list] = None


@dataclass
class NoiseConfig:
    delta: float = 0.0
    seed: int = 0


@dataclass
class InverseConfig:
    # Unset fields fall back to the geometry block.
    order: Optional[int] = None
    boundary_vertices: Optional[int] = None
    rings: Optional[int] = None
    um0: Optional[float] = None


@dataclass
class PathsConfig:
    input_tube: Optional[str] = None
    output_tube: Optional[str] = None
    output_schedule: Optional[str] = None
    snapshot_dir: Optional[str] = None
    plot_dir: Optional[str] = None
    report: Optional[str] = None


@dataclass
class RunConfig:
    mode: str
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    inverse: InverseConfig = field(default_factory=InverseConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)


def _require(condition: bool, path: str, message: str):
    if not condition:
        raise ConfigError(f"{path}: {message}")


def _build_section(cls, data, path: str):
    if data is None:
        return cls()
    _require(isinstance(data, dict), path, "must be a mapping")
    known = cls.__dataclass_fields__
    for key in data:
        _require(key in known, f"{path}.{key}", "unknown field")
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    """Validate a raw config mapping; errors name the offending field."""
    _require(isinstance(data, dict), "config", "must be a mapping")
    known = {"mode", "geometry", "time", "schedule", "noise", "inverse", "paths"}
    for key in data:
        _require(key in known, key, "unknown section")
    mode = data.get("mode")
    _require(mode in _MODES, "mode", f"must be one of {', '.join(_MODES)}")

    geometry = _build_section(GeometryConfig, data.get("geometry"), "geometry")
    time = _build_section(TimeConfig, data.get("time"), "time")
    schedule = _build_section(ScheduleConfig, data.get("schedule"), "schedule")
    noise = _build_section(NoiseConfig, data.get("noise"), "noise")
    inverse = _build_section(InverseConfig, data.get("inverse"), "inverse")
    paths = _build_section(PathsConfig, data.get("paths"), "paths")

    _require(geometry.order >= 0, "geometry.order", "must be nonnegative")
    _require(geometry.boundary_vertices >= 8, "geometry.boundary_vertices",
             "must be at least 8")
    _require(geometry.rings >= 2, "geometry.rings", "must be at least 2")
    _require(geometry.boundary_vertices > 2 * geometry.order + 1,
             "geometry.boundary_vertices",
             f"must exceed 2*order+1 = {2 * geometry.order + 1}")
    if geometry.initial_coeffs is not None:
        _require(len(geometry.initial_coeffs) == 2 * geometry.order + 1,
                 "geometry.initial_coeffs",
                 f"needs {2 * geometry.order + 1} values for order {geometry.order}")
    _require(geometry.amplitude >= 0.0, "geometry.amplitude", "must be nonnegative")

    _require(time.dt > 0.0, "time.dt", "must be positive")
    _require(time.final_time > 0.0, "time.final_time", "must be positive")
    steps = time.final_time / time.dt
    _require(abs(steps - round(steps)) <= 1e-9 * max(1.0, steps) and round(steps) >= 1,
             "time.final_time", "must be a whole number of dt steps")

    if schedule.preset is not None:
        _require(schedule.preset in SCHEDULE_PRESETS, "schedule.preset",
                 f"must be one of {', '.join(sorted(SCHEDULE_PRESETS))}")
    if schedule.times is not None or schedule.values is not None:
        _require(schedule.times is not None and schedule.values is not None,
                 "schedule.times", "tabulated schedules need both times and values")
        _require(len(schedule.times) == len(schedule.values) >= 2,
                 "schedule.values", "must match times and have length >= 2")

    _require(noise.delta >= 0.0, "noise.delta", "must be nonnegative")

    if inverse.order is not None:
        _require(inverse.order >= 0, "inverse.order", "must be nonnegative")
    inv_order = inverse.order if inverse.order is not None else geometry.order
    inv_l = inverse.boundary_vertices if inverse.boundary_vertices is not None \
        else geometry.boundary_vertices
    inv_rings = inverse.rings if inverse.rings is not None else geometry.rings
    _require(inv_l > 2 * inv_order + 1, "inverse.boundary_vertices",
             f"must exceed 2*order+1 = {2 * inv_order + 1}")
    _require(inv_rings >= 2, "inverse.rings", "must be at least 2")

    needs_schedule = mode in ("forward", "roundtrip")
    if needs_schedule:
        _require(schedule.preset is not None or schedule.times is not None,
                 "schedule", f"mode {mode!r} needs a preset or tabulated schedule")
    if mode == "forward":
        _require(paths.output_tube is not None, "paths.output_tube",
                 "required in forward mode")
    if mode == "perturb":
        _require(paths.input_tube is not None, "paths.input_tube",
                 "required in perturb mode")
        _require(paths.output_tube is not None, "paths.output_tube",
                 "required in perturb mode")
    if mode == "invert":
        _require(paths.input_tube is not None, "paths.input_tube",
                 "required in invert mode")
        _require(paths.output_schedule is not None, "paths.output_schedule",
                 "required in invert mode")
    if mode == "roundtrip":
        _require(paths.output_tube is not None, "paths.output_tube",
                 "required in roundtrip mode")
        _require(paths.output_schedule is not None, "paths.output_schedule",
                 "required in roundtrip mode")

    return RunConfig(mode, geometry, time, schedule, noise, inverse, paths)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: not valid JSON ({exc})") from exc
    return config_from_dict(data)
