"""Command-line surface: forward runs, noise injection, reconstruction.

Four modes share one configuration schema (JSON file plus per-field flags):

* ``forward``    simulate the front and write a tube file,
* ``perturb``    add coefficient noise to a tube file,
* ``invert``     reconstruct the temperature schedule from a tube file,
* ``roundtrip``  forward + perturb + invert + error report against the truth.

plus ``export`` to turn existing tube/schedule files into plot-ready data.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fileio
from .fileio import ConfigError, RunConfig
from .forward import (
    SCHEDULE_PRESETS,
    ForwardParams,
    MeltingSchedule,
    simulate_forward,
)
from .geometry import (
    FourierBoundary,
    generate_reference_mesh,
    map_mesh,
    random_star_boundary,
)
from .inverse import InverseParams, ObservedTube, add_noise, reconstruct_schedule

__all__ = ["run", "main"]


def _schedule_from_config(config: RunConfig) -> MeltingSchedule:
    block = config.schedule
    if block.preset is not None:
        return MeltingSchedule.from_function(
            SCHEDULE_PRESETS[block.preset], config.time.dt, config.time.final_time
        )
    return MeltingSchedule.from_values(block.times, block.values)


def _initial_boundary(config: RunConfig) -> FourierBoundary:
    geo = config.geometry
    if geo.initial_coeffs is not None:
        return FourierBoundary(geo.order, np.asarray(geo.initial_coeffs, dtype=float))
    if geo.seed is not None:
        return random_star_boundary(geo.order, geo.seed, geo.amplitude)
    return FourierBoundary.circle(1.0, geo.order)


def _forward_params(config: RunConfig, record_fields: bool) -> ForwardParams:
    return ForwardParams(
        dt=config.time.dt,
        final_time=config.time.final_time,
        order=config.geometry.order,
        boundary_vertices=config.geometry.boundary_vertices,
        rings=config.geometry.rings,
        initial_boundary=_initial_boundary(config),
        schedule=_schedule_from_config(config),
        record_fields=record_fields,
    )


def _inverse_params(config: RunConfig, default_um0: float = 0.0) -> InverseParams:
    geo, inv = config.geometry, config.inverse
    return InverseParams(
        order=inv.order if inv.order is not None else geo.order,
        boundary_vertices=inv.boundary_vertices
        if inv.boundary_vertices is not None else geo.boundary_vertices,
        rings=inv.rings if inv.rings is not None else geo.rings,
        um0=inv.um0 if inv.um0 is not None else default_um0,
    )


def _with_suffix(path: str, tag: str) -> str:
    stem, dot, ext = path.rpartition(".")
    if not dot:
        return path + tag
    return f"{stem}{tag}.{ext}"


def _write_residuals(path, schedule, residuals):
    lines = ["# stefan-residuals v1"]
    for t, r in zip(schedule.times[:-1], residuals):
        lines.append(f"{t:.17g}, {r:.17g}")
    fileio.write_text_atomic(path, "\n".join(lines) + "\n")


def _run_forward(config: RunConfig) -> dict:
    params = _forward_params(config, record_fields=config.paths.snapshot_dir is not None)
    result = simulate_forward(params)
    extra = {"preset": config.schedule.preset or "tabulated"}
    if config.geometry.seed is not None:
        extra["boundary_seed"] = config.geometry.seed
    fileio.write_tube(config.paths.output_tube, result.tube, extra)
    artifacts = {"tube": config.paths.output_tube}
    if config.paths.snapshot_dir is not None:
        ref = generate_reference_mesh(
            config.geometry.boundary_vertices, config.geometry.rings
        )
        meshes = [map_mesh(result.tube.boundary(k), ref, k)
                  for k in range(len(result.tube))]
        fileio.write_snapshots(
            config.paths.snapshot_dir, result.tube, result.fields, meshes
        )
        artifacts["snapshots"] = config.paths.snapshot_dir
    if config.paths.plot_dir is not None:
        artifacts["plots"] = fileio.export_plot_data(
            config.paths.plot_dir, tube=result.tube,
            samples=config.geometry.boundary_vertices,
        )
    artifacts["records"] = len(result.tube)
    return artifacts


def _run_perturb(config: RunConfig) -> dict:
    tube, _ = fileio.read_tube(config.paths.input_tube)
    observed = add_noise(tube, config.noise.delta, config.noise.seed)
    fileio.write_tube(
        config.paths.output_tube, observed.tube,
        {"delta": repr(config.noise.delta), "seed": config.noise.seed},
    )
    return {"tube": config.paths.output_tube, "records": len(observed.tube)}


def _run_invert(config: RunConfig) -> dict:
    tube, meta = fileio.read_tube(config.paths.input_tube)
    observed = ObservedTube(
        tube, float(meta.get("delta", 0.0)),
        int(meta["seed"]) if "seed" in meta else None,
        source=str(config.paths.input_tube),
    )
    params = _inverse_params(config, default_um0=0.0)
    result = reconstruct_schedule(observed, params)
    fileio.write_schedule(config.paths.output_schedule, result.schedule)
    residual_path = _with_suffix(config.paths.output_schedule, ".residuals")
    _write_residuals(residual_path, result.schedule, result.residuals)
    return {
        "schedule": config.paths.output_schedule,
        "residuals": residual_path,
        "steps": result.schedule.num_steps,
    }


def _relative_l2(recovered: np.ndarray, truth: np.ndarray) -> float:
    scale = float(np.linalg.norm(truth))
    return float(np.linalg.norm(recovered - truth)) / max(scale, 1e-300)


def _run_roundtrip(config: RunConfig) -> dict:
    params = _forward_params(config, record_fields=False)
    result = simulate_forward(params)
    fileio.write_tube(config.paths.output_tube, result.tube,
                      {"preset": config.schedule.preset or "tabulated"})

    observed = add_noise(result.tube, config.noise.delta, config.noise.seed)
    noisy_path = _with_suffix(config.paths.output_tube, ".noisy")
    fileio.write_tube(noisy_path, observed.tube,
                      {"delta": repr(config.noise.delta), "seed": config.noise.seed})

    truth = params.schedule
    inv_params = _inverse_params(config, default_um0=float(truth.values[0]))
    inv_result = reconstruct_schedule(observed, inv_params)
    fileio.write_schedule(config.paths.output_schedule, inv_result.schedule)

    recovered = inv_result.schedule
    metrics = {
        "max_error_um": float(np.max(np.abs(recovered.values - truth.values))),
        "rel_l2_error_um": _relative_l2(recovered.values, truth.values),
        "max_error_dum": float(np.max(np.abs(recovered.slopes - truth.slopes))),
        "rel_l2_error_dum": _relative_l2(recovered.slopes, truth.slopes),
    }
    report_path = config.paths.report or \
        _with_suffix(config.paths.output_schedule, ".report")
    lines = ["# roundtrip report",
             f"delta={config.noise.delta!r}",
             f"noise_seed={config.noise.seed}"]
    lines += [f"{key}={value:.17g}" for key, value in metrics.items()]
    fileio.write_text_atomic(report_path, "\n".join(lines) + "\n")

    if config.paths.plot_dir is not None:
        fileio.export_plot_data(
            config.paths.plot_dir, tube=observed.tube,
            schedules={"true": truth, "recovered": recovered},
        )
    return {
        "tube": config.paths.output_tube,
        "noisy_tube": noisy_path,
        "schedule": config.paths.output_schedule,
        "report": report_path,
        **metrics,
    }


_RUNNERS = {
    "forward": _run_forward,
    "perturb": _run_perturb,
    "invert": _run_invert,
    "roundtrip": _run_roundtrip,
}


def run(config: RunConfig) -> dict:
    """Execute one configured run; returns written artifacts and metrics."""
    return _RUNNERS[config.mode](config)


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--dt", type=float, help="time step")
    parser.add_argument("--T", type=float, dest="final_time", help="final time")
    parser.add_argument("--M", type=int, dest="order", help="Fourier order M")
    parser.add_argument("--L", type=int, dest="boundary_vertices",
                        help="boundary vertex count")
    parser.add_argument("--rings", type=int, help="radial mesh layers")
    parser.add_argument("--delta", type=float, help="relative noise level")
    parser.add_argument("--seed", type=int,
                        help="noise seed (initial-shape seed in forward mode)")
    parser.add_argument("--preset", choices=sorted(SCHEDULE_PRESETS),
                        help="named melting-temperature schedule")
    parser.add_argument("--um0", type=float, help="initial temperature offset")
    parser.add_argument("--out", help="primary output path")
    parser.add_argument("--input", help="input tube file")
    parser.add_argument("--boundary-seed", type=int,
                        help="seed for the random initial shape")
    parser.add_argument("--amplitude", type=float,
                        help="amplitude of the random initial shape")
    parser.add_argument("--snapshots", help="directory for field snapshots")
    parser.add_argument("--plots", help="directory for plot-data export")


def _overrides_to_config(mode: str, args: argparse.Namespace) -> dict:
    data: dict = {"mode": mode}
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            data = json.load(handle)
            if not isinstance(data, dict):
                raise ConfigError("config: must be a JSON object")
        data["mode"] = mode

    def block(name):
        section = data.setdefault(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"{name}: must be a mapping")
        return section

    if args.dt is not None:
        block("time")["dt"] = args.dt
    if args.final_time is not None:
        block("time")["final_time"] = args.final_time
    if args.order is not None:
        block("geometry")["order"] = args.order
    if args.boundary_vertices is not None:
        block("geometry")["boundary_vertices"] = args.boundary_vertices
    if args.rings is not None:
        block("geometry")["rings"] = args.rings
    if args.boundary_seed is not None:
        block("geometry")["seed"] = args.boundary_seed
    if args.amplitude is not None:
        block("geometry")["amplitude"] = args.amplitude
    if args.delta is not None:
        block("noise")["delta"] = args.delta
    if args.seed is not None:
        if mode == "forward":
            block("geometry")["seed"] = args.seed
        else:
            block("noise")["seed"] = args.seed
    if args.preset is not None:
        block("schedule")["preset"] = args.preset
    if args.um0 is not None:
        block("inverse")["um0"] = args.um0
    if args.input is not None:
        block("paths")["input_tube"] = args.input
    if args.snapshots is not None:
        block("paths")["snapshot_dir"] = args.snapshots
    if args.plots is not None:
        block("paths")["plot_dir"] = args.plots
    if args.out is not None:
        paths = block("paths")
        if mode in ("forward", "perturb"):
            paths["output_tube"] = args.out
        elif mode == "invert":
            paths["output_schedule"] = args.out
        else:  # roundtrip
            paths["output_schedule"] = args.out
            paths.setdefault("output_tube", _with_suffix(args.out, ".tube"))
    return data


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="meltfront",
        description="Simulate a melting front with time-varying interface "
                    "temperature, or reconstruct that temperature from an "
                    "observed front.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, helptext in (
        ("forward", "simulate a front and write a tube file"),
        ("perturb", "add coefficient noise to a tube file"),
        ("invert", "reconstruct the temperature schedule from a tube file"),
        ("roundtrip", "forward + perturb + invert + error report"),
    ):
        _add_common_flags(sub.add_parser(mode, help=helptext))
    export = sub.add_parser("export", help="plot-ready data from existing files")
    export.add_argument("--input", required=True, help="tube file")
    export.add_argument("--schedule", action="append", default=[],
                        help="label=path schedule file (repeatable)")
    export.add_argument("--out", required=True, help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.mode == "export":
            tube, _ = fileio.read_tube(args.input)
            schedules = {}
            for item in args.schedule:
                label, _, path = item.partition("=")
                if not path:
                    raise ConfigError(f"--schedule {item!r}: expected label=path")
                schedules[label], _ = fileio.read_schedule(path)
            written = fileio.export_plot_data(args.out, tube=tube,
                                              schedules=schedules or None)
            for path in written:
                print(path)
            return 0
        config = fileio.config_from_dict(_overrides_to_config(args.mode, args))
        artifacts = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numeric errors carry their step index
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for key, value in artifacts.items():
        print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
