"""Time-slice simulation of the melting front.

Each step freezes the domain, solves one Crank-Nicolson step of
``v_t - Lap v = -du_m/dt`` with ``v = 0`` on the frozen boundary, moves every
boundary sample radially by ``-dt * (dv/dn) * <n, e_r>``, refits the moved
radii to the truncated Fourier basis, and carries the interior temperature
onto the new mesh by exponential-kernel interpolation.  The recorded sequence
of boundary coefficient vectors approximates the space-time tube swept by the
front.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.linalg.lapack import dpocon
from scipy.spatial.distance import cdist

from . import fem
from .geometry import (
    FoldedMeshError,
    FourierBoundary,
    NonPositiveRadiusError,
    boundary_angles,
    boundary_normal,
    fit_fourier,
    generate_reference_mesh,
    map_mesh,
)

__all__ = [
    "MeltingSchedule",
    "SpaceTimeTube",
    "ForwardParams",
    "ForwardResult",
    "quadratic_melting",
    "cosine_melting",
    "SCHEDULE_PRESETS",
    "advance_boundary",
    "kernel_interpolate",
    "simulate_forward",
]

log = logging.getLogger(__name__)

_KERNEL_COND_LIMIT = 1e12
_SLOPE_TOL = 1e-12


def quadratic_melting(t):
    """Interface temperature ``(t - 5/2)^2 / 20``: falls to 0 at t = 5/2, then rises."""
    t = np.asarray(t, dtype=float)
    return (t - 2.5) ** 2 / 20.0


def cosine_melting(t):
    """Interface temperature ``(cos 2t - 1) / 20``: oscillates in [-0.1, 0]."""
    t = np.asarray(t, dtype=float)
    return (np.cos(2.0 * t) - 1.0) / 20.0


SCHEDULE_PRESETS: dict[str, Callable] = {
    "quadratic": quadratic_melting,
    "cosine": cosine_melting,
}


@dataclass(frozen=True, eq=False)
class MeltingSchedule:
    """Piecewise-linear interface temperature on a uniform time grid.

    ``values[k]`` is the temperature at ``times[k]``; ``slopes[k]`` is the
    rate on ``[times[k], times[k+1]]`` and must equal the secant
    ``(values[k+1] - values[k]) / dt``.
    """

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    slopes: np.ndarray = field(repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        slopes = np.asarray(self.slopes, dtype=float)
        if times.ndim != 1 or times.shape[0] < 2:
            raise ValueError("need at least two breakpoints")
        if values.shape != times.shape or slopes.shape != (times.shape[0] - 1,):
            raise ValueError("inconsistent times/values/slopes lengths")
        steps = np.diff(times)
        dt = steps[0]
        if dt <= 0.0 or np.max(np.abs(steps - dt)) > 1e-9 * dt:
            raise ValueError("breakpoints must form a uniform increasing grid")
        secant = np.diff(values) / dt
        scale = max(1.0, float(np.max(np.abs(secant))))
        if np.max(np.abs(secant - slopes)) > _SLOPE_TOL * scale:
            raise ValueError("slopes are inconsistent with the values")
        for name, arr in (("times", times), ("values", values), ("slopes", slopes)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def num_steps(self) -> int:
        return self.times.shape[0] - 1

    @classmethod
    def from_function(cls, fn: Callable, dt: float, final_time: float) -> "MeltingSchedule":
        """Sample ``fn`` on the grid; slopes are the secants per interval."""
        steps = _count_steps(dt, final_time)
        times = dt * np.arange(steps + 1)
        values = np.asarray(fn(times), dtype=float)
        return cls(times, values, np.diff(values) / dt)

    @classmethod
    def from_values(cls, times, values) -> "MeltingSchedule":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls(times, values, np.diff(values) / (times[1] - times[0]))

    @classmethod
    def from_slopes(cls, slopes, dt: float, initial_value: float = 0.0) -> "MeltingSchedule":
        """Integrate per-interval rates up from ``initial_value``."""
        slopes = np.asarray(slopes, dtype=float)
        times = dt * np.arange(slopes.shape[0] + 1)
        values = initial_value + dt * np.concatenate([[0.0], np.cumsum(slopes)])
        return cls(times, values, slopes)


@dataclass(frozen=True, eq=False)
class SpaceTimeTube:
    """Time-ordered boundary records ``(t_k, coefficient row)`` of shared order."""

    times: np.ndarray = field(repr=False)   # (K+1,)
    coeffs: np.ndarray = field(repr=False)  # (K+1, 2M+1)
    order: int = 0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if times.ndim != 1 or times.shape[0] < 1:
            raise ValueError("need at least one record")
        if coeffs.shape != (times.shape[0], 2 * self.order + 1):
            raise ValueError(
                f"coefficient block {coeffs.shape} does not match "
                f"{times.shape[0]} records of order {self.order}"
            )
        if times.shape[0] > 1:
            steps = np.diff(times)
            if np.min(steps) <= 0.0:
                raise ValueError("record times must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
                raise ValueError("record times must be uniformly spaced")
        times.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "coeffs", coeffs)

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def num_steps(self) -> int:
        return len(self) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def boundary(self, k: int) -> FourierBoundary:
        return FourierBoundary(self.order, self.coeffs[k])


@dataclass(frozen=True, eq=False)
class ForwardParams:
    """Configuration of one forward run."""

    dt: float
    final_time: float
    order: int
    boundary_vertices: int
    rings: int
    initial_boundary: FourierBoundary
    schedule: MeltingSchedule
    initial_field: Optional[Callable] = None  # points (N, 2) -> values (N,)
    record_fields: bool = False

    def __post_init__(self):
        steps = _count_steps(self.dt, self.final_time)
        if self.boundary_vertices <= 2 * self.order + 1:
            raise ValueError(
                f"boundary_vertices must exceed 2*order+1 = {2 * self.order + 1}"
            )
        if abs(self.schedule.dt - self.dt) > 1e-9 * self.dt:
            raise ValueError("schedule grid step does not match dt")
        if self.schedule.num_steps < steps:
            raise ValueError(
                f"schedule covers {self.schedule.num_steps} steps, run needs {steps}"
            )

    @property
    def num_steps(self) -> int:
        return _count_steps(self.dt, self.final_time)


@dataclass(frozen=True, eq=False)
class ForwardResult:
    """Output of :func:`simulate_forward`."""

    tube: SpaceTimeTube
    fields: Optional[list] = None                      # per-record nodal values
    front_speed_range: Optional[np.ndarray] = None     # (K, 2) extrema of -dv/dn


def _count_steps(dt: float, final_time: float) -> int:
    if dt <= 0.0 or final_time <= 0.0:
        raise ValueError(f"dt and final_time must be positive, got {dt}, {final_time}")
    steps = final_time / dt
    rounded = round(steps)
    if rounded < 1 or abs(steps - rounded) > 1e-9 * max(1.0, steps):
        raise ValueError(f"final_time/dt = {steps} is not a whole number of steps")
    return rounded


def advance_boundary(boundary: FourierBoundary, flux, dt: float,
                     order: int | None = None) -> FourierBoundary:
    """Move the front one step and refit it to the truncated basis.

    Each boundary sample moves radially: ``r_i <- r_i - dt * flux_i *
    <n, e_r>_i`` at the ``len(flux)`` equidistant angles; the updated radii
    are refit (FFT truncation = least squares) to ``order`` coefficients.
    """
    flux = np.asarray(flux, dtype=float)
    phi = boundary_angles(flux.shape[0])
    r = np.asarray(boundary.radii(flux.shape[0]))
    _, factor = boundary_normal(boundary, phi)
    updated = r - dt * flux * factor
    if np.min(updated) <= 0.0:
        raise NonPositiveRadiusError(
            f"front collapsed: min updated radius {np.min(updated):.3e}"
        )
    return fit_fourier(updated, boundary.order if order is None else order)


def kernel_interpolate(old_vertices, old_values, new_vertices,
                       boundary=None) -> np.ndarray:
    """Carry nodal values from one vertex set to another.

    Scattered-data interpolation with the exponential kernel
    ``exp(-||x - y||)``: solve the old-vertex Gram system, evaluate at the
    new vertices.  If the Gram matrix is numerically singular or its
    estimated condition number exceeds 1e12, a diagonal jitter of
    ``1e-10 * trace/L`` is added (reported at warning level).  When
    ``boundary`` indices are given, the interpolated values there are reset
    to exactly zero for Dirichlet consistency.
    """
    old = np.asarray(old_vertices, dtype=float)
    new = np.asarray(new_vertices, dtype=float)
    values = np.asarray(old_values, dtype=float)
    gram = np.exp(-cdist(old, old))
    anorm = float(np.max(np.sum(np.abs(gram), axis=0)))
    factor = None
    try:
        factor = cho_factor(gram, lower=True)
        rcond, _ = dpocon(factor[0], anorm, uplo=b"L")
        if rcond <= 0 or 1.0 / rcond > _KERNEL_COND_LIMIT:
            log.warning(
                "kernel system condition ~%.2e exceeds %.1e; regularizing",
                1.0 / max(rcond, 1e-300), _KERNEL_COND_LIMIT,
            )
            factor = None
    except np.linalg.LinAlgError:
        log.warning("kernel system not positive definite; regularizing")
    if factor is None:
        jitter = 1e-10 * np.trace(gram) / gram.shape[0]
        gram[np.diag_indices_from(gram)] += jitter
        factor = cho_factor(gram, lower=True)
    weights = cho_solve(factor, values)
    out = np.exp(-cdist(new, old)) @ weights
    if boundary is not None:
        out[np.asarray(boundary)] = 0.0
    return out


def simulate_forward(params: ForwardParams) -> ForwardResult:
    """Run the time-slice front-tracking loop and record the swept tube.

    The initial temperature (relative to the interface value) must vanish on
    the initial front; it is projected to nodal values on the mapped mesh
    with the boundary entries forced to zero.  Mesh folding or front
    collapse aborts with the failing step index attached.
    """
    ref = generate_reference_mesh(params.boundary_vertices, params.rings)
    steps = params.num_steps
    dt = params.dt

    boundary = params.initial_boundary
    mesh = map_mesh(boundary, ref, 0)
    if params.initial_field is None:
        v = np.zeros(ref.num_vertices)
    else:
        v = np.asarray(params.initial_field(mesh.vertices), dtype=float).copy()
        v[ref.boundary] = 0.0

    records = [boundary.coeffs]
    fields = [v.copy()] if params.record_fields else None
    speed_range = np.empty((steps, 2))

    for k in range(steps):
        try:
            stiffness = fem.assemble_stiffness(mesh)
            mass = fem.assemble_mass(mesh)
            load = fem.assemble_load(mesh)
            v_slice = fem.crank_nicolson_step(
                stiffness, mass, load, v, params.schedule.slopes[k], dt, ref.boundary
            )
            flux = fem.boundary_flux(mesh, v_slice, boundary)
            speed_range[k] = fem.rayleigh_taylor_check(flux)
            boundary = advance_boundary(boundary, flux, dt, params.order)
            next_mesh = map_mesh(boundary, ref, k + 1)
            v = kernel_interpolate(
                mesh.vertices, v_slice, next_mesh.vertices, ref.boundary
            )
            mesh = next_mesh
        except (NonPositiveRadiusError, FoldedMeshError) as exc:
            raise type(exc)(f"step {k}: {exc}") from exc
        log.debug("step %d: front speed in [%.3e, %.3e]", k, *speed_range[k])
        records.append(boundary.coeffs)
        if fields is not None:
            fields.append(v.copy())

    tube = SpaceTimeTube(dt * np.arange(steps + 1), np.vstack(records), params.order)
    return ForwardResult(tube, fields, speed_range)
