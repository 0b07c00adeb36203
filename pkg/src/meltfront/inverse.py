"""Recovery of the interface-temperature trajectory from an observed front.

Per time step the one-step solve is split into a part driven by the current
interior temperature and a part driven by a unit temperature rate.  Both
parts produce a boundary flux; matching the observed next boundary against
the radial update rule then leaves a single scalar unknown per step (the
temperature rate on that interval), solved in the least-squares sense over
all boundary vertices.  Summing the recovered rates gives the temperature
trajectory up to its (prescribed) initial value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fem
from .forward import MeltingSchedule, SpaceTimeTube, kernel_interpolate
from .geometry import (
    FourierBoundary,
    NonPositiveRadiusError,
    boundary_angles,
    boundary_normal,
    generate_reference_mesh,
    map_mesh,
)

__all__ = [
    "DegenerateSensitivityError",
    "ObservedTube",
    "InverseParams",
    "InverseResult",
    "split_step",
    "radial_update_equations",
    "scalar_alpha_lstsq",
    "estimate_alpha",
    "add_noise",
    "reconstruct_schedule",
]

log = logging.getLogger(__name__)


class DegenerateSensitivityError(RuntimeError):
    """The unit-rate source has no observable effect on the front."""


@dataclass(frozen=True, eq=False)
class ObservedTube:
    """A (possibly noisy) front observation with its provenance."""

    tube: SpaceTimeTube
    delta: float = 0.0
    seed: Optional[int] = None
    source: Optional[str] = None

    def __post_init__(self):
        if self.delta < 0.0:
            raise ValueError(f"noise level must be nonnegative, got {self.delta}")


@dataclass(frozen=True)
class InverseParams:
    """Discretization of the reconstruction solver.

    Deliberately independent of the data's discretization: the observed
    coefficients are truncated (or zero-padded) to ``order`` and the solver
    runs on its own mesh, so reconstructions can avoid testing on the exact
    discretization that generated the data.
    """

    order: int
    boundary_vertices: int
    rings: int
    um0: float = 0.0

    def __post_init__(self):
        if self.boundary_vertices <= 2 * self.order + 1:
            raise ValueError(
                f"boundary_vertices must exceed 2*order+1 = {2 * self.order + 1}"
            )


@dataclass(frozen=True, eq=False)
class InverseResult:
    """Reconstructed schedule plus the per-step least-squares residuals."""

    schedule: MeltingSchedule
    residuals: np.ndarray = field(repr=False)


def split_step(stiffness, mass, load, v, dt: float, boundary) -> tuple[np.ndarray, np.ndarray]:
    """Split one implicit step into state-driven and source-driven parts.

    ``v1`` solves ``(M + dt/2 A) v1 = (M - dt/2 A) v`` and ``v2`` solves
    ``(M + dt/2 A) v2 = -dt f``, both with boundary values eliminated to
    zero, so the full step with rate ``alpha`` is exactly ``v1 + alpha*v2``.
    One factorization serves both solves.
    """
    v = np.asarray(v, dtype=float).copy()
    solver = fem.InteriorSolver(stiffness, mass, dt, boundary, v.shape[0])
    v[solver.boundary] = 0.0
    v1 = solver.solve_interior(solver.explicit @ v)
    v2 = solver.solve_interior(-dt * load)
    return v1, v2


def scalar_alpha_lstsq(c, b, eps: float = 0.0) -> float:
    """Least-squares solution of the overdetermined scalar system c*alpha = b."""
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = float(np.dot(c, c))
    if denom <= eps:
        raise DegenerateSensitivityError(
            f"sensitivity norm {denom:.3e} below threshold {eps:.3e}"
        )
    return float(np.dot(c, b) / denom)


def _band_project(samples: np.ndarray, order: int) -> np.ndarray:
    """Projection onto the trigonometric modes |l| <= order on the sample grid."""
    spec = np.fft.rfft(samples)
    spec[order + 1:] = 0.0
    return np.fft.irfft(spec, n=samples.shape[0])


def radial_update_equations(flux1, flux2, boundary: FourierBoundary,
                            desired_radii, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex scalar equations ``c_i * alpha = b_i`` for the step rate.

    The radial update moves sample ``i`` by ``-dt * flux_i * <n, e_r>_i`` and
    is then truncated to the retained Fourier band, so the flux terms are
    projected onto that band before matching:

        c_i = P(flux2 * <n, e_r>)_i * r_i
        b_i = [ (r_i - r_desired_i)/dt - P(flux1 * <n, e_r>)_i ] * r_i

    Both sides of the underlying vector equation point along the radial
    direction scaled by ``r_i``; projecting onto it loses nothing.
    """
    flux1 = np.asarray(flux1, dtype=float)
    flux2 = np.asarray(flux2, dtype=float)
    desired = np.asarray(desired_radii, dtype=float)
    n = flux2.shape[0]
    phi = boundary_angles(n)
    r = np.asarray(boundary.radii(n))
    _, factor = boundary_normal(boundary, phi)
    g1 = _band_project(flux1 * factor, boundary.order)
    g2 = _band_project(flux2 * factor, boundary.order)
    c = g2 * r
    b = ((r - desired) / dt - g1) * r
    return c, b


def estimate_alpha(flux1, flux2, boundary: FourierBoundary,
                   desired_radii, dt: float) -> float:
    """Temperature rate that best moves the front onto the desired radii.

    Raises :class:`DegenerateSensitivityError` when the source flux is too
    small to identify anything (threshold ``1e-14 * L * max(1, a_0^2)``).
    """
    c, b = radial_update_equations(flux1, flux2, boundary, desired_radii, dt)
    eps = 1e-14 * c.shape[0] * max(1.0, boundary.a0 ** 2)
    return scalar_alpha_lstsq(c, b, eps)


def add_noise(tube: SpaceTimeTube, delta: float, seed: int) -> ObservedTube:
    """Synthetic measurement noise on the boundary coefficients.

    Every coefficient of every record except the initial one is perturbed by
    an independent zero-mean Gaussian draw with standard deviation
    ``delta * a_{k,0}`` (the record's mean radius).  A record that loses
    radial positivity is redrawn up to ten times.  Deterministic for a fixed
    seed.
    """
    if delta < 0.0:
        raise ValueError(f"noise level must be nonnegative, got {delta}")
    if delta == 0.0:
        return ObservedTube(tube, 0.0, seed)
    rng = np.random.default_rng(seed)
    noisy = np.array(tube.coeffs)
    for k in range(1, len(tube)):
        scale = delta * tube.coeffs[k, tube.order]
        for attempt in range(10):
            draw = tube.coeffs[k] + rng.normal(0.0, scale, 2 * tube.order + 1)
            try:
                FourierBoundary(tube.order, draw)
            except NonPositiveRadiusError:
                continue
            noisy[k] = draw
            break
        else:
            raise NonPositiveRadiusError(
                f"record {k}: no positive boundary after 10 noise draws"
            )
    out = SpaceTimeTube(tube.times, noisy, tube.order)
    return ObservedTube(out, delta, seed)


def reconstruct_schedule(observed: ObservedTube, params: InverseParams) -> InverseResult:
    """Walk the observed tube and recover the temperature rate per step.

    Each step builds its domain from the *observed* coefficients (never a
    propagated front), splits the implicit solve, estimates the rate against
    the next observed boundary, then propagates the interior temperature
    with that rate and carries it onto the next observed domain by kernel
    interpolation.  The temperature trajectory is the running sum of the
    rates starting from ``params.um0``.
    """
    tube = observed.tube
    if len(tube) < 2:
        raise ValueError("need at least two records to reconstruct anything")
    dt = tube.dt
    ref = generate_reference_mesh(params.boundary_vertices, params.rings)
    L = ref.num_boundary
    sections = [tube.boundary(k).truncated(params.order) for k in range(len(tube))]

    v = np.zeros(ref.num_vertices)
    alphas = np.empty(tube.num_steps)
    residuals = np.empty(tube.num_steps)
    mesh = map_mesh(sections[0], ref, 0)
    for k in range(tube.num_steps):
        try:
            stiffness = fem.assemble_stiffness(mesh)
            mass = fem.assemble_mass(mesh)
            load = fem.assemble_load(mesh)
            v1, v2 = split_step(stiffness, mass, load, v, dt, ref.boundary)
            flux1 = fem.boundary_flux(mesh, v1, sections[k])
            flux2 = fem.boundary_flux(mesh, v2, sections[k])
            desired = sections[k + 1].radii(L)
            c, b = radial_update_equations(flux1, flux2, sections[k], desired, dt)
            eps = 1e-14 * L * max(1.0, sections[k].a0 ** 2)
            alphas[k] = scalar_alpha_lstsq(c, b, eps)
            residuals[k] = float(np.linalg.norm(c * alphas[k] - b) / np.sqrt(L))
            next_mesh = map_mesh(sections[k + 1], ref, k + 1)
            v = kernel_interpolate(
                mesh.vertices, v1 + alphas[k] * v2, next_mesh.vertices, ref.boundary
            )
            mesh = next_mesh
        except (NonPositiveRadiusError, DegenerateSensitivityError, RuntimeError) as exc:
            raise type(exc)(f"step {k}: {exc}") from exc
        log.debug("step %d: rate %.6f, residual %.3e", k, alphas[k], residuals[k])

    schedule = MeltingSchedule.from_slopes(alphas, dt, params.um0)
    return InverseResult(schedule, residuals)
