"""Moving-mesh finite elements for a melting front in 2D.

The forward solver evolves a star-shaped liquid region whose interface
temperature varies in time; the front is tracked through the Fourier
coefficients of its radial function.  The inverse solver recovers that
interface-temperature trajectory from an observed front, including a noise
model for synthetic measurements.
"""

from .geometry import (
    FoldedMeshError,
    FourierBoundary,
    MappedMesh,
    NonPositiveRadiusError,
    ReferenceMesh,
    boundary_angles,
    boundary_normal,
    enclosed_area,
    fit_fourier,
    generate_reference_mesh,
    map_mesh,
    map_point,
    radius,
    radius_derivative,
    random_star_boundary,
    rotate_boundary,
)
from .fem import (
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    boundary_flux,
    crank_nicolson_step,
    rayleigh_taylor_check,
)
from .forward import (
    ForwardParams,
    ForwardResult,
    MeltingSchedule,
    SCHEDULE_PRESETS,
    SpaceTimeTube,
    advance_boundary,
    cosine_melting,
    kernel_interpolate,
    quadratic_melting,
    simulate_forward,
)
from .inverse import (
    DegenerateSensitivityError,
    InverseParams,
    InverseResult,
    ObservedTube,
    add_noise,
    estimate_alpha,
    reconstruct_schedule,
    split_step,
)

__version__ = "0.1.0"
