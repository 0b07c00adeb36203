"""Star-shaped boundary curves and the moving disc mesh underneath them.

A closed star-shaped curve is stored as the ``2M + 1`` real coefficients of a
truncated Fourier series of its radial function,

    r(phi) = a_0 + sum_{l=1..M} [ a_l cos(l phi) + a_{-l} sin(l phi) ],

laid out as ``[a_{-M}, ..., a_{-1}, a_0, a_1, ..., a_M]`` (sine coefficients
first, indexed by negative l).  The unit disc carries a fixed triangulation
whose boundary vertices sit at equidistant polar angles; scaling every vertex
by ``r(phi)`` transports the mesh onto the physical domain without touching
its topology, and keeps the boundary vertices equidistant in angle so that
radial samples can be converted to coefficients by an FFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NonPositiveRadiusError",
    "FoldedMeshError",
    "FourierBoundary",
    "ReferenceMesh",
    "MappedMesh",
    "boundary_angles",
    "radius",
    "radius_derivative",
    "map_point",
    "boundary_normal",
    "fit_fourier",
    "rotate_boundary",
    "enclosed_area",
    "random_star_boundary",
    "generate_reference_mesh",
    "map_mesh",
    "triangle_signed_areas",
]


class NonPositiveRadiusError(ValueError):
    """The radial function dips to zero or below at the sampled angles."""


class FoldedMeshError(RuntimeError):
    """The radial map inverted at least one triangle of the mesh."""


def boundary_angles(n: int) -> np.ndarray:
    """Equidistant polar angles ``2*pi*i/n``, i = 0..n-1, counterclockwise."""
    return 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True, eq=False)
class FourierBoundary:
    """Truncated Fourier representation of a star-shaped boundary curve.

    ``coeffs`` has length ``2*order + 1`` in the layout
    ``[a_{-M}, ..., a_{-1}, a_0, a_1, ..., a_M]``.  Validity (finite
    coefficients, strictly positive sampled radius) is checked at
    construction; the positivity check samples ``max(64, 4*order + 4)``
    equidistant angles, and mesh-facing operations re-check at the mesh's
    own boundary resolution.
    """

    order: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be nonnegative, got {self.order}")
        coeffs = np.asarray(self.coeffs, dtype=float).copy()
        if coeffs.shape != (2 * self.order + 1,):
            raise ValueError(
                f"expected {2 * self.order + 1} coefficients for order "
                f"{self.order}, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        check = self.radii(max(64, 4 * self.order + 4))
        if np.min(check) <= 0.0:
            raise NonPositiveRadiusError(
                f"radial function is not positive (min sampled radius "
                f"{np.min(check):.3e})"
            )

    @property
    def a0(self) -> float:
        """Mean radius."""
        return float(self.coeffs[self.order])

    @property
    def cos_coeffs(self) -> np.ndarray:
        """[a_1, ..., a_M]."""
        return self.coeffs[self.order + 1:]

    @property
    def sin_coeffs(self) -> np.ndarray:
        """[a_{-1}, ..., a_{-M}]."""
        return self.coeffs[self.order - 1::-1] if self.order else self.coeffs[:0]

    def radii(self, n: int) -> np.ndarray:
        """Radius sampled at the ``n`` equidistant angles ``2*pi*i/n``."""
        return radius(self, boundary_angles(n))

    def truncated(self, order: int) -> "FourierBoundary":
        """Same curve re-expressed at another order (truncate or zero-pad)."""
        out = np.zeros(2 * order + 1)
        keep = min(order, self.order)
        out[order - keep:order + keep + 1] = \
            self.coeffs[self.order - keep:self.order + keep + 1]
        return FourierBoundary(order, out)

    @classmethod
    def circle(cls, radius_value: float = 1.0, order: int = 0) -> "FourierBoundary":
        coeffs = np.zeros(2 * order + 1)
        coeffs[order] = radius_value
        return cls(order, coeffs)


def radius(boundary: FourierBoundary, phi) -> np.ndarray | float:
    """Evaluate the radial function at angle(s) ``phi`` (2*pi-periodic)."""
    phi_arr = np.asarray(phi, dtype=float)
    if boundary.order == 0:
        out = np.full(phi_arr.shape, boundary.a0)
    else:
        ang = np.multiply.outer(phi_arr, np.arange(1, boundary.order + 1))
        out = boundary.a0 + np.cos(ang) @ boundary.cos_coeffs \
            + np.sin(ang) @ boundary.sin_coeffs
    return out if phi_arr.ndim else float(out)


def radius_derivative(boundary: FourierBoundary, phi) -> np.ndarray | float:
    """d r / d phi, differentiating the series term by term."""
    phi_arr = np.asarray(phi, dtype=float)
    if boundary.order == 0:
        out = np.zeros(phi_arr.shape)
    else:
        ell = np.arange(1, boundary.order + 1)
        ang = np.multiply.outer(phi_arr, ell)
        out = -np.sin(ang) @ (ell * boundary.cos_coeffs) \
            + np.cos(ang) @ (ell * boundary.sin_coeffs)
    return out if phi_arr.ndim else float(out)


def map_point(boundary: FourierBoundary, x) -> np.ndarray:
    """Radial map sending the unit disc onto the domain bounded by the curve.

    A point ``x`` is scaled by the radius evaluated at its polar angle; the
    origin is a fixed point (the radial factor multiplies ``x`` itself, so no
    angle is needed there).
    """
    x_arr = np.asarray(x, dtype=float)
    phi = np.arctan2(x_arr[..., 1], x_arr[..., 0])
    r = np.asarray(radius(boundary, phi))
    return r[..., np.newaxis] * x_arr


def boundary_normal(boundary: FourierBoundary, phi) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit normal and its radial component at angle(s) ``phi``.

    Returns ``(n, factor)`` where ``n = (r e_r - r' e_phi) / sqrt(r^2 + r'^2)``
    and ``factor = <n, e_r> = r / sqrt(r^2 + r'^2)``, the projection of the
    normal onto the radial direction that converts normal displacement of the
    curve into a change of its radial function.
    """
    phi_arr = np.atleast_1d(np.asarray(phi, dtype=float))
    r = np.asarray(radius(boundary, phi_arr))
    if np.min(r) <= 0.0:
        raise NonPositiveRadiusError(
            f"degenerate boundary: r(phi) = {np.min(r):.3e} <= 0"
        )
    dr = np.asarray(radius_derivative(boundary, phi_arr))
    norm = np.hypot(r, dr)
    e_r = np.stack([np.cos(phi_arr), np.sin(phi_arr)], axis=-1)
    e_phi = np.stack([-np.sin(phi_arr), np.cos(phi_arr)], axis=-1)
    n = (r[..., None] * e_r - dr[..., None] * e_phi) / norm[..., None]
    factor = r / norm
    if np.ndim(phi) == 0:
        return n[0], float(factor[0])
    return n, factor


def fit_fourier(samples, order: int) -> FourierBoundary:
    """Least-squares fit of a truncated Fourier series to equidistant radii.

    ``samples[i]`` is the radius at angle ``2*pi*i/L``.  The discrete Fourier
    transform is truncated to modes ``|l| <= order``; by discrete
    orthogonality on the equidistant grid this equals the least-squares fit
    of the truncated series, which requires ``L > 2*order + 1``.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n <= 2 * order + 1:
        raise ValueError(
            f"need more than {2 * order + 1} samples for order {order}, got {n}"
        )
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    spec = np.fft.rfft(samples)
    coeffs = np.empty(2 * order + 1)
    coeffs[order] = spec[0].real / n
    if order:
        coeffs[order + 1:] = 2.0 * spec[1:order + 1].real / n
        coeffs[order - 1::-1] = -2.0 * spec[1:order + 1].imag / n
    return FourierBoundary(order, coeffs)


def rotate_boundary(boundary: FourierBoundary, theta: float) -> FourierBoundary:
    """Rotate the curve counterclockwise by ``theta``: r_new(phi) = r(phi - theta)."""
    m = boundary.order
    coeffs = np.array(boundary.coeffs)
    for ell in range(1, m + 1):
        c, s = np.cos(ell * theta), np.sin(ell * theta)
        a_cos, a_sin = boundary.coeffs[m + ell], boundary.coeffs[m - ell]
        coeffs[m + ell] = a_cos * c - a_sin * s
        coeffs[m - ell] = a_cos * s + a_sin * c
    return FourierBoundary(m, coeffs)


def enclosed_area(boundary: FourierBoundary) -> float:
    """Exact area enclosed by the curve: pi*(a_0^2 + sum_{l != 0} a_l^2 / 2)."""
    a0 = boundary.a0
    rest = np.delete(boundary.coeffs, boundary.order)
    return float(np.pi * (a0 * a0 + 0.5 * np.dot(rest, rest)))


def random_star_boundary(order: int, seed: int,
                         amplitude: float = 0.3) -> FourierBoundary:
    """Seeded random star-shaped curve with unit mean radius.

    Coefficients a_{+-l} are drawn uniformly from
    ``[-amplitude/l^2, amplitude/l^2]``; the 1/l^2 decay keeps the curve
    smooth and (for moderate amplitude) positive.  Redraws up to ten times
    if positivity fails.
    """
    rng = np.random.default_rng(seed)
    for _ in range(10):
        coeffs = np.zeros(2 * order + 1)
        coeffs[order] = 1.0
        for ell in range(1, order + 1):
            bound = amplitude / ell**2
            coeffs[order + ell] = rng.uniform(-bound, bound)
            coeffs[order - ell] = rng.uniform(-bound, bound)
        try:
            return FourierBoundary(order, coeffs)
        except NonPositiveRadiusError:
            continue
    raise NonPositiveRadiusError(
        f"could not draw a positive boundary at amplitude {amplitude}"
    )


@dataclass(frozen=True, eq=False)
class ReferenceMesh:
    """Triangulation of the closed unit disc.

    ``boundary`` lists the vertex indices on the unit circle, ordered
    counterclockwise starting at angle 0 and equidistant in polar angle.
    """

    vertices: np.ndarray = field(repr=False)   # (N, 2)
    triangles: np.ndarray = field(repr=False)  # (T, 3), positively oriented
    boundary: np.ndarray = field(repr=False)   # (L,)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_boundary(self) -> int:
        return self.boundary.shape[0]

    @property
    def angles(self) -> np.ndarray:
        """Polar angles of the boundary vertices."""
        return boundary_angles(self.num_boundary)


@dataclass(frozen=True, eq=False)
class MappedMesh:
    """Image of a :class:`ReferenceMesh` under the radial map of a boundary.

    Topology (triangles, boundary index list) is shared with the reference
    mesh; only vertex positions differ.
    """

    vertices: np.ndarray = field(repr=False)
    ref: ReferenceMesh = field(repr=False)
    source: FourierBoundary = field(repr=False)
    time_index: int = 0

    @property
    def triangles(self) -> np.ndarray:
        return self.ref.triangles

    @property
    def boundary(self) -> np.ndarray:
        return self.ref.boundary

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]


def triangle_signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed area of each triangle (positive = counterclockwise)."""
    p = vertices[triangles]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def generate_reference_mesh(boundary_vertices: int, rings: int) -> ReferenceMesh:
    """Concentric-ring triangulation of the unit disc.

    Ring ``j`` (j = 1..rings) sits at radius ``j/rings`` and carries
    ``max(3, round(L*j/rings))`` vertices at equidistant angles starting at
    angle 0; the outermost ring has exactly ``L = boundary_vertices``
    vertices.  Consecutive rings are stitched by an angular merge, the
    innermost ring is fanned to a center vertex.  When ``rings`` divides
    ``L`` the ring counts are exactly proportional and the mesh has an
    ``L/rings``-fold rotational symmetry, which the solver presets rely on
    to preserve rotational symmetry of the discrete evolution.
    """
    if boundary_vertices < 8:
        raise ValueError(f"need at least 8 boundary vertices, got {boundary_vertices}")
    if rings < 2:
        raise ValueError(f"need at least 2 rings, got {rings}")
    L = boundary_vertices
    counts = [max(3, round(L * j / rings)) for j in range(1, rings + 1)]
    counts[-1] = L

    verts = [np.zeros((1, 2))]
    ring_indices = []
    offset = 1
    for j, n in enumerate(counts, start=1):
        ang = boundary_angles(n)
        rad = j / rings
        verts.append(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
        ring_indices.append(np.arange(offset, offset + n))
        offset += n
    vertices = np.concatenate(verts, axis=0)

    tris = []
    first = ring_indices[0]
    n1 = len(first)
    for i in range(n1):
        tris.append((0, first[i], first[(i + 1) % n1]))
    for j in range(rings - 1):
        inner, outer = ring_indices[j], ring_indices[j + 1]
        ni, no = len(inner), len(outer)
        a = b = 0
        # Angular merge; comparisons in integer arithmetic so the stitch
        # pattern is exactly periodic when the ring counts share a factor.
        while a < ni or b < no:
            if b == no or (a < ni and (a + 1) * no <= (b + 1) * ni):
                tris.append((inner[a % ni], outer[b % no], inner[(a + 1) % ni]))
                a += 1
            else:
                tris.append((inner[a % ni], outer[b % no], outer[(b + 1) % no]))
                b += 1
    triangles = np.array(tris, dtype=np.int64)

    vertices.flags.writeable = False
    triangles.flags.writeable = False
    boundary = ring_indices[-1]
    boundary.flags.writeable = False
    return ReferenceMesh(vertices, triangles, boundary)


def map_mesh(boundary: FourierBoundary, ref: ReferenceMesh,
             time_index: int = 0) -> MappedMesh:
    """Transport the reference mesh through the radial map of ``boundary``.

    Re-checks radial positivity at the mesh's boundary resolution and fails
    loudly if any mapped triangle loses positive orientation (the curve is
    too wiggly for this mesh).
    """
    radii = boundary.radii(ref.num_boundary)
    if np.min(radii) <= 0.0:
        raise NonPositiveRadiusError(
            f"boundary radius not positive at mesh resolution "
            f"{ref.num_boundary} (min {np.min(radii):.3e})"
        )
    vertices = map_point(boundary, ref.vertices)
    areas = triangle_signed_areas(vertices, ref.triangles)
    folded = int(np.sum(areas <= 0.0))
    if folded:
        raise FoldedMeshError(
            f"radial map folded {folded} triangle(s) at time index {time_index}"
        )
    vertices.flags.writeable = False
    return MappedMesh(vertices, ref, boundary, time_index)
