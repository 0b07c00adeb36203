from types import SimpleNamespace

import numpy as np
import pytest

from meltfront.fem import (
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    boundary_flux,
    crank_nicolson_step,
    rayleigh_taylor_check,
)
from meltfront.geometry import (
    FourierBoundary,
    generate_reference_mesh,
    map_mesh,
    random_star_boundary,
    rotate_boundary,
    triangle_signed_areas,
)


def single_triangle(points):
    return SimpleNamespace(vertices=np.asarray(points, dtype=float),
                           triangles=np.array([[0, 1, 2]]))


def disc_mesh(l=64, rings=8, boundary=None):
    ref = generate_reference_mesh(l, rings)
    b = boundary if boundary is not None else FourierBoundary.circle(1.0, 0)
    return ref, map_mesh(b, ref), b


class TestAssembly:
    def test_reference_triangle_stiffness(self):
        mesh = single_triangle([(0, 0), (1, 0), (0, 1)])
        expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
        assert assemble_stiffness(mesh).toarray() == pytest.approx(expected, abs=1e-14)

    def test_reference_triangle_mass(self):
        mesh = single_triangle([(0, 0), (1, 0), (0, 1)])
        expected = np.full((3, 3), 1 / 24.0) + np.eye(3) / 24.0
        assert assemble_mass(mesh).toarray() == pytest.approx(expected, abs=1e-15)

    def test_reference_triangle_load(self):
        mesh = single_triangle([(0, 0), (1, 0), (0, 1)])
        assert assemble_load(mesh) == pytest.approx([1 / 6.0] * 3, abs=1e-16)

    def test_stiffness_row_sums_vanish(self):
        _, mesh, _ = disc_mesh(boundary=random_star_boundary(5, seed=1))
        rows = np.asarray(assemble_stiffness(mesh).sum(axis=1)).ravel()
        assert np.max(np.abs(rows)) <= 1e-10

    def test_stiffness_scale_invariant(self):
        _, mesh, _ = disc_mesh(16, 3)
        doubled = SimpleNamespace(vertices=2.0 * mesh.vertices, triangles=mesh.triangles)
        diff = (assemble_stiffness(mesh) - assemble_stiffness(doubled)).toarray()
        assert np.max(np.abs(diff)) <= 1e-13

    def test_mass_total_equals_area(self):
        _, mesh, _ = disc_mesh(boundary=random_star_boundary(5, seed=2))
        area = triangle_signed_areas(mesh.vertices, mesh.triangles).sum()
        assert assemble_mass(mesh).sum() == pytest.approx(area, abs=1e-12)

    def test_mass_scales_with_area(self):
        _, mesh, _ = disc_mesh(16, 3)
        doubled = SimpleNamespace(vertices=2.0 * mesh.vertices, triangles=mesh.triangles)
        diff = (assemble_mass(doubled) - 4.0 * assemble_mass(mesh)).toarray()
        assert np.max(np.abs(diff)) <= 1e-14

    def test_load_sums_to_area_and_scales(self):
        _, mesh, _ = disc_mesh(boundary=random_star_boundary(5, seed=3))
        area = triangle_signed_areas(mesh.vertices, mesh.triangles).sum()
        load = assemble_load(mesh)
        assert load.sum() == pytest.approx(area, rel=1e-13)
        doubled = SimpleNamespace(vertices=2.0 * mesh.vertices, triangles=mesh.triangles)
        assert assemble_load(doubled) == pytest.approx(4.0 * load, rel=1e-13)

    def test_degenerate_triangle_rejected(self):
        mesh = single_triangle([(0, 0), (1, 0), (2, 0)])
        with pytest.raises(ValueError, match="degenerate"):
            assemble_stiffness(mesh)

    def test_quadratic_forms(self):
        _, mesh, _ = disc_mesh(24, 4)
        stiff = assemble_stiffness(mesh)
        mass = assemble_mass(mesh)
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = rng.normal(size=mesh.num_vertices)
            assert x @ (stiff @ x) >= -1e-10 * np.dot(x, x)
            assert x @ (mass @ x) > 0.0


class TestCrankNicolsonStep:
    def test_zero_stays_zero(self):
        ref, mesh, _ = disc_mesh(24, 4)
        pieces = assemble_stiffness(mesh), assemble_mass(mesh), assemble_load(mesh)
        out = crank_nicolson_step(*pieces, np.zeros(mesh.num_vertices), 0.0, 0.05,
                                  ref.boundary)
        assert np.max(np.abs(out)) == 0.0

    def test_sign_under_unit_source(self):
        # one step from rest with unit rate pushes the field down
        ref, mesh, _ = disc_mesh(32, 5)
        stiff, mass, load = (assemble_stiffness(mesh), assemble_mass(mesh),
                             assemble_load(mesh))
        out = crank_nicolson_step(stiff, mass, load, np.zeros(mesh.num_vertices),
                                  1.0, 0.05, ref.boundary)
        p = mesh.vertices[mesh.triangles]
        a2 = ((p[:, 1] - p[:, 0]) * (p[:, 1] - p[:, 0])).sum(axis=1)
        b2 = ((p[:, 2] - p[:, 1]) * (p[:, 2] - p[:, 1])).sum(axis=1)
        c2 = ((p[:, 0] - p[:, 2]) * (p[:, 0] - p[:, 2])).sum(axis=1)
        sides = np.sort(np.stack([a2, b2, c2], axis=1), axis=1)
        obtuse = np.any(sides[:, 2] > sides[:, 0] + sides[:, 1] + 1e-14)
        interior = np.setdiff1d(np.arange(mesh.num_vertices), ref.boundary)
        if not obtuse:
            assert np.max(out) <= 1e-12
        assert np.mean(out[interior]) < 0.0

    def test_matches_dense_solve_oracle(self):
        ref, mesh, _ = disc_mesh(12, 3)
        stiff = assemble_stiffness(mesh).toarray()
        mass = assemble_mass(mesh).toarray()
        load = assemble_load(mesh)
        rng = np.random.default_rng(8)
        v = rng.normal(size=mesh.num_vertices)
        v[ref.boundary] = 0.0
        dt, alpha = 0.03, 0.7
        interior = np.setdiff1d(np.arange(mesh.num_vertices), ref.boundary)
        lhs = (mass + dt / 2 * stiff)[np.ix_(interior, interior)]
        rhs = ((mass - dt / 2 * stiff) @ v - dt * alpha * load)[interior]
        expected = np.zeros(mesh.num_vertices)
        expected[interior] = np.linalg.solve(lhs, rhs)
        got = crank_nicolson_step(
            assemble_stiffness(mesh), assemble_mass(mesh), load, v, alpha, dt,
            ref.boundary,
        )
        assert got == pytest.approx(expected, abs=1e-12)

    def test_unconditional_stability_in_mass_norm(self):
        ref, mesh, _ = disc_mesh(32, 5)
        stiff, mass, load = (assemble_stiffness(mesh), assemble_mass(mesh),
                             assemble_load(mesh))
        rng = np.random.default_rng(9)
        for dt in (1e-3, 0.1, 10.0):
            v = rng.normal(size=mesh.num_vertices)
            v[ref.boundary] = 0.0
            out = crank_nicolson_step(stiff, mass, load, v, 0.0, dt, ref.boundary)
            before = v @ (mass @ v)
            after = out @ (mass @ out)
            assert after <= before * (1 + 1e-10)

    def test_step_is_affine_in_rate(self):
        ref, mesh, _ = disc_mesh(24, 4)
        stiff, mass, load = (assemble_stiffness(mesh), assemble_mass(mesh),
                             assemble_load(mesh))
        rng = np.random.default_rng(10)
        v = rng.normal(size=mesh.num_vertices)
        v[ref.boundary] = 0.0
        dt, alpha = 0.05, 1.37
        free = crank_nicolson_step(stiff, mass, load, v, 0.0, dt, ref.boundary)
        unit = crank_nicolson_step(stiff, mass, load, np.zeros_like(v), 1.0, dt,
                                   ref.boundary)
        combined = crank_nicolson_step(stiff, mass, load, v, alpha, dt, ref.boundary)
        assert combined == pytest.approx(free + alpha * unit, abs=1e-10)


class TestBoundaryFlux:
    def test_zero_field_zero_flux(self):
        ref, mesh, b = disc_mesh(24, 4)
        flux = boundary_flux(mesh, np.zeros(mesh.num_vertices), b)
        assert np.max(np.abs(flux)) == 0.0

    def test_paraboloid_flux_on_disc(self):
        # v = (1 - x^2 - y^2)/4 has normal derivative -1/2 on the unit circle
        ref, mesh, b = disc_mesh(128, 16)
        r2 = (mesh.vertices ** 2).sum(axis=1)
        flux = boundary_flux(mesh, (1.0 - r2) / 4.0, b)
        assert np.max(np.abs(flux + 0.5)) <= 0.05

    def test_linear_in_field(self):
        ref, mesh, b = disc_mesh(24, 4)
        rng = np.random.default_rng(13)
        v1 = rng.normal(size=mesh.num_vertices)
        v2 = rng.normal(size=mesh.num_vertices)
        combo = boundary_flux(mesh, 2.0 * v1 - 3.0 * v2, b)
        parts = 2.0 * boundary_flux(mesh, v1, b) - 3.0 * boundary_flux(mesh, v2, b)
        assert combo == pytest.approx(parts, abs=1e-12)

    def test_rotation_permutes_flux(self):
        # the mesh construction has an (L/rings)-fold symmetry; rotate by it
        l, rings = 48, 6
        shift = l // 8
        theta = 2 * np.pi / 8
        ref = generate_reference_mesh(l, rings)
        b = random_star_boundary(5, seed=14, amplitude=0.2)
        mesh = map_mesh(b, ref)
        g = lambda pts: np.sin(pts[:, 0]) * np.cos(2.0 * pts[:, 1])
        flux = boundary_flux(mesh, g(mesh.vertices), b)

        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        mesh_rot = map_mesh(rotate_boundary(b, theta), ref)
        flux_rot = boundary_flux(mesh_rot, g(mesh_rot.vertices @ rot),
                                 rotate_boundary(b, theta))
        assert flux_rot == pytest.approx(np.roll(flux, shift), abs=1e-9)


class TestRayleighTaylorCheck:
    def test_constant_flux(self):
        assert rayleigh_taylor_check(-np.ones(5)) == (1.0, 1.0)

    def test_mixed_flux(self):
        assert rayleigh_taylor_check(np.array([-1.0, 2.0])) == (-2.0, 1.0)
