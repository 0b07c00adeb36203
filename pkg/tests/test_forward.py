import numpy as np
import pytest

from meltfront import fem
from meltfront.forward import (
    ForwardParams,
    MeltingSchedule,
    SpaceTimeTube,
    advance_boundary,
    cosine_melting,
    kernel_interpolate,
    quadratic_melting,
    simulate_forward,
)
from meltfront.geometry import (
    FourierBoundary,
    NonPositiveRadiusError,
    boundary_angles,
    fit_fourier,
    generate_reference_mesh,
    map_mesh,
    random_star_boundary,
    rotate_boundary,
)
from meltfront.inverse import split_step

from helpers import coeffs_from_lstsq


def schedule(fn, dt=0.05, final=5.0):
    return MeltingSchedule.from_function(fn, dt, final)


class TestMeltingSchedule:
    def test_preset_values(self):
        assert quadratic_melting(0.0) == pytest.approx(0.3125)
        assert quadratic_melting(2.5) == 0.0
        assert cosine_melting(0.0) == 0.0
        assert cosine_melting(np.pi / 2) == pytest.approx(-0.1)

    def test_secant_slopes(self):
        s = schedule(quadratic_melting)
        assert s.num_steps == 100
        secant = np.diff(s.values) / s.dt
        assert s.slopes == pytest.approx(secant, abs=1e-15)

    def test_inconsistent_slopes_rejected(self):
        with pytest.raises(ValueError, match="slopes"):
            MeltingSchedule(np.array([0.0, 1.0]), np.array([0.0, 1.0]),
                            np.array([0.5]))

    def test_nonuniform_grid_rejected(self):
        with pytest.raises(ValueError, match="uniform"):
            MeltingSchedule(np.array([0.0, 1.0, 3.0]), np.zeros(3), np.zeros(2))

    def test_from_slopes_integrates(self):
        s = MeltingSchedule.from_slopes(np.array([1.0, -2.0]), 0.5,
                                        initial_value=3.0)
        assert s.values == pytest.approx([3.0, 3.5, 2.5])

    def test_fractional_step_count_rejected(self):
        with pytest.raises(ValueError, match="whole number"):
            MeltingSchedule.from_function(quadratic_melting, 0.3, 1.0)


class TestSpaceTimeTube:
    def test_record_access(self):
        coeffs = np.tile([0.0, 1.0, 0.1], (3, 1))
        tube = SpaceTimeTube(np.array([0.0, 0.1, 0.2]), coeffs, 1)
        assert len(tube) == 3
        assert tube.num_steps == 2
        assert tube.dt == pytest.approx(0.1)
        assert tube.boundary(1).a0 == 1.0

    def test_bad_shapes_rejected(self):
        with pytest.raises(ValueError, match="order"):
            SpaceTimeTube(np.array([0.0, 0.1]), np.ones((2, 4)), 1)
        with pytest.raises(ValueError, match="increasing"):
            SpaceTimeTube(np.array([0.0, 0.0]), np.ones((2, 3)), 1)


class TestAdvanceBoundary:
    def test_zero_flux_keeps_boundary(self):
        b = random_star_boundary(7, seed=3)
        moved = advance_boundary(b, np.zeros(64), 0.05)
        assert moved.coeffs == pytest.approx(b.coeffs, abs=1e-12)

    def test_constant_flux_on_circle(self):
        b = FourierBoundary.circle(1.0, 3)
        moved = advance_boundary(b, np.full(32, 0.8), 0.05)
        assert moved.a0 == pytest.approx(1.0 - 0.05 * 0.8, abs=1e-14)
        rest = np.delete(moved.coeffs, 3)
        assert np.max(np.abs(rest)) <= 1e-14

    def test_matches_dense_least_squares_path(self):
        coeffs = np.zeros(5)
        coeffs[2] = 1.0
        coeffs[4] = 0.2
        b = FourierBoundary(2, coeffs)
        phi = boundary_angles(32)
        flux = np.cos(2.0 * phi)
        moved = advance_boundary(b, flux, 0.05, order=2)
        from meltfront.geometry import boundary_normal

        _, factor = boundary_normal(b, phi)
        updated = np.asarray(b.radii(32)) - 0.05 * flux * factor
        assert moved.coeffs == pytest.approx(coeffs_from_lstsq(updated, 2), abs=1e-10)

    def test_collapse_detected(self):
        b = FourierBoundary.circle(1.0, 2)
        with pytest.raises(NonPositiveRadiusError, match="collapsed"):
            advance_boundary(b, np.full(32, 30.0), 0.05)


class TestKernelInterpolate:
    def test_identity_on_same_vertices(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-1, 1, (200, 2))
        vals = np.sin(pts[:, 0]) + pts[:, 1] ** 2
        out = kernel_interpolate(pts, vals, pts)
        assert out == pytest.approx(vals, abs=1e-8)

    def test_zero_values_stay_zero(self):
        rng = np.random.default_rng(6)
        pts = rng.uniform(-1, 1, (100, 2))
        out = kernel_interpolate(pts, np.zeros(100), pts + 0.05)
        assert np.max(np.abs(out)) <= 1e-12

    def test_reproduces_kernel_span(self):
        # target lies in the span: one kernel bump centred at an old vertex
        rng = np.random.default_rng(7)
        pts = rng.uniform(-1, 1, (150, 2))
        center = pts[17]
        vals = np.exp(-np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]))
        new = rng.uniform(-1, 1, (80, 2))
        expected = np.exp(-np.hypot(new[:, 0] - center[0], new[:, 1] - center[1]))
        out = kernel_interpolate(pts, vals, new)
        assert out == pytest.approx(expected, abs=1e-8)

    def test_boundary_reset(self):
        rng = np.random.default_rng(8)
        pts = rng.uniform(-1, 1, (60, 2))
        vals = np.ones(60)
        out = kernel_interpolate(pts, vals, pts, boundary=np.array([0, 5, 7]))
        assert out[[0, 5, 7]] == pytest.approx([0.0, 0.0, 0.0])
        assert out[1] == pytest.approx(1.0, abs=1e-8)


class TestForwardParams:
    def test_mesh_too_coarse_for_order(self):
        with pytest.raises(ValueError, match="boundary_vertices"):
            ForwardParams(0.05, 1.0, 10, 20, 4, FourierBoundary.circle(1.0, 10),
                          schedule(quadratic_melting, final=1.0))

    def test_schedule_grid_mismatch(self):
        with pytest.raises(ValueError, match="schedule"):
            ForwardParams(0.1, 1.0, 3, 32, 4, FourierBoundary.circle(1.0, 3),
                          schedule(quadratic_melting, dt=0.05, final=1.0))

    def test_schedule_too_short(self):
        with pytest.raises(ValueError, match="covers"):
            ForwardParams(0.05, 2.0, 3, 32, 4, FourierBoundary.circle(1.0, 3),
                          schedule(quadratic_melting, final=1.0))


class TestSimulateForward:
    def test_stationary_when_nothing_drives(self):
        params = ForwardParams(
            dt=0.05, final_time=1.0, order=7, boundary_vertices=64, rings=8,
            initial_boundary=random_star_boundary(7, seed=4),
            schedule=MeltingSchedule.from_function(lambda t: np.full_like(t, 0.25),
                                                   0.05, 1.0),
        )
        result = simulate_forward(params)
        drift = np.abs(np.diff(result.tube.coeffs, axis=0))
        assert np.max(drift) <= 1e-10

    def test_rotation_equivariance(self):
        # mesh has an 8-fold symmetry at this resolution; rotate by one eighth
        theta = 2 * np.pi / 8
        base = random_star_boundary(5, seed=9, amplitude=0.2)
        sched = schedule(quadratic_melting, dt=0.05, final=0.5)

        def run(b0):
            return simulate_forward(ForwardParams(
                dt=0.05, final_time=0.5, order=5, boundary_vertices=48, rings=6,
                initial_boundary=b0, schedule=sched)).tube

        plain = run(base)
        rotated = run(rotate_boundary(base, theta))
        for k in range(len(plain)):
            back = rotate_boundary(rotated.boundary(k), -theta)
            assert back.coeffs == pytest.approx(plain.boundary(k).coeffs, abs=1e-8)

    def test_disc_symmetry_preserved(self):
        params = ForwardParams(
            dt=0.05, final_time=0.5, order=7, boundary_vertices=64, rings=8,
            initial_boundary=FourierBoundary.circle(1.0, 7),
            schedule=schedule(quadratic_melting, final=0.5),
        )
        tube = simulate_forward(params).tube
        nonmean = np.abs(np.delete(tube.coeffs, 7, axis=1))
        assert np.max(nonmean) <= 1e-8 * tube.coeffs[0, 7]

    def test_one_step_boundary_linear_in_rate(self):
        ref = generate_reference_mesh(64, 8)
        b = random_star_boundary(7, seed=10, amplitude=0.2)
        mesh = map_mesh(b, ref)
        stiff, mass, load = (fem.assemble_stiffness(mesh), fem.assemble_mass(mesh),
                             fem.assemble_load(mesh))
        rng = np.random.default_rng(11)
        v = 0.01 * rng.normal(size=mesh.num_vertices)
        v[ref.boundary] = 0.0
        alpha, dt = 0.42, 0.05

        direct = fem.crank_nicolson_step(stiff, mass, load, v, alpha, dt, ref.boundary)
        flux_direct = fem.boundary_flux(mesh, direct, b)
        v1, v2 = split_step(stiff, mass, load, v, dt, ref.boundary)
        flux_parts = fem.boundary_flux(mesh, v1, b) + alpha * fem.boundary_flux(mesh, v2, b)

        moved_direct = advance_boundary(b, flux_direct, dt)
        moved_parts = advance_boundary(b, flux_parts, dt)
        assert moved_parts.coeffs == pytest.approx(moved_direct.coeffs, abs=1e-10)

    def test_fields_and_diagnostics_recorded(self):
        params = ForwardParams(
            dt=0.05, final_time=0.25, order=3, boundary_vertices=16, rings=3,
            initial_boundary=FourierBoundary.circle(1.0, 3),
            schedule=schedule(quadratic_melting, final=0.25),
            record_fields=True,
        )
        result = simulate_forward(params)
        assert len(result.tube) == 6
        assert len(result.fields) == 6
        assert result.front_speed_range.shape == (5, 2)
        assert np.all(np.isfinite(result.front_speed_range))
        # early on the temperature falls, the liquid is warmer, the front advances
        assert np.all(result.front_speed_range[0] > 0.0)

    def test_initial_field_projected_with_zero_trace(self):
        params = ForwardParams(
            dt=0.05, final_time=0.1, order=3, boundary_vertices=16, rings=3,
            initial_boundary=FourierBoundary.circle(1.0, 3),
            schedule=schedule(quadratic_melting, final=0.1),
            initial_field=lambda pts: 1.0 - (pts ** 2).sum(axis=1),
            record_fields=True,
        )
        result = simulate_forward(params)
        ref = generate_reference_mesh(16, 3)
        assert result.fields[0][ref.boundary] == pytest.approx(
            np.zeros(16), abs=1e-15
        )
        assert result.fields[0][0] == pytest.approx(1.0)

    def test_collapse_reports_step_index(self):
        # fast shrink: big positive rate makes the front recede; tiny disc dies
        fast = MeltingSchedule.from_slopes(np.full(40, 60.0), 0.05, 0.0)
        params = ForwardParams(
            dt=0.05, final_time=2.0, order=3, boundary_vertices=16, rings=3,
            initial_boundary=FourierBoundary.circle(0.35, 3), schedule=fast,
        )
        with pytest.raises(NonPositiveRadiusError, match="step"):
            simulate_forward(params)
