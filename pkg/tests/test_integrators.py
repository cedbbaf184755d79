import numpy as np
import pytest

from mhmc.errors import NonFinite, SingularA
from mhmc.integrators import (
    IntegratorConfig,
    PhasePoint,
    check_magnetic_equivalence,
    check_symplectic,
    field_generator_3d,
    hamiltonian,
    leapfrog_step,
    magnetic_leapfrog_step,
    trajectory,
)
from mhmc.skewflow import MagneticFlowCache, validate_antisymmetric
from mhmc.targets import TargetDensity, banana_target, gaussian_target, mixture_target

from oracles import rk4_linear


def flat_target(dim):
    return TargetDensity(
        dim,
        "flat",
        lambda theta: np.zeros(np.shape(theta)[:-1]),
        lambda theta: np.zeros_like(np.asarray(theta, dtype=float)),
    )


def planar_cache(g, eps, dim=2):
    m = np.zeros((dim, dim))
    m[0, 1], m[1, 0] = -g, g
    return MagneticFlowCache.build(validate_antisymmetric(m), eps)


def zero_cache(dim, eps):
    return MagneticFlowCache.build(validate_antisymmetric(np.zeros((dim, dim))), eps)


class TestLeapfrogStep:
    def test_free_particle_translates(self):
        s = PhasePoint(np.array([1.0, 2.0]), np.array([0.5, -0.5]))
        out = leapfrog_step(flat_target(2), s, 0.3)
        np.testing.assert_array_equal(out.theta, s.theta + 0.3 * s.p)
        np.testing.assert_array_equal(out.p, s.p)

    def test_hand_computed_isotropic_gaussian(self):
        # p_half = -0.05, theta' = 0.995, p' = -0.09975 in the first coordinate.
        target = gaussian_target(np.zeros(2), np.eye(2))
        out = leapfrog_step(target, PhasePoint([1.0, 0.0], [0.0, 0.0]), 0.1)
        np.testing.assert_allclose(out.theta, [0.995, 0.0], rtol=0, atol=1e-15)
        np.testing.assert_allclose(out.p, [-0.09975, 0.0], rtol=0, atol=1e-15)

    def test_nonfinite_raises(self):
        quartic = TargetDensity(
            1,
            "quartic",
            lambda t: np.sum(np.asarray(t) ** 4, axis=-1),
            lambda t: 4.0 * np.asarray(t) ** 3,
        )
        s = PhasePoint(np.array([1.0]), np.array([0.0]))
        with pytest.raises(NonFinite):
            state = s
            for _ in range(50):
                state = leapfrog_step(quartic, state, 10.0)


class TestMagneticLeapfrogStep:
    def test_zero_g_reduces_to_canonical_bitwise(self):
        target = mixture_target(np.array([2.5, -2.5]), np.eye(2))
        rng = np.random.default_rng(3)
        cfg = IntegratorConfig(0.15, 1, zero_cache(2, 0.15))
        for _ in range(20):
            s = PhasePoint(rng.standard_normal(2), rng.standard_normal(2))
            canonical = leapfrog_step(target, s, 0.15)
            magnetic = magnetic_leapfrog_step(target, s, cfg, +1)
            np.testing.assert_array_equal(magnetic.theta, canonical.theta)
            np.testing.assert_array_equal(magnetic.p, canonical.p)

    @pytest.mark.parametrize("eps", [0.01, 0.02, 0.05])
    def test_one_step_near_exact_linear_flow(self, eps):
        # Full linear system z' = [[0, I], [-Sigma^{-1}, G]] z for the
        # isotropic Gaussian; one splitting step is within 5 eps^3 of it.
        g = 0.2
        target = gaussian_target(np.zeros(2), np.eye(2))
        cfg = IntegratorConfig(eps, 1, planar_cache(g, eps))
        s = PhasePoint(np.array([1.0, -0.5]), np.array([0.3, 0.8]))
        out = magnetic_leapfrog_step(target, s, cfg, +1)
        k = np.zeros((4, 4))
        k[:2, 2:] = np.eye(2)
        k[2:, :2] = -np.eye(2)
        k[2:, 2:] = [[0.0, -g], [g, 0.0]]
        exact = rk4_linear(k, np.concatenate([s.theta, s.p]), eps, 1000)
        diff = np.max(np.abs(np.concatenate([out.theta, out.p]) - exact))
        assert diff <= 5.0 * eps**3

    def test_momentum_norm_behavior(self):
        # The inner rotation preserves |p| exactly; the full step does not.
        target = gaussian_target(np.zeros(2), np.eye(2))
        eps = 0.3
        cache = planar_cache(0.2, eps)
        cfg = IntegratorConfig(eps, 1, cache)
        s = PhasePoint(np.array([1.0, 1.0]), np.array([0.7, -0.2]))
        from mhmc.skewflow import momentum_flow

        _, p_rot = momentum_flow(cache, +1, s.theta, s.p)
        assert abs(np.linalg.norm(p_rot) - np.linalg.norm(s.p)) < 1e-12
        out = magnetic_leapfrog_step(target, s, cfg, +1)
        assert abs(np.linalg.norm(out.p) - np.linalg.norm(s.p)) > 1e-3

    def test_sub_flows_conserve_their_sub_hamiltonians(self):
        # Kick: theta untouched, so U is conserved exactly.  Rotation: |p|
        # preserved to machine precision (checked against 1e-12).
        target = banana_target(0.1, 10.0)
        s = PhasePoint(np.array([1.0, 2.0]), np.array([0.3, -0.4]))
        u_before = target.potential(s.theta)
        record = []
        cfg = IntegratorConfig(0.3, 1, planar_cache(0.4, 0.3))
        trajectory(target, s, cfg, +1, record)
        assert target.potential(s.theta) == u_before  # theta object untouched
        from mhmc.skewflow import momentum_flow

        cache = planar_cache(0.4, 0.3)
        _, p_rot = momentum_flow(cache, -1, s.theta, s.p)
        assert abs(p_rot @ p_rot - s.p @ s.p) <= 1e-12


class TestTrajectory:
    def test_single_step_matches(self):
        target = gaussian_target(np.zeros(2), np.eye(2))
        cfg = IntegratorConfig(0.1, 1, planar_cache(0.3, 0.1))
        s = PhasePoint(np.array([1.0, 0.0]), np.array([0.2, 0.4]))
        one = magnetic_leapfrog_step(target, s, cfg, -1)
        full = trajectory(target, s, cfg, -1)
        np.testing.assert_array_equal(full.theta, one.theta)
        np.testing.assert_array_equal(full.p, one.p)

    def test_record_length(self):
        target = gaussian_target(np.zeros(2), np.eye(2))
        cfg = IntegratorConfig(0.05, 17, planar_cache(0.2, 0.05))
        record = []
        trajectory(target, PhasePoint([1.0, 0.0], [0.0, 1.0]), cfg, +1, record)
        assert len(record) == 18

    def test_zero_steps_records_start_only(self):
        target = gaussian_target(np.zeros(2), np.eye(2))
        cfg = IntegratorConfig(0.05, 0)
        record = []
        out = trajectory(target, PhasePoint([1.0, 0.0], [0.0, 1.0]), cfg, +1, record)
        assert len(record) == 1
        np.testing.assert_array_equal(out.theta, [1.0, 0.0])

    def test_config_rejects_mismatched_cache_step(self):
        with pytest.raises(ValueError, match="step"):
            IntegratorConfig(0.1, 5, planar_cache(0.2, 0.2))


class TestCheckSymplectic:
    def test_canonical_leapfrog(self):
        target = gaussian_target(np.zeros(2), np.diag([2.0, 0.5]))
        cfg = IntegratorConfig(0.1, 5)
        s = PhasePoint(np.array([1.0, -1.0]), np.array([0.3, 0.2]))
        residual, det_dev = check_symplectic(target, s, cfg, fd_step=1e-6)
        assert residual <= 1e-5
        assert det_dev <= 1e-6

    def test_magnetic_leapfrog(self):
        target = gaussian_target(np.zeros(2), np.eye(2))
        cfg = IntegratorConfig(0.1, 5, planar_cache(0.2, 0.1))
        s = PhasePoint(np.array([0.5, 0.5]), np.array([-0.2, 0.9]))
        residual, det_dev = check_symplectic(target, s, cfg, +1, fd_step=1e-6)
        assert residual <= 1e-5
        assert det_dev <= 1e-6

    def test_singular_f_raises(self):
        target = gaussian_target(np.zeros(2), np.eye(2))
        cfg = IntegratorConfig(0.1, 1, f_matrix=np.zeros((2, 2)))
        s = PhasePoint(np.zeros(2), np.zeros(2))
        with pytest.raises(SingularA):
            check_symplectic(target, s, cfg)


class TestMagneticEquivalence:
    def test_zero_field_matches_canonical(self):
        target = gaussian_target(np.zeros(3), np.eye(3))
        s = PhasePoint(np.array([1.0, 0.0, -1.0]), np.array([0.2, 0.3, 0.1]))
        dev = check_magnetic_equivalence(target, [0.0, 0.0, 0.0], s, 2.0, 1e-3)
        assert dev <= 1e-8

    def test_axial_field(self):
        target = gaussian_target(np.zeros(3), np.eye(3))
        s = PhasePoint(np.array([1.0, 0.5, -0.5]), np.array([0.0, 0.4, 0.6]))
        dev = check_magnetic_equivalence(target, [0.0, 0.0, 1.0], s, 5.0, 1e-3)
        assert dev <= 1e-6

    def test_general_field(self):
        target = gaussian_target(np.zeros(3), np.diag([1.0, 2.0, 0.5]))
        s = PhasePoint(np.array([0.3, -0.8, 0.2]), np.array([0.5, 0.1, -0.4]))
        dev = check_magnetic_equivalence(target, [1.0, 2.0, 3.0], s, 5.0, 1e-3)
        assert dev <= 1e-6

    def test_field_generator_layout(self):
        g = field_generator_3d([1.0, 2.0, 3.0])
        expected = np.array([[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]])
        np.testing.assert_array_equal(g, expected)
        rng = np.random.default_rng(0)
        v = rng.standard_normal(3)
        np.testing.assert_allclose(g @ v, np.cross([1.0, 2.0, 3.0], v), atol=1e-15)


class TestHamiltonian:
    def test_value(self):
        target = gaussian_target(np.zeros(2), np.eye(2))
        h = hamiltonian(target, np.array([1.0, 0.0]), np.array([0.0, 2.0]))
        assert h == pytest.approx(0.5 + 2.0)
