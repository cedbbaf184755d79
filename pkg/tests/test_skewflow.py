import numpy as np
import pytest

from mhmc.errors import DimensionMismatch, NotAntisymmetric
from mhmc.skewflow import (
    MagneticFlowCache,
    block_decompose,
    momentum_flow,
    validate_antisymmetric,
)

from oracles import random_antisymmetric, rk4_linear


def planar_2d(g):
    return validate_antisymmetric([[0.0, -g], [g, 0.0]])


def field_matrix_3d(b):
    """Antisymmetric generator of the 3D field coupling, [B]_x layout."""
    b1, b2, b3 = b
    return validate_antisymmetric(
        [[0.0, -b3, b2], [b3, 0.0, -b1], [-b2, b1, 0.0]]
    )


def drift_generator(g_signed, dim):
    """K for the joint linear system dz/dt = K z, z = (theta, p)."""
    k = np.zeros((2 * dim, 2 * dim))
    k[:dim, dim:] = np.eye(dim)
    k[dim:, dim:] = g_signed
    return k


class TestValidate:
    def test_zero_matrix_accepted(self):
        m = validate_antisymmetric(np.zeros((3, 3)), tol=1e-12)
        assert m.dim == 3

    def test_planar_accepted(self):
        m = planar_2d(0.2)
        assert m.entries[1, 0] == 0.2

    def test_symmetric_rejected(self):
        with pytest.raises(NotAntisymmetric, match=r"m\[0,1\]"):
            validate_antisymmetric([[0.0, 1.0], [1.0, 0.0]])

    def test_nonsquare_rejected(self):
        with pytest.raises(NotAntisymmetric):
            validate_antisymmetric(np.zeros((2, 3)))


class TestBlockDecompose:
    def test_zero_matrix_all_null(self):
        dec = block_decompose(validate_antisymmetric(np.zeros((4, 4))))
        assert dec.null_dim == 4
        assert dec.rotation_rates.size == 0
        np.testing.assert_array_equal(dec.basis, np.eye(4))

    def test_planar_single_block(self):
        # Eigenvalues of [[0, -0.2], [0.2, 0]] are +-0.2i.
        dec = block_decompose(planar_2d(0.2))
        assert dec.null_dim == 0
        np.testing.assert_allclose(dec.rotation_rates, [0.2], atol=1e-12)

    def test_field_3d_block_and_null(self):
        # b = (0, 0, 1) has eigenvalues {+-i, 0}.
        dec = block_decompose(field_matrix_3d([0.0, 0.0, 1.0]))
        assert dec.null_dim == 1
        np.testing.assert_allclose(dec.rotation_rates, [1.0], atol=1e-12)

    @pytest.mark.parametrize("dim", [2, 3, 5, 10])
    def test_random_reconstruction(self, dim):
        rng = np.random.default_rng(10 + dim)
        for _ in range(10):
            g = validate_antisymmetric(random_antisymmetric(rng, dim))
            dec = block_decompose(g)
            assert 2 * dec.rotation_rates.size + dec.null_dim == dim
            assert np.all(np.diff(dec.rotation_rates) <= 0)
            np.testing.assert_allclose(
                dec.basis @ dec.basis.T, np.eye(dim), atol=1e-10
            )
            block = dec.basis.T @ g.entries @ dec.basis
            expected = np.zeros((dim, dim))
            for k, rate in enumerate(dec.rotation_rates):
                expected[2 * k, 2 * k + 1] = -rate
                expected[2 * k + 1, 2 * k] = rate
            np.testing.assert_allclose(block, expected, atol=1e-10)


class TestFlowCache:
    @pytest.mark.parametrize("dim", [2, 3, 5])
    def test_cache_invariants(self, dim):
        rng = np.random.default_rng(40 + dim)
        g = validate_antisymmetric(random_antisymmetric(rng, dim))
        cache = MagneticFlowCache.build(g, step=0.7)
        eye = np.eye(dim)
        np.testing.assert_allclose(cache.exp_pos @ cache.exp_neg, eye, atol=1e-10)
        assert abs(np.linalg.det(cache.exp_pos) - 1.0) < 1e-10
        np.testing.assert_allclose(cache.exp_pos @ cache.exp_pos.T, eye, atol=1e-10)
        # Defining ODE identity, valid for singular G as well.
        np.testing.assert_allclose(
            g.entries @ cache.psi_pos, cache.exp_pos - eye, atol=1e-10
        )
        np.testing.assert_allclose(
            -g.entries @ cache.psi_neg, cache.exp_neg - eye, atol=1e-10
        )

    def test_singular_cache_identity(self):
        g = field_matrix_3d([0.0, 0.0, 1.0])
        cache = MagneticFlowCache.build(g, step=0.3)
        np.testing.assert_allclose(
            g.entries @ cache.psi_pos, cache.exp_pos - np.eye(3), atol=1e-12
        )

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            MagneticFlowCache.build(planar_2d(0.2), step=0.0)

    def test_near_zero_rate_treated_as_null(self):
        # Rotation rates below the rank threshold become null directions,
        # so the drift degenerates to the Euler translation there.
        dec = block_decompose(planar_2d(1e-12))
        assert dec.rotation_rates.size == 0
        assert dec.null_dim == 2
        cache = MagneticFlowCache.build(planar_2d(1e-12), step=0.5)
        theta, p = momentum_flow(cache, +1, np.zeros(2), np.array([1.0, 2.0]))
        np.testing.assert_allclose(theta, [0.5, 1.0], atol=1e-12)
        np.testing.assert_allclose(p, [1.0, 2.0], atol=1e-12)


class TestMomentumFlow:
    def test_zero_g_is_euler_translation(self):
        cache = MagneticFlowCache.build(
            validate_antisymmetric(np.zeros((3, 3))), step=0.25
        )
        theta = np.array([1.0, -2.0, 0.5])
        p = np.array([0.3, 0.1, -0.7])
        theta2, p2 = momentum_flow(cache, +1, theta, p)
        np.testing.assert_array_equal(theta2, theta + 0.25 * p)
        np.testing.assert_array_equal(p2, p)

    def test_planar_closed_form(self):
        g = 0.2
        cache = MagneticFlowCache.build(planar_2d(g), step=1.0)
        theta2, p2 = momentum_flow(cache, +1, np.zeros(2), np.array([1.0, 0.0]))
        np.testing.assert_allclose(p2, [np.cos(g), np.sin(g)], atol=1e-14)
        np.testing.assert_allclose(
            theta2, [np.sin(g) / g, (1.0 - np.cos(g)) / g], atol=1e-14
        )

    def test_null_space_momentum_translates(self):
        g = field_matrix_3d([0.0, 0.0, 1.0])
        cache = MagneticFlowCache.build(g, step=0.8)
        theta = np.array([0.5, 0.5, 0.5])
        p = np.array([0.0, 0.0, 1.0])
        theta2, p2 = momentum_flow(cache, +1, theta, p)
        np.testing.assert_allclose(theta2, theta + 0.8 * p, atol=1e-12)
        np.testing.assert_allclose(p2, p, atol=1e-12)

    @pytest.mark.parametrize("dim", [2, 3, 5, 10])
    def test_agrees_with_rk4_oracle(self, dim):
        rng = np.random.default_rng(100 + dim)
        for sign in (+1, -1):
            for _ in range(5):
                g = random_antisymmetric(rng, dim)
                eps = rng.uniform(0.05, 2.0)
                cache = MagneticFlowCache.build(validate_antisymmetric(g), eps)
                theta = rng.standard_normal(dim)
                p = rng.standard_normal(dim)
                theta2, p2 = momentum_flow(cache, sign, theta, p)
                z = rk4_linear(
                    drift_generator(sign * g, dim),
                    np.concatenate([theta, p]),
                    eps,
                    10_000,
                )
                got = np.concatenate([theta2, p2])
                rel = np.linalg.norm(got - z) / np.linalg.norm(z)
                assert rel <= 1e-7

    def test_kinetic_energy_preserved(self):
        rng = np.random.default_rng(7)
        g = validate_antisymmetric(random_antisymmetric(rng, 5))
        cache = MagneticFlowCache.build(g, step=1.3)
        p = rng.standard_normal(5)
        _, p2 = momentum_flow(cache, +1, np.zeros(5), p)
        assert abs(np.linalg.norm(p2) - np.linalg.norm(p)) < 1e-10

    def test_reverse_composition_is_identity(self):
        rng = np.random.default_rng(8)
        g = validate_antisymmetric(random_antisymmetric(rng, 4))
        cache = MagneticFlowCache.build(g, step=0.6)
        theta0 = rng.standard_normal(4)
        p0 = rng.standard_normal(4)
        theta1, p1 = momentum_flow(cache, +1, theta0, p0)
        theta2, p2 = momentum_flow(cache, -1, theta1, -p1)
        np.testing.assert_allclose(-p2, p0, atol=1e-12)
        np.testing.assert_allclose(theta2, theta0, atol=1e-12)

    def test_f_matrix_scales_drift(self):
        cache = MagneticFlowCache.build(
            validate_antisymmetric(np.zeros((2, 2))), step=0.5
        )
        f = np.array([[2.0, 0.0], [1.0, 1.0]])
        theta2, _ = momentum_flow(cache, +1, np.zeros(2), np.array([1.0, 1.0]), f)
        np.testing.assert_allclose(theta2, 0.5 * f @ np.array([1.0, 1.0]))

    def test_batched_matches_single(self):
        rng = np.random.default_rng(9)
        g = validate_antisymmetric(random_antisymmetric(rng, 3))
        cache = MagneticFlowCache.build(g, step=0.4)
        thetas = rng.standard_normal((6, 3))
        ps = rng.standard_normal((6, 3))
        t_batch, p_batch = momentum_flow(cache, -1, thetas, ps)
        for i in range(6):
            t_one, p_one = momentum_flow(cache, -1, thetas[i], ps[i])
            np.testing.assert_allclose(t_batch[i], t_one, atol=1e-14)
            np.testing.assert_allclose(p_batch[i], p_one, atol=1e-14)

    def test_dimension_mismatch(self):
        cache = MagneticFlowCache.build(planar_2d(0.1), step=0.5)
        with pytest.raises(DimensionMismatch):
            momentum_flow(cache, +1, np.zeros(3), np.zeros(3))
        with pytest.raises(DimensionMismatch):
            momentum_flow(cache, +1, np.zeros(2), np.zeros(2), np.eye(3))
