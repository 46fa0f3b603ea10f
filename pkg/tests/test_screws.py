"""Screw algebra: transport operators, rotations, and their invariants."""

import numpy as np
import pytest

from msakit import (
    Twist,
    Wrench,
    adjoint_rotation,
    rotate_stiffness,
    skew,
    transport_matrix,
    transport_wrench,
)
from msakit.elements import CrossSection, Material, beam_stiffness


def random_rotation(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestSkew:
    def test_zero_vector(self):
        assert np.array_equal(skew([0.0, 0.0, 0.0]), np.zeros((3, 3)))

    def test_definition_expansion(self):
        expected = np.array([[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]])
        assert np.array_equal(skew([1.0, 2.0, 3.0]), expected)

    def test_matches_cross_product(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            v, w = rng.normal(size=(2, 3))
            assert np.allclose(skew(v) @ w, np.cross(v, w))
            assert np.allclose(skew(v) @ v, 0.0)

    def test_exactly_antisymmetric(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            s = skew(rng.normal(size=3))
            assert np.array_equal(s + s.T, np.zeros((3, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            skew([np.nan, 0.0, 0.0])


class TestTransportMatrix:
    def test_zero_offset_is_identity(self):
        assert np.array_equal(transport_matrix([0.0, 0.0, 0.0]), np.eye(6))

    def test_rotation_translates_offset_point(self):
        # Rotation by theta about z at the origin moves a point 1 m along x
        # by theta in y.
        theta = 0.3
        d = transport_matrix([1.0, 0.0, 0.0])
        moved = d @ np.array([0.0, 0.0, 0.0, 0.0, 0.0, theta])
        assert np.allclose(moved, [0.0, theta, 0.0, 0.0, 0.0, theta])

    def test_offsets_compose_additively(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            d1, d2 = rng.normal(size=(2, 3))
            lhs = transport_matrix(d1) @ transport_matrix(d2)
            assert np.allclose(lhs, transport_matrix(d1 + d2), atol=1e-14)

    def test_negative_offset_is_exact_inverse(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            d = rng.normal(size=3) * 5.0
            prod = transport_matrix(-d) @ transport_matrix(d)
            assert np.max(np.abs(prod - np.eye(6))) < 1e-14

    def test_determinant_one(self):
        assert np.isclose(np.linalg.det(transport_matrix([3.0, -2.0, 7.0])), 1.0)


class TestAdjointRotation:
    def test_identity(self):
        assert np.array_equal(adjoint_rotation(np.eye(3)), np.eye(6))

    def test_transpose_commutes(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            r = random_rotation(rng)
            assert np.allclose(adjoint_rotation(r).T, adjoint_rotation(r.T))

    def test_preserves_block_norms(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            r = random_rotation(rng)
            t = rng.normal(size=6)
            mapped = adjoint_rotation(r) @ t
            assert np.isclose(np.linalg.norm(mapped[:3]), np.linalg.norm(t[:3]))
            assert np.isclose(np.linalg.norm(mapped[3:]), np.linalg.norm(t[3:]))

    def test_rejects_non_orthogonal(self):
        bad = np.eye(3)
        bad[0, 1] = 1e-6
        with pytest.raises(ValueError):
            adjoint_rotation(bad)

    def test_rejects_reflection(self):
        with pytest.raises(ValueError):
            adjoint_rotation(np.diag([1.0, 1.0, -1.0]))


class TestRotateStiffness:
    def setup_method(self):
        mat = Material(E=200e9, G=80e9)
        sec = CrossSection(A=3.0e-4, Iy=6.0e-9, Iz=8.0e-9, J=1.2e-8)
        self.k = beam_stiffness(mat, sec, 0.8)

    def test_identity_rotation(self):
        assert np.allclose(rotate_stiffness(self.k, np.eye(3)), self.k)

    def test_eigenvalues_invariant(self):
        rng = np.random.default_rng(41)
        base = np.sort(np.linalg.eigvalsh(self.k))
        for _ in range(10):
            rotated = rotate_stiffness(self.k, random_rotation(rng))
            assert np.allclose(
                np.sort(np.linalg.eigvalsh(rotated)), base,
                rtol=1e-8, atol=1e-8 * base[-1],
            )

    def test_round_trip(self):
        rng = np.random.default_rng(42)
        r = random_rotation(rng)
        back = rotate_stiffness(rotate_stiffness(self.k, r), r.T)
        assert np.max(np.abs(back - self.k)) < 1e-9 * np.max(np.abs(self.k))

    def test_rejects_asymmetric(self):
        bad = self.k.copy()
        bad[0, 1] += 1.0
        with pytest.raises(ValueError):
            rotate_stiffness(bad, np.eye(3))

    def test_self_equilibration_preserved(self):
        # [I, D^T] K = 0 must continue to hold when d rotates with K.
        rng = np.random.default_rng(43)
        d_local = np.array([0.8, 0.0, 0.0])
        for _ in range(10):
            r = random_rotation(rng)
            k_rot = rotate_stiffness(self.k, r)
            d_rot = r @ d_local
            rows = np.hstack([np.eye(6), transport_matrix(d_rot).T])
            assert np.max(np.abs(rows @ k_rot)) < 1e-8 * np.max(np.abs(k_rot))


class TestTransportWrench:
    def test_zero_offset(self):
        w = Wrench([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
        out = transport_wrench(w, [0.0, 0.0, 0.0])
        assert np.array_equal(out.vector(), w.vector())

    def test_lever_arm_moment(self):
        out = transport_wrench(Wrench([0.0, 1.0, 0.0], [0.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
        assert np.allclose(out.f, [0.0, 1.0, 0.0])
        assert np.allclose(out.m, [0.0, 0.0, 1.0])

    def test_round_trip(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            w = Wrench(rng.normal(size=3), rng.normal(size=3))
            d = rng.normal(size=3)
            back = transport_wrench(transport_wrench(w, d), -d)
            assert np.allclose(back.vector(), w.vector(), atol=1e-14)

    def test_matches_transport_matrix_transpose(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            w = Wrench(rng.normal(size=3), rng.normal(size=3))
            d = rng.normal(size=3)
            expected = transport_matrix(d).T @ w.vector()
            assert np.allclose(transport_wrench(w, d).vector(), expected)


class TestValueTypes:
    def test_twist_round_trip(self):
        t = Twist.from_vector([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        assert np.array_equal(t.dp, [1.0, 2.0, 3.0])
        assert np.array_equal(t.dphi, [4.0, 5.0, 6.0])
        assert np.array_equal(t.vector(), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])

    def test_wrench_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            Wrench.from_vector([1.0, 2.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Twist([0.0, 0.0, np.inf], [0.0, 0.0, 0.0])
