"""Beam and rigid-link element generators against closed-form references."""

import numpy as np
import pytest

from msakit.elements import (
    CrossSection,
    FlexibleLink,
    Material,
    RigidLink,
    beam_link,
    beam_rotation,
    beam_stiffness,
    custom_flexible_link,
    flexible_link_rows,
    rigid_link_rows,
)
from msakit.oracle import cantilever_compliance
from msakit.rows import TWIST, WRENCH
from msakit.screws import rotate_stiffness, transport_matrix

MAT = Material(E=200e9, G=80e9)
SEC = CrossSection(A=3.1416e-4, Iy=7.854e-9, Iz=7.854e-9, J=1.5708e-8)


def random_rotation(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestBeamStiffness:
    def test_axial_entry(self):
        k = beam_stiffness(MAT, SEC, 1.0)
        assert np.isclose(k[0, 0], 6.2832e7, rtol=1e-12)
        assert np.isclose(k[0, 0], MAT.E * SEC.A / 1.0, rtol=1e-14)

    def test_cantilever_tip_compliance(self):
        # Clamp end i, load end j transversely: the tip block must reproduce
        # the closed-form deflection F L^3 / (3 E Iz) = 2.122e-2 m at 100 N.
        L, F = 1.0, 100.0
        k = beam_stiffness(MAT, SEC, L)
        u = np.linalg.solve(k[6:, 6:], np.array([0.0, F, 0.0, 0.0, 0.0, 0.0]))
        expected = cantilever_compliance(MAT.E, MAT.G, SEC.A, SEC.Iy, SEC.Iz, SEC.J, L)
        assert np.isclose(u[1], F * expected[1, 1], rtol=1e-10)
        assert np.isclose(u[1], 2.122e-2, rtol=1e-4)

    def test_tip_block_inverse_matches_oracle(self):
        L = 0.73
        k = beam_stiffness(MAT, SEC, L)
        expected = cantilever_compliance(MAT.E, MAT.G, SEC.A, SEC.Iy, SEC.Iz, SEC.J, L)
        assert np.allclose(np.linalg.inv(k[6:, 6:]), expected, rtol=1e-9)

    def test_rigid_twists_in_null_space(self):
        L = 1.0
        k = beam_stiffness(MAT, SEC, L)
        rng = np.random.default_rng(3)
        d = transport_matrix([L, 0.0, 0.0])
        for _ in range(20):
            t = rng.normal(size=6)
            pair = np.concatenate([t, d @ t])
            assert np.max(np.abs(k @ pair)) < 1e-8 * np.max(np.abs(k))

    def test_exactly_six_zero_eigenvalues(self):
        for L in (0.2, 1.0, 3.7):
            eig = np.linalg.eigvalsh(beam_stiffness(MAT, SEC, L))
            assert int(np.sum(np.abs(eig) < 1e-9 * eig[-1])) == 6
            assert eig[0] > -1e-9 * eig[-1]

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            beam_stiffness(MAT, SEC, 0.0)
        with pytest.raises(ValueError):
            Material(E=-1.0, G=80e9)
        with pytest.raises(ValueError):
            CrossSection(A=1e-4, Iy=0.0, Iz=1e-9, J=1e-9)


class TestBeamRotation:
    def test_axis_along_x_keeps_world_frame(self):
        r = beam_rotation([2.0, 0.0, 0.0])
        assert np.allclose(r, np.eye(3), atol=1e-14)

    def test_vertical_axis_uses_fallback_hint(self):
        r = beam_rotation([0.0, 0.0, 1.5])
        assert np.allclose(r[:, 0], [0.0, 0.0, 1.0])
        assert np.isclose(np.linalg.det(r), 1.0)
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-14)

    def test_explicit_hint(self):
        r = beam_rotation([1.0, 0.0, 0.0], orientation_hint=[0.0, 1.0, 0.0])
        # y_local = hint x x_hat = -z_world
        assert np.allclose(r[:, 1], [0.0, 0.0, -1.0])

    def test_rejects_parallel_hint(self):
        with pytest.raises(ValueError):
            beam_rotation([1.0, 0.0, 0.0], orientation_hint=[1.0, 0.0, 0.0])


class TestFlexibleLinkRows:
    def link(self):
        return beam_link("a", "b", MAT, SEC, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0])

    def test_zero_deflections_force_zero_wrenches(self):
        block = flexible_link_rows(self.link())
        assert block.n_rows == 12
        values = {
            ("a", TWIST): np.zeros(6), ("b", TWIST): np.zeros(6),
            ("a", WRENCH): np.zeros(6), ("b", WRENCH): np.zeros(6),
        }
        assert np.allclose(block.residual(values), 0.0)
        values[("a", WRENCH)] = np.array([1.0, 0, 0, 0, 0, 0])
        assert np.max(np.abs(block.residual(values))) == 1.0

    def test_rigid_twist_pair_forces_zero_wrenches(self):
        link = self.link()
        block = flexible_link_rows(link)
        rng = np.random.default_rng(5)
        t = rng.normal(size=6)
        values = {
            ("a", TWIST): t,
            ("b", TWIST): transport_matrix(link.d) @ t,
            ("a", WRENCH): np.zeros(6),
            ("b", WRENCH): np.zeros(6),
        }
        assert np.max(np.abs(block.residual(values))) < 1e-7

    def test_wrench_coefficients_are_negative_identity(self):
        block = flexible_link_rows(self.link())
        stacked = np.hstack([block.coeffs[("a", WRENCH)], block.coeffs[("b", WRENCH)]])
        assert np.array_equal(stacked, -np.eye(12))
        assert np.allclose(block.rhs, 0.0)


class TestRigidLinkRows:
    def test_coincident_nodes_degenerate(self):
        block = rigid_link_rows(RigidLink("a", "b", [0.0, 0.0, 0.0]))
        rng = np.random.default_rng(6)
        t = rng.normal(size=6)
        w = rng.normal(size=6)
        values = {
            ("a", TWIST): t, ("b", TWIST): t,
            ("a", WRENCH): w, ("b", WRENCH): -w,
        }
        assert np.allclose(block.residual(values), 0.0, atol=1e-12)

    def test_rotation_about_z_moves_far_end(self):
        theta = 0.0125
        block = rigid_link_rows(RigidLink("a", "b", [1.0, 0.0, 0.0]))
        values = {
            ("a", TWIST): np.array([0, 0, 0, 0, 0, theta]),
            ("b", TWIST): np.array([0, theta, 0, 0, 0, theta]),
            ("a", WRENCH): np.zeros(6),
            ("b", WRENCH): np.zeros(6),
        }
        assert np.allclose(block.residual(values), 0.0, atol=1e-15)
        values[("b", TWIST)] = np.array([0, 0, 0, 0, 0, theta])
        assert np.max(np.abs(block.residual(values))) > 0.0

    def test_moment_balance(self):
        block = rigid_link_rows(RigidLink("a", "b", [1.0, 0.0, 0.0]))
        values = {
            ("a", TWIST): np.zeros(6), ("b", TWIST): np.zeros(6),
            ("a", WRENCH): np.array([0.0, -1.0, 0.0, 0.0, 0.0, -1.0]),
            ("b", WRENCH): np.array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
        }
        assert np.allclose(block.residual(values), 0.0, atol=1e-15)

    def test_physically_consistent_pairs_have_tiny_residual(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            d = rng.normal(size=3)
            link = RigidLink("a", "b", d)
            block = rigid_link_rows(link)
            t = rng.normal(size=6)
            w_j = rng.normal(size=6)
            values = {
                ("a", TWIST): t,
                ("b", TWIST): transport_matrix(d) @ t,
                ("a", WRENCH): -(transport_matrix(d).T @ w_j),
                ("b", WRENCH): w_j,
            }
            assert np.max(np.abs(block.residual(values))) < 1e-12


class TestCustomFlexibleLink:
    def test_accepts_rotated_beam(self):
        rng = np.random.default_rng(8)
        r = random_rotation(rng)
        d_local = np.array([0.9, 0.0, 0.0])
        k = rotate_stiffness(beam_stiffness(MAT, SEC, 0.9), r)
        link = custom_flexible_link("a", "b", k, r @ d_local)
        assert isinstance(link, FlexibleLink)

    def test_rejects_asymmetric(self):
        k = beam_stiffness(MAT, SEC, 1.0)
        bad = k.copy()
        bad[6, 0] *= 1.5
        with pytest.raises(ValueError, match="symmetry"):
            custom_flexible_link("a", "b", bad, [1.0, 0.0, 0.0])

    def test_rejects_identity(self):
        with pytest.raises(ValueError, match="null space"):
            custom_flexible_link("a", "b", np.eye(12), [1.0, 0.0, 0.0])

    def test_rejects_wrong_geometry_vector(self):
        k = beam_stiffness(MAT, SEC, 1.0)
        with pytest.raises(ValueError, match="rigid-body"):
            custom_flexible_link("a", "b", k, [0.0, 1.0, 0.0])

    def test_rejects_indefinite(self):
        k = beam_stiffness(MAT, SEC, 1.0).copy()
        # Flip the sign of the largest eigenvalue direction.
        eigval, eigvec = np.linalg.eigh(k)
        k -= 2.0 * eigval[-1] * np.outer(eigvec[:, -1], eigvec[:, -1])
        with pytest.raises(ValueError):
            custom_flexible_link("a", "b", k, [1.0, 0.0, 0.0])


class TestSerialCompositionSanity:
    def test_two_elements_give_eight_fold_compliance(self):
        # Two length-L elements rigidly chained deflect like one 2L element:
        # clamp the base, condense the middle node, compare tip compliance.
        L = 0.6
        k = beam_stiffness(MAT, SEC, L)
        k11, k12, k21, k22 = k[:6, :6], k[:6, 6:], k[6:, :6], k[6:, 6:]
        # Chain stiffness over (mid, tip) after clamping the base of element 1.
        upper = np.block([[k22 + k11, k12], [k21, k22]])
        comp_chain = np.linalg.inv(upper)[6:, 6:]
        comp_single = np.linalg.inv(k22)
        assert np.isclose(comp_chain[1, 1] / comp_single[1, 1], 8.0, rtol=1e-8)
