"""Reference computations: closed-form cantilever compliance, serial-chain
compliance composition, and the dense null-space helper."""

import numpy as np
import pytest

from msakit.oracle import (
    ChainBeam,
    ChainSpring,
    SerialChainSpec,
    cantilever_compliance,
    dense_nullspace,
    serial_chain_compliance,
    vjm_serial_stiffness,
)

E = 200e9
G = 80e9
A = 3.0e-4
IY = 6.0e-9
IZ = 7.854e-9
J = 1.2e-8


class TestCantileverCompliance:
    def test_transverse_entry_closed_form(self):
        c = cantilever_compliance(E, G, A, IY, IZ, J, 1.0)
        assert np.isclose(c[1, 1], 1.0 / (3.0 * E * IZ) , rtol=1e-12)
        # d = 0.02 m circular section reference value: L^3 / (3 E Iz)
        assert np.isclose(c[1, 1], 2.122e-4, rtol=1e-3)

    def test_axial_and_torsion(self):
        L = 0.7
        c = cantilever_compliance(E, G, A, IY, IZ, J, L)
        assert np.isclose(c[0, 0], L / (E * A), rtol=1e-12)
        assert np.isclose(c[3, 3], L / (G * J), rtol=1e-12)

    def test_zero_length_limit(self):
        assert np.allclose(cantilever_compliance(E, G, A, IY, IZ, J, 0.0), 0.0)

    def test_symmetric(self):
        c = cantilever_compliance(E, G, A, IY, IZ, J, 1.3)
        assert np.array_equal(c, c.T)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            cantilever_compliance(-E, G, A, IY, IZ, J, 1.0)


class TestSerialChainCompliance:
    def test_single_beam_matches_cantilever(self):
        beam = ChainBeam(
            E, G, A, IY, IZ, J, length=1.0,
            direction=np.array([1.0, 0.0, 0.0]),
            hint=np.array([0.0, 0.0, 1.0]),
            tip=np.array([1.0, 0.0, 0.0]),
        )
        chain = SerialChainSpec((beam,), ee_position=np.array([1.0, 0.0, 0.0]))
        local = cantilever_compliance(E, G, A, IY, IZ, J, 1.0)
        # Axis along world x with the default-style hint keeps the local frame
        # aligned with the world frame.
        assert np.allclose(serial_chain_compliance(chain), local, rtol=1e-12)

    def test_series_springs_combine_harmonically(self):
        axis = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        k1, k2 = 2.0e5, 6.0e5
        chain = SerialChainSpec(
            (
                ChainSpring(axis, k1, np.array([0.2, 0.0, 0.0])),
                ChainSpring(axis, k2, np.array([0.5, 0.0, 0.0])),
            ),
            ee_position=np.array([1.0, 0.0, 0.0]),
        )
        c = serial_chain_compliance(chain)
        combined = 1.0 / (axis @ c @ axis)
        assert np.isclose(combined, k1 * k2 / (k1 + k2), rtol=1e-12)

    def test_singular_compliance_rejected(self):
        axis = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        chain = SerialChainSpec(
            (ChainSpring(axis, 1.0e5, np.zeros(3)),), ee_position=np.zeros(3)
        )
        with pytest.raises(ValueError):
            vjm_serial_stiffness(chain)

    def test_spring_transport_moves_revolute_compliance(self):
        # A revolute spring at distance r from the end effector produces a
        # transverse compliance r^2 / k there (single-spring lever model).
        r, k = 0.5, 1000.0
        zeta = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
        chain = SerialChainSpec(
            (ChainSpring(zeta, k, np.zeros(3)),),
            ee_position=np.array([r, 0.0, 0.0]),
        )
        c = serial_chain_compliance(chain)
        assert np.isclose(c[1, 1], r**2 / k, rtol=1e-12)

    def test_stiffness_inverts_compliance(self):
        beam = ChainBeam(
            E, G, A, IY, IZ, J, length=0.9,
            direction=np.array([0.0, 1.0, 0.0]),
            hint=np.array([0.0, 0.0, 1.0]),
            tip=np.array([0.0, 0.9, 0.0]),
        )
        chain = SerialChainSpec((beam,), ee_position=np.array([0.0, 0.9, 0.0]))
        kc = vjm_serial_stiffness(chain)
        assert np.allclose(kc @ serial_chain_compliance(chain), np.eye(6), atol=1e-9)


class TestDenseNullspace:
    def test_identity_has_empty_basis(self):
        assert dense_nullspace(np.eye(5)).shape == (5, 0)

    def test_free_free_beam_has_rigid_modes(self):
        from msakit.elements import CrossSection, Material, beam_stiffness
        from msakit.screws import transport_matrix

        k = beam_stiffness(Material(E, G), CrossSection(A, IY, IZ, J), 1.0)
        basis = dense_nullspace(k)
        assert basis.shape == (12, 6)
        # The basis must span the rigid twist pairs [t; D t].
        pairs = np.vstack([np.eye(6), transport_matrix([1.0, 0.0, 0.0])])
        projected = basis @ (basis.T @ pairs)
        assert np.allclose(projected, pairs, atol=1e-9)

    def test_rank_one_outer_product(self):
        rng = np.random.default_rng(7)
        v = rng.normal(size=8)
        basis = dense_nullspace(np.outer(v, v))
        assert basis.shape == (8, 7)
        assert np.allclose(basis.T @ v, 0.0, atol=1e-9)

    def test_zero_matrix(self):
        basis = dense_nullspace(np.zeros((4, 4)))
        assert basis.shape == (4, 4)

    def test_orthonormal_output(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=(3, 6))
        basis = dense_nullspace(a)
        assert basis.shape == (6, 3)
        assert np.allclose(basis.T @ basis, np.eye(3), atol=1e-12)
