"""Per-link equation generators: flexible-beam stiffness rows and rigid-link
compatibility/equilibrium rows.

A flexible link is a two-node free-free elastic element: its 12x12 stiffness
matrix maps the end deflections to the end wrenches and carries the full
6-dimensional rigid-body null space.  A rigid link contributes no stiffness,
only the kinematic and static transport constraints between its two ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rows import TWIST, WRENCH, RowBlock
from .screws import rotate_stiffness, skew, transport_matrix

__all__ = [
    "Material",
    "CrossSection",
    "FlexibleLink",
    "RigidLink",
    "beam_stiffness",
    "beam_rotation",
    "beam_link",
    "custom_flexible_link",
    "flexible_link_rows",
    "rigid_link_rows",
]


@dataclass(frozen=True)
class Material:
    """Isotropic beam material: Young's modulus E and shear modulus G (Pa)."""

    E: float
    G: float

    def __post_init__(self) -> None:
        if not (self.E > 0.0 and np.isfinite(self.E)):
            raise ValueError(f"E must be positive, got {self.E}")
        if not (self.G > 0.0 and np.isfinite(self.G)):
            raise ValueError(f"G must be positive, got {self.G}")


@dataclass(frozen=True)
class CrossSection:
    """Beam section: area A (m^2), second moments Iy, Iz and torsion J (m^4)."""

    A: float
    Iy: float
    Iz: float
    J: float

    def __post_init__(self) -> None:
        for name in ("A", "Iy", "Iz", "J"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class FlexibleLink:
    """Elastic two-node link: global-frame 12x12 stiffness K and geometry d.

    d points from node_i to node_j (m).  K is partitioned into four 6x6
    blocks following the [translation; rotation] per-node ordering.
    """

    node_i: str
    node_j: str
    K: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "K", np.asarray(self.K, dtype=float))
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))

    @property
    def k11(self) -> np.ndarray:
        return self.K[:6, :6]

    @property
    def k12(self) -> np.ndarray:
        return self.K[:6, 6:]

    @property
    def k21(self) -> np.ndarray:
        return self.K[6:, :6]

    @property
    def k22(self) -> np.ndarray:
        return self.K[6:, 6:]


@dataclass(frozen=True)
class RigidLink:
    """Perfectly stiff two-node link with geometry vector d (node_i to node_j)."""

    node_i: str
    node_j: str
    d: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))


def beam_stiffness(mat: Material, sec: CrossSection, length: float) -> np.ndarray:
    """12x12 Euler-Bernoulli free-free frame element in its local frame.

    Local x runs along the axis; bending in the x-y plane uses Iz, bending
    in the x-z plane uses Iy.  Shear deformation is not modeled.
    """
    if not (length > 0.0 and np.isfinite(length)):
        raise ValueError(f"length must be positive, got {length}")
    L = float(length)
    ax = mat.E * sec.A / L
    tr = mat.G * sec.J / L
    k = np.zeros((12, 12))

    k[0, 0] = k[6, 6] = ax
    k[0, 6] = k[6, 0] = -ax
    k[3, 3] = k[9, 9] = tr
    k[3, 9] = k[9, 3] = -tr

    # Bending about local z: transverse displacement u_y (1, 7), rotation r_z (5, 11).
    _fill_bending(k, mat.E * sec.Iz, L, 1, 5, 7, 11, +1.0)
    # Bending about local y: transverse displacement u_z (2, 8), rotation r_y (4, 10).
    _fill_bending(k, mat.E * sec.Iy, L, 2, 4, 8, 10, -1.0)
    return k


def _fill_bending(k, EI, L, ui, ri, uj, rj, sign) -> None:
    c1 = 12.0 * EI / L**3
    c2 = 6.0 * EI / L**2 * sign
    c3 = 4.0 * EI / L
    c4 = 2.0 * EI / L
    k[ui, ui] = k[uj, uj] = c1
    k[ui, uj] = k[uj, ui] = -c1
    k[ri, ri] = k[rj, rj] = c3
    k[ri, rj] = k[rj, ri] = c4
    for u, r, s in ((ui, ri, c2), (ui, rj, c2), (uj, ri, -c2), (uj, rj, -c2)):
        k[u, r] = s
        k[r, u] = s


def beam_rotation(d, orientation_hint=None) -> np.ndarray:
    """Local-to-global rotation for a beam with axis along d.

    Columns are the local axes in global coordinates.  Local y is built from
    the orientation hint (default: world z, falling back to world y when the
    axis is within 1e-6 of vertical); local z completes the right-handed set.
    """
    d = np.asarray(d, dtype=float)
    norm = np.linalg.norm(d)
    if norm <= 0.0:
        raise ValueError("beam axis vector must be nonzero")
    x = d / norm
    if orientation_hint is None:
        hint = np.array([0.0, 0.0, 1.0])
        if abs(x @ hint) > 1.0 - 1e-6:
            hint = np.array([0.0, 1.0, 0.0])
    else:
        hint = np.asarray(orientation_hint, dtype=float)
    y = np.cross(hint, x)
    ny = np.linalg.norm(y)
    if ny <= 1e-12:
        raise ValueError("orientation hint is parallel to the beam axis")
    y = y / ny
    z = np.cross(x, y)
    return np.column_stack([x, y, z])


def beam_link(
    node_i: str,
    node_j: str,
    mat: Material,
    sec: CrossSection,
    p_i,
    p_j,
    orientation_hint=None,
) -> FlexibleLink:
    """Build a flexible link between two placed nodes from beam parameters."""
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    d = p_j - p_i
    length = np.linalg.norm(d)
    r = beam_rotation(d, orientation_hint)
    k_global = rotate_stiffness(beam_stiffness(mat, sec, length), r)
    return FlexibleLink(node_i, node_j, k_global, d)


def _verify_flexible(K: np.ndarray, d: np.ndarray) -> None:
    scale = np.max(np.abs(K))
    if scale <= 0.0:
        raise ValueError("stiffness matrix is identically zero")
    if np.max(np.abs(K - K.T)) > 1e-9 * scale:
        raise ValueError("stiffness matrix violates symmetry (K21 must equal K12^T)")
    eig = np.linalg.eigvalsh(0.5 * (K + K.T))
    lam_max = eig[-1]
    if eig[0] < -1e-6 * lam_max:
        raise ValueError(
            f"stiffness matrix is not positive semi-definite (min eigenvalue {eig[0]:.3e})"
        )
    n_zero = int(np.sum(np.abs(eig) < 1e-9 * lam_max))
    if n_zero != 6:
        raise ValueError(
            f"stiffness null space has dimension {n_zero}, expected the 6 rigid-body modes"
        )
    # The null space must be exactly the rigid-twist family [t; D t].
    dmat = transport_matrix(d)
    pairs = np.vstack([np.eye(6), dmat])
    if np.max(np.abs(K @ pairs)) > 1e-8 * scale:
        raise ValueError("rigid-body twists are not in the stiffness null space")


def custom_flexible_link(node_i: str, node_j: str, k_global, d) -> FlexibleLink:
    """Wrap an externally supplied global-frame 12x12 stiffness as a link.

    The matrix is checked for symmetry, positive semi-definiteness, and the
    exact 6-dimensional rigid-body null space before being accepted.
    """
    K = np.asarray(k_global, dtype=float)
    if K.shape != (12, 12):
        raise ValueError(f"stiffness must be 12x12, got shape {K.shape}")
    d = np.asarray(d, dtype=float)
    _verify_flexible(K, d)
    return FlexibleLink(node_i, node_j, K, d)


def flexible_link_rows(link: FlexibleLink) -> RowBlock:
    """12 rows: K [dt_i; dt_j] - [W_i; W_j] = 0.

    The wrench variables carry the wrench applied to the link end by its
    node; the relation is homogeneous.
    """
    return RowBlock(
        {
            (link.node_i, TWIST): link.K[:, :6],
            (link.node_j, TWIST): link.K[:, 6:],
            (link.node_i, WRENCH): np.vstack([-np.eye(6), np.zeros((6, 6))]),
            (link.node_j, WRENCH): np.vstack([np.zeros((6, 6)), -np.eye(6)]),
        },
        np.zeros(12),
        tag="link",
    )


def rigid_link_rows(link: RigidLink) -> RowBlock:
    """12 rows: 6 of twist transport D dt_i = dt_j, 6 of wrench balance.

    The static rows W_i + D^T W_j = 0 express that the end wrenches of an
    unloaded rigid body equilibrate after transport across the link.
    """
    dmat = transport_matrix(link.d)
    zeros = np.zeros((6, 6))
    eye = np.eye(6)
    return RowBlock(
        {
            (link.node_i, TWIST): np.vstack([dmat, zeros]),
            (link.node_j, TWIST): np.vstack([-eye, zeros]),
            (link.node_i, WRENCH): np.vstack([zeros, eye]),
            (link.node_j, WRENCH): np.vstack([zeros, dmat.T]),
        },
        np.zeros(12),
        tag="link",
    )
