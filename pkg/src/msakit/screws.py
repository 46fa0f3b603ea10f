"""Small-deflection screw algebra: twists, wrenches, and rigid-body transport.

All 6-vectors are ordered [translation; rotation]: a twist stacks the
translational deflection (m) over the rotational deflection (rad), a wrench
stacks force (N) over moment (N m).  Everything here is a pure function over
immutable values and is safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Twist",
    "Wrench",
    "skew",
    "transport_matrix",
    "adjoint_rotation",
    "rotate_stiffness",
    "transport_wrench",
]


def _vec3(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


def _vec6(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (6,):
        raise ValueError(f"{name} must be a 6-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


@dataclass(frozen=True)
class Twist:
    """Small nodal deflection: translation dp (m) and rotation dphi (rad)."""

    dp: np.ndarray
    dphi: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dp", _vec3(self.dp, "dp"))
        object.__setattr__(self, "dphi", _vec3(self.dphi, "dphi"))

    @classmethod
    def zero(cls) -> "Twist":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, v) -> "Twist":
        v = _vec6(v, "twist")
        return cls(v[:3], v[3:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.dp, self.dphi])


@dataclass(frozen=True)
class Wrench:
    """Nodal load: force f (N) and moment m (N m)."""

    f: np.ndarray
    m: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "f", _vec3(self.f, "f"))
        object.__setattr__(self, "m", _vec3(self.m, "m"))

    @classmethod
    def zero(cls) -> "Wrench":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, v) -> "Wrench":
        v = _vec6(v, "wrench")
        return cls(v[:3], v[3:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.f, self.m])


def skew(v) -> np.ndarray:
    """Skew-symmetric cross-product matrix: skew(v) @ w == cross(v, w)."""
    x, y, z = _vec3(v, "v")
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def transport_matrix(d) -> np.ndarray:
    """Rigid-body twist transport over the offset d (from node i to node j).

    D @ twist_at_i gives the twist at j of the same rigid body:
    dp_j = dp_i + dphi x d, dphi_j = dphi_i.  Its transpose transports
    wrenches the opposite way.  transport_matrix(-d) is the exact inverse.
    """
    d = _vec3(d, "d")
    out = np.eye(6)
    out[:3, 3:] = skew(d).T
    return out


def adjoint_rotation(rotation) -> np.ndarray:
    """Block-diagonal 6x6 rotation acting on twists and wrenches alike.

    Raises ValueError if the 3x3 input is not a proper rotation
    (orthogonality checked at 1e-9).
    """
    r = np.asarray(rotation, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {r.shape}")
    if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9:
        raise ValueError("rotation matrix is not orthogonal within 1e-9")
    if np.linalg.det(r) < 0.0:
        raise ValueError("rotation matrix is a reflection (det < 0)")
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[3:, 3:] = r
    return out


def rotate_stiffness(k_local, rotation) -> np.ndarray:
    """Re-express a 12x12 two-node stiffness matrix in a rotated frame.

    The rotation maps local coordinates to the target frame.  Symmetry of
    the input is required (1e-9 relative) and preserved by the orthogonal
    congruence.
    """
    k = np.asarray(k_local, dtype=float)
    if k.shape != (12, 12):
        raise ValueError(f"stiffness must be 12x12, got shape {k.shape}")
    scale = np.max(np.abs(k))
    if scale > 0.0 and np.max(np.abs(k - k.T)) > 1e-9 * scale:
        raise ValueError("stiffness matrix is not symmetric within 1e-9 relative")
    ad = adjoint_rotation(rotation)
    big = np.zeros((12, 12))
    big[:6, :6] = ad
    big[6:, 6:] = ad
    return big @ k @ big.T


def transport_wrench(wrench: Wrench, d) -> Wrench:
    """Re-express a wrench about a point offset by -d from its current point.

    Force is unchanged; the moment gains the lever-arm term d x f.  Moving a
    wrench acting at node j to be taken about node i uses d = p_j - p_i.
    """
    d = _vec3(d, "d")
    return Wrench(wrench.f, wrench.m + np.cross(d, wrench.f))
