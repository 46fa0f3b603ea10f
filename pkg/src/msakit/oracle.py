"""Independent reference computations for cross-checking the main pipeline.

Everything here is dense, closed-form, and deliberately self-contained: the
few lines of vector algebra it needs are reimplemented locally instead of
imported, so a bug in the assembly or solver cannot cancel against an
identical bug in the reference values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainBeam",
    "ChainSpring",
    "SerialChainSpec",
    "cantilever_compliance",
    "serial_chain_compliance",
    "vjm_serial_stiffness",
    "dense_nullspace",
]


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _twist_transport(d: np.ndarray) -> np.ndarray:
    out = np.eye(6)
    out[:3, 3:] = _skew(d).T
    return out


def _axes(direction: np.ndarray, hint: np.ndarray) -> np.ndarray:
    x = direction / np.linalg.norm(direction)
    y = np.cross(hint, x)
    y = y / np.linalg.norm(y)
    z = np.cross(x, y)
    return np.column_stack([x, y, z])


def cantilever_compliance(E, G, A, Iy, Iz, J, L) -> np.ndarray:
    """Closed-form tip compliance of a cantilevered Euler-Bernoulli beam.

    Local frame, x along the axis, clamped at the root, evaluated at the
    tip: axial L/EA, torsion L/GJ, and the bending blocks L^3/3EI,
    L^2/2EI, L/EI with their Maxwell-Betti symmetric couplings.
    """
    for name, value in (("E", E), ("G", G), ("A", A), ("Iy", Iy), ("Iz", Iz), ("J", J)):
        if value <= 0.0:
            raise ValueError(f"{name} must be positive, got {value}")
    if L < 0.0:
        raise ValueError(f"L must be non-negative, got {L}")
    c = np.zeros((6, 6))
    c[0, 0] = L / (E * A)
    c[3, 3] = L / (G * J)
    c[1, 1] = L**3 / (3.0 * E * Iz)
    c[1, 5] = c[5, 1] = L**2 / (2.0 * E * Iz)
    c[5, 5] = L / (E * Iz)
    c[2, 2] = L**3 / (3.0 * E * Iy)
    c[2, 4] = c[4, 2] = -(L**2) / (2.0 * E * Iy)
    c[4, 4] = L / (E * Iy)
    return c


@dataclass(frozen=True)
class ChainBeam:
    """Flexible beam segment of a serial chain, located by its tip point."""

    E: float
    G: float
    A: float
    Iy: float
    Iz: float
    J: float
    length: float
    direction: np.ndarray
    hint: np.ndarray
    tip: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "hint", np.asarray(self.hint, dtype=float))
        object.__setattr__(self, "tip", np.asarray(self.tip, dtype=float))


@dataclass(frozen=True)
class ChainSpring:
    """Localized 1-dof spring: a unit twist direction with scalar stiffness."""

    twist: np.ndarray
    stiffness: float
    position: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "twist", np.asarray(self.twist, dtype=float))
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.stiffness <= 0.0:
            raise ValueError(f"spring stiffness must be positive, got {self.stiffness}")


@dataclass(frozen=True)
class SerialChainSpec:
    """Strictly serial chain of compliant elements from base to end effector."""

    elements: tuple
    ee_position: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "ee_position", np.asarray(self.ee_position, dtype=float))


def serial_chain_compliance(chain: SerialChainSpec) -> np.ndarray:
    """Accumulated end-effector compliance of a serial chain.

    Each element's local compliance is transported to the end effector with
    everything else rigid and the contributions summed; rigid segments add
    nothing.
    """
    total = np.zeros((6, 6))
    for element in chain.elements:
        if isinstance(element, ChainBeam):
            local = cantilever_compliance(
                element.E, element.G, element.A, element.Iy, element.Iz,
                element.J, element.length,
            )
            rot = _axes(element.direction, element.hint)
            ad = np.zeros((6, 6))
            ad[:3, :3] = rot
            ad[3:, 3:] = rot
            comp = ad @ local @ ad.T
            at = element.tip
        elif isinstance(element, ChainSpring):
            zeta = element.twist
            comp = np.outer(zeta, zeta) / element.stiffness
            at = element.position
        else:
            raise TypeError(f"unknown chain element {element!r}")
        transport = _twist_transport(chain.ee_position - at)
        total += transport @ comp @ transport.T
    return total


def vjm_serial_stiffness(chain: SerialChainSpec) -> np.ndarray:
    """6x6 Cartesian stiffness of a serial chain: inverse of the accumulated
    compliance.  Raises if the compliance is singular (the chain cannot
    deflect in some direction, so no finite stiffness matrix exists)."""
    comp = serial_chain_compliance(chain)
    sigma = np.linalg.svd(comp, compute_uv=False)
    if sigma[-1] <= 1e-12 * sigma[0]:
        raise ValueError("accumulated chain compliance is singular")
    return np.linalg.inv(comp)


def dense_nullspace(matrix, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal null-space basis (columns) via SVD.

    Singular directions are those with sigma < rtol * sigma_max.  Intended
    for desk-scale matrices (at most a couple of thousand columns).
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.shape[1] > 2000:
        raise ValueError("dense_nullspace is limited to 2000 columns")
    _, sigma, vt = np.linalg.svd(a)
    if sigma.size == 0 or sigma[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(sigma >= rtol * sigma[0]))
    return vt[rank:].T
