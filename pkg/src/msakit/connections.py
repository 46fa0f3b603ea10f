"""Constraint-row generators for joints, supports, and external loads.

Joints tie two (or more) coincident link-end nodes together.  Their rows
split into displacement compatibility and force equilibrium, with passive
and elastic variants selecting directions through an orthonormal basis:
``free`` rows span the directions the joint does not rigidly constrain,
``constrained`` rows span the orthogonal complement.

Wrench variables throughout carry the wrench applied to a link end by its
node.  Elastic rows therefore use the passive-spring orientation: the
wrench a spring applies opposes the relative deflection across it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .rows import TWIST, WRENCH, RowBlock
from .screws import Wrench

__all__ = [
    "COINCIDENCE_TOL",
    "SelectionBasis",
    "JointSpec",
    "SupportSpec",
    "LoadSpec",
    "complement_basis",
    "rigid_joint_rows",
    "multi_rigid_joint_rows",
    "passive_joint_rows",
    "elastic_joint_rows",
    "actuated_joint_rows",
    "rigid_support_rows",
    "passive_support_rows",
    "elastic_support_rows",
    "external_load_rows",
    "joint_rows",
    "support_rows",
]

COINCIDENCE_TOL = 1e-9  # m; joined nodes must coincide in the unloaded pose

_JOINT_KINDS = ("rigid", "passive", "elastic", "actuated")
_SUPPORT_KINDS = ("rigid", "passive", "elastic")
_ACTUATION_MODES = ("locked", "drive_stiffness")


@dataclass(frozen=True)
class SelectionBasis:
    """Orthonormal split of twist space into free and constrained directions.

    ``free`` is p x 6 (unit twist rows), ``constrained`` is (6 - p) x 6;
    stacked they form an orthogonal 6x6 matrix.
    """

    free: np.ndarray
    constrained: np.ndarray

    def __post_init__(self) -> None:
        free = np.atleast_2d(np.asarray(self.free, dtype=float))
        constrained = np.asarray(self.constrained, dtype=float).reshape(-1, 6)
        stacked = np.vstack([free, constrained])
        if stacked.shape != (6, 6):
            raise ValueError(
                f"free ({free.shape}) and constrained ({constrained.shape}) rows "
                "must stack to a 6x6 matrix"
            )
        if np.max(np.abs(stacked @ stacked.T - np.eye(6))) > 1e-12:
            raise ValueError("selection basis rows are not orthonormal within 1e-12")
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "constrained", constrained)

    @property
    def n_free(self) -> int:
        return self.free.shape[0]

    @property
    def n_constrained(self) -> int:
        return self.constrained.shape[0]


def _orthonormalize_rows(rows: np.ndarray, label: str) -> np.ndarray:
    """Gram-Schmidt in row order with one re-orthogonalization pass."""
    out = []
    for row in rows:
        v = row.copy()
        for _ in range(2):
            for q in out:
                v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm < 1e-9:
            raise ValueError(f"{label} rows are linearly dependent")
        out.append(v / norm)
    return np.array(out).reshape(-1, 6)


def complement_basis(free) -> SelectionBasis:
    """Build a SelectionBasis from user-specified free twist rows.

    The free rows are orthonormalized in their given order (already
    orthonormal rows pass through unchanged); the constrained rows are the
    canonical orthonormal complement obtained by projecting the standard
    basis vectors e1..e6 in order.  Output is deterministic for a given
    input.
    """
    free = np.atleast_2d(np.asarray(free, dtype=float))
    if free.ndim != 2 or free.shape[1] != 6 or not 0 < free.shape[0] <= 6:
        raise ValueError(f"free directions must be p x 6 with 1 <= p <= 6, got {free.shape}")
    if not np.all(np.isfinite(free)):
        raise ValueError("free directions must be finite")
    sigma = np.linalg.svd(free, compute_uv=False)
    if sigma[-1] <= 1e-9 * max(sigma[0], 1.0):
        raise ValueError("free direction rows are rank deficient")
    f = _orthonormalize_rows(free, "free")
    p = f.shape[0]
    constrained: list[np.ndarray] = []
    for k in range(6):
        v = np.zeros(6)
        v[k] = 1.0
        for _ in range(2):
            v -= f.T @ (f @ v)
            for q in constrained:
                v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            constrained.append(v / norm)
    if len(constrained) != 6 - p:
        raise ValueError("failed to build the orthogonal complement")
    comp = np.array(constrained).reshape(-1, 6)
    return SelectionBasis(f, comp)


@dataclass(frozen=True)
class JointSpec:
    """Connection between link-end nodes.

    kind ``rigid`` accepts 2 or more nodes; the other kinds exactly two.
    ``basis`` selects the free directions of passive/elastic joints;
    ``stiffness`` (e x e, SPD) and ``preload`` (e-vector, coordinates along
    the free rows) apply to elastic joints.  Actuated joints are either
    ``locked`` or ``drive_stiffness`` (elastic along the driven directions).
    """

    kind: str
    nodes: tuple[str, ...]
    basis: SelectionBasis | None = None
    stiffness: np.ndarray | None = None
    preload: np.ndarray | None = None
    actuation_mode: str | None = None
    id: str = ""

    def __post_init__(self) -> None:
        if self.kind not in _JOINT_KINDS:
            raise ValueError(f"unknown joint kind {self.kind!r}")
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"joint {self.id!r} repeats a node")
        if self.kind == "rigid":
            if len(nodes) < 2:
                raise ValueError("rigid joint needs at least two nodes")
        elif len(nodes) != 2:
            raise ValueError(f"{self.kind} joint connects exactly two nodes")
        object.__setattr__(self, "nodes", nodes)

        needs_basis = self.kind in ("passive", "elastic") or (
            self.kind == "actuated" and self.actuation_mode == "drive_stiffness"
        )
        if self.kind == "actuated":
            if self.actuation_mode not in _ACTUATION_MODES:
                raise ValueError(f"unknown actuation mode {self.actuation_mode!r}")
        if needs_basis:
            if self.basis is None:
                raise ValueError(f"{self.kind} joint requires free directions")
            if self.kind == "passive" and not 1 <= self.basis.n_free <= 5:
                raise ValueError("passive joint needs between 1 and 5 free directions")
        if self.kind == "elastic" or (
            self.kind == "actuated" and self.actuation_mode == "drive_stiffness"
        ):
            ke = _check_spd(self.stiffness, self.basis.n_free, f"joint {self.id!r}")
            object.__setattr__(self, "stiffness", ke)
            pre = _check_preload(self.preload, self.basis.n_free, f"joint {self.id!r}")
            object.__setattr__(self, "preload", pre)


@dataclass(frozen=True)
class SupportSpec:
    """Connection of a link-end node to the base (ground)."""

    node: str
    kind: str
    basis: SelectionBasis | None = None
    stiffness: np.ndarray | None = None
    preload: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in _SUPPORT_KINDS:
            raise ValueError(f"unknown support kind {self.kind!r}")
        if self.kind in ("passive", "elastic"):
            if self.basis is None:
                raise ValueError(f"{self.kind} support requires free directions")
            if self.kind == "passive" and not 1 <= self.basis.n_free <= 5:
                raise ValueError("passive support needs between 1 and 5 free directions")
        if self.kind == "elastic":
            ke = _check_spd(self.stiffness, self.basis.n_free, f"support at {self.node!r}")
            object.__setattr__(self, "stiffness", ke)
            pre = _check_preload(self.preload, self.basis.n_free, f"support at {self.node!r}")
            object.__setattr__(self, "preload", pre)


@dataclass(frozen=True)
class LoadSpec:
    """External wrench applied at a free link-end node."""

    node: str
    wrench: Wrench = field(default_factory=Wrench.zero)


def _check_spd(ke, e: int, owner: str) -> np.ndarray:
    if ke is None:
        raise ValueError(f"{owner} requires a stiffness matrix")
    ke = np.atleast_2d(np.asarray(ke, dtype=float))
    if ke.shape != (e, e):
        raise ValueError(
            f"{owner}: stiffness must be {e}x{e} to match the free directions, "
            f"got {ke.shape}"
        )
    if np.max(np.abs(ke - ke.T)) > 1e-12 * max(np.max(np.abs(ke)), 1.0):
        raise ValueError(f"{owner}: stiffness matrix is not symmetric")
    if np.any(np.linalg.eigvalsh(0.5 * (ke + ke.T)) <= 0.0):
        raise ValueError(f"{owner}: stiffness matrix is not positive definite")
    return ke


def _check_preload(preload, e: int, owner: str) -> np.ndarray:
    if preload is None:
        return np.zeros(e)
    pre = np.asarray(preload, dtype=float).reshape(-1)
    if pre.shape != (e,):
        raise ValueError(f"{owner}: preload must have one entry per free direction")
    return pre


def _require_coincident(nodes: Sequence[str], positions: Mapping[str, np.ndarray]) -> None:
    ref = np.asarray(positions[nodes[0]], dtype=float)
    for node in nodes[1:]:
        dist = np.linalg.norm(np.asarray(positions[node], dtype=float) - ref)
        if dist > COINCIDENCE_TOL:
            raise ValueError(
                f"joined nodes {nodes[0]!r} and {node!r} are {dist:.3e} m apart "
                f"(must coincide within {COINCIDENCE_TOL:g} m)"
            )


def rigid_joint_rows(nodes: Sequence[str], positions: Mapping[str, np.ndarray]) -> RowBlock:
    """12 rows: equal twists and wrench sum zero for two coincident nodes."""
    i, j = nodes
    _require_coincident((i, j), positions)
    eye = np.eye(6)
    zeros = np.zeros((6, 6))
    return RowBlock(
        {
            (i, TWIST): np.vstack([eye, zeros]),
            (j, TWIST): np.vstack([-eye, zeros]),
            (i, WRENCH): np.vstack([zeros, eye]),
            (j, WRENCH): np.vstack([zeros, eye]),
        },
        np.zeros(12),
        tag="joint",
    )


def multi_rigid_joint_rows(
    nodes: Sequence[str], positions: Mapping[str, np.ndarray]
) -> RowBlock:
    """6m rows for a rigid connection of m >= 3 link ends (12 for m = 2).

    Twist compatibility ties every node to the first; one 6-row group sums
    all wrenches to zero.
    """
    nodes = tuple(nodes)
    if len(nodes) == 2:
        return rigid_joint_rows(nodes, positions)
    if len(nodes) < 2:
        raise ValueError("rigid connection needs at least two nodes")
    _require_coincident(nodes, positions)
    m = len(nodes)
    eye = np.eye(6)
    coeffs: dict[tuple[str, str], np.ndarray] = {}
    n_rows = 6 * m
    first = nodes[0]
    t_first = np.zeros((n_rows, 6))
    for k in range(m - 1):
        t_first[6 * k : 6 * k + 6] = eye
    coeffs[(first, TWIST)] = t_first
    for k, node in enumerate(nodes[1:]):
        block = np.zeros((n_rows, 6))
        block[6 * k : 6 * k + 6] = -eye
        coeffs[(node, TWIST)] = block
    for node in nodes:
        block = np.zeros((n_rows, 6))
        block[6 * (m - 1) :] = eye
        coeffs[(node, WRENCH)] = block
    return RowBlock(coeffs, np.zeros(n_rows), tag="joint")


def passive_joint_rows(
    nodes: Sequence[str],
    basis: SelectionBasis,
    positions: Mapping[str, np.ndarray],
) -> RowBlock:
    """12 rows for a frictionless joint free along the basis free rows.

    Constrained directions carry compatibility and equilibrium; along the
    free directions neither node end transmits any wrench.
    """
    i, j = nodes
    _require_coincident((i, j), positions)
    p = basis.n_free
    if not 1 <= p <= 5:
        raise ValueError("passive joint needs between 1 and 5 free directions")
    r = basis.n_constrained
    lam_c = basis.constrained
    lam_f = basis.free
    zr = np.zeros((r, 6))
    zp = np.zeros((p, 6))
    return RowBlock(
        {
            (i, TWIST): np.vstack([lam_c, zr, zp, zp]),
            (j, TWIST): np.vstack([-lam_c, zr, zp, zp]),
            (i, WRENCH): np.vstack([zr, lam_c, lam_f, zp]),
            (j, WRENCH): np.vstack([zr, lam_c, zp, lam_f]),
        },
        np.zeros(12),
        tag="joint",
    )


def elastic_joint_rows(
    nodes: Sequence[str],
    basis: SelectionBasis,
    stiffness,
    preload=None,
    positions: Mapping[str, np.ndarray] | None = None,
) -> RowBlock:
    """12 rows for a joint sprung along its free directions.

    Constrained directions stay compatible; all six wrench components
    balance between the ends; along each free direction the wrench on end i
    follows Hooke's law against the relative deflection, offset by any
    preload (the spring wrench present at zero relative deflection):

        free . W_i = Ke free . (dt_j - dt_i) + preload
    """
    i, j = nodes
    if positions is not None:
        _require_coincident((i, j), positions)
    e = basis.n_free
    if not 1 <= e <= 6:
        raise ValueError("elastic joint needs between 1 and 6 free directions")
    ke = _check_spd(stiffness, e, "elastic joint")
    pre = _check_preload(preload, e, "elastic joint")
    r = basis.n_constrained
    lam_c = basis.constrained
    klam = ke @ basis.free
    eye = np.eye(6)
    zr6 = np.zeros((r, 6))
    ze6 = np.zeros((e, 6))
    z66 = np.zeros((6, 6))
    return RowBlock(
        {
            (i, TWIST): np.vstack([lam_c, z66, klam]),
            (j, TWIST): np.vstack([-lam_c, z66, -klam]),
            (i, WRENCH): np.vstack([zr6, eye, basis.free]),
            (j, WRENCH): np.vstack([zr6, eye, ze6]),
        },
        np.concatenate([np.zeros(r + 6), pre]),
        tag="joint",
    )


def actuated_joint_rows(
    nodes: Sequence[str],
    mode: str,
    positions: Mapping[str, np.ndarray],
    basis: SelectionBasis | None = None,
    stiffness=None,
    preload=None,
) -> RowBlock:
    """12 rows for an actuated joint: rigid when locked, elastic when driven
    through a finite drive stiffness along the actuated directions."""
    if mode == "locked":
        return rigid_joint_rows(nodes, positions)
    if mode == "drive_stiffness":
        if basis is None or stiffness is None:
            raise ValueError("drive_stiffness mode requires free directions and stiffness")
        return elastic_joint_rows(nodes, basis, stiffness, preload, positions)
    raise ValueError(f"unknown actuation mode {mode!r}")


def rigid_support_rows(node: str) -> RowBlock:
    """6 rows clamping the node: dt = 0."""
    return RowBlock({(node, TWIST): np.eye(6)}, np.zeros(6), tag="support")


def passive_support_rows(node: str, basis: SelectionBasis) -> RowBlock:
    """6 rows: zero deflection in constrained directions, zero wrench along
    the free ones."""
    p = basis.n_free
    if not 1 <= p <= 5:
        raise ValueError("passive support needs between 1 and 5 free directions")
    r = basis.n_constrained
    return RowBlock(
        {
            (node, TWIST): np.vstack([basis.constrained, np.zeros((p, 6))]),
            (node, WRENCH): np.vstack([np.zeros((r, 6)), basis.free]),
        },
        np.zeros(6),
        tag="support",
    )


def elastic_support_rows(node: str, basis: SelectionBasis, stiffness, preload=None) -> RowBlock:
    """6 rows: constrained directions clamped, free directions sprung to
    ground.  The wrench the support applies to the link end opposes the
    deflection: free . W = preload - Ke free . dt."""
    e = basis.n_free
    if not 1 <= e <= 6:
        raise ValueError("elastic support needs between 1 and 6 free directions")
    ke = _check_spd(stiffness, e, "elastic support")
    pre = _check_preload(preload, e, "elastic support")
    r = basis.n_constrained
    return RowBlock(
        {
            (node, TWIST): np.vstack([basis.constrained, ke @ basis.free]),
            (node, WRENCH): np.vstack([np.zeros((r, 6)), basis.free]),
        },
        np.concatenate([np.zeros(r), pre]),
        tag="support",
    )


def external_load_rows(node_members: Sequence[str], wrench: Wrench) -> RowBlock:
    """6 rows of force equilibrium at a loaded node: sum of member-end
    wrenches equals the applied external wrench.

    For the usual single-member free end this reduces to W = wrench; for a
    junction of several member ends the wrench variables share the load.
    """
    members = tuple(node_members)
    if not members:
        raise ValueError("a loaded node needs at least one member end")
    eye = np.eye(6)
    coeffs = {(node, WRENCH): eye for node in members}
    return RowBlock(coeffs, wrench.vector(), tag="load")


def joint_rows(spec: JointSpec, positions: Mapping[str, np.ndarray]) -> RowBlock:
    """Dispatch a JointSpec to its row generator."""
    if spec.kind == "rigid":
        return multi_rigid_joint_rows(spec.nodes, positions)
    if spec.kind == "passive":
        return passive_joint_rows(spec.nodes, spec.basis, positions)
    if spec.kind == "elastic":
        return elastic_joint_rows(spec.nodes, spec.basis, spec.stiffness, spec.preload, positions)
    return actuated_joint_rows(
        spec.nodes, spec.actuation_mode, positions, spec.basis, spec.stiffness, spec.preload
    )


def support_rows(spec: SupportSpec) -> RowBlock:
    """Dispatch a SupportSpec to its row generator."""
    if spec.kind == "rigid":
        return rigid_support_rows(spec.node)
    if spec.kind == "passive":
        return passive_support_rows(spec.node, spec.basis)
    return elastic_support_rows(spec.node, spec.basis, spec.stiffness, spec.preload)
