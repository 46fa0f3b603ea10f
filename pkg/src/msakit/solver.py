"""Solution of the partitioned stiffness system: Cartesian stiffness,
full internal states, and support reactions.

The reduced system over internal unknowns is factorized once and reused for
all right-hand sides (the six end-effector deflection columns plus the load
column).  Deflection and wrench columns carry different physical units, so
an optional diagonal equilibration (characteristic length from the model
bounding box, characteristic stiffness from the largest stiffness entry) is
applied before factorization and undone exactly afterwards.

Models whose every base-to-end-effector path is rigid in some direction
have no finite Cartesian stiffness; the reduced matrix is then structurally
singular on the wrench side.  Applied-wrench solves still succeed on the
full aggregated system, so that route is used as a fallback and for
solve_applied_wrench throughout.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .assembly import GlobalSystem, PartitionedSystem, assemble, partition
from .elements import FlexibleLink
from .errors import (
    EndEffectorMobilityError,
    MechanismMobilityError,
    NullDirection,
    SingularSystemError,
    StaticIndeterminacyError,
)
from .model import ManipulatorModel
from .oracle import dense_nullspace
from .rows import TWIST, WRENCH
from .screws import Twist, Wrench

__all__ = [
    "DENSE_LIMIT",
    "CONDITION_WARN",
    "StiffnessResult",
    "FullState",
    "cartesian_stiffness",
    "solve_prescribed_deflection",
    "solve_applied_wrench",
    "support_reactions",
    "equilibrium_residual",
]

DENSE_LIMIT = 600          # full systems smaller than 12N = 600 factor densely
CONDITION_WARN = 1e12      # ill-conditioning gate
_COND_SINGULAR = 1e14      # beyond this the factorization is treated as singular
_NULL_RTOL = 1e-12


@dataclass(frozen=True)
class StiffnessResult:
    """6x6 Cartesian stiffness with the preload/internal-load offset wrench.

    With no preloads and no internal external loads the offset is zero; the
    end-effector relation is W_e = kc @ dt_e + w_offset.
    """

    kc: np.ndarray
    w_offset: Wrench
    condition: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class FullState:
    """Solved deflection and wrench at every node plus the end-effector pair."""

    twists: dict[str, Twist]
    wrenches: dict[str, Wrench]
    end_effector: str
    dt_e: Twist
    w_e: Wrench


def _as6(value, cls) -> np.ndarray:
    if isinstance(value, (Twist, Wrench)):
        return value.vector()
    return cls.from_vector(value).vector()


def _model_scales(model: ManipulatorModel) -> tuple[float, float]:
    pos = np.array([n.position for n in model.nodes])
    span = float(np.linalg.norm(pos.max(axis=0) - pos.min(axis=0)))
    length = span if span > 1e-12 else 1.0
    k0 = 0.0
    for decl in model.links:
        if isinstance(decl.element, FlexibleLink):
            k0 = max(k0, float(np.max(np.abs(decl.element.K))))
    for joint in model.joints:
        if joint.stiffness is not None:
            k0 = max(k0, float(np.max(np.abs(joint.stiffness))))
    for support in model.supports:
        if support.stiffness is not None:
            k0 = max(k0, float(np.max(np.abs(support.stiffness))))
    return length, k0 if k0 > 0.0 else 1.0


def _column_scales(model: ManipulatorModel, labels) -> np.ndarray:
    length, k0 = _model_scales(model)
    scales = np.empty(len(labels))
    for i, (_, kind, comp) in enumerate(labels):
        if kind == TWIST:
            scales[i] = length if comp < 3 else 1.0
        else:
            scales[i] = k0 * length if comp < 3 else k0 * length**2
    return scales


class _SingularMatrix(Exception):
    """Internal: carries the orthonormal null basis in unscaled coordinates."""

    def __init__(self, null_basis: np.ndarray):
        super().__init__("singular system matrix")
        self.null_basis = null_basis


class _Factored:
    """LU factorization of a diagonally equilibrated sparse matrix.

    Solves are expressed in the original (unscaled) variables; the column
    and row scalings are applied and undone internally.
    """

    def __init__(self, matrix: scipy.sparse.csr_matrix, col_scale: np.ndarray,
                 *, equilibrate: bool = True, dense: bool | None = None):
        n = matrix.shape[0]
        if not equilibrate:
            col_scale = np.ones(n)
        scaled = (matrix @ scipy.sparse.diags(col_scale)).tocsr()
        row_max = np.asarray(np.abs(scaled).max(axis=1).todense()).ravel()
        if equilibrate:
            if np.any(row_max <= 0.0):
                raise _SingularMatrix(self._null_of_rows(scaled, col_scale))
            row_scale = 1.0 / row_max
        else:
            row_scale = np.ones(n)
        scaled = (scipy.sparse.diags(row_scale) @ scaled).tocsr()
        self._col_scale = col_scale
        self._row_scale = row_scale
        self._dense = (n < DENSE_LIMIT) if dense is None else dense
        if self._dense:
            a = scaled.toarray()
            sigma = scipy.linalg.svdvals(a)
            self.condition = float(sigma[0] / sigma[-1]) if sigma[-1] > 0.0 else np.inf
            if sigma[-1] <= _COND_SINGULAR ** -1 * sigma[0]:
                raise _SingularMatrix(self._null_dense(a, col_scale))
            self._lu = scipy.linalg.lu_factor(a)
        else:
            try:
                self._splu = scipy.sparse.linalg.splu(scaled.tocsc())
            except RuntimeError as exc:
                raise _SingularMatrix(self._null_dense_limited(scaled, col_scale)) from exc
            self.condition = self._sparse_condition(scaled)
            if not np.isfinite(self.condition) or self.condition > _COND_SINGULAR:
                raise _SingularMatrix(self._null_dense_limited(scaled, col_scale))

    @staticmethod
    def _null_of_rows(scaled, col_scale) -> np.ndarray:
        return _Factored._null_dense_limited(scaled, col_scale)

    @staticmethod
    def _null_dense(a: np.ndarray, col_scale: np.ndarray) -> np.ndarray:
        basis = dense_nullspace(a, rtol=_NULL_RTOL)
        if basis.size == 0:
            return basis
        basis = col_scale[:, None] * basis
        return basis / np.linalg.norm(basis, axis=0, keepdims=True)

    @staticmethod
    def _null_dense_limited(scaled, col_scale) -> np.ndarray:
        if scaled.shape[1] > 2000:
            return np.zeros((scaled.shape[1], 0))
        return _Factored._null_dense(scaled.toarray(), col_scale)

    def _sparse_condition(self, scaled) -> float:
        n = scaled.shape[0]
        inverse = scipy.sparse.linalg.LinearOperator(
            (n, n),
            matvec=lambda v: self._splu.solve(v),
            rmatvec=lambda v: self._splu.solve(v, trans="T"),
        )
        try:
            return float(
                scipy.sparse.linalg.onenormest(scaled)
                * scipy.sparse.linalg.onenormest(inverse)
            )
        except (RuntimeError, ValueError):
            return np.inf

    def _solve_scaled(self, cols: np.ndarray) -> np.ndarray:
        if self._dense:
            return scipy.linalg.lu_solve(self._lu, cols)
        out = np.empty_like(cols)
        for k in range(cols.shape[1]):
            out[:, k] = self._splu.solve(cols[:, k])
        return out

    def solve(self, rhs: np.ndarray, threads: int = 1) -> np.ndarray:
        """Solve for one or more right-hand-side columns."""
        rhs = np.atleast_2d(rhs.T).T if rhs.ndim == 1 else rhs
        cols = self._row_scale[:, None] * rhs
        if threads > 1 and cols.shape[1] > 1 and self._dense:
            chunks = np.array_split(np.arange(cols.shape[1]), min(threads, cols.shape[1]))
            out = np.empty_like(cols)
            with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
                futures = {
                    pool.submit(self._solve_scaled, cols[:, idx]): idx
                    for idx in chunks if idx.size
                }
                for future, idx in futures.items():
                    out[:, idx] = future.result()
        else:
            out = self._solve_scaled(cols)
        return self._col_scale[:, None] * out


def _block_directions(vector: np.ndarray, labels) -> list[NullDirection]:
    """Aggregate a null vector into its dominant 6-wide node blocks."""
    blocks: dict[tuple[str, str], np.ndarray] = {}
    for value, (node, kind, comp) in zip(vector, labels):
        blocks.setdefault((node, kind), np.zeros(6))[comp] = value
    scored = [
        NullDirection(node, kind, comp_vec, float(np.linalg.norm(comp_vec)))
        for (node, kind), comp_vec in blocks.items()
    ]
    best = max(d.weight for d in scored) if scored else 0.0
    keep = [d for d in scored if d.weight > 0.3 * best]
    return sorted(keep, key=lambda d: -d.weight)


def _twist_mask(labels) -> np.ndarray:
    return np.array([kind == TWIST for (_, kind, _) in labels])


def _raise_for_reduced_null(null_basis: np.ndarray, part: PartitionedSystem) -> None:
    """Classify a singular reduced matrix; returns only when the nullity is
    confined to wrench variables (static indeterminacy, caller may fall back
    to the full applied-wrench system)."""
    labels = part.col_labels
    mask = _twist_mask(labels)
    kinematic = [
        v for v in null_basis.T if np.linalg.norm(v[mask]) > 1e-6 * np.linalg.norm(v)
    ]
    if kinematic:
        directions: list[NullDirection] = []
        for v in kinematic:
            directions.extend(_block_directions(v, labels))
        raise MechanismMobilityError(
            "the mechanism can move with the supports and end effector held "
            "(internal mobility)",
            directions,
        )


def _raise_for_full_null(null_basis: np.ndarray, system: GlobalSystem, ee: str) -> None:
    labels = system.index.column_labels()
    mask = _twist_mask(labels)
    ee_cols = system.index.offset(ee, TWIST) + np.arange(6)
    ee_directions = []
    for v in null_basis.T:
        ee_part = v[ee_cols]
        if np.linalg.norm(ee_part) > 1e-6 * np.linalg.norm(v):
            ee_directions.append(ee_part / np.linalg.norm(ee_part))
    if ee_directions:
        raise EndEffectorMobilityError(
            "the end effector moves freely in some Cartesian directions; "
            "wrenches along them cannot be resisted",
            [NullDirection(ee, TWIST, d, 1.0) for d in ee_directions],
        )
    kinematic = [
        v for v in null_basis.T if np.linalg.norm(v[mask]) > 1e-6 * np.linalg.norm(v)
    ]
    if kinematic:
        directions = []
        for v in kinematic:
            directions.extend(_block_directions(v, labels))
        raise MechanismMobilityError(
            "the mechanism can move with the supports held (internal mobility)",
            directions,
        )
    directions = []
    for v in null_basis.T:
        directions.extend(_block_directions(v, labels))
    raise StaticIndeterminacyError(
        "internal wrenches are statically indeterminate (self-stressed rigid "
        "substructure); model the members flexibly to resolve them",
        directions,
    )


def _prepare(model: ManipulatorModel):
    system = assemble(model)
    part = partition(system, model.end_effector)
    scales = _column_scales(model, system.index.column_labels())
    return system, part, scales


def _full_factor(model, system, part, scales, equilibrate) -> _Factored:
    try:
        return _Factored(system.matrix, scales, equilibrate=equilibrate)
    except _SingularMatrix as exc:
        _raise_for_full_null(exc.null_basis, system, model.end_effector)
        raise SingularSystemError("full system is singular")  # unreachable guard


def cartesian_stiffness(
    model: ManipulatorModel, *, equilibrate: bool = True, threads: int = 1
) -> StiffnessResult:
    """Compute the 6x6 Cartesian stiffness and the load/preload offset.

    The reduced system is factorized once and solved against the six
    end-effector deflection columns and the aggregated right-hand side.  If
    the reduced matrix is singular only on the wrench side (rigid members
    leave internal wrenches indeterminate), the stiffness is recovered from
    the applied-wrench compliance of the full system instead.  Raises
    MechanismMobilityError for internal mechanisms and
    StaticIndeterminacyError when the end effector is held rigidly in some
    direction, so no finite stiffness exists.
    """
    system, part, scales = _prepare(model)
    warnings: list[str] = []
    try:
        factored = _Factored(part.m, scales[part.keep_cols], equilibrate=equilibrate)
    except _SingularMatrix as exc:
        _raise_for_reduced_null(exc.null_basis, part)
        return _compliance_stiffness(model, system, part, scales, equilibrate, threads)
    solution = factored.solve(np.column_stack([part.c_e, part.b]), threads=threads)
    kc = -(part.b_e_rows @ solution[:, :6])
    w_offset = part.b_e_rows @ solution[:, 6] - part.b_e
    return _finish_stiffness(kc, w_offset, factored.condition, warnings)


def _compliance_stiffness(model, system, part, scales, equilibrate, threads) -> StiffnessResult:
    factored = _full_factor(model, system, part, scales, equilibrate)
    unit_loads = np.zeros((system.matrix.shape[0], 6))
    unit_loads[part.ee_rows, np.arange(6)] = 1.0
    solution = factored.solve(
        np.column_stack([unit_loads, system.rhs]), threads=threads
    )
    compliance = solution[np.ix_(part.ee_cols, np.arange(6))]
    dt_offset = solution[part.ee_cols, 6]
    sigma = np.linalg.svd(compliance, compute_uv=False)
    if sigma[-1] <= 1e-9 * sigma[0]:
        held = dense_nullspace(compliance, rtol=1e-9)
        raise StaticIndeterminacyError(
            "the end effector is held rigidly in some Cartesian directions; "
            "its stiffness there is unbounded (compliance is singular)",
            [
                NullDirection(model.end_effector, TWIST, v, 1.0)
                for v in held.T
            ],
        )
    kc = np.linalg.inv(compliance)
    w_offset = -kc @ dt_offset
    warnings = [
        "reduced system singular on the wrench side; stiffness recovered "
        "from the full applied-wrench compliance"
    ]
    return _finish_stiffness(kc, w_offset, factored.condition, warnings)


def _finish_stiffness(kc, w_offset, condition, warnings) -> StiffnessResult:
    scale = np.linalg.norm(kc)
    if scale > 0.0 and np.linalg.norm(kc - kc.T) > 1e-8 * scale:
        warnings.append(
            "Cartesian stiffness is asymmetric beyond 1e-8 relative; check the "
            "model (or expect preload effects)"
        )
    if condition > CONDITION_WARN:
        warnings.append(
            f"system condition estimate {condition:.2e} exceeds {CONDITION_WARN:.0e}"
        )
    return StiffnessResult(kc, Wrench.from_vector(w_offset), condition, tuple(warnings))


def _state_from_vector(model: ManipulatorModel, system: GlobalSystem,
                       x: np.ndarray, w_e: np.ndarray) -> FullState:
    index = system.index
    twists: dict[str, Twist] = {}
    wrenches: dict[str, Wrench] = {}
    for node in index.node_order:
        t0 = index.offset(node, TWIST)
        w0 = index.offset(node, WRENCH)
        twists[node] = Twist.from_vector(x[t0:t0 + 6])
        wrenches[node] = Wrench.from_vector(x[w0:w0 + 6])
    ee = model.end_effector
    return FullState(twists, wrenches, ee, twists[ee], Wrench.from_vector(w_e))


def solve_prescribed_deflection(
    model: ManipulatorModel, dt_e, *, equilibrate: bool = True, threads: int = 1
) -> FullState:
    """Impose an end-effector deflection and recover the full internal state.

    Solves the reduced system against the deflection-shifted right-hand
    side; the end-effector wrench follows from the extraction rows.
    """
    system, part, scales = _prepare(model)
    dt_vec = _as6(dt_e, Twist)
    try:
        factored = _Factored(part.m, scales[part.keep_cols], equilibrate=equilibrate)
    except _SingularMatrix as exc:
        _raise_for_reduced_null(exc.null_basis, part)
        raise StaticIndeterminacyError(
            "internal wrenches are indeterminate under a prescribed deflection "
            "(rigid members between the supports and the end effector); use an "
            "applied-wrench solve instead"
        )
    y = factored.solve(part.b - part.c_e @ dt_vec, threads=threads)[:, 0]
    w_e = part.b_e_rows @ y - part.b_e
    x = np.empty(system.matrix.shape[0])
    x[part.keep_cols] = y
    x[part.ee_cols] = dt_vec
    return _state_from_vector(model, system, x, w_e)


def solve_applied_wrench(
    model: ManipulatorModel, w_e, *, equilibrate: bool = True, threads: int = 1
) -> FullState:
    """Apply an external wrench at the end effector and solve the system.

    Runs on the full aggregated system, so it also handles models with
    rigid members whose reduced system is wrench-side singular.  Raises
    EndEffectorMobilityError when the wrench cannot be resisted (free
    Cartesian directions are listed).
    """
    system, part, scales = _prepare(model)
    w_vec = _as6(w_e, Wrench)
    factored = _full_factor(model, system, part, scales, equilibrate)
    rhs = system.rhs.copy()
    rhs[part.ee_rows] += w_vec
    x = factored.solve(rhs, threads=threads)[:, 0]
    return _state_from_vector(model, system, x, w_vec)


def support_reactions(state: FullState, model: ManipulatorModel) -> list[tuple[str, Wrench]]:
    """Reaction wrench applied to the structure at each supported node."""
    return [(s.node, state.wrenches[s.node]) for s in model.supports]


def equilibrium_residual(state: FullState, model: ManipulatorModel) -> float:
    """Worst normalized residual of the solved state over every assembled row.

    The end-effector extraction rows are checked against the declared load
    plus the solved external wrench.
    """
    system = assemble(model)
    part = partition(system, model.end_effector)
    index = system.index
    x = np.empty(system.matrix.shape[0])
    for node in index.node_order:
        t0 = index.offset(node, TWIST)
        w0 = index.offset(node, WRENCH)
        x[t0:t0 + 6] = state.twists[node].vector()
        x[w0:w0 + 6] = state.wrenches[node].vector()
    rhs = system.rhs.copy()
    rhs[part.ee_rows] += state.w_e.vector()
    residual = system.matrix @ x - rhs
    return float(np.max(np.abs(residual) / (1.0 + np.abs(rhs))))
