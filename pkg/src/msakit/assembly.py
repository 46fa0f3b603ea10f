"""Aggregation of all constraint rows into one sparse block system.

Unknowns are stacked deflections first, then wrenches, six per node in node
declaration order.  Every link, joint, support, and load contributes its
rows unchanged; nothing is merged, so each row keeps a provenance tag naming
the entity that produced it and solver diagnostics can point back at the
model.
"""

from __future__ import annotations

import pathlib
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse

from .connections import external_load_rows, joint_rows, support_rows
from .elements import FlexibleLink, RigidLink, flexible_link_rows, rigid_link_rows
from .errors import AssemblyCountError, ModelValidationError
from .model import ManipulatorModel, validate
from .rows import TWIST, WRENCH, RowBlock

__all__ = [
    "VariableIndex",
    "GlobalSystem",
    "PartitionedSystem",
    "index_variables",
    "assemble",
    "partition",
    "dump_system",
]


@dataclass(frozen=True)
class VariableIndex:
    """Deterministic bijection between node ids and 6-wide column blocks."""

    node_order: tuple[str, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.node_order)

    @property
    def size(self) -> int:
        return 12 * self.n_nodes

    def offset(self, node: str, kind: str) -> int:
        k = self.node_order.index(node)
        base = 0 if kind == TWIST else 6 * self.n_nodes
        return base + 6 * k

    def column_labels(self) -> list[tuple[str, str, int]]:
        """(node, kind, component) for every column, in column order."""
        labels = []
        for kind in (TWIST, WRENCH):
            for node in self.node_order:
                labels.extend((node, kind, c) for c in range(6))
        return labels


@dataclass(frozen=True)
class GlobalSystem:
    """The assembled square system: sparse matrix, right-hand side, and one
    provenance tag per row."""

    matrix: scipy.sparse.csr_matrix
    rhs: np.ndarray
    row_tags: tuple[str, ...]
    index: VariableIndex


@dataclass(frozen=True)
class PartitionedSystem:
    """The assembled system with the end-effector extraction rows split off.

    m is square over the retained unknowns (all wrenches plus internal
    deflections); c_e holds the end-effector deflection columns moved to the
    parameter side; b_e is the declared external wrench at the end effector
    (the fixed part of the extraction rows' right-hand side).
    """

    m: scipy.sparse.csr_matrix
    c_e: np.ndarray
    b: np.ndarray
    b_e_rows: np.ndarray
    b_e: np.ndarray
    keep_rows: np.ndarray
    keep_cols: np.ndarray
    ee_rows: np.ndarray
    ee_cols: np.ndarray
    row_tags: tuple[str, ...]
    index: VariableIndex
    end_effector: str

    @property
    def col_labels(self) -> list[tuple[str, str, int]]:
        full = self.index.column_labels()
        return [full[c] for c in self.keep_cols]


def index_variables(model: ManipulatorModel) -> VariableIndex:
    """Column layout: all deflection blocks, then all wrench blocks, nodes in
    declaration order within each half."""
    return VariableIndex(tuple(n.id for n in model.nodes))


def _model_blocks(model: ManipulatorModel) -> list[RowBlock]:
    positions = model.positions
    blocks: list[RowBlock] = []
    for decl in model.links:
        if isinstance(decl.element, FlexibleLink):
            block = flexible_link_rows(decl.element)
        elif isinstance(decl.element, RigidLink):
            block = rigid_link_rows(decl.element)
        else:
            raise TypeError(f"unknown link element {decl.element!r}")
        blocks.append(block.with_tag(f"link:{decl.id}"))
    for joint in model.joints:
        blocks.append(joint_rows(joint, positions).with_tag(f"joint:{joint.id}"))
    for support in model.supports:
        blocks.append(support_rows(support).with_tag(f"support:{support.node}"))
    for load in model.loads:
        blocks.append(external_load_rows([load.node], load.wrench).with_tag(f"load:{load.node}"))
    return blocks


def assemble(model: ManipulatorModel) -> GlobalSystem:
    """Insert every generator row into the global sparse system.

    The model must validate cleanly.  The result is square 12N x 12N with
    the right-hand side carrying declared load wrenches and elastic
    preloads; a row-count mismatch raises AssemblyCountError (defensive, the
    validator already enforces the counting rule).
    """
    report = validate(model)
    if not report.ok:
        raise ModelValidationError(report)
    index = index_variables(model)
    size = index.size

    data: list[np.ndarray] = []
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    rhs_parts: list[np.ndarray] = []
    tags: list[str] = []
    offset = 0
    for block in _model_blocks(model):
        n = block.n_rows
        row_idx = np.arange(offset, offset + n)
        for (node, kind), mat in block.coeffs.items():
            col0 = index.offset(node, kind)
            data.append(mat.ravel())
            rows.append(np.repeat(row_idx, 6))
            cols.append(np.tile(np.arange(col0, col0 + 6), n))
        rhs_parts.append(block.rhs)
        tags.extend([block.tag] * n)
        offset += n

    if offset != size:
        raise AssemblyCountError(
            f"assembled {offset} rows for {size} unknowns; generator and "
            "validator disagree"
        )
    matrix = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()
    matrix.eliminate_zeros()
    return GlobalSystem(matrix, np.concatenate(rhs_parts), tuple(tags), index)


def partition(system: GlobalSystem, end_effector: str) -> PartitionedSystem:
    """Split off the end-effector extraction rows and deflection columns.

    The 6 load rows at the end effector become the wrench-extraction rows
    (their declared-wrench right-hand side is the fixed offset; the actual
    external wrench is the solve output).  The end-effector deflection
    columns move to the parameter side; everything else forms the square
    reduced system.
    """
    tag = f"load:{end_effector}"
    ee_rows = np.array([i for i, t in enumerate(system.row_tags) if t == tag])
    if ee_rows.size != 6:
        raise ValueError(
            f"end effector {end_effector!r} must carry exactly one external-load "
            f"row group, found {ee_rows.size} rows"
        )
    n = system.matrix.shape[0]
    ee_cols = system.index.offset(end_effector, TWIST) + np.arange(6)
    keep_rows = np.setdiff1d(np.arange(n), ee_rows)
    keep_cols = np.setdiff1d(np.arange(n), ee_cols)

    rows_kept = system.matrix[keep_rows]
    m = rows_kept[:, keep_cols].tocsr()
    c_e = np.asarray(rows_kept[:, ee_cols].todense())
    b_rows = system.matrix[ee_rows]
    b_e_rows = np.asarray(b_rows[:, keep_cols].todense())
    return PartitionedSystem(
        m=m,
        c_e=c_e,
        b=system.rhs[keep_rows],
        b_e_rows=b_e_rows,
        b_e=system.rhs[ee_rows],
        keep_rows=keep_rows,
        keep_cols=keep_cols,
        ee_rows=ee_rows,
        ee_cols=ee_cols,
        row_tags=tuple(system.row_tags[i] for i in keep_rows),
        index=system.index,
        end_effector=end_effector,
    )


def dump_system(system: GlobalSystem, directory) -> tuple[pathlib.Path, pathlib.Path]:
    """Write the assembled matrix and right-hand side in Matrix Market form."""
    out = pathlib.Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    matrix_path = out / "system.mtx"
    rhs_path = out / "rhs.mtx"
    scipy.io.mmwrite(matrix_path, system.matrix.tocoo())
    scipy.io.mmwrite(rhs_path, system.rhs.reshape(-1, 1))
    return matrix_path, rhs_path
