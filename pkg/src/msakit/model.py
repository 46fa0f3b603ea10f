"""The manipulator description graph, its validation, and the model format.

A model is a set of placed nodes, links whose ends those nodes are, and one
binding per node: a joint, a support, or an external-load declaration (free
link ends carry a zero-wrench load).  Nodes joined together stay separate
variables; constraint rows tie them, never row/column merging.

Models are immutable after parsing and safe for concurrent reads.

The file format is a UTF-8 JSON document::

    {
      "msa_version": 1,
      "nodes":    [{"id": str, "position": [x, y, z]}, ...],
      "links":    [{"id": str, "type": "beam"|"rigid"|"custom",
                    "nodes": [i, j],
                    "material": {"E": .., "G": ..},          # beam
                    "section": {"A": .., "Iy": .., "Iz": .., "J": ..},
                    "orientation_hint": [x, y, z],           # beam, optional
                    "K": [144 numbers, row-major, global]},  # custom
                   ...],
      "joints":   [{"id": str, "type": "rigid"|"passive"|"elastic"|"actuated",
                    "nodes": [..], "free_twists": [[6 numbers], ...],
                    "stiffness": [e*e numbers, row-major],
                    "preload": [e numbers],
                    "mode": "locked"|"drive_stiffness"}, ...],
      "supports": [{"node": str, "type": "rigid"|"passive"|"elastic",
                    "free_twists": ..., "stiffness": ..., "preload": ...}, ...],
      "loads":    [{"node": str, "wrench": [Fx, Fy, Fz, Mx, My, Mz]}, ...],
      "end_effector": str
    }

All numbers are SI; matrices row-major.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .connections import (
    COINCIDENCE_TOL,
    JointSpec,
    LoadSpec,
    SelectionBasis,
    SupportSpec,
    complement_basis,
)
from .elements import (
    CrossSection,
    FlexibleLink,
    Material,
    RigidLink,
    beam_link,
    custom_flexible_link,
)
from .errors import ModelFormatError
from .screws import Wrench

__all__ = [
    "MODEL_FORMAT_VERSION",
    "Node",
    "LinkDecl",
    "ManipulatorModel",
    "ValidationIssue",
    "ValidationReport",
    "parse_model",
    "load_model",
    "validate",
]

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Node:
    """A placed link-end node."""

    id: str
    position: np.ndarray

    def __post_init__(self) -> None:
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ModelFormatError(f"node {self.id!r} position must be a finite 3-vector")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class LinkDecl:
    """A link together with its model-level identifier."""

    id: str
    element: Union[FlexibleLink, RigidLink]


@dataclass(frozen=True)
class ManipulatorModel:
    """Validated-parse result: the full node/link/joint/support/load graph."""

    nodes: tuple[Node, ...]
    links: tuple[LinkDecl, ...]
    joints: tuple[JointSpec, ...]
    supports: tuple[SupportSpec, ...]
    loads: tuple[LoadSpec, ...]
    end_effector: str

    @property
    def positions(self) -> dict[str, np.ndarray]:
        return {n.id: n.position for n in self.nodes}

    def node_count(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    entity: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of structural validation; counts are reported even on error."""

    errors: tuple[ValidationIssue, ...]
    warnings: tuple[ValidationIssue, ...]
    equation_count: int
    unknown_count: int

    @property
    def ok(self) -> bool:
        return not self.errors


def _require(obj, key, kind, where):
    if key not in obj:
        raise ModelFormatError(f"{where}: missing required key {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ModelFormatError(f"{where}: key {key!r} has the wrong type")
    return value


def _matrix(flat, side, where) -> np.ndarray:
    arr = np.asarray(flat, dtype=float).reshape(-1)
    if arr.size != side * side:
        raise ModelFormatError(
            f"{where}: expected {side * side} row-major entries, got {arr.size}"
        )
    return arr.reshape(side, side)


def _basis_from(entry, where) -> SelectionBasis:
    twists = _require(entry, "free_twists", list, where)
    try:
        return complement_basis(np.asarray(twists, dtype=float))
    except ValueError as exc:
        raise ModelFormatError(f"{where}: bad free_twists: {exc}") from exc


def _parse_link(entry, index, nodes: dict[str, Node]) -> LinkDecl:
    where = f"links[{index}]"
    link_id = str(_require(entry, "id", str, where))
    where = f"link {link_id!r}"
    kind = _require(entry, "type", str, where)
    pair = _require(entry, "nodes", list, where)
    if len(pair) != 2:
        raise ModelFormatError(f"{where}: a link has exactly two end nodes")
    ni, nj = (str(n) for n in pair)
    for n in (ni, nj):
        if n not in nodes:
            raise ModelFormatError(f"{where}: unknown node reference {n!r}")
    p_i, p_j = nodes[ni].position, nodes[nj].position
    try:
        if kind == "beam":
            mat_entry = _require(entry, "material", dict, where)
            sec_entry = _require(entry, "section", dict, where)
            mat = Material(
                float(_require(mat_entry, "E", None, where)),
                float(_require(mat_entry, "G", None, where)),
            )
            sec = CrossSection(
                float(_require(sec_entry, "A", None, where)),
                float(_require(sec_entry, "Iy", None, where)),
                float(_require(sec_entry, "Iz", None, where)),
                float(_require(sec_entry, "J", None, where)),
            )
            hint = entry.get("orientation_hint")
            element = beam_link(ni, nj, mat, sec, p_i, p_j, hint)
        elif kind == "rigid":
            element = RigidLink(ni, nj, p_j - p_i)
        elif kind == "custom":
            k = _matrix(_require(entry, "K", list, where), 12, where)
            element = custom_flexible_link(ni, nj, k, p_j - p_i)
        else:
            raise ModelFormatError(f"{where}: unknown link type {kind!r}")
    except ValueError as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc
    return LinkDecl(link_id, element)


def _parse_joint(entry, index, nodes: dict[str, Node]) -> JointSpec:
    where = f"joints[{index}]"
    joint_id = str(_require(entry, "id", str, where))
    where = f"joint {joint_id!r}"
    kind = _require(entry, "type", str, where)
    node_ids = tuple(str(n) for n in _require(entry, "nodes", list, where))
    for n in node_ids:
        if n not in nodes:
            raise ModelFormatError(f"{where}: unknown node reference {n!r}")
    basis = stiffness = preload = mode = None
    if kind in ("passive", "elastic") or (
        kind == "actuated" and entry.get("mode") == "drive_stiffness"
    ):
        basis = _basis_from(entry, where)
    if kind == "elastic" or (kind == "actuated" and entry.get("mode") == "drive_stiffness"):
        e = basis.n_free
        stiffness = _matrix(_require(entry, "stiffness", list, where), e, where)
        if "preload" in entry:
            preload = np.asarray(entry["preload"], dtype=float)
    if kind == "actuated":
        mode = str(_require(entry, "mode", str, where))
    try:
        return JointSpec(kind, node_ids, basis, stiffness, preload, mode, id=joint_id)
    except ValueError as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def _parse_support(entry, index, nodes: dict[str, Node]) -> SupportSpec:
    where = f"supports[{index}]"
    node = str(_require(entry, "node", str, where))
    where = f"support at {node!r}"
    if node not in nodes:
        raise ModelFormatError(f"{where}: unknown node reference {node!r}")
    kind = _require(entry, "type", str, where)
    basis = stiffness = preload = None
    if kind in ("passive", "elastic"):
        basis = _basis_from(entry, where)
    if kind == "elastic":
        stiffness = _matrix(_require(entry, "stiffness", list, where), basis.n_free, where)
        if "preload" in entry:
            preload = np.asarray(entry["preload"], dtype=float)
    try:
        return SupportSpec(node, kind, basis, stiffness, preload)
    except ValueError as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def _parse_load(entry, index, nodes: dict[str, Node]) -> LoadSpec:
    where = f"loads[{index}]"
    node = str(_require(entry, "node", str, where))
    if node not in nodes:
        raise ModelFormatError(f"load at {node!r}: unknown node reference {node!r}")
    wrench = np.asarray(_require(entry, "wrench", list, f"load at {node!r}"), dtype=float)
    if wrench.shape != (6,):
        raise ModelFormatError(f"load at {node!r}: wrench must have 6 entries")
    return LoadSpec(node, Wrench.from_vector(wrench))


def parse_model(text: str) -> ManipulatorModel:
    """Parse a model document into a fully resolved ManipulatorModel.

    Raises ModelFormatError for syntax errors (with line/column), unknown
    node references, duplicate identifiers, bad matrices, or a missing
    end-effector declaration.  Graph-level consistency is checked separately
    by validate().
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("msa_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported msa_version {version!r} (this build reads version "
            f"{MODEL_FORMAT_VERSION})"
        )

    nodes: dict[str, Node] = {}
    order: list[Node] = []
    for i, entry in enumerate(_require(doc, "nodes", list, "document")):
        node_id = str(_require(entry, "id", str, f"nodes[{i}]"))
        if node_id in nodes:
            raise ModelFormatError(f"duplicate node id {node_id!r}")
        node = Node(node_id, np.asarray(_require(entry, "position", list, node_id), dtype=float))
        nodes[node_id] = node
        order.append(node)

    links: list[LinkDecl] = []
    seen_links: set[str] = set()
    for i, entry in enumerate(doc.get("links", [])):
        decl = _parse_link(entry, i, nodes)
        if decl.id in seen_links:
            raise ModelFormatError(f"duplicate link id {decl.id!r}")
        seen_links.add(decl.id)
        links.append(decl)

    joints: list[JointSpec] = []
    seen_joints: set[str] = set()
    for i, entry in enumerate(doc.get("joints", [])):
        spec = _parse_joint(entry, i, nodes)
        if spec.id in seen_joints:
            raise ModelFormatError(f"duplicate joint id {spec.id!r}")
        seen_joints.add(spec.id)
        joints.append(spec)

    supports = [_parse_support(e, i, nodes) for i, e in enumerate(doc.get("supports", []))]
    loads = [_parse_load(e, i, nodes) for i, e in enumerate(doc.get("loads", []))]

    if "end_effector" not in doc:
        raise ModelFormatError("missing end_effector declaration")
    ee = str(doc["end_effector"])
    if ee not in nodes:
        raise ModelFormatError(f"end_effector references unknown node {ee!r}")

    return ManipulatorModel(
        tuple(order), tuple(links), tuple(joints), tuple(supports), tuple(loads), ee
    )


def load_model(path) -> ManipulatorModel:
    """Read and parse a model file."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


def equation_count(model: ManipulatorModel) -> int:
    """Scalar equation count: 12 per link, 6m per m-node joint, 6 per
    support, 6 per loaded node."""
    total = 12 * len(model.links)
    total += sum(6 * len(j.nodes) for j in model.joints)
    total += 6 * len(model.supports)
    total += 6 * len(model.loads)
    return total


def validate(model: ManipulatorModel) -> ValidationReport:
    """Check the model graph invariants; never raises.

    Verifies that every node is exactly one link end and bound by exactly
    one joint/support/load, that joined nodes coincide, that the end
    effector is an unsupported loaded node, and that the scalar equation
    count matches 12 x nodes.
    """
    errors: list[ValidationIssue] = []
    warnings: list[ValidationIssue] = []
    positions = model.positions

    link_ends: dict[str, int] = {n.id: 0 for n in model.nodes}
    for decl in model.links:
        for end in (decl.element.node_i, decl.element.node_j):
            link_ends[end] += 1
        if decl.element.node_i == decl.element.node_j:
            errors.append(ValidationIssue("link-self-loop", "link joins a node to itself", decl.id))
    for node_id, count in link_ends.items():
        if count == 0:
            errors.append(
                ValidationIssue("node-no-link", "node is not an end of any link", node_id)
            )
        elif count > 1:
            errors.append(
                ValidationIssue(
                    "node-multi-link", f"node is an end of {count} links (exactly one allowed)",
                    node_id,
                )
            )

    bindings: dict[str, list[str]] = {n.id: [] for n in model.nodes}
    for joint in model.joints:
        for n in joint.nodes:
            bindings[n].append(f"joint {joint.id}")
    for support in model.supports:
        bindings[support.node].append(f"support at {support.node}")
    for load in model.loads:
        bindings[load.node].append(f"load at {load.node}")
    for node_id, bound in bindings.items():
        if not bound:
            errors.append(
                ValidationIssue(
                    "node-unbound", "node not bound to joint/support/load", node_id
                )
            )
        elif len(bound) > 1:
            errors.append(
                ValidationIssue(
                    "node-multi-bound",
                    f"node bound more than once: {', '.join(bound)}",
                    node_id,
                )
            )

    for joint in model.joints:
        ref = positions[joint.nodes[0]]
        for n in joint.nodes[1:]:
            if np.linalg.norm(positions[n] - ref) > COINCIDENCE_TOL:
                errors.append(
                    ValidationIssue(
                        "joint-noncoincident",
                        f"joined nodes {joint.nodes[0]!r} and {n!r} do not coincide",
                        joint.id,
                    )
                )

    ee = model.end_effector
    if any(s.node == ee for s in model.supports):
        errors.append(
            ValidationIssue("ee-supported", "end-effector node carries a support", ee)
        )
    if not any(l.node == ee for l in model.loads):
        errors.append(
            ValidationIssue(
                "ee-not-loaded",
                "end-effector node must be declared as a loaded link end",
                ee,
            )
        )

    n_eq = equation_count(model)
    n_unknown = 12 * model.node_count()
    if n_eq != n_unknown:
        errors.append(
            ValidationIssue(
                "count-mismatch",
                f"{n_eq} equations for {n_unknown} unknowns; the system is not square",
                "",
            )
        )
    return ValidationReport(tuple(errors), tuple(warnings), n_eq, n_unknown)
