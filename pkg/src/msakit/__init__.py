"""Matrix structural analysis of serial and parallel manipulators.

Builds the stiffness model of a mechanism from a declarative description by
aggregating link, joint, and support constraint equations into one sparse
linear system, then extracts the Cartesian stiffness matrix, deflections,
and internal wrenches.
"""

from .assembly import (
    GlobalSystem,
    PartitionedSystem,
    VariableIndex,
    assemble,
    dump_system,
    index_variables,
    partition,
)
from .connections import (
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
    beam_rotation,
    beam_stiffness,
    custom_flexible_link,
)
from .errors import (
    EndEffectorMobilityError,
    MechanismMobilityError,
    ModelFormatError,
    ModelValidationError,
    SingularSystemError,
    StaticIndeterminacyError,
)
from .model import (
    ManipulatorModel,
    Node,
    ValidationReport,
    load_model,
    parse_model,
    validate,
)
from .screws import (
    Twist,
    Wrench,
    adjoint_rotation,
    rotate_stiffness,
    skew,
    transport_matrix,
    transport_wrench,
)
from .solver import (
    FullState,
    StiffnessResult,
    cartesian_stiffness,
    equilibrium_residual,
    solve_applied_wrench,
    solve_prescribed_deflection,
    support_reactions,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Twist", "Wrench", "skew", "transport_matrix", "adjoint_rotation",
    "rotate_stiffness", "transport_wrench",
    "Material", "CrossSection", "FlexibleLink", "RigidLink",
    "beam_stiffness", "beam_rotation", "beam_link", "custom_flexible_link",
    "SelectionBasis", "JointSpec", "SupportSpec", "LoadSpec", "complement_basis",
    "Node", "ManipulatorModel", "ValidationReport", "parse_model", "load_model",
    "validate",
    "VariableIndex", "GlobalSystem", "PartitionedSystem", "index_variables",
    "assemble", "partition", "dump_system",
    "StiffnessResult", "FullState", "cartesian_stiffness",
    "solve_prescribed_deflection", "solve_applied_wrench",
    "support_reactions", "equilibrium_residual",
    "ModelFormatError", "ModelValidationError", "SingularSystemError",
    "MechanismMobilityError", "StaticIndeterminacyError", "EndEffectorMobilityError",
]
