"""Equation-row blocks over per-node twist and wrench variable blocks.

Every constraint generator in the library emits a RowBlock: a group of
scalar equations whose coefficients touch a handful of 6-wide node variable
blocks.  Assembly later maps the blocks into global columns; until then the
rows stay symbolic in terms of (node id, variable kind).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

TWIST = "t"
WRENCH = "w"

__all__ = ["TWIST", "WRENCH", "RowBlock"]


@dataclass(frozen=True)
class RowBlock:
    """A group of rows: coeffs maps (node id, kind) to an (n_rows, 6) array."""

    coeffs: Mapping[tuple[str, str], np.ndarray]
    rhs: np.ndarray
    tag: str = ""

    def __post_init__(self) -> None:
        rhs = np.asarray(self.rhs, dtype=float)
        coeffs = {}
        n = rhs.shape[0]
        for key, mat in self.coeffs.items():
            node, kind = key
            if kind not in (TWIST, WRENCH):
                raise ValueError(f"unknown variable kind {kind!r} for node {node!r}")
            mat = np.asarray(mat, dtype=float)
            if mat.shape != (n, 6):
                raise ValueError(
                    f"coefficient block for {key} has shape {mat.shape}, expected ({n}, 6)"
                )
            coeffs[key] = mat
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n_rows(self) -> int:
        return self.rhs.shape[0]

    def with_tag(self, tag: str) -> "RowBlock":
        return RowBlock(self.coeffs, self.rhs, tag)

    def residual(self, values: Mapping[tuple[str, str], np.ndarray]) -> np.ndarray:
        """Evaluate rows minus rhs for a given variable assignment (tests)."""
        out = -self.rhs.copy()
        for key, mat in self.coeffs.items():
            out += mat @ np.asarray(values[key], dtype=float)
        return out
