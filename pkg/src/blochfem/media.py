"""Coefficient-field descriptions for the wave-guide media.

A medium maps points to values of the positive coefficient a(x).  The left
and right half-planes each carry one medium; `TwoSided` glues them along
x1 = 0.  `far_field()` returns the periodic medium seen by the radiation
box on that side, which is what the Bloch eigenproblems are solved with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ConstantMedium", "DiscArrayMedium", "SlabMedium", "TwoSided", "medium_from_dict"]

#: reference crystal: air discs (a = 1) of radius 0.35/sqrt(2) on the
#: cell-edge midpoints, embedded in a dielectric matrix with a = 1/12.
#: The disc lattice is the 45-degree-rotated square lattice of pitch
#: 1/sqrt(2), i.e. two discs per unit cell.
DISC_RADIUS = 0.35 / math.sqrt(2.0)
DISC_CENTERS = ((0.5, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 0.5))
DISC_INSIDE = 1.0
DISC_OUTSIDE = 1.0 / 12.0


@dataclass(frozen=True)
class ConstantMedium:
    value: float = 1.0

    def values(self, x1, x2, eps):
        return np.full(np.shape(x1), self.value)

    def far_field(self):
        return self

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class DiscArrayMedium:
    """Periodic array of discs centered on the cell-edge midpoints.

    Defaults describe the reference crystal (air discs in a dielectric
    matrix); pass explicit values for other contrasts.
    """

    inside_value: float = DISC_INSIDE
    radius: float = DISC_RADIUS
    centers: tuple = DISC_CENTERS
    outside_value: float = DISC_OUTSIDE

    def values(self, x1, x2, eps):
        # unit-cell coordinates; centers are specified on [0,1]^2
        y1 = np.mod(np.asarray(x1) / eps, 1.0)
        y2 = np.mod(np.asarray(x2) / eps, 1.0)
        inside = np.zeros(np.shape(y1), dtype=bool)
        for c1, c2 in self.centers:
            inside |= (y1 - c1) ** 2 + (y2 - c2) ** 2 < self.radius**2
        return np.where(inside, self.inside_value, self.outside_value)

    def far_field(self):
        return self

    def to_dict(self):
        return {
            "kind": "disc_array",
            "inside_value": self.inside_value,
            "radius": self.radius,
            "centers": [list(c) for c in self.centers],
            "outside_value": self.outside_value,
        }


@dataclass(frozen=True)
class SlabMedium:
    """A crystal slab of finite width embedded in a homogeneous background.

    The core pattern fills x1 in [anchor, anchor + width_cells*eps); outside
    the slab the coefficient is `outside_value`, which is also the far-field
    medium of the radiation box on this side.
    """

    core: DiscArrayMedium = field(default_factory=DiscArrayMedium)
    width_cells: int = 10
    anchor: float = 0.0
    outside_value: float = 1.0

    def values(self, x1, x2, eps):
        x1 = np.asarray(x1, dtype=float)
        inside = (x1 >= self.anchor) & (x1 < self.anchor + self.width_cells * eps)
        core_vals = self.core.values(x1, x2, eps)
        return np.where(inside, core_vals, self.outside_value)

    def far_field(self):
        return ConstantMedium(self.outside_value)

    def to_dict(self):
        return {
            "kind": "slab",
            "core": self.core.to_dict(),
            "width_cells": self.width_cells,
            "anchor": self.anchor,
            "outside_value": self.outside_value,
        }


@dataclass(frozen=True)
class TwoSided:
    """Global coefficient: `minus` on x1 < 0, `plus` on x1 >= 0."""

    minus: object
    plus: object

    def values(self, x1, x2, eps):
        x1 = np.asarray(x1, dtype=float)
        return np.where(x1 < 0, self.minus.values(x1, x2, eps), self.plus.values(x1, x2, eps))

    def side(self, side: str):
        return self.minus if side == "-" else self.plus


def medium_from_dict(d: dict):
    """Parse a medium description from its JSON form."""
    kind = d.get("kind")
    if kind == "constant":
        return ConstantMedium(value=float(d["value"]))
    if kind == "disc_array":
        return DiscArrayMedium(
            inside_value=float(d.get("inside_value", DISC_INSIDE)),
            radius=float(d.get("radius", DISC_RADIUS)),
            centers=tuple(tuple(c) for c in d.get("centers", DISC_CENTERS)),
            outside_value=float(d.get("outside_value", DISC_OUTSIDE)),
        )
    if kind == "slab":
        core = d.get("core", {"kind": "disc_array"})
        return SlabMedium(
            core=medium_from_dict(core),
            width_cells=int(d.get("width_cells", 10)),
            anchor=float(d.get("anchor", 0.0)),
            outside_value=float(d.get("outside_value", 1.0)),
        )
    raise ValueError(f"unknown medium kind {kind!r}")
