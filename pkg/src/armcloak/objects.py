"""Rigid object state shared by the compositor and the scenario simulator."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import Pose, Primitive


@dataclass(frozen=True)
class RigidObjectState:
    """Pose of the gravity center plus body-frame geometry and flat color."""

    pose: Pose
    geometry: tuple[Primitive, ...]
    color: tuple[int, int, int, int] = (60, 90, 200, 255)

    def __post_init__(self):
        if len(self.geometry) < 1:
            raise ValueError("object needs at least one primitive")

    def max_half_extent(self) -> float:
        return max(p.max_extent() for p in self.geometry)

    def world_primitives(self) -> list[Primitive]:
        return [p.transformed(self.pose) for p in self.geometry]
