"""Trajectory record: paired <sigma^x> series of the two system qubits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Physicality bound for recorded expectation values.
VALUE_BOUND = 1.0 + 1e-8


@dataclass(frozen=True)
class Trajectory:
    """Ordered (<sx_1>, <sx_2>) samples indexed by collision count or time.

    Collision-model trajectories are indexed 1..n (one sample per completed
    cycle, no initial sample); master-equation trajectories start at t=0.
    """

    model: str
    index: np.ndarray
    sx1: np.ndarray
    sx2: np.ndarray

    def __post_init__(self):
        index = np.asarray(self.index, dtype=float)
        sx1 = np.asarray(self.sx1, dtype=float)
        sx2 = np.asarray(self.sx2, dtype=float)
        if not (len(index) == len(sx1) == len(sx2)):
            raise ValueError("index, sx1 and sx2 must have equal length")
        for name, arr in (("sx1", sx1), ("sx2", sx2)):
            if len(arr) and np.max(np.abs(arr)) > VALUE_BOUND:
                raise ValueError(f"{name} contains unphysical values (|v| > 1 + 1e-8)")
        for arr in (index, sx1, sx2):
            arr.flags.writeable = False
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "sx1", sx1)
        object.__setattr__(self, "sx2", sx2)

    def __len__(self) -> int:
        return len(self.index)

    def post_initial(self) -> "Trajectory":
        """Drop a leading t=0 sample if present (master-equation runs record
        the initial state; collision runs do not)."""
        if len(self.index) and self.index[0] == 0.0:
            return Trajectory(self.model, self.index[1:], self.sx1[1:], self.sx2[1:])
        return self
