"""Simulated path records and their tabular forms."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd


@dataclass(eq=False)
class JumpLog:
    """Accepted events in time order.

    ``inputs`` is the increment b(y) nu(t, X_{t-}) fed to the excitation and
    ``index`` the position of the event among the driver's candidate points.
    """

    times: np.ndarray
    marks: np.ndarray
    dx: np.ndarray
    inputs: np.ndarray
    x_after: np.ndarray
    index: np.ndarray

    @classmethod
    def empty(cls) -> "JumpLog":
        return cls(*(np.empty(0) for _ in range(5)), index=np.empty(0, dtype=int))

    def __len__(self) -> int:
        return len(self.times)


@dataclass(eq=False)
class PathRecord:
    """Grid values of X and lambda for one path plus its jump log.

    ``lam`` holds the intensity evaluated at each grid time from the left-limit
    state; ``xi`` is filled by the lifted simulator only.
    """

    times: np.ndarray
    x: np.ndarray
    lam: np.ndarray
    w: np.ndarray
    jumps: JumpLog
    xi: Optional[np.ndarray] = None
    seed: Optional[int] = None
    kernel_name: str = ""
    candidates_evaluated: int = 0
    kernel_evaluations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_jumps(self) -> int:
        return len(self.jumps)

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    def accepted_indices(self) -> np.ndarray:
        return self.jumps.index

    def same_events(self, other: "PathRecord") -> bool:
        return np.array_equal(self.accepted_indices(), other.accepted_indices())

    def _events(self):
        # grid values are post-diffusion, so at equal times they come after jumps
        t = np.concatenate([self.jumps.times, self.times])
        v = np.concatenate([self.jumps.x_after, self.x])
        order = np.concatenate([np.zeros(len(self.jumps)), np.ones(len(self.times))])
        perm = np.lexsort((order, t))
        return t[perm], v[perm]

    def x_at(self, query) -> np.ndarray:
        """Right-continuous evaluation of the step path X at arbitrary times."""
        t, v = self._events()
        query = np.atleast_1d(np.asarray(query, dtype=float))
        idx = np.searchsorted(t, query, side="right") - 1
        return v[np.clip(idx, 0, None)]

    def change_times(self) -> np.ndarray:
        return np.union1d(self.times, self.jumps.times)

    def sup_abs_x(self) -> float:
        values = np.concatenate([self.x, self.jumps.x_after])
        return float(np.max(np.abs(values)))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times, "x": self.x, "lambda": self.lam})
        if self.xi is not None:
            for j in range(self.xi.shape[1]):
                frame[f"xi_{j + 1}"] = self.xi[:, j]
        return frame

    def jumps_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.jumps.times, "y": self.jumps.marks, "dx": self.jumps.dx})
