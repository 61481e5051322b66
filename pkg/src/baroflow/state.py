"""Discrete flow state: nodal density, nodal velocity components, time stamp."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import StructuredTriMesh


@dataclass(frozen=True, eq=False)
class State:
    """Nodal fields at one time level.

    rho: (n_nodes,) density, expected positive.
    u: (2, n_nodes) velocity components; wall-normal entries are exactly zero.
    t: time stamp.
    """

    rho: np.ndarray
    u: np.ndarray
    t: float

    @property
    def n_nodes(self) -> int:
        return self.rho.shape[0]

    def stacked(self) -> np.ndarray:
        """Unknowns as one vector, density block first, then u1, then u2."""
        return np.concatenate([self.rho, self.u[0], self.u[1]])


def state_from_stacked(x: np.ndarray, t: float) -> State:
    n = x.shape[0] // 3
    return State(rho=x[:n].copy(), u=np.vstack([x[n:2 * n], x[2 * n:]]), t=t)


def validate_state(state: State, mesh: StructuredTriMesh):
    if state.rho.shape != (mesh.n_nodes,):
        raise ValueError(f"density has shape {state.rho.shape}, expected ({mesh.n_nodes},)")
    if state.u.shape != (2, mesh.n_nodes):
        raise ValueError(f"velocity has shape {state.u.shape}, expected (2, {mesh.n_nodes})")
    for c in range(2):
        pinned = state.u[c, mesh.dirichlet_nodes(c)]
        if np.any(pinned != 0.0):
            raise ValueError(f"wall-normal velocity component {c + 1} not zero on its walls")
