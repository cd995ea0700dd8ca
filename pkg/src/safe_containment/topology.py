"""Directed communication graphs linking followers and leaders.

The follower subgraph is a weighted digraph (entry ``a[i, j]`` is the
weight follower ``i`` places on information received from follower ``j``).
Each leader additionally pins a subset of followers through nonnegative
diagonal gain matrices.  From these the coupling matrices
``Phi_r = (1/M) L + G_r`` are assembled; their sum must be nonsingular
for the containment error to be well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TopologyError(ValueError):
    """Raised for graphs that cannot support containment control."""


@dataclass(frozen=True)
class Topology:
    """Time-invariant digraph of N followers and M leaders.

    adjacency : (N, N) nonnegative, zero diagonal.
    pinning   : (M, N) nonnegative; row r holds the diagonal of G_r.
    """

    adjacency: np.ndarray
    pinning: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=float)
        pin = np.asarray(self.pinning, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise TopologyError("adjacency must be a square matrix")
        if pin.ndim != 2 or pin.shape[1] != adj.shape[0]:
            raise TopologyError(
                "pinning must be (M, N) with N matching adjacency"
            )
        if pin.shape[0] < 1:
            raise TopologyError("at least one leader is required")
        if np.any(adj < 0) or np.any(pin < 0):
            raise TopologyError("edge and pinning weights must be nonnegative")
        if np.any(np.diag(adj) != 0):
            raise TopologyError("adjacency diagonal must be zero")
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "pinning", pin)

    @property
    def n_followers(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_leaders(self) -> int:
        return self.pinning.shape[0]


@dataclass(frozen=True)
class PhiFamily:
    """Coupling matrices Phi_r = (1/M) L + G_r and their sum."""

    phi: np.ndarray        # (M, N, N)
    phi_sum: np.ndarray    # (N, N)
    laplacian: np.ndarray  # (N, N)


def check_reachability(topology: Topology) -> set[int]:
    """Return the set of follower indices with no directed path from a leader.

    Information flows leader -> pinned follower -> followers that weight
    them, so the search walks forward along information-flow edges:
    follower j reaches follower i whenever a[i, j] > 0.
    """
    n = topology.n_followers
    reached = set(np.nonzero(topology.pinning.sum(axis=0) > 0)[0].tolist())
    frontier = list(reached)
    while frontier:
        j = frontier.pop()
        for i in np.nonzero(topology.adjacency[:, j] > 0)[0]:
            i = int(i)
            if i not in reached:
                reached.add(i)
                frontier.append(i)
    return set(range(n)) - reached


def build_phi_family(topology: Topology) -> PhiFamily:
    """Assemble the Laplacian and all Phi_r matrices for a valid topology.

    Uses the in-degree convention L = D_in - A with D_in = diag(row sums),
    so the stacked neighborhood signal equals -sum_r (Phi_r kron I) applied
    to the observer containment error.

    Raises TopologyError if some follower is unreachable from every leader,
    naming the offending followers.
    """
    unreachable = check_reachability(topology)
    if unreachable:
        raise TopologyError(
            "followers with no directed path from any leader: "
            f"{sorted(unreachable)}"
        )
    adj = topology.adjacency
    m = topology.n_leaders
    laplacian = np.diag(adj.sum(axis=1)) - adj
    phi = np.stack(
        [laplacian / m + np.diag(topology.pinning[r]) for r in range(m)]
    )
    phi_sum = phi.sum(axis=0)
    smin = np.linalg.svd(phi_sum, compute_uv=False)[-1]
    if smin <= 0:
        raise TopologyError("sum of Phi_r is singular")
    return PhiFamily(phi=phi, phi_sum=phi_sum, laplacian=laplacian)
