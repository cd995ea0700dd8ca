"""Distributed attack-resilient observer layer.

Each follower integrates a local copy of the leader dynamics driven by an
adaptively amplified neighborhood signal:

    zeta' = S zeta + exp(theta) xi + gamma_ol
    theta' = q * xi' xi        (q > 0, so theta never decreases)

The exponential gain eventually dominates any injected signal whose norm
grows at most exponentially.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gains import LeaderModel
from .topology import Topology

log = logging.getLogger(__name__)

DEFAULT_GAIN_CAP = 700.0  # exp() overflows just above 709 in double precision


@dataclass
class ObserverState:
    """Runtime observer state of one follower."""

    zeta: np.ndarray
    theta: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("adaptation constant q must be positive")
        self.zeta = np.atleast_1d(np.asarray(self.zeta, dtype=float))


def neighborhood_xi(
    i: int,
    zetas: np.ndarray,
    leader_states: np.ndarray,
    topology: Topology,
) -> np.ndarray:
    """Relative information follower i gathers from its neighbors:
    sum_j a_ij (zeta_j - zeta_i) + sum_r g_ir (x_r - zeta_i)."""
    zetas = np.asarray(zetas, dtype=float)
    leader_states = np.asarray(leader_states, dtype=float)
    zi = zetas[i]
    xi = topology.adjacency[i] @ (zetas - zi)
    xi += topology.pinning[:, i] @ (leader_states - zi)
    return xi


def stacked_xi(
    zetas: np.ndarray, leader_states: np.ndarray, topology: Topology
) -> np.ndarray:
    """All followers' neighborhood signals as an (N, n) array."""
    adj = topology.adjacency
    deg = adj.sum(axis=1)
    pin = topology.pinning
    xi = adj @ zetas - deg[:, None] * zetas
    xi += pin.T @ leader_states - pin.sum(axis=0)[:, None] * zetas
    return xi


def observer_derivatives(
    state: ObserverState,
    xi_i: np.ndarray,
    gamma_ol: np.ndarray,
    leader: LeaderModel,
    gain_cap: float = DEFAULT_GAIN_CAP,
) -> tuple[np.ndarray, float]:
    """Right-hand sides (zeta', theta') of the observer dynamics.

    theta is clamped at gain_cap before exponentiation to avoid overflow;
    hitting the cap signals runaway adaptation and is logged.
    """
    theta = state.theta
    if theta > gain_cap:
        log.warning(
            "observer gain clamped: theta=%.3g exceeds cap %.3g", theta, gain_cap
        )
        theta = gain_cap
    dzeta = leader.S @ state.zeta + np.exp(theta) * xi_i + gamma_ol
    dtheta = state.q * float(xi_i @ xi_i)
    return dzeta, dtheta
