"""Resilient control input: nominal feedback plus adaptive attack compensation.

The nominal input is u_c = K x + H zeta.  The compensation term points
along B'P eps (eps = x - zeta) with an adaptive magnitude exp(rho_hat)
that grows at rate alpha * ||eps' P B||, eventually out-pacing any
exponentially growing injection on the input channel.  The regularizer
exp(-c t^2) keeps the denominator positive so the signal is smooth.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gains import GainSet
from .observer import DEFAULT_GAIN_CAP

log = logging.getLogger(__name__)


@dataclass
class CompensatorState:
    """Adaptive compensation state of one follower."""

    rho_hat: float = 0.0
    alpha: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.c <= 0:
            raise ValueError("alpha and c must be positive")


@dataclass(frozen=True)
class ControlBreakdown:
    """Control pipeline snapshot: nominal input, compensation, resilient
    input u_r = u_c - gamma_hat, and the corrupted value u_bar = u_r + gamma_a
    that reaches the safety filter."""

    u_c: np.ndarray
    gamma_hat: np.ndarray
    u_r: np.ndarray
    u_bar: np.ndarray


def conventional_input(
    gains: GainSet, x_i: np.ndarray, zeta_i: np.ndarray
) -> np.ndarray:
    """Nominal tracking input u_c = K x + H zeta."""
    return gains.K @ x_i + gains.H @ zeta_i


def compensation_signal(
    gains: GainSet,
    b: np.ndarray,
    eps_i: np.ndarray,
    comp: CompensatorState,
    t: float,
    gain_cap: float = DEFAULT_GAIN_CAP,
) -> np.ndarray:
    """Adaptive compensation
    B'P eps * exp(rho_hat) / (||eps' P B|| + exp(-c t^2))."""
    rho = comp.rho_hat
    if rho > gain_cap:
        log.warning(
            "compensation gain clamped: rho_hat=%.3g exceeds cap %.3g",
            rho,
            gain_cap,
        )
        rho = gain_cap
    s = gains.P @ np.atleast_2d(b)  # P symmetric, so B'P eps = (eps' P B)'
    numerator = s.T @ eps_i
    denom = np.linalg.norm(numerator) + np.exp(-comp.c * t * t)
    return numerator * (np.exp(rho) / denom)


def compensator_rate(
    gains: GainSet, b: np.ndarray, eps_i: np.ndarray, comp: CompensatorState
) -> float:
    """rho_hat' = alpha * ||eps' P B|| (always nonnegative)."""
    return comp.alpha * float(
        np.linalg.norm(eps_i @ gains.P @ np.atleast_2d(b))
    )


def corrupted_input(
    u_c: np.ndarray, gamma_hat: np.ndarray, gamma_a: np.ndarray
) -> ControlBreakdown:
    """Compose the resilient input and add the injected attack signal."""
    u_r = u_c - gamma_hat
    return ControlBreakdown(
        u_c=np.asarray(u_c, dtype=float),
        gamma_hat=np.asarray(gamma_hat, dtype=float),
        u_r=u_r,
        u_bar=u_r + gamma_a,
    )
