"""Collision-avoidance safety filter.

Pairwise safety is encoded by the barrier h = d_s^2 - ||x_i - x_j||^2
(nonpositive while the pair is safe).  Requiring h' <= -delta * h yields
one affine inequality on the lower-indexed agent's input per pair; the
filtered input is the closest point to the requested input satisfying all
of that agent's inequalities, found with a small dense active-set solver.

Agents are processed backward: the highest-indexed agent keeps its
requested input, and each agent i < N solves a QP whose constraints use
the already-finalized inputs of all agents j > i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

QP_TOL = 1e-9


class QPInfeasibleError(RuntimeError):
    """Raised when a constraint set admits no input at all."""

    def __init__(self, message: str, pairs: list = None, agent: int = None):
        super().__init__(message)
        self.pairs = pairs or []
        self.agent = agent


@dataclass(frozen=True)
class PairConstraint:
    """Affine safety constraint a' u_i <= b for the follower pair (i, j)."""

    i: int
    j: int
    a: np.ndarray
    b: float
    delta: float
    h: float

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.j)


@dataclass(frozen=True)
class FilterResult:
    """Filtered input for one agent with its constraint activity."""

    u: np.ndarray
    delta_u: np.ndarray
    active_set: list = field(default_factory=list)


def cbf_value(x_i: np.ndarray, x_j: np.ndarray, d_s: float) -> float:
    """Barrier value d_s^2 - ||x_i - x_j||^2; nonpositive means safe."""
    if d_s <= 0:
        raise ValueError("d_s must be positive")
    diff = np.asarray(x_i, dtype=float) - np.asarray(x_j, dtype=float)
    return float(d_s * d_s - diff @ diff)


def build_constraint(
    i: int,
    j: int,
    states: np.ndarray,
    models,
    u_j: np.ndarray,
    delta_ij: float,
    d_s: float,
) -> PairConstraint:
    """Constraint on u_i for the pair (i, j), given agent j's finalized input.

    With r = x_i - x_j the barrier derivative along the joint dynamics is
    -2 r' (A_i x_i + B_i u_i - A_j x_j - B_j u_j), so h' <= -delta * h
    rearranges to (-2 r' B_i) u_i <= -delta*h + 2 r'(A_i x_i) + ... with
    the j-side terms moved to the right-hand side.
    """
    x_i, x_j = states[i], states[j]
    r = x_i - x_j
    h = d_s * d_s - r @ r
    lf = -2.0 * (r @ (models[i].A @ x_i))
    a = -2.0 * (r @ models[i].B)
    b = (
        -delta_ij * h
        - 2.0 * (r @ (models[j].A @ x_j))
        - 2.0 * (r @ (models[j].B @ u_j))
        - lf
    )
    return PairConstraint(i=i, j=j, a=a, b=float(b), delta=delta_ij, h=float(h))


def solve_agent_qp(
    u_bar: np.ndarray,
    constraints: list[PairConstraint],
    tol: float = QP_TOL,
    max_iter: int = 100,
) -> FilterResult:
    """Project u_bar onto the polyhedron {u : a_k' u <= b_k}.

    Dual active-set iteration (Goldfarb-Idnani scheme specialized to an
    identity Hessian): start at the unconstrained optimum u_bar, repeatedly
    pick the most violated constraint and push its multiplier up, moving
    along the projection of its gradient onto the null space of the active
    rows.  A blocking multiplier hitting zero drops its constraint; a zero
    step direction with no blocking constraint certifies infeasibility.
    Problems here have at most a handful of rows, so dense solves are cheap.
    """
    u_bar = np.asarray(u_bar, dtype=float)
    if not constraints:
        return FilterResult(u=u_bar.copy(), delta_u=np.zeros_like(u_bar))

    rows = np.array([c.a for c in constraints], dtype=float)
    rhs = np.array([c.b for c in constraints], dtype=float)
    scale = np.maximum(1.0, np.abs(rhs))

    # Fast path: the requested input already satisfies every constraint.
    if np.all(rows @ u_bar - rhs <= tol * scale):
        return FilterResult(u=u_bar.copy(), delta_u=np.zeros_like(u_bar))

    u = u_bar.copy()
    active: list[int] = []
    lam: list[float] = []
    for _ in range(max_iter):
        viol = rows @ u - rhs
        p = int(np.argmax(viol / scale))
        if viol[p] <= tol * scale[p]:
            pairs = [constraints[k].pair for k in active]
            return FilterResult(u=u, delta_u=u - u_bar, active_set=pairs)
        cp = rows[p]
        cc = float(cp @ cp)
        lam_p = 0.0
        for _ in range(max_iter):
            if active:
                n_mat = rows[active]
                r = -np.linalg.solve(n_mat @ n_mat.T, n_mat @ cp)
                z = cp + n_mat.T @ r
            else:
                r = np.zeros(0)
                z = cp
            zz = float(z @ z)
            s_p = float(cp @ u - rhs[p])
            # full step reaches the violated constraint's boundary
            t_full = s_p / zz if zz > 1e-12 * max(cc, 1e-300) else np.inf
            # partial step where an active multiplier would turn negative
            t_part = np.inf
            block = -1
            for idx in range(len(active)):
                if r[idx] < -1e-12:
                    cand = -lam[idx] / r[idx]
                    if cand < t_part:
                        t_part, block = cand, idx
            step = min(t_full, t_part)
            if not np.isfinite(step):
                pairs = [constraints[k].pair for k in active]
                pairs.append(constraints[p].pair)
                raise QPInfeasibleError(
                    f"no input satisfies constraints for pairs {pairs}",
                    pairs=pairs,
                )
            u = u - step * z
            lam = [lv + step * rv for lv, rv in zip(lam, r)]
            lam_p += step
            if t_full <= t_part:
                active.append(p)
                lam.append(lam_p)
                break
            active.pop(block)
            lam.pop(block)
    raise QPInfeasibleError(
        "active-set iteration cap exceeded",
        pairs=[c.pair for c in constraints],
    )


def sequential_filter(
    u_bars: np.ndarray,
    states: np.ndarray,
    models,
    delta: np.ndarray,
    d_s: float,
) -> list[FilterResult]:
    """Backward sweep over agents: u_N stays as requested, then each lower
    index is filtered against all higher-indexed, already-finalized inputs.

    delta may be a scalar or an (N, N) array of per-pair constraint rates.
    """
    n_agents = len(u_bars)
    delta = np.asarray(delta, dtype=float)
    if delta.ndim == 0:
        delta = np.full((n_agents, n_agents), float(delta))
    results: list[FilterResult] = [None] * n_agents
    final_u = [None] * n_agents

    last = n_agents - 1
    u_last = np.asarray(u_bars[last], dtype=float).copy()
    results[last] = FilterResult(u=u_last, delta_u=np.zeros_like(u_last))
    final_u[last] = u_last

    for i in range(n_agents - 2, -1, -1):
        constraints = [
            build_constraint(i, j, states, models, final_u[j], delta[i, j], d_s)
            for j in range(i + 1, n_agents)
        ]
        try:
            results[i] = solve_agent_qp(np.asarray(u_bars[i], dtype=float), constraints)
        except QPInfeasibleError as err:
            err.agent = i
            raise
        final_u[i] = results[i].u
    return results
