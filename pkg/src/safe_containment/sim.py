"""Closed-loop simulation of the full agent stack.

A fixed-step classical RK4 integrator advances followers, leaders,
observer states, and both adaptive gains as one coupled ODE system.  The
control pipeline (neighborhood signal, observer rates, nominal input,
compensation, attack injection, safety filter) is re-evaluated inside
every integrator stage, so the filtered input is piecewise constant per
stage.

Three controller modes share the pipeline:

    saar             full stack: compensation plus safety filter
    resilient_unsafe compensation on, safety filter off
    conventional     compensation and filter off; attacks enter raw
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import safety
from .attacks import eval_stacked
from .gains import AgentModel, LeaderModel, synthesize_gains
from .scenario import ScenarioConfig
from .topology import PhiFamily, Topology, build_phi_family


class SimulationError(RuntimeError):
    """Raised when integration produces non-finite state."""


@dataclass
class WorldState:
    """Complete runtime state of a scenario at one instant."""

    t: float
    follower_x: np.ndarray  # (N, n)
    leader_x: np.ndarray    # (M, n)
    zeta: np.ndarray        # (N, n)
    theta: np.ndarray       # (N,)
    rho_hat: np.ndarray     # (N,)


@dataclass
class TraceRecord:
    """Per-sample log of every pipeline quantity."""

    t: float
    x: np.ndarray
    zeta: np.ndarray
    theta: np.ndarray
    rho_hat: np.ndarray
    u_c: np.ndarray
    gamma_hat: np.ndarray
    u_r: np.ndarray
    u_bar: np.ndarray
    u: np.ndarray
    delta_u: np.ndarray
    eps: np.ndarray
    e_c: np.ndarray
    delta_o: np.ndarray
    xi: np.ndarray
    pairs: list
    pair_distance: np.ndarray
    pair_h: np.ndarray
    pair_active: np.ndarray


def _hull_reference(leader_x: np.ndarray, phi: PhiFamily) -> np.ndarray:
    """The (N, n) convex-hull reference each follower is measured against:
    (sum_nu Phi_nu)^-1 sum_r (Phi_r 1) x_r, row per follower."""
    rows = np.zeros((phi.phi.shape[1], leader_x.shape[1]))
    for r in range(phi.phi.shape[0]):
        rows += np.outer(phi.phi[r].sum(axis=1), leader_x[r])
    return np.linalg.solve(phi.phi_sum, rows)


def containment_error(
    follower_x: np.ndarray, leader_x: np.ndarray, phi: PhiFamily
) -> np.ndarray:
    """Stacked containment error of all followers relative to the leaders'
    convex hull (zero iff every follower sits at its hull reference)."""
    follower_x = np.atleast_2d(np.asarray(follower_x, dtype=float))
    return (follower_x - _hull_reference(np.atleast_2d(leader_x), phi)).ravel()


def observer_containment_error(
    zetas: np.ndarray, leader_x: np.ndarray, phi: PhiFamily
) -> np.ndarray:
    """Containment error of the observer estimates (same reference)."""
    zetas = np.atleast_2d(np.asarray(zetas, dtype=float))
    return (zetas - _hull_reference(np.atleast_2d(leader_x), phi)).ravel()


class Engine:
    """Precompiled scenario: gains synthesized, arrays stacked, ready to step."""

    def __init__(self, scenario: ScenarioConfig):
        self.scenario = scenario
        sc = scenario
        self.n = sc.state_dim
        self.N = sc.n_followers
        self.M = sc.n_leaders
        self.S = np.asarray(sc.S, dtype=float)
        self.leader = LeaderModel(self.S)
        self.models = [AgentModel(f.A, f.B, f.Q, f.U) for f in sc.followers]
        self.gains = [synthesize_gains(m, self.leader) for m in self.models]

        self.A = np.stack([m.A for m in self.models])
        self.B = np.stack([m.B for m in self.models])
        self.K = np.stack([g.K for g in self.gains])
        self.H = np.stack([g.H for g in self.gains])
        self.PB = np.stack([g.P @ m.B for g, m in zip(self.gains, self.models)])

        self.topology: Topology = sc.topology
        self.phi: PhiFamily = build_phi_family(self.topology)
        self.adj = self.topology.adjacency
        self.deg = self.adj.sum(axis=1)
        self.pin = self.topology.pinning
        self.pin_total = self.pin.sum(axis=0)

        self.q = np.array([f.q for f in sc.followers])
        self.alpha = np.array([f.alpha for f in sc.followers])
        self.c = np.array([f.c for f in sc.followers])

        zero_m = np.zeros((self.N, self.models[0].m))
        zero_n = np.zeros((self.N, self.n))
        self.cil_coeff = np.stack(
            [
                f.attack_cil.coefficients if f.attack_cil else zero_m[i]
                for i, f in enumerate(sc.followers)
            ]
        )
        self.cil_rate = np.stack(
            [
                f.attack_cil.rates if f.attack_cil else zero_m[i]
                for i, f in enumerate(sc.followers)
            ]
        )
        self.ol_coeff = np.stack(
            [
                f.attack_ol.coefficients if f.attack_ol else zero_n[i]
                for i, f in enumerate(sc.followers)
            ]
        )
        self.ol_rate = np.stack(
            [
                f.attack_ol.rates if f.attack_ol else zero_n[i]
                for i, f in enumerate(sc.followers)
            ]
        )

        delta = np.asarray(sc.delta, dtype=float)
        if delta.ndim == 0:
            delta = np.full((self.N, self.N), float(delta))
        self.delta = delta
        self.pairs = list(itertools.combinations(range(self.N), 2))
        self._pair_i = np.array([p[0] for p in self.pairs], dtype=int)
        self._pair_j = np.array([p[1] for p in self.pairs], dtype=int)

        self.qp_infeasible_count = 0
        self.first_infeasible_time: float | None = None

        self._sizes = np.cumsum(
            [self.N * self.n, self.M * self.n, self.N * self.n, self.N]
        )

    # -- state packing ---------------------------------------------------

    def initial_world(self) -> WorldState:
        sc = self.scenario
        x0 = np.stack([f.x0 for f in sc.followers]).astype(float)
        zeta0 = np.stack(
            [
                f.zeta0 if f.zeta0 is not None else f.x0
                for f in sc.followers
            ]
        ).astype(float)
        return WorldState(
            t=0.0,
            follower_x=x0,
            leader_x=np.asarray(sc.leader_x0, dtype=float).copy(),
            zeta=zeta0,
            theta=np.zeros(self.N),
            rho_hat=np.zeros(self.N),
        )

    def _pack(self, w: WorldState) -> np.ndarray:
        return np.concatenate(
            [
                w.follower_x.ravel(),
                w.leader_x.ravel(),
                w.zeta.ravel(),
                w.theta,
                w.rho_hat,
            ]
        )

    def _unpack(self, y: np.ndarray):
        x, lead, zeta, theta, rho = np.split(y, self._sizes)
        return (
            x.reshape(self.N, self.n),
            lead.reshape(self.M, self.n),
            zeta.reshape(self.N, self.n),
            theta,
            rho,
        )

    # -- control pipeline -------------------------------------------------

    def _pipeline(self, t, x, leader_x, zeta, theta, rho, collect=False):
        sc = self.scenario
        mode = sc.controller_mode
        cap = sc.gain_cap

        xi = (
            self.adj @ zeta
            - (self.deg + self.pin_total)[:, None] * zeta
            + self.pin.T @ leader_x
        )
        gamma_ol = eval_stacked(
            self.ol_coeff, self.ol_rate, sc.attack_start, t, sc.absolute_clock
        )
        gamma_a = eval_stacked(
            self.cil_coeff, self.cil_rate, sc.attack_start, t, sc.absolute_clock
        )

        dleader = leader_x @ self.S.T
        exp_theta = np.exp(np.minimum(theta, cap))
        dzeta = zeta @ self.S.T + exp_theta[:, None] * xi + gamma_ol
        dtheta = self.q * np.einsum("ni,ni->n", xi, xi)

        eps = x - zeta
        u_c = (
            np.matmul(self.K, x[:, :, None]) + np.matmul(self.H, zeta[:, :, None])
        )[:, :, 0]

        if mode == "conventional":
            gamma_hat = np.zeros_like(u_c)
            drho = np.zeros(self.N)
            u_r = u_c
        else:
            s = np.matmul(eps[:, None, :], self.PB)[:, 0, :]
            ns = np.sqrt(np.einsum("ni,ni->n", s, s))
            denom = ns + np.exp(-self.c * t * t)
            gamma_hat = s * (np.exp(np.minimum(rho, cap)) / denom)[:, None]
            drho = self.alpha * ns
            u_r = u_c - gamma_hat
        u_bar = u_r + gamma_a

        if mode == "saar":
            try:
                results = safety.sequential_filter(
                    u_bar, x, self.models, self.delta, sc.d_s
                )
                u = np.stack([r.u for r in results])
            except safety.QPInfeasibleError:
                self.qp_infeasible_count += 1
                if self.first_infeasible_time is None:
                    self.first_infeasible_time = t
                results = None
                u = u_bar
        else:
            results = None
            u = u_bar

        dx = (
            np.matmul(self.A, x[:, :, None]) + np.matmul(self.B, u[:, :, None])
        )[:, :, 0]

        deriv = np.concatenate(
            [dx.ravel(), dleader.ravel(), dzeta.ravel(), dtheta, drho]
        )
        if not collect:
            return deriv
        return deriv, {
            "xi": xi,
            "eps": eps,
            "u_c": u_c,
            "gamma_hat": gamma_hat,
            "u_r": u_r,
            "u_bar": u_bar,
            "u": u,
            "results": results,
        }

    # -- integration -------------------------------------------------------

    def _rk4(self, t: float, y: np.ndarray, dt: float) -> np.ndarray:
        k1 = self._pipeline(t, *self._unpack(y))
        k2 = self._pipeline(t + dt / 2, *self._unpack(y + (dt / 2) * k1))
        k3 = self._pipeline(t + dt / 2, *self._unpack(y + (dt / 2) * k2))
        k4 = self._pipeline(t + dt, *self._unpack(y + dt * k3))
        return y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    def observe(self, world: WorldState) -> TraceRecord:
        """Evaluate the full pipeline at the world state and log it."""
        _, parts = self._pipeline(
            world.t,
            world.follower_x,
            world.leader_x,
            world.zeta,
            world.theta,
            world.rho_hat,
            collect=True,
        )
        e_c = containment_error(world.follower_x, world.leader_x, self.phi)
        delta_o = observer_containment_error(
            world.zeta, world.leader_x, self.phi
        )
        n_pairs = len(self.pairs)
        dist = np.zeros(n_pairs)
        h = np.zeros(n_pairs)
        active = np.zeros(n_pairs, dtype=bool)
        active_pairs = set()
        if parts["results"] is not None:
            for res in parts["results"]:
                active_pairs.update(tuple(p) for p in res.active_set)
        for k, (i, j) in enumerate(self.pairs):
            diff = world.follower_x[i] - world.follower_x[j]
            dist[k] = np.linalg.norm(diff)
            h[k] = self.scenario.d_s**2 - dist[k] ** 2
            active[k] = (i, j) in active_pairs
        return TraceRecord(
            t=world.t,
            x=world.follower_x.copy(),
            zeta=world.zeta.copy(),
            theta=world.theta.copy(),
            rho_hat=world.rho_hat.copy(),
            u_c=parts["u_c"],
            gamma_hat=parts["gamma_hat"],
            u_r=parts["u_r"],
            u_bar=parts["u_bar"],
            u=parts["u"],
            delta_u=parts["u"] - parts["u_bar"],
            eps=parts["eps"],
            e_c=e_c.reshape(self.N, self.n),
            delta_o=delta_o.reshape(self.N, self.n),
            xi=parts["xi"],
            pairs=list(self.pairs),
            pair_distance=dist,
            pair_h=h,
            pair_active=active,
        )

    def step(self, world: WorldState) -> tuple[WorldState, TraceRecord]:
        """Advance one RK4 step and log the resulting state."""
        dt = self.scenario.dt
        y = self._rk4(world.t, self._pack(world), dt)
        if not np.all(np.isfinite(y)):
            raise SimulationError(
                f"non-finite state after step at t={world.t + dt:.6f}"
            )
        x, lead, zeta, theta, rho = self._unpack(y)
        new = WorldState(
            t=world.t + dt,
            follower_x=x,
            leader_x=lead,
            zeta=zeta,
            theta=theta,
            rho_hat=rho,
        )
        return new, self.observe(new)


@dataclass
class RunResult:
    records: list[TraceRecord]
    summary: dict


def run(scenario: ScenarioConfig) -> RunResult:
    """Simulate a scenario over its horizon at the configured stride.

    The summary reports containment-error extremes, the minimum pairwise
    follower distance, first divergence-threshold crossing (if any), final
    adaptive gains, the number of infeasible safety QPs, and wall time.
    """
    engine = Engine(scenario)
    world = engine.initial_world()
    n_steps = int(round(scenario.horizon / scenario.dt))
    stride = scenario.output_stride

    t_start = time.perf_counter()
    records = [engine.observe(world)]
    min_pair = float(np.min(records[0].pair_distance)) if engine.pairs else np.inf
    ec_norms = [float(np.linalg.norm(records[0].e_c))]
    ec_times = [0.0]
    first_divergence = None

    y = engine._pack(world)
    for k in range(1, n_steps + 1):
        t = (k - 1) * scenario.dt
        y = engine._rk4(t, y, scenario.dt)
        if not np.all(np.isfinite(y)):
            raise SimulationError(f"non-finite state at t={t + scenario.dt:.6f}")
        x, lead, zeta, theta, rho = engine._unpack(y)
        t_new = k * scenario.dt

        ec = x - _hull_reference(lead, engine.phi)
        ec_norm = float(np.linalg.norm(ec))
        ec_norms.append(ec_norm)
        ec_times.append(t_new)
        if first_divergence is None and ec_norm > scenario.divergence_threshold:
            first_divergence = t_new
        if engine.pairs:
            diffs = x[engine._pair_i] - x[engine._pair_j]
            d = float(np.sqrt(np.einsum("ki,ki->k", diffs, diffs).min()))
            if d < min_pair:
                min_pair = d

        if k % stride == 0 or k == n_steps:
            world = WorldState(
                t=t_new, follower_x=x, leader_x=lead, zeta=zeta,
                theta=theta, rho_hat=rho,
            )
            records.append(engine.observe(world))
    wall = time.perf_counter() - t_start

    ec_norms = np.asarray(ec_norms)
    tail_start = int(len(ec_norms) * 0.7)
    summary = {
        "scenario": scenario.name,
        "mode": scenario.controller_mode,
        "horizon": scenario.horizon,
        "dt": scenario.dt,
        "max_ec": float(ec_norms.max()),
        "max_ec_tail": float(ec_norms[tail_start:].max()),
        "final_ec": float(ec_norms[-1]),
        "min_pair_distance": float(min_pair),
        "first_divergence_time": first_divergence,
        "final_theta": [float(v) for v in records[-1].theta],
        "final_rho_hat": [float(v) for v in records[-1].rho_hat],
        "qp_infeasible_count": engine.qp_infeasible_count,
        "first_infeasible_time": engine.first_infeasible_time,
        "wall_clock_s": wall,
    }
    return RunResult(records=records, summary=summary)
