"""Attack-resilient, collision-free containment control for heterogeneous
linear multi-agent systems: gain synthesis, distributed resilient
observers, adaptive input compensation, a barrier-based safety filter,
and a deterministic fixed-step simulator."""

from .attacks import AttackProfile, ExpSignal, eval_attack
from .compensation import (
    CompensatorState,
    ControlBreakdown,
    compensation_signal,
    compensator_rate,
    conventional_input,
    corrupted_input,
)
from .gains import (
    AgentModel,
    GainSet,
    GainSynthesisError,
    LeaderModel,
    check_leader_assumption,
    solve_care,
    solve_regulator,
    synthesize_gains,
)
from .observer import ObserverState, neighborhood_xi, observer_derivatives
from .safety import (
    FilterResult,
    PairConstraint,
    QPInfeasibleError,
    build_constraint,
    cbf_value,
    sequential_filter,
    solve_agent_qp,
)
from .scenario import ScenarioConfig, ScenarioError, load_scenario
from .sim import (
    Engine,
    RunResult,
    SimulationError,
    TraceRecord,
    WorldState,
    containment_error,
    observer_containment_error,
    run,
)
from .topology import (
    PhiFamily,
    Topology,
    TopologyError,
    build_phi_family,
    check_reachability,
)

__all__ = [
    "AgentModel",
    "AttackProfile",
    "CompensatorState",
    "ControlBreakdown",
    "Engine",
    "ExpSignal",
    "FilterResult",
    "GainSet",
    "GainSynthesisError",
    "LeaderModel",
    "ObserverState",
    "PairConstraint",
    "PhiFamily",
    "QPInfeasibleError",
    "RunResult",
    "ScenarioConfig",
    "ScenarioError",
    "SimulationError",
    "Topology",
    "TopologyError",
    "TraceRecord",
    "WorldState",
    "build_constraint",
    "build_phi_family",
    "cbf_value",
    "check_leader_assumption",
    "check_reachability",
    "compensation_signal",
    "compensator_rate",
    "containment_error",
    "conventional_input",
    "corrupted_input",
    "eval_attack",
    "load_scenario",
    "neighborhood_xi",
    "observer_containment_error",
    "observer_derivatives",
    "run",
    "sequential_filter",
    "solve_agent_qp",
    "solve_care",
    "solve_regulator",
    "synthesize_gains",
]

__version__ = "0.1.0"
