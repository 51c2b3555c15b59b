"""Entanglement-routing simulator for quantum repeater grids with a DQN scheduler."""

from .demand import DemandSet, Request, generate_demands, pending
from .entanglement import (
    AttemptResult,
    ContractViolation,
    NetworkState,
    Path,
    PathError,
    PhysParams,
    attempt_path,
    feasible,
    path_fidelity,
    qubit_cost,
)
from .env import (
    EnvConfig,
    Episode,
    EpisodeRecord,
    Observation,
    RewardParams,
    StepOutcome,
    encode_state,
    evaluate,
    evaluate_parallel,
    reward,
    select_action,
    train,
)
from .qlearn import (
    Mlp,
    ReplayBuffer,
    TrainConfig,
    Transition,
    forward,
    grad_check,
    mlp_init,
    sync_target,
    td_target,
    train_step,
)
from .routing import (
    ActionMask,
    CandidateSet,
    build_action_mask,
    compute_candidates,
    k_shortest_paths,
    policy_random,
    policy_shortest,
    shortest_path,
)
from .topology import (
    ConfigError,
    Edge,
    Topology,
    TopologyConfig,
    grid_topology,
    load_topology,
    neighbors,
    save_topology,
)

__version__ = "0.1.0"
