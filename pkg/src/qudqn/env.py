"""MDP wrapper: state encoding, reward, masked action selection, training loop.

State vector layout (all components in [0, 1]), for N nodes, M edges and K
request slots:

    [0, N)                 residual qubits per node / that node's capacity
    [N, N+M)               residual channel units per edge / that edge's capacity
    [N+M, N+M+K*(2N+1))    per request slot: src one-hot (N), dst one-hot (N),
                           pending flag (1); all zeros once the slot is no
                           longer pending
    last 3                 p_e, q_v, f_min

Action ids enumerate (request slot, candidate path slot) row-major, so
action = slot * k_paths + path_slot. The recursive discounted term of the
reward recursion is supplied by the TD bootstrap during training rather
than folded into the immediate reward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .demand import DemandSet, RESOLVED, generate_demands, pending
from .entanglement import (
    AttemptResult,
    ContractViolation,
    NetworkState,
    PhysParams,
    attempt_path,
)
from .qlearn import (
    Mlp,
    ReplayBuffer,
    TrainConfig,
    Transition,
    assert_finite,
    forward,
    mlp_init,
    sync_target,
    train_step,
)
from .routing import (
    build_action_mask,
    compute_candidates,
    policy_random,
    policy_shortest,
)
from .topology import ConfigError, Topology, TopologyConfig, grid_topology

POLICY_AGENT = "qudqn"
POLICY_SHORTEST = "shortest"
POLICY_RANDOM = "random"
POLICIES = (POLICY_AGENT, POLICY_SHORTEST, POLICY_RANDOM)


@dataclass(frozen=True)
class RewardParams:
    """Per-resolution reward, terminal unresolved penalty, fidelity-bonus weight, discount."""

    alpha: float = 0.2
    beta: float = -1.0
    fidelity_weight: float = 0.9
    discount: float = 0.9

    def __post_init__(self):
        if not (self.beta <= 0.0 <= self.alpha):
            raise ValueError(f"need beta <= 0 <= alpha, got beta={self.beta}, alpha={self.alpha}")
        if not (0.0 <= self.discount <= 1.0):
            raise ValueError(f"discount must lie in [0, 1], got {self.discount}")


@dataclass(frozen=True)
class EnvConfig:
    """One agent is built per (topology, demand size) configuration."""

    grid: TopologyConfig
    topology_seed: int
    demand_count: int
    k_paths: int = 3
    phys: PhysParams = PhysParams(p_e=0.9, q_v=0.9, f_min=0.85)
    reward: RewardParams = RewardParams()
    step_budget_factor: int = 4

    def __post_init__(self):
        if self.demand_count < 1:
            raise ConfigError(f"demand_count must be >= 1, got {self.demand_count}")
        if self.k_paths < 1:
            raise ConfigError(f"k_paths must be >= 1, got {self.k_paths}")
        if self.step_budget_factor < 1:
            raise ConfigError(f"step_budget_factor must be >= 1, got {self.step_budget_factor}")


@dataclass(frozen=True)
class Observation:
    vector: np.ndarray
    mask: np.ndarray  # flat, indexed by action id


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    resolved_delta: int
    terminal: int
    attempt: AttemptResult | None


@dataclass
class EpisodeRecord:
    resolved: int
    total_requests: int
    qubits_used: int
    channels_used: int
    fidelities: list[float] = field(default_factory=list)
    steps: int = 0
    seed: int = 0
    episode_return: float = 0.0
    fidelity_bonus_sum: float = 0.0

    @property
    def mean_fidelity(self) -> float:
        return float(np.mean(self.fidelities)) if self.fidelities else 0.0


@dataclass(frozen=True)
class TrainLogRow:
    episode: int
    ep_return: float
    resolved: int
    loss_mean: float
    epsilon: float


def obs_dim(n_nodes: int, n_edges: int, n_slots: int) -> int:
    return n_nodes + n_edges + n_slots * (2 * n_nodes + 1) + 3


def encode_state(state: NetworkState, demands: DemandSet, params: PhysParams) -> np.ndarray:
    """Encode residual resources, request slots and physical scalars per the layout above."""
    topo = state.topology
    n = topo.n_nodes
    qcap = topo.qubit_capacities
    ccap = topo.channel_capacities
    qubits = np.divide(state.residual_qubits, qcap, out=np.zeros(n), where=qcap > 0)
    channels = np.divide(state.residual_channels, ccap,
                         out=np.zeros(topo.n_edges), where=ccap > 0)
    blocks = [qubits, channels]
    for request in demands.requests:
        block = np.zeros(2 * n + 1)
        if request.status == "pending":
            block[request.src] = 1.0
            block[n + request.dst] = 1.0
            block[2 * n] = 1.0
        blocks.append(block)
    blocks.append(np.asarray([params.p_e, params.q_v, params.f_min]))
    return np.concatenate(blocks)


def fidelity_bonus(params: RewardParams, phys: PhysParams,
                   path_hops: int, realized_fidelity: float) -> float:
    """Bonus for a successful h-hop delivery: weight * F * q_v^(h-1) * p_e^h."""
    return (params.fidelity_weight * realized_fidelity
            * phys.q_v ** (path_hops - 1) * phys.p_e ** path_hops)


def reward(params: RewardParams, phys: PhysParams, *, resolved_delta: int,
           total_requests: int, resolved_total: int, terminal: int,
           path_hops: int = 0, realized_fidelity: float = 0.0,
           success: bool = False, invalid: bool = False) -> float:
    """Immediate reward for one step.

    A successful delivery earns the per-resolution reward plus the fidelity
    bonus; a mask-violating action earns the penalty term on its own; the
    terminal step additionally charges the penalty once per unresolved
    request. Physically failed attempts earn nothing.
    """
    if terminal not in (0, 1):
        raise ValueError(f"terminal flag must be 0 or 1, got {terminal}")
    value = resolved_delta * params.alpha
    if invalid:
        value += params.beta
    if success:
        value += fidelity_bonus(params, phys, path_hops, realized_fidelity)
    if terminal:
        value += (total_requests - resolved_total) * params.beta
    return value


def select_action(mlp: Mlp, obs: Observation, epsilon: float,
                  rng: np.random.Generator | None) -> int:
    """Epsilon-greedy over mask-valid actions; greedy ties go to the lowest id."""
    valid = np.flatnonzero(obs.mask)
    if valid.size == 0:
        raise ContractViolation("no valid action; the episode should have terminated")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(valid[rng.integers(valid.size)])
    q = forward(mlp, obs.vector)
    masked = np.full(q.shape, -np.inf)
    masked[valid] = q[valid]
    return int(np.argmax(masked))


class Episode:
    """One service round over a fresh residual state and demand set."""

    def __init__(self, topology: Topology, demands: DemandSet, phys: PhysParams,
                 reward_params: RewardParams, k_paths: int,
                 rng: np.random.Generator, step_budget: int):
        self.topology = topology
        self.demands = demands
        self.phys = phys
        self.reward_params = reward_params
        self.k_paths = k_paths
        self.rng = rng
        self.step_budget = step_budget
        self.state = NetworkState.fresh(topology)
        self.steps = 0
        self.resolved = 0
        self.episode_return = 0.0
        self.fidelity_bonus_sum = 0.0
        self._refresh()
        self.done = self._terminal_now()
        if self.done:
            self._finalize()

    @property
    def n_actions(self) -> int:
        return self.demands.episode_size * self.k_paths

    def _refresh(self) -> None:
        self.candidates = compute_candidates(self.state, self.demands, self.k_paths)
        self.mask = build_action_mask(self.state, self.demands, self.candidates, self.phys)

    def _terminal_now(self) -> bool:
        return (self.demands.pending_count == 0
                or not self.mask.any()
                or self.steps >= self.step_budget)

    def _finalize(self) -> None:
        for request in pending(self.demands):
            request.mark_failed()

    def observe(self) -> Observation:
        return Observation(encode_state(self.state, self.demands, self.phys),
                           self.mask.ravel().copy())

    def step(self, action: int) -> tuple[Observation, StepOutcome]:
        """Attempt the decoded (request, path); a physically failed attempt keeps
        the request pending and the ledger untouched."""
        if self.done:
            raise ContractViolation("episode already terminated")
        if not (0 <= action < self.n_actions):
            raise ContractViolation(f"action id {action} outside [0, {self.n_actions})")
        slot, path_slot = divmod(action, self.k_paths)
        self.steps += 1
        valid = bool(self.mask[slot, path_slot])
        attempt = None
        delta = 0
        hops = 0
        if valid:
            path = self.candidates[slot][path_slot]
            attempt = attempt_path(self.state, path, self.phys, self.rng)
            if attempt.success:
                self.demands.requests[slot].mark_resolved(attempt.realized_fidelity)
                self.resolved += 1
                delta = 1
                hops = len(path) - 1
                self._refresh()
        terminal = 1 if self._terminal_now() else 0
        success = attempt is not None and attempt.success
        value = reward(self.reward_params, self.phys,
                       resolved_delta=delta, total_requests=self.demands.episode_size,
                       resolved_total=self.resolved, terminal=terminal,
                       path_hops=hops,
                       realized_fidelity=attempt.realized_fidelity if success else 0.0,
                       success=success, invalid=not valid)
        self.episode_return += value
        if success:
            self.fidelity_bonus_sum += fidelity_bonus(
                self.reward_params, self.phys, hops, attempt.realized_fidelity)
        observation = self.observe()
        self.done = bool(terminal)
        if self.done:
            self._finalize()
        return observation, StepOutcome(reward=value, resolved_delta=delta,
                                        terminal=terminal, attempt=attempt)


def build_topology(cfg: EnvConfig) -> Topology:
    return grid_topology(cfg.grid, cfg.topology_seed)


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1)[0])


def train(env_cfg: EnvConfig, train_cfg: TrainConfig, seed: int,
          loss_trace: list[float] | None = None) -> tuple[Mlp, list[TrainLogRow]]:
    """Train the agent over fresh episodes; fully deterministic for a fixed seed.

    When a list is passed as `loss_trace` it collects the raw per-gradient-step
    TD loss, which the log's per-episode means would otherwise smooth away.
    """
    if seed < 0:
        raise ConfigError(f"seed must be >= 0, got {seed}")
    topology = build_topology(env_cfg)
    d_in = obs_dim(topology.n_nodes, topology.n_edges, env_cfg.demand_count)
    d_out = env_cfg.demand_count * env_cfg.k_paths
    net_ss, buffer_ss, action_ss, episode_ss = np.random.SeedSequence(seed).spawn(4)
    mlp = mlp_init((d_in, *train_cfg.hidden, d_out), _seed_int(net_ss))
    target = mlp.clone()
    buffer = ReplayBuffer(train_cfg.buffer_capacity, np.random.default_rng(buffer_ss))
    rng_action = np.random.default_rng(action_ss)
    episode_seeds = episode_ss.spawn(train_cfg.episodes)
    budget = env_cfg.step_budget_factor * env_cfg.demand_count
    log: list[TrainLogRow] = []
    env_steps = 0
    grad_steps = 0
    stop = False
    for ep_idx in range(train_cfg.episodes):
        if stop:
            break
        demand_ss, attempt_ss = episode_seeds[ep_idx].spawn(2)
        demands = generate_demands(topology, env_cfg.demand_count, _seed_int(demand_ss))
        episode = Episode(topology, demands, env_cfg.phys, env_cfg.reward,
                          env_cfg.k_paths, np.random.default_rng(attempt_ss), budget)
        losses = []
        epsilon = train_cfg.epsilon_at(env_steps)
        while not episode.done:
            obs = episode.observe()
            epsilon = train_cfg.epsilon_at(env_steps)
            action = select_action(mlp, obs, epsilon, rng_action)
            obs_next, outcome = episode.step(action)
            buffer.push(Transition(obs.vector, action, outcome.reward,
                                   obs_next.vector, outcome.terminal == 1, obs_next.mask))
            env_steps += 1
            if env_steps % train_cfg.train_every == 0:
                loss = train_step(mlp, target, buffer, train_cfg)
                if loss is not None:
                    losses.append(loss)
                    if loss_trace is not None:
                        loss_trace.append(loss)
                    grad_steps += 1
                    if grad_steps % train_cfg.target_sync_period == 0:
                        sync_target(mlp, target)
                        assert_finite(mlp)
                    if (train_cfg.max_grad_steps is not None
                            and grad_steps >= train_cfg.max_grad_steps):
                        stop = True
                        break
        log.append(TrainLogRow(ep_idx, episode.episode_return, episode.resolved,
                               float(np.mean(losses)) if losses else 0.0, epsilon))
    return mlp, log


def _baseline_episode(policy: str, topology: Topology, demands: DemandSet,
                      env_cfg: EnvConfig, rng: np.random.Generator) -> tuple[NetworkState, int]:
    """Repeated greedy passes until done: resolved, blocked, or budget spent."""
    state = NetworkState.fresh(topology)
    policy_fn = policy_shortest if policy == POLICY_SHORTEST else policy_random
    budget = env_cfg.step_budget_factor * env_cfg.demand_count
    attempts = 0
    while demands.pending_count > 0 and attempts < budget:
        schedule = policy_fn(state, demands, env_cfg.phys, rng)
        if not schedule:
            break
        attempts += len(schedule)
    for request in pending(demands):
        request.mark_failed()
    return state, attempts


def evaluate(policy: str, env_cfg: EnvConfig, episodes: int, seed: int,
             mlp: Mlp | None = None, first_episode: int = 0) -> list[EpisodeRecord]:
    """Run a policy greedily over independent episodes with a per-episode seed stream.

    Episode i derives its demand set and attempt stream from (seed, i) only,
    so different policies evaluated with the same seed face identical demand
    sequences, and parallel replications can split the episode range without
    changing any record.
    """
    if episodes < 1:
        raise ConfigError(f"episodes must be >= 1, got {episodes}")
    if seed < 0:
        raise ConfigError(f"seed must be >= 0, got {seed}")
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    topology = build_topology(env_cfg)
    if policy == POLICY_AGENT:
        if mlp is None:
            raise ConfigError("agent evaluation requires a trained network")
        expected = obs_dim(topology.n_nodes, topology.n_edges, env_cfg.demand_count)
        if mlp.dims[0] != expected or mlp.dims[-1] != env_cfg.demand_count * env_cfg.k_paths:
            raise ConfigError(
                f"network dims {mlp.dims} do not match this configuration "
                f"(expected input {expected}, output {env_cfg.demand_count * env_cfg.k_paths})")
    budget = env_cfg.step_budget_factor * env_cfg.demand_count
    records = []
    for i in range(first_episode, first_episode + episodes):
        demand_ss, attempt_ss = np.random.SeedSequence([seed, i]).spawn(2)
        demands = generate_demands(topology, env_cfg.demand_count, _seed_int(demand_ss))
        rng = np.random.default_rng(attempt_ss)
        if policy == POLICY_AGENT:
            episode = Episode(topology, demands, env_cfg.phys, env_cfg.reward,
                              env_cfg.k_paths, rng, budget)
            while not episode.done:
                action = select_action(mlp, episode.observe(), 0.0, None)
                episode.step(action)
            state, steps = episode.state, episode.steps
            extra = dict(episode_return=episode.episode_return,
                         fidelity_bonus_sum=episode.fidelity_bonus_sum)
        else:
            state, steps = _baseline_episode(policy, topology, demands, env_cfg, rng)
            extra = {}
        fidelities = [r.realized_fidelity for r in demands.requests if r.status == RESOLVED]
        records.append(EpisodeRecord(
            resolved=demands.resolved_count,
            total_requests=demands.episode_size,
            qubits_used=state.consumed_qubits(),
            channels_used=state.consumed_channels(),
            fidelities=fidelities,
            steps=steps,
            seed=seed,
            **extra,
        ))
    return records


def _evaluate_chunk(args) -> list[EpisodeRecord]:
    policy, env_cfg, episodes, seed, mlp, first_episode = args
    return evaluate(policy, env_cfg, episodes, seed, mlp=mlp, first_episode=first_episode)


def evaluate_parallel(policy: str, env_cfg: EnvConfig, episodes: int, seed: int,
                      mlp: Mlp | None = None, workers: int = 1) -> list[EpisodeRecord]:
    """Like evaluate, splitting the episode range across worker processes.

    Per-episode seeding makes the result independent of the split, so any
    worker count returns the exact records of a serial run.
    """
    if workers <= 1 or episodes == 1:
        return evaluate(policy, env_cfg, episodes, seed, mlp=mlp)
    from concurrent.futures import ProcessPoolExecutor

    workers = min(workers, episodes)
    base, extra = divmod(episodes, workers)
    chunks = []
    start = 0
    for w in range(workers):
        size = base + (1 if w < extra else 0)
        chunks.append((policy, env_cfg, size, seed, mlp, start))
        start += size
    records: list[EpisodeRecord] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk_records in pool.map(_evaluate_chunk, chunks):
            records.extend(chunk_records)
    return records


def write_training_log(log: list[TrainLogRow], path: str | Path) -> None:
    lines = ["episode,return,resolved,loss_mean,epsilon"]
    lines += [f"{r.episode},{r.ep_return!r},{r.resolved},{r.loss_mean!r},{r.epsilon!r}"
              for r in log]
    Path(path).write_text("\n".join(lines) + "\n")
