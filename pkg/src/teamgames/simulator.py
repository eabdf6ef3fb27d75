"""One-shot teamwork environment and the episodic training loop.

An episode is a single play of the underlying game: every agent samples an
arm from its Boltzmann distribution, the joint action is scored, and each
agent updates only its own arm from its own reward (independent learners).
Two train calls with the same game, config, and seed produce bitwise
identical outcomes; sweep seeds are derived from a base seed with spawn
keys on a counter-based generator so parallel runs match serial ones.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .bandit import AgentState, boltzmann_probabilities, greedy_action, update_q
from .errors import ConfigurationError, UndefinedDispersionError
from .evaluation import eval_score
from .games import GameSpec, ces_aggregate, ces_aggregate_grid, evaluate_joint_action

EXTRACTION_MODES = ("greedy", "final_sample", "tail_average")


@dataclass(frozen=True)
class RoundResult:
    """Everything one play of the game produces."""

    gifts: tuple[float, ...]
    aggregate: float
    score: float
    rewards: tuple[float, ...]
    passed: bool | None  # aggregate >= passing threshold; None when no threshold exists


@dataclass(frozen=True)
class TrainConfig:
    """Training-run parameters.

    The temperature stays at ``tau`` for the first ``anneal_start`` fraction
    of the episodes, then decays geometrically to ``anneal_floor``: agents
    first learn the landscape under live exploration and afterwards settle
    into the low-temperature limit where the smooth best responses approach
    exact ones.  Set ``anneal_floor=None`` for a constant temperature.
    """

    episodes: int = 50_000
    tau: float = 0.1
    k: float = 40.0
    seed: int | np.random.SeedSequence = 0
    num_arms: int = 101
    extraction: str = "greedy"
    anneal_floor: float | None = 0.02
    anneal_start: float = 0.5
    snapshot_q: bool = False
    trace_path: str | None = None

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigurationError(f"episodes must be >= 1, got {self.episodes}")
        if self.extraction not in EXTRACTION_MODES:
            raise ConfigurationError(
                f"extraction must be one of {EXTRACTION_MODES}, got {self.extraction!r}")
        if self.anneal_floor is not None:
            if not 0 < self.anneal_floor <= self.tau:
                raise ConfigurationError(
                    f"anneal_floor must lie in (0, tau], got {self.anneal_floor}")
            if not 0.0 <= self.anneal_start < 1.0:
                raise ConfigurationError(
                    f"anneal_start must lie in [0, 1), got {self.anneal_start}")

    def temperature(self, episode: int) -> float:
        """Temperature used at the given episode index."""
        if self.anneal_floor is None or self.anneal_floor == self.tau:
            return self.tau
        t_switch = int(self.anneal_start * self.episodes)
        if episode < t_switch or self.episodes - 1 <= t_switch:
            return self.tau
        frac = (episode - t_switch) / (self.episodes - 1 - t_switch)
        return self.tau * (self.anneal_floor / self.tau) ** frac


@dataclass(frozen=True)
class LearnedOutcome:
    """Result of one training run: the extracted policy and its outcome."""

    greedy_actions: tuple[float, ...]
    learned_G: float
    learned_score: float
    episodes: int
    seed: int
    q_snapshots: tuple[tuple[float, ...], ...] | None = None

    def to_dict(self) -> dict:
        return {
            "greedy_actions": list(self.greedy_actions),
            "learned_G": self.learned_G,
            "learned_score": self.learned_score,
            "episodes": self.episodes,
            "seed": self.seed,
            "q_snapshots": (
                [list(q) for q in self.q_snapshots] if self.q_snapshots is not None else None),
        }


def play_round(game: GameSpec, actions) -> RoundResult:
    """Score one joint action: gifts, CES outcome, evaluation, rewards.

    Accepts any evaluation, including heaviside.  The pass flag compares the
    outcome against the evaluation's threshold and is informational only.
    """
    gifts, aggregate, score, rewards = evaluate_joint_action(game, actions)
    passed = None
    if game.evaluation.kind in ("logistic", "heaviside"):
        passed = bool(aggregate >= game.evaluation.b)
    return RoundResult(
        gifts=tuple(float(g) for g in gifts),
        aggregate=aggregate,
        score=score,
        rewards=tuple(float(r) for r in rewards),
        passed=passed,
    )


def _seed_sequence(seed) -> tuple[np.random.SeedSequence, int]:
    if isinstance(seed, np.random.SeedSequence):
        return seed, int(seed.generate_state(1)[0])
    return np.random.SeedSequence(int(seed)), int(seed)


def _reward_tables(game: GameSpec, arm_actions: np.ndarray) -> list[np.ndarray] | None:
    """Per-player reward lookup over the joint arm grid (small teams only)."""
    if game.n > 3 or len(arm_actions) ** game.n > 3_000_000:
        return None
    caps = game.full_time_gifts()
    shapes = []
    for i in range(game.n):
        shape = [1] * game.n
        shape[i] = len(arm_actions)
        shapes.append((arm_actions * caps[i]).reshape(shape))
    G = ces_aggregate_grid(shapes, game.rho, game.betas)
    score = eval_score(game.evaluation, G)
    tables = []
    for i in range(game.n):
        shape = [1] * game.n
        shape[i] = len(arm_actions)
        leisure = ((1.0 - arm_actions) * game.leisure_capacity[i] * game.delta_t).reshape(shape)
        tables.append(leisure ** game.alpha * score)
    return tables


def train(game: GameSpec, config: TrainConfig) -> LearnedOutcome:
    """Train n independent bandits on the game for config.episodes episodes.

    Synchronous rounds: all agents pick arms, the round is played, then all
    agents update.  Deterministic given (game, config) including the seed.
    """
    seq, seed_label = _seed_sequence(config.seed)
    rng = np.random.Generator(np.random.Philox(seq))
    agents = [AgentState.fresh(config.num_arms, tau=config.tau, k=config.k)
              for _ in range(game.n)]
    arm_actions = agents[0].arm_actions
    tables = _reward_tables(game, arm_actions)
    uniforms = rng.random((config.episodes, game.n))

    trace_fh = None
    trace = None
    if config.trace_path is not None:
        trace_fh = open(config.trace_path, "w", newline="")
        trace = csv.writer(trace_fh)
        trace.writerow(
            ["episode"]
            + [f"action_{i}" for i in range(game.n)]
            + ["G"]
            + [f"reward_{i}" for i in range(game.n)])

    tail_start = config.episodes - max(1, config.episodes // 10)
    tail_sum = np.zeros(game.n)
    tail_count = 0
    last_arms = [0] * game.n
    try:
        for t in range(config.episodes):
            tau_t = config.temperature(t)
            arms = []
            for i, agent in enumerate(agents):
                agent.tau = tau_t
                probs = boltzmann_probabilities(agent)
                cum = np.cumsum(probs)
                arm = int(np.searchsorted(cum, uniforms[t, i], side="right"))
                arms.append(min(arm, agent.num_arms - 1))
            if tables is not None:
                rewards = [float(tables[i][tuple(arms)]) for i in range(game.n)]
                if trace is not None:
                    actions = [float(arm_actions[a]) for a in arms]
                    G = ces_aggregate(
                        np.asarray(actions) * game.full_time_gifts(), game.rho, game.betas)
            else:
                actions = [float(arm_actions[a]) for a in arms]
                _, G, _, reward_arr = evaluate_joint_action(game, actions)
                rewards = [float(r) for r in reward_arr]
            for i, agent in enumerate(agents):
                update_q(agent, arms[i], rewards[i])
            if t >= tail_start:
                tail_sum += [arm_actions[a] for a in arms]
                tail_count += 1
            last_arms = arms
            if trace is not None:
                actions = [float(arm_actions[a]) for a in arms]
                trace.writerow([t] + [repr(a) for a in actions]
                               + [repr(float(G))] + [repr(r) for r in rewards])
    finally:
        if trace_fh is not None:
            trace_fh.close()

    if config.extraction == "greedy":
        learned = [greedy_action(agent) for agent in agents]
    elif config.extraction == "final_sample":
        learned = [float(arm_actions[a]) for a in last_arms]
    else:
        learned = [float(v) for v in tail_sum / tail_count]

    gifts = np.asarray(learned) * game.full_time_gifts()
    learned_G = ces_aggregate(gifts, game.rho, game.betas)
    learned_score = float(eval_score(game.evaluation, learned_G))
    snapshots = None
    if config.snapshot_q:
        snapshots = tuple(tuple(float(q) for q in agent.q_values) for agent in agents)
    return LearnedOutcome(
        greedy_actions=tuple(learned),
        learned_G=float(learned_G),
        learned_score=learned_score,
        episodes=config.episodes,
        seed=seed_label,
        q_snapshots=snapshots,
    )


def spawned_seed(base_seed: int, *key: int) -> np.random.SeedSequence:
    """Deterministic per-cell seed derivation for sweeps."""
    return np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(k) for k in key))


def dispersion(values) -> float:
    """Percentage dispersion: (max - min) / mean * 100."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise UndefinedDispersionError("dispersion needs a non-empty sample")
    mean = float(arr.mean())
    if mean <= 0:
        raise UndefinedDispersionError(f"dispersion undefined for mean {mean}")
    return float((arr.max() - arr.min()) / mean * 100.0)
