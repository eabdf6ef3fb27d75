"""Teamwork game domain types and the pure action-to-outcome pipeline.

A teamwork game is a one-shot public-good game: each of ``n`` players splits
one turn of length ``delta_t`` between the team task and leisure.  A player
with expertise ``p`` who spends fraction ``a`` of the turn on the task gifts
``g = a * p * delta_t`` work units; the gifts combine through a CES
aggregator ``G = (sum_i beta_i * g_i**rho) ** (1/rho)`` and every player is
paid ``x**alpha * sigma(G)`` where ``x`` is their leisure and ``sigma`` the
evaluation function.

Everything here is a pure function of its inputs; concurrent use is
unrestricted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InputError
from .evaluation import EvaluationSpec, eval_score

_GAME_KEYS = {
    "n", "rho", "betas", "delta_t", "expertise", "leisure_capacity",
    "alpha", "evaluation",
}


def _as_tuple(name: str, values, n: int) -> tuple[float, ...]:
    t = tuple(float(v) for v in values)
    if len(t) != n:
        raise ConfigurationError(f"{name} must have length n={n}, got {len(t)}")
    return t


@dataclass(frozen=True)
class GameSpec:
    """Full description of one teamwork game.

    rho: substitution parameter (real, != 0).  rho = 1 is an additive task,
    rho < 1 conjunctive (weakest-link as rho -> -inf), rho > 1 disjunctive
    (best-shot as rho -> +inf).
    betas: positive weight per player's contribution.
    delta_t: turn length in time units (> 0).
    expertise: work units per time unit, in [0, 1] per player.
    leisure_capacity: leisure units per time unit, in [0, 1] per player.
    alpha: shared preference exponent (> 0); leisure enters utility as x**alpha.
    """

    n: int
    rho: float
    betas: tuple[float, ...]
    delta_t: float
    expertise: tuple[float, ...]
    alpha: float
    evaluation: EvaluationSpec
    leisure_capacity: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if self.rho == 0:
            raise ConfigurationError("rho must be nonzero (rho = 0 is not a CES exponent)")
        if not self.delta_t > 0:
            raise ConfigurationError(f"delta_t must be > 0, got {self.delta_t}")
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")
        object.__setattr__(self, "betas", _as_tuple("betas", self.betas, self.n))
        object.__setattr__(self, "expertise", _as_tuple("expertise", self.expertise, self.n))
        lc = self.leisure_capacity
        lc = tuple(1.0 for _ in range(self.n)) if lc is None else _as_tuple(
            "leisure_capacity", lc, self.n)
        object.__setattr__(self, "leisure_capacity", lc)
        if any(b <= 0 for b in self.betas):
            raise ConfigurationError(f"betas must all be > 0, got {self.betas}")
        if any(not 0 <= p <= 1 for p in self.expertise):
            raise ConfigurationError(f"expertise must lie in [0, 1], got {self.expertise}")
        if any(not 0 <= p <= 1 for p in self.leisure_capacity):
            raise ConfigurationError(
                f"leisure_capacity must lie in [0, 1], got {self.leisure_capacity}")
        if not isinstance(self.evaluation, EvaluationSpec):
            raise ConfigurationError("evaluation must be an EvaluationSpec")

    def full_time_gifts(self) -> np.ndarray:
        """Gift each player would produce by spending the whole turn on the task."""
        return np.asarray(self.expertise) * self.delta_t

    def max_aggregate(self) -> float:
        """Team outcome when everyone works full time."""
        return ces_aggregate(self.full_time_gifts(), self.rho, self.betas)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rho": self.rho,
            "betas": list(self.betas),
            "delta_t": self.delta_t,
            "expertise": list(self.expertise),
            "leisure_capacity": list(self.leisure_capacity),
            "alpha": self.alpha,
            "evaluation": self.evaluation.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "GameSpec":
        if not isinstance(data, dict):
            raise ConfigurationError(f"game spec must be an object, got {type(data).__name__}")
        unknown = set(data) - _GAME_KEYS
        if unknown:
            raise ConfigurationError(f"unknown game spec key(s): {sorted(unknown)}")
        missing = {"n", "rho", "betas", "delta_t", "expertise", "alpha", "evaluation"} - set(data)
        if missing:
            raise ConfigurationError(f"missing game spec key(s): {sorted(missing)}")
        return cls(
            n=int(data["n"]),
            rho=float(data["rho"]),
            betas=tuple(float(v) for v in data["betas"]),
            delta_t=float(data["delta_t"]),
            expertise=tuple(float(v) for v in data["expertise"]),
            leisure_capacity=(
                tuple(float(v) for v in data["leisure_capacity"])
                if data.get("leisure_capacity") is not None else None),
            alpha=float(data["alpha"]),
            evaluation=EvaluationSpec.from_dict(data["evaluation"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "GameSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class JointAction:
    """Fraction of the turn each player allocates to the task."""

    actions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(float(a) for a in self.actions))
        for i, a in enumerate(self.actions):
            if not 0.0 <= a <= 1.0:
                raise InputError(f"action {i} must lie in [0, 1], got {a}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.actions, dtype=float)


@dataclass(frozen=True)
class GiftVector:
    """Work units contributed by each player."""

    gifts: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gifts", tuple(float(g) for g in self.gifts))
        for i, g in enumerate(self.gifts):
            if g < 0:
                raise InputError(f"gift {i} must be >= 0, got {g}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.gifts, dtype=float)


def _actions_array(game: GameSpec, actions) -> np.ndarray:
    if isinstance(actions, JointAction):
        arr = actions.as_array()
    else:
        arr = np.asarray(actions, dtype=float)
    if arr.shape != (game.n,):
        raise InputError(f"expected {game.n} actions, got shape {arr.shape}")
    if np.any(arr < 0) or np.any(arr > 1):
        raise InputError("actions must lie in [0, 1]")
    return arr


def gift_from_action(a: float, p: float, delta_t: float) -> float:
    """Work units gifted by a player with expertise ``p`` acting ``a`` of a turn."""
    if not 0.0 <= a <= 1.0:
        raise InputError(f"action must lie in [0, 1], got {a}")
    if not 0.0 <= p <= 1.0:
        raise InputError(f"expertise must lie in [0, 1], got {p}")
    if not delta_t > 0:
        raise InputError(f"delta_t must be > 0, got {delta_t}")
    return a * p * delta_t


def private_good(a: float, p_l: float, delta_t: float) -> float:
    """Leisure units obtained from the fraction of the turn not worked."""
    if not 0.0 <= a <= 1.0:
        raise InputError(f"action must lie in [0, 1], got {a}")
    return (1.0 - a) * p_l * delta_t


def utility(x: float, score: float, alpha: float) -> float:
    """Cobb-Douglas style payoff: leisure**alpha times the team's score."""
    return x ** alpha * score


def ces_aggregate(gifts, rho: float, betas) -> float:
    """CES team outcome ``(sum_i beta_i * g_i**rho) ** (1/rho)``.

    Computed in the log domain with a max shift so |rho| up to 500 is exact
    to rounding.  Zero gifts contribute nothing when rho > 0; when rho < 0 a
    single zero gift forces G = 0 (the weakest-link limit).
    """
    if rho == 0:
        raise ConfigurationError("rho must be nonzero (rho = 0 is not a CES exponent)")
    g = gifts.as_array() if isinstance(gifts, GiftVector) else np.asarray(gifts, dtype=float)
    b = np.asarray(betas, dtype=float)
    if g.shape != b.shape:
        raise InputError(f"gifts and betas must align, got {g.shape} vs {b.shape}")
    if np.any(b <= 0):
        raise InputError("betas must all be > 0")
    if np.any(g < 0):
        raise InputError("gifts must all be >= 0")
    pos = g > 0
    if not pos.any():
        return 0.0
    if rho < 0 and not pos.all():
        return 0.0
    t = np.log(b[pos]) + rho * np.log(g[pos])
    m = float(t.max())
    return float(np.exp((m + np.log(np.exp(t - m).sum())) / rho))


def ces_aggregate_grid(gift_arrays: Sequence[np.ndarray], rho: float, betas) -> np.ndarray:
    """Vectorised CES over broadcastable per-player gift arrays.

    Used to build reward tables and deviation grids; agrees with
    ``ces_aggregate`` elementwise.
    """
    if rho == 0:
        raise ConfigurationError("rho must be nonzero (rho = 0 is not a CES exponent)")
    b = np.asarray(betas, dtype=float)
    arrays = [np.asarray(a, dtype=float) for a in gift_arrays]
    with np.errstate(divide="ignore"):
        logs = [np.log(a) for a in arrays]
    terms = [np.log(b[i]) + rho * lg for i, lg in enumerate(logs)]
    stacked = np.broadcast_arrays(*terms)
    stack = np.stack(stacked, axis=0)
    # rho < 0 turns log(0) = -inf into +inf; mask those cells to G = 0.
    any_zero = np.zeros(stack.shape[1:], dtype=bool)
    for a in arrays:
        any_zero |= np.broadcast_to(a, stack.shape[1:]) == 0
    finite = np.where(np.isfinite(stack), stack, -np.inf)
    m = finite.max(axis=0)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.exp(finite - safe_m).sum(axis=0)
        out = np.exp((safe_m + np.log(s)) / rho)
    out = np.where(np.isfinite(m), out, 0.0)
    if rho < 0:
        out = np.where(any_zero, 0.0, out)
    return out


def gifts_from_actions(game: GameSpec, actions) -> np.ndarray:
    """Map a joint action to the vector of gifts."""
    arr = _actions_array(game, actions)
    return arr * game.full_time_gifts()


def leisure_from_actions(game: GameSpec, actions) -> np.ndarray:
    """Map a joint action to the vector of private (leisure) goods."""
    arr = _actions_array(game, actions)
    return (1.0 - arr) * np.asarray(game.leisure_capacity) * game.delta_t


def evaluate_joint_action(game: GameSpec, actions):
    """Run the full pipeline: gifts, team outcome, score, per-player rewards.

    Returns ``(gifts, aggregate, score, rewards)`` as (ndarray, float, float,
    ndarray).  Works for any evaluation kind, including heaviside.
    """
    gifts = gifts_from_actions(game, actions)
    aggregate = ces_aggregate(gifts, game.rho, game.betas)
    score = eval_score(game.evaluation, aggregate)
    leisure = leisure_from_actions(game, actions)
    rewards = leisure ** game.alpha * score
    return gifts, float(aggregate), float(score), rewards
