"""Classical references for the quantum pipeline.

Exhaustive trajectory enumeration under the uniform action model, exact
expected return, finite-horizon value iteration, tabular Q-learning and
greedy rollouts. The enumerator is the ground truth the circuit simulation
is checked against; nothing here touches amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layout import RegisterLayout, TrajectoryRecord, bitstring_of, encode_index
from .mdp import MdpSpec, support, validated


def enumerate_trajectories(
    spec: MdpSpec, steps: int, initial: int | None, include_return: bool = True
) -> list[TrajectoryRecord]:
    """Every length-``steps`` trajectory with nonzero probability.

    The probability of a trajectory is P(s0) times, per step, 1/num_actions
    times the transition probability; P(s0) is 1/num_states for a uniform
    start (``initial=None``) and 1 for a fixed start. Records are sorted by
    canonical bit string and carry exact probabilities. ``include_return``
    controls whether the bit string carries the total register, matching
    the circuit layout built with the same flag.
    """
    validated(spec)
    layout = RegisterLayout.for_mdp(spec, steps, include_return=include_return)
    if initial is None:
        starts = [(s, 1.0 / spec.num_states) for s in range(spec.num_states)]
    else:
        if not 0 <= initial < spec.num_states:
            raise ValueError(f"initial state {initial} outside [0, {spec.num_states})")
        starts = [(initial, 1.0)]

    action_weight = 1.0 / spec.num_actions
    supports = {
        (s, a): sorted(support(spec, s, a).items())
        for s in range(spec.num_states)
        for a in range(spec.num_actions)
    }
    out: list[TrajectoryRecord] = []

    def walk(state: int, depth: int, prob: float, acc: list[tuple[int, int, int, int]], ret: int) -> None:
        if depth == steps:
            index = encode_index(layout, acc, ret)
            out.append(
                TrajectoryRecord(
                    steps=tuple(acc),
                    total_return=ret,
                    bitstring=bitstring_of(layout, index),
                    probability=prob,
                )
            )
            return
        for a in range(spec.num_actions):
            for nxt, p in supports[state, a]:
                r = spec.rewards[nxt]
                acc.append((state, a, nxt, r))
                walk(nxt, depth + 1, prob * action_weight * p, acc, ret + r)
                acc.pop()

    for s0, p0 in starts:
        walk(s0, 0, p0, [], 0)
    out.sort(key=lambda rec: rec.bitstring)
    return out


def expected_return(records: list[TrajectoryRecord]) -> float:
    """Probability-weighted mean return of an enumerated trajectory set."""
    return sum(rec.probability * rec.total_return for rec in records)


@dataclass(frozen=True)
class ValueIterationResult:
    """``values[k][s]`` is the optimal k-steps-to-go value, ``policy[k][s]``
    the argmax first action with k steps to go (k >= 1, ties to the lower
    action index)."""

    values: np.ndarray
    policy: np.ndarray

    def first_step_policy(self) -> np.ndarray:
        return self.policy[-1]


def value_iteration(spec: MdpSpec, horizon: int) -> ValueIterationResult:
    """Exact finite-horizon optimal values by backward induction.

    V_0 = 0 and V_{k+1}(s) = max_a sum_s' P(s'|s,a) (r(s') + V_k(s')).
    """
    validated(spec)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    values = np.zeros((horizon + 1, spec.num_states))
    policy = np.zeros((horizon + 1, spec.num_states), dtype=np.int64)
    for k in range(1, horizon + 1):
        for s in range(spec.num_states):
            returns = np.zeros(spec.num_actions)
            for a in range(spec.num_actions):
                returns[a] = sum(
                    p * (spec.rewards[nxt] + values[k - 1][nxt])
                    for nxt, p in sorted(support(spec, s, a).items())
                )
            policy[k][s] = int(np.argmax(returns))  # first max wins ties
            values[k][s] = returns[policy[k][s]]
    return ValueIterationResult(values=values, policy=policy)


@dataclass(frozen=True)
class QlConfig:
    """Tabular Q-learning hyperparameters.

    Defaults are chosen so training converges at demo scale. The discount
    must stay below 1: updates bootstrap at every step (episodes truncate,
    no state is terminal), so gamma = 1 sends the table to infinity and the
    greedy argmax is then decided by visit-rate lag instead of by value.
    """

    alpha: float = 0.1
    gamma: float = 0.95
    epsilon: float = 0.1
    episodes: int = 10000
    horizon: int = 3
    seed: int = 0


def _transition_tables(spec: MdpSpec):
    nexts, cums = {}, {}
    for s in range(spec.num_states):
        for a in range(spec.num_actions):
            entries = sorted(support(spec, s, a).items())
            nexts[s, a] = np.array([n for n, _ in entries], dtype=np.int64)
            cums[s, a] = np.cumsum(np.array([p for _, p in entries]))
    return nexts, cums


def q_update(
    qtable: np.ndarray,
    state: int,
    action: int,
    reward: float,
    next_state: int,
    alpha: float,
    gamma: float,
) -> None:
    """One tabular update in place:
    Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))."""
    target = reward + gamma * float(np.max(qtable[next_state]))
    qtable[state, action] += alpha * (target - qtable[state, action])


def q_learning(spec: MdpSpec, config: QlConfig = QlConfig()) -> np.ndarray:
    """Train a (num_states, num_actions) Q-table.

    Episodes start from the spec's initial distribution and run for
    ``config.horizon`` steps; actions are epsilon-greedy (greedy ties to the
    lower index); every step applies
    Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)),
    bootstrapping at every step including the episode's last. The RNG draw
    order per step is fixed (explore coin, optional action draw, transition
    draw), so a seed pins the whole run.
    """
    validated(spec)
    rng = np.random.default_rng(config.seed)
    nexts, cums = _transition_tables(spec)
    q = np.zeros((spec.num_states, spec.num_actions))
    rewards = spec.rewards
    for _ in range(config.episodes):
        if spec.initial is None:
            s = int(rng.integers(spec.num_states))
        else:
            s = spec.initial
        for _ in range(config.horizon):
            if rng.random() < config.epsilon:
                a = int(rng.integers(spec.num_actions))
            else:
                a = int(np.argmax(q[s]))
            cum = cums[s, a]
            pick = min(int(np.searchsorted(cum, rng.random(), side="right")), len(cum) - 1)
            nxt = int(nexts[s, a][pick])
            q_update(q, s, a, rewards[nxt], nxt, config.alpha, config.gamma)
            s = nxt
    return q


def greedy_policy(qtable: np.ndarray) -> np.ndarray:
    """Per-state argmax of a Q-table, ties to the lower action index."""
    return np.argmax(qtable, axis=1)


@dataclass(frozen=True)
class RolloutRecord:
    """One deduplicated greedy rollout with its total reward and how often it
    occurred among the trials."""

    steps: tuple[tuple[int, int, int, int], ...]
    total_reward: int
    count: int


def greedy_rollouts(
    spec: MdpSpec,
    qtable: np.ndarray,
    trials: int,
    horizon: int,
    initial: int | None,
    seed: int,
) -> list[RolloutRecord]:
    """Run seeded greedy-policy rollouts and deduplicate the trajectories.

    Results sort by descending total reward, then by the step tuples, so the
    best observed trajectory comes first.
    """
    validated(spec)
    rng = np.random.default_rng(seed)
    nexts, cums = _transition_tables(spec)
    policy = greedy_policy(qtable)
    seen: dict[tuple, int] = {}
    for _ in range(trials):
        if initial is None:
            s = int(rng.integers(spec.num_states))
        else:
            s = initial
        steps = []
        for _ in range(horizon):
            a = int(policy[s])
            cum = cums[s, a]
            pick = min(int(np.searchsorted(cum, rng.random(), side="right")), len(cum) - 1)
            nxt = int(nexts[s, a][pick])
            steps.append((s, a, nxt, spec.rewards[nxt]))
            s = nxt
        key = tuple(steps)
        seen[key] = seen.get(key, 0) + 1
    records = [
        RolloutRecord(steps=k, total_reward=sum(r for _, _, _, r in k), count=c)
        for k, c in seen.items()
    ]
    records.sort(key=lambda rec: (-rec.total_reward, rec.steps))
    return records
