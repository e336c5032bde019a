"""Shared helpers: seeded random model generation."""

import numpy as np
import pytest

from qmdp.mdp import MdpSpec, Transition, bundled_mdp


def random_mdp(rng, num_states=4, num_actions=2, max_reward=3, initial=None):
    """A random valid model: every (s, a) row gets a random support with
    normalized weights; rewards are random small integers."""
    transitions = []
    for s in range(num_states):
        for a in range(num_actions):
            k = int(rng.integers(1, num_states + 1))
            targets = sorted(int(t) for t in rng.choice(num_states, size=k, replace=False))
            weights = rng.random(k) + 0.05
            weights = weights / weights.sum()
            for t, w in zip(targets, weights):
                transitions.append(Transition(s, a, t, float(w)))
    rewards = tuple(int(r) for r in rng.integers(0, max_reward + 1, size=num_states))
    return MdpSpec(num_states, num_actions, tuple(transitions), rewards, initial)


@pytest.fixture
def bundled():
    return bundled_mdp()


# Verdict lines collected by the acceptance tests; printed after the run
# so fd-level capture cannot swallow them.
acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
