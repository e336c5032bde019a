"""Finite MDP model shared by the quantum and classical pipelines.

An :class:`MdpSpec` is an immutable description of a finite Markov decision
process with non-negative integer rewards attached to the successor state.
Parsing, validation, JSON round trips and the bundled four-state demo chain
live here; everything downstream (circuit compilation, enumeration, learning)
consumes validated specs unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

PROB_TOL = 1e-9


class MdpFormatError(ValueError):
    """A document could not be parsed into an :class:`MdpSpec`."""


class MdpValidationError(ValueError):
    """A structurally well-formed spec violates a model invariant."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid MDP spec: " + "; ".join(violations))


@dataclass(frozen=True, order=True)
class Transition:
    """One entry of the transition table: P(next_state | state, action) = prob."""

    state: int
    action: int
    next_state: int
    prob: float


@dataclass(frozen=True)
class MdpSpec:
    """Immutable finite MDP.

    ``initial`` is the start distribution: ``None`` means uniform over all
    states, an integer means a fixed start state. Transitions are kept in
    canonical (state, action, next_state) order so that equal models compare
    equal regardless of input order.
    """

    num_states: int
    num_actions: int
    transitions: tuple[Transition, ...]
    rewards: tuple[int, ...]
    initial: int | None = None

    def __post_init__(self) -> None:
        trans = tuple(sorted(self.transitions))
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "rewards", tuple(self.rewards))

    @property
    def max_reward(self) -> int:
        return max(self.rewards) if self.rewards else 0


def validate(spec: MdpSpec) -> list[str]:
    """Return every invariant violation, empty when the spec is valid.

    Checked: positive state and action counts, index ranges, probabilities in
    [0, 1] summing to 1 per (state, action) pair within ``PROB_TOL``, no
    duplicate (state, action, next_state) rows, one non-negative integer
    reward per state, and an in-range initial state when fixed.
    """
    errors: list[str] = []
    if spec.num_states < 1:
        errors.append(f"num_states must be >= 1, got {spec.num_states}")
    if spec.num_actions < 1:
        errors.append(f"num_actions must be >= 1, got {spec.num_actions}")
    if errors:
        return errors

    sums: dict[tuple[int, int], float] = {}
    seen: set[tuple[int, int, int]] = set()
    for tr in spec.transitions:
        if not 0 <= tr.state < spec.num_states:
            errors.append(f"transition has state {tr.state} outside [0, {spec.num_states})")
            continue
        if not 0 <= tr.action < spec.num_actions:
            errors.append(f"transition has action {tr.action} outside [0, {spec.num_actions})")
            continue
        if not 0 <= tr.next_state < spec.num_states:
            errors.append(
                f"transition for (s{tr.state},a{tr.action}) has next state "
                f"{tr.next_state} outside [0, {spec.num_states})"
            )
            continue
        if not 0.0 <= tr.prob <= 1.0:
            errors.append(
                f"transition probability for (s{tr.state},a{tr.action}) must be "
                f"in [0, 1], got {tr.prob!r}"
            )
        key = (tr.state, tr.action, tr.next_state)
        if key in seen:
            errors.append(f"duplicate transition entry for (s{tr.state},a{tr.action},s{tr.next_state})")
        seen.add(key)
        sums[tr.state, tr.action] = sums.get((tr.state, tr.action), 0.0) + tr.prob

    for s in range(spec.num_states):
        for a in range(spec.num_actions):
            total = sums.get((s, a), 0.0)
            if abs(total - 1.0) > PROB_TOL:
                errors.append(f"transition probabilities for (s{s},a{a}) sum to {total!r}, expected 1")

    if len(spec.rewards) != spec.num_states:
        errors.append(f"rewards must list one value per state, got {len(spec.rewards)} for {spec.num_states} states")
    for s, r in enumerate(spec.rewards):
        if not isinstance(r, int) or isinstance(r, bool) or r < 0:
            errors.append(f"reward for s{s} must be a non-negative integer, got {r!r}")

    if spec.initial is not None and not 0 <= spec.initial < spec.num_states:
        errors.append(f"initial state {spec.initial} outside [0, {spec.num_states})")
    return errors


def validated(spec: MdpSpec) -> MdpSpec:
    """Return ``spec`` unchanged or raise :class:`MdpValidationError`."""
    errors = validate(spec)
    if errors:
        raise MdpValidationError(errors)
    return spec


def support(spec: MdpSpec, state: int, action: int) -> dict[int, float]:
    """Successor distribution for one (state, action) pair.

    Keys ascend by next state; entries with probability exactly 0 are dropped.
    """
    if not 0 <= state < spec.num_states:
        raise ValueError(f"state {state} outside [0, {spec.num_states})")
    if not 0 <= action < spec.num_actions:
        raise ValueError(f"action {action} outside [0, {spec.num_actions})")
    out: dict[int, float] = {}
    for tr in spec.transitions:  # transitions are sorted, keys ascend
        if tr.state == state and tr.action == action and tr.prob > 0.0:
            out[tr.next_state] = out.get(tr.next_state, 0.0) + tr.prob
    return out


def _require(doc: dict, key: str, kind: type, where: str):
    if key not in doc:
        raise MdpFormatError(f"missing field '{key}' in {where}")
    value = doc[key]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise MdpFormatError(f"field '{key}' in {where} must be an integer, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise MdpFormatError(f"field '{key}' in {where} must be a list, got {value!r}")
    return value


def load(document: str) -> MdpSpec:
    """Parse a JSON document into a validated :class:`MdpSpec`.

    Parse errors carry the line and column (syntax) or the offending field
    name (schema); validation failures raise :class:`MdpValidationError`.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MdpFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise MdpFormatError("top level must be a JSON object")

    known = {"num_states", "num_actions", "transitions", "rewards", "initial"}
    for key in doc:
        if key not in known:
            raise MdpFormatError(f"unknown field '{key}'")

    num_states = _require(doc, "num_states", int, "top level")
    num_actions = _require(doc, "num_actions", int, "top level")
    raw_transitions = _require(doc, "transitions", list, "top level")
    raw_rewards = _require(doc, "rewards", list, "top level")

    transitions = []
    for pos, entry in enumerate(raw_transitions):
        where = f"transitions[{pos}]"
        if not isinstance(entry, dict):
            raise MdpFormatError(f"{where} must be an object")
        for key in entry:
            if key not in {"state", "action", "next", "prob"}:
                raise MdpFormatError(f"unknown field '{key}' in {where}")
        if "prob" not in entry:
            raise MdpFormatError(f"missing field 'prob' in {where}")
        prob = entry["prob"]
        if not isinstance(prob, (int, float)) or isinstance(prob, bool):
            raise MdpFormatError(f"field 'prob' in {where} must be a number, got {prob!r}")
        transitions.append(
            Transition(
                state=_require(entry, "state", int, where),
                action=_require(entry, "action", int, where),
                next_state=_require(entry, "next", int, where),
                prob=float(prob),
            )
        )

    rewards = []
    for pos, r in enumerate(raw_rewards):
        if not isinstance(r, int) or isinstance(r, bool):
            raise MdpFormatError(f"field 'rewards[{pos}]' must be an integer, got {r!r}")
        rewards.append(r)

    initial_doc = doc.get("initial", "uniform")
    if initial_doc == "uniform":
        initial = None
    elif isinstance(initial_doc, dict) and set(initial_doc) == {"fixed"}:
        initial = _require(initial_doc, "fixed", int, "initial")
    else:
        raise MdpFormatError(f"field 'initial' must be \"uniform\" or {{\"fixed\": N}}, got {initial_doc!r}")

    return validated(
        MdpSpec(
            num_states=num_states,
            num_actions=num_actions,
            transitions=tuple(transitions),
            rewards=tuple(rewards),
            initial=initial,
        )
    )


def save(spec: MdpSpec) -> str:
    """Serialize to the canonical JSON document; ``load(save(spec)) == spec``.

    Fields appear in fixed order, transitions in canonical sort order, floats
    at full round-trip precision.
    """
    doc = {
        "num_states": spec.num_states,
        "num_actions": spec.num_actions,
        "transitions": [
            {"state": t.state, "action": t.action, "next": t.next_state, "prob": t.prob}
            for t in spec.transitions
        ],
        "rewards": list(spec.rewards),
        "initial": "uniform" if spec.initial is None else {"fixed": spec.initial},
    }
    return json.dumps(doc, indent=2) + "\n"


def bundled_mdp() -> MdpSpec:
    """The four-state, two-action chain behind the CLI's ``--mdp bundled``.

    Action 0 from state 0 branches 0.6/0.4 to states 1 and 2, action 1 at
    state 3 is a certain self-loop, every other supported pair splits 0.5/0.5.
    The reward of a step is the index of the successor state.
    """
    half = [
        (0, 1, 0, 0.5), (0, 1, 1, 0.5),
        (1, 0, 0, 0.5), (1, 0, 1, 0.5),
        (1, 1, 2, 0.5), (1, 1, 3, 0.5),
        (2, 0, 0, 0.5), (2, 0, 2, 0.5),
        (2, 1, 1, 0.5), (2, 1, 3, 0.5),
        (3, 0, 2, 0.5), (3, 0, 3, 0.5),
    ]
    transitions = [Transition(0, 0, 1, 0.6), Transition(0, 0, 2, 0.4), Transition(3, 1, 3, 1.0)]
    transitions += [Transition(s, a, n, p) for s, a, n, p in half]
    return MdpSpec(
        num_states=4,
        num_actions=2,
        transitions=tuple(transitions),
        rewards=(0, 1, 2, 3),
        initial=None,
    )
