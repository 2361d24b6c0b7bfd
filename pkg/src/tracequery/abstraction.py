"""Scripted highway simulator and the predicate layer above it.

The simulator produces episodes of raw kinematic states plus the action
taken at each state; the vocabulary maps every (state, action) pair to
the set of predicate names that hold there.  Lane 1 is the top lane of
the rendered road, so "above" means some other car is travelling in the
lane directly beneath the agent.

Everything is deterministic given (config, seed, agent kind): all
randomness flows through one `random.Random` instance and iteration
orders are fixed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .ltlf import Letter

ACTIONS = ("left", "right", "faster", "slower", "idle")

LANE_GROUP = "lane"
RELATION_GROUP = "relation"
ACTION_GROUP = "action"


@dataclass(frozen=True)
class Car:
    id: str
    lane: int
    x: float
    speed: float


@dataclass(frozen=True)
class RawState:
    agent: Car
    npcs: tuple[Car, ...]
    step: int


@dataclass(frozen=True)
class PredicateDef:
    """A named boolean feature of a (state, action) pair.

    `kind` is "state" or "action"; `group` drives drop-down grouping in
    the query interface (lane / relation / action).
    """

    name: str
    kind: str
    group: str
    evaluator: Callable[[RawState, Optional[str]], bool]
    params: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class EpisodeStep:
    raw: RawState
    action: str
    letter: Letter
    active_policy: str  # ground truth: "A" or "B"


@dataclass(frozen=True)
class SimConfig:
    lanes: int = 4
    steps: int = 200
    npc_count: int = 6
    agent_speed: float = 25.0
    speed_min: float = 15.0
    speed_max: float = 35.0
    accel: float = 2.0
    npc_speed_min: float = 20.0
    npc_speed_max: float = 28.0
    npc_lane_change_prob: float = 0.02
    wander_prob: float = 0.12  # plain policy: chance of a free lane change
    spawn_behind: float = 60.0
    spawn_ahead: float = 140.0
    respawn_distance: float = 160.0
    proximity: float = 15.0  # behind / in-front threshold, meters
    adjacent_margin: float = 10.0  # above / below threshold, meters
    trigger: tuple[str, str] = ("lane-2", "above")

    def validate(self) -> None:
        if self.lanes < 2:
            raise ValueError("lanes must be at least 2")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.npc_count < 0:
            raise ValueError("npc_count must be nonnegative")
        if not (0 < self.speed_min <= self.agent_speed <= self.speed_max):
            raise ValueError("need 0 < speed_min <= agent_speed <= speed_max")
        if self.proximity <= 0 or self.adjacent_margin <= 0:
            raise ValueError("proximity thresholds must be positive")
        vocab_names = {p.name for p in default_vocab(self.lanes)}
        for name in self.trigger:
            if name not in vocab_names:
                raise ValueError(f"trigger predicate {name!r} not in vocabulary")
            if name.startswith("action-"):
                raise ValueError("trigger predicates must be state predicates")


@dataclass(frozen=True)
class Episode:
    id: str
    steps: tuple[EpisodeStep, ...]
    seed: int
    agent_kind: str
    config: SimConfig

    @property
    def letters(self) -> list[Letter]:
        return [s.letter for s in self.steps]


AGENT_KINDS = ("plain", "toplane", "collision", "dual-trigger")


# ---------------------------------------------------------------------------
# Vocabulary

def default_vocab(
    lanes: int, proximity: float = 15.0, adjacent_margin: float = 10.0
) -> list[PredicateDef]:
    """lane-1..lane-L, the four relational predicates, and one predicate
    per action.  Exactly one lane predicate and exactly one action
    predicate hold in any reachable (state, action) pair.
    """
    if lanes < 2:
        raise ValueError("lanes must be at least 2")

    defs: list[PredicateDef] = []
    for i in range(1, lanes + 1):
        defs.append(
            PredicateDef(
                name=f"lane-{i}",
                kind="state",
                group=LANE_GROUP,
                evaluator=_lane_evaluator(i),
                params={"lane": i},
            )
        )

    def behind(s: RawState, a: Optional[str]) -> bool:
        return any(
            n.lane == s.agent.lane and 0 < n.x - s.agent.x <= proximity
            for n in s.npcs
        )

    def in_front(s: RawState, a: Optional[str]) -> bool:
        return any(
            n.lane == s.agent.lane and 0 < s.agent.x - n.x <= proximity
            for n in s.npcs
        )

    def above(s: RawState, a: Optional[str]) -> bool:
        return any(
            n.lane == s.agent.lane + 1 and abs(n.x - s.agent.x) <= adjacent_margin
            for n in s.npcs
        )

    def below(s: RawState, a: Optional[str]) -> bool:
        return any(
            n.lane == s.agent.lane - 1 and abs(n.x - s.agent.x) <= adjacent_margin
            for n in s.npcs
        )

    for name, fn in (
        ("behind", behind),
        ("in-front", in_front),
        ("above", above),
        ("below", below),
    ):
        threshold = proximity if name in ("behind", "in-front") else adjacent_margin
        defs.append(
            PredicateDef(
                name=name,
                kind="state",
                group=RELATION_GROUP,
                evaluator=fn,
                params={"distance": threshold},
            )
        )

    for action in ACTIONS:
        defs.append(
            PredicateDef(
                name=f"action-{action}",
                kind="action",
                group=ACTION_GROUP,
                evaluator=_action_evaluator(action),
            )
        )
    return defs


def _lane_evaluator(i: int) -> Callable[[RawState, Optional[str]], bool]:
    def holds(s: RawState, a: Optional[str]) -> bool:
        return s.agent.lane == i

    return holds


def _action_evaluator(action: str) -> Callable[[RawState, Optional[str]], bool]:
    def holds(s: RawState, a: Optional[str]) -> bool:
        return a == action

    return holds


def abstract_state(
    s: RawState, action: Optional[str], vocab: list[PredicateDef]
) -> Letter:
    """The set of names of predicates that hold on (state, action)."""
    return frozenset(p.name for p in vocab if p.evaluator(s, action))


def _state_letter(s: RawState, vocab: list[PredicateDef]) -> Letter:
    return frozenset(
        p.name for p in vocab if p.kind == "state" and p.evaluator(s, None)
    )


# ---------------------------------------------------------------------------
# Policies

def _nearest_ahead(state: RawState, max_gap: float) -> Optional[Car]:
    best = None
    for n in state.npcs:
        if n.lane == state.agent.lane and 0 < n.x - state.agent.x <= max_gap:
            if best is None or n.x < best.x:
                best = n
    return best


def _lane_clear(state: RawState, lane: int, gap: float) -> bool:
    return all(
        not (n.lane == lane and abs(n.x - state.agent.x) <= gap)
        for n in state.npcs
    )


def _safe_lane_changes(state: RawState, cfg: SimConfig) -> list[str]:
    agent = state.agent
    options = []
    if agent.lane > 1 and _lane_clear(state, agent.lane - 1, cfg.proximity):
        options.append("left")
    if agent.lane < cfg.lanes and _lane_clear(state, agent.lane + 1, cfg.proximity):
        options.append("right")
    return options


def _policy_plain(state: RawState, rng: random.Random, cfg: SimConfig) -> str:
    agent = state.agent
    if _nearest_ahead(state, cfg.proximity) is not None:
        options = _safe_lane_changes(state, cfg)
        if options:
            return options[0] if len(options) == 1 else rng.choice(options)
        return "slower"
    if agent.speed < cfg.agent_speed:
        return "faster"
    if rng.random() < cfg.wander_prob:
        options = _safe_lane_changes(state, cfg)
        if options:
            return options[0] if len(options) == 1 else rng.choice(options)
    return "idle"


def _policy_toplane(state: RawState, rng: random.Random, cfg: SimConfig) -> str:
    agent = state.agent
    if agent.lane > 1 and _lane_clear(state, agent.lane - 1, cfg.proximity):
        return "left"
    return _policy_plain(state, rng, cfg)


def _policy_collision(state: RawState, rng: random.Random, cfg: SimConfig) -> str:
    agent = state.agent
    target = None
    best_cost = None
    for n in state.npcs:
        cost = abs(n.x - agent.x) + 20.0 * abs(n.lane - agent.lane)
        if best_cost is None or cost < best_cost:
            best_cost, target = cost, n
    if target is None:
        return "idle"
    if target.lane < agent.lane:
        return "left"
    if target.lane > agent.lane:
        return "right"
    if target.x > agent.x:
        return "faster"
    if target.x < agent.x:
        return "slower"
    return "idle"


_POLICIES = {
    "plain": _policy_plain,
    "toplane": _policy_toplane,
    "collision": _policy_collision,
}


# ---------------------------------------------------------------------------
# Simulation

def simulate(cfg: SimConfig, seed: int, agent_kind: str, episode_id: str = "ep") -> Episode:
    """Run one episode under a scripted policy.

    The dual-trigger agent runs the plain policy until the first step
    whose state predicates include both trigger predicates, then runs the
    collision policy from that step on; `active_policy` records the
    ground truth per step.  Collisions never terminate an episode; cars
    simply co-locate.
    """
    cfg.validate()
    if agent_kind not in AGENT_KINDS:
        raise ValueError(f"unknown agent kind {agent_kind!r}")
    vocab = default_vocab(cfg.lanes, cfg.proximity, cfg.adjacent_margin)
    rng = random.Random(seed)

    agent = Car("agent", rng.randint(1, cfg.lanes), 0.0, cfg.agent_speed)
    npcs = [
        Car(
            f"npc-{i}",
            rng.randint(1, cfg.lanes),
            rng.uniform(-cfg.spawn_behind, cfg.spawn_ahead),
            rng.uniform(cfg.npc_speed_min, cfg.npc_speed_max),
        )
        for i in range(cfg.npc_count)
    ]

    trigger = frozenset(cfg.trigger)
    triggered = False
    steps: list[EpisodeStep] = []

    for t in range(cfg.steps):
        state = RawState(agent=agent, npcs=tuple(npcs), step=t)
        if agent_kind == "dual-trigger" and not triggered:
            if trigger <= _state_letter(state, vocab):
                triggered = True
        if agent_kind == "dual-trigger":
            policy = _POLICIES["collision" if triggered else "plain"]
            tag = "B" if triggered else "A"
        else:
            policy = _POLICIES[agent_kind]
            tag = "A"

        action = policy(state, rng, cfg)
        if (action == "left" and agent.lane == 1) or (
            action == "right" and agent.lane == cfg.lanes
        ):
            action = "idle"
        steps.append(
            EpisodeStep(
                raw=state,
                action=action,
                letter=abstract_state(state, action, vocab),
                active_policy=tag,
            )
        )

        agent = _apply_action(agent, action, cfg)
        agent = replace(agent, x=agent.x + agent.speed)
        npcs = [_advance_npc(n, agent, rng, cfg) for n in npcs]

    return Episode(
        id=episode_id,
        steps=tuple(steps),
        seed=seed,
        agent_kind=agent_kind,
        config=cfg,
    )


def _apply_action(agent: Car, action: str, cfg: SimConfig) -> Car:
    if action == "left":
        return replace(agent, lane=agent.lane - 1)
    if action == "right":
        return replace(agent, lane=agent.lane + 1)
    if action == "faster":
        return replace(agent, speed=min(cfg.speed_max, agent.speed + cfg.accel))
    if action == "slower":
        return replace(agent, speed=max(cfg.speed_min, agent.speed - cfg.accel))
    return agent


def _advance_npc(
    npc: Car, agent: Car, rng: random.Random, cfg: SimConfig
) -> Car:
    lane = npc.lane
    if rng.random() < cfg.npc_lane_change_prob:
        lane = min(cfg.lanes, max(1, lane + rng.choice((-1, 1))))
    x = npc.x + npc.speed
    speed = npc.speed
    if abs(x - agent.x) > cfg.respawn_distance:
        # keep traffic near the agent so interactions keep happening
        x = agent.x + rng.uniform(-cfg.spawn_behind, cfg.spawn_ahead)
        lane = rng.randint(1, cfg.lanes)
        speed = rng.uniform(cfg.npc_speed_min, cfg.npc_speed_max)
    return replace(npc, lane=lane, x=x, speed=speed)
