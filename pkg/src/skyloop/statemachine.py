"""Task state machines driving each simulated UAV through its mission.

A machine is a plain labelled transition system: named states, an initial
state, and (source, event, target) triples. Vehicles progress by firing
events produced by their own analysis phase or injected by accepted human
directives. Construction validates the machine shape; unreachable states
are tolerated but reported as warnings so a sloppy mission file is usable
while still flagging dead weight.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


class MachineError(Exception):
    """Base class for state machine failures."""


class MachineValidationError(MachineError):
    """Raised when a machine definition is structurally unusable.

    Carries the full list of problems so a mission author sees every
    offender at once rather than one per attempt.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Transition:
    source: str
    event: str
    target: str

    def to_record(self) -> list:
        return [self.source, self.event, self.target]


class TaskStateMachine:
    """Deterministic labelled transition system with one initial state."""

    def __init__(
        self,
        states,
        transitions,
        initial: str,
    ):
        self.states: frozenset[str] = frozenset(states)
        self.transitions: tuple[Transition, ...] = tuple(
            t if isinstance(t, Transition) else Transition(*t) for t in transitions
        )
        self.initial = initial
        self.current = initial
        self.warnings: list[str] = []
        self._validate()
        # edge lookup: (state, event) -> target, deterministic by validation
        self._edges = {(t.source, t.event): t.target for t in self.transitions}
        self._check_reachability()

    def _validate(self) -> None:
        problems: list[str] = []
        if not self.states:
            problems.append("state set is empty")
        if not self.transitions:
            problems.append("transition list is empty")
        if self.initial not in self.states:
            problems.append(f"initial state {self.initial!r} not declared")
        undeclared = sorted(
            {t.source for t in self.transitions if t.source not in self.states}
            | {t.target for t in self.transitions if t.target not in self.states}
        )
        for name in undeclared:
            problems.append(f"transition endpoint {name!r} not declared")
        seen: dict[tuple[str, str], str] = {}
        for t in self.transitions:
            key = (t.source, t.event)
            if key in seen and seen[key] != t.target:
                problems.append(
                    f"event {t.event!r} from {t.source!r} targets both "
                    f"{seen[key]!r} and {t.target!r}"
                )
            seen[key] = t.target
        if problems:
            raise MachineValidationError(problems)

    def _check_reachability(self) -> None:
        for name in self.unreachable_states():
            self.warnings.append(f"state {name!r} unreachable from {self.initial!r}")

    def reachable_states(self) -> frozenset[str]:
        """States reachable from the initial state via any event path."""
        seen = {self.initial}
        queue = deque([self.initial])
        while queue:
            here = queue.popleft()
            for t in self.transitions:
                if t.source == here and t.target not in seen:
                    seen.add(t.target)
                    queue.append(t.target)
        return frozenset(seen)

    def unreachable_states(self) -> tuple[str, ...]:
        return tuple(sorted(self.states - self.reachable_states()))

    def events_from(self, state: str | None = None) -> tuple[str, ...]:
        """Events with a transition out of the given state (default: current)."""
        here = self.current if state is None else state
        return tuple(sorted(e for (s, e) in self._edges if s == here))

    def can_fire(self, event: str) -> bool:
        return (self.current, event) in self._edges

    def peek(self, event: str) -> str | None:
        """Target of firing the event from the current state, without firing."""
        return self._edges.get((self.current, event))

    def fire(self, event: str) -> str | None:
        """Fire an event; returns the new state, or None if no edge matches.

        A non-matching event is not an error: agents probe freely and let
        the machine arbitrate what applies in the current state.
        """
        target = self._edges.get((self.current, event))
        if target is not None:
            self.current = target
        return target

    def reset(self) -> None:
        self.current = self.initial

    def to_record(self) -> dict:
        return {
            "states": sorted(self.states),
            "initial": self.initial,
            "transitions": [t.to_record() for t in sorted(
                self.transitions, key=lambda t: (t.source, t.event, t.target)
            )],
        }

    @classmethod
    def from_record(cls, record: dict) -> "TaskStateMachine":
        return cls(
            states=record["states"],
            transitions=[tuple(t) for t in record["transitions"]],
            initial=record["initial"],
        )


# mission vocabulary shared by the stock machine and the scenario files
STANDBY = "standby"
TAKEOFF = "takeoff"
SEARCHING = "searching"
SURVEILLANCE = "surveillance"
VICTIM_DETECTED = "victim_detected"
TRACKING = "tracking"
DELIVERY = "delivery"
RTL = "RTL"
LAND = "land"

FLIGHT_STATES = (TAKEOFF, SEARCHING, SURVEILLANCE, VICTIM_DETECTED, TRACKING, DELIVERY)


def default_search_machine() -> TaskStateMachine:
    """Stock search-and-rescue machine used by the bundled scenarios."""
    states = [
        STANDBY, TAKEOFF, SEARCHING, SURVEILLANCE, VICTIM_DETECTED,
        TRACKING, DELIVERY, RTL, LAND,
    ]
    transitions = [
        (STANDBY, "launch", TAKEOFF),
        (TAKEOFF, "cruise_altitude", SEARCHING),
        (SEARCHING, "survey_area", SURVEILLANCE),
        (SURVEILLANCE, "survey_done", SEARCHING),
        (SEARCHING, "victim_sighted", VICTIM_DETECTED),
        (SURVEILLANCE, "victim_sighted", VICTIM_DETECTED),
        (VICTIM_DETECTED, "detection_confirmed", TRACKING),
        (VICTIM_DETECTED, "detection_rejected", SEARCHING),
        (TRACKING, "begin_delivery", DELIVERY),
        (TRACKING, "target_lost", SEARCHING),
        (DELIVERY, "payload_released", RTL),
        (RTL, "home_reached", LAND),
        (LAND, "shutdown", STANDBY),
    ]
    for state in FLIGHT_STATES:
        transitions.append((state, "low_battery", RTL))
        transitions.append((state, "return_ordered", RTL))
    return TaskStateMachine(states, transitions, STANDBY)
