"""Human-machine coordination: help sessions, affordances, tug-of-war.

Three concerns share this module because they share one session store:

* Help-request sessions. A low-reliability detection opens a session;
  the human confirms or refutes within the waiting period, else the
  session times out and responsibility reverts to the vehicle. Exactly
  one of CONFIRMATION / REFUTATION / NO_RESPONSE is ever produced per
  session. Ties between a response and the timeout at the same instant
  go to the human, so callers must apply responses before calling tick
  for that same timestamp.

* Affordances. What a human may do to a vehicle right now is a pure
  function of its state plus two overlays: an open session enables
  confirm/reject, and curtailed autonomy enables restore while hiding
  goal edits.

* Tug-of-war detection. Interleaved human and machine actions pulling
  one control axis in opposite directions are detected as alternating
  opposing subsequences of the action log; crossing the alternation
  budget curtails the machine's autonomy on that axis until a human
  restores it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .common import DetectionEvent, UavId

DEFAULT_WAITING_PERIOD_MS = 10_000
DEFAULT_ALTERNATIONS = 3
DEFAULT_WINDOW_MS = 30_000

HELP_REQUESTED = "help_requested"
CONFIRMED = "confirmed"
REFUTED = "refuted"
TIMED_OUT = "timed_out"
TERMINAL_STATES = (CONFIRMED, REFUTED, TIMED_OUT)

OUTCOME_MESSAGES = {
    CONFIRMED: "CONFIRMATION",
    REFUTED: "REFUTATION",
    TIMED_OUT: "NO_RESPONSE",
}

DIRECTIVE_KINDS = (
    "confirm_detection",
    "reject_detection",
    "return_to_launch",
    "altitude_change",
    "goal_update",
    "manual_override",
    "restore_autonomy",
    "video_request",
)

# required parameter names per directive kind
DIRECTIVE_PARAMS: dict[str, tuple[str, ...]] = {
    "confirm_detection": ("session",),
    "reject_detection": ("session",),
    "return_to_launch": (),
    "altitude_change": ("delta_m",),
    "goal_update": ("goal",),
    "manual_override": ("command",),
    "restore_autonomy": ("dimension",),
    "video_request": (),
}


class CoordinationError(Exception):
    pass


class UnknownSessionError(CoordinationError):
    pass


class DuplicateSessionError(CoordinationError):
    pass


class StaleActionError(CoordinationError):
    """A human action arrived too late to apply: the session is already
    terminal or the response fell outside the waiting period. Rejected
    and logged, never applied."""


class MachineRestoreError(CoordinationError):
    """Autonomy restoration is a human privilege."""


@dataclass
class CoordinationSession:
    id: str
    uav: UavId
    detection: DetectionEvent
    waiting_period: int
    opened_at: int
    state: str = HELP_REQUESTED
    closed_at: int | None = None
    outcome: str | None = None  # CONFIRMATION | REFUTATION | NO_RESPONSE

    @property
    def deadline(self) -> int:
        return self.opened_at + self.waiting_period

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "uav": self.uav.to_record(),
            "detection": self.detection.to_record(),
            "waiting_period": self.waiting_period,
            "opened_at": self.opened_at,
            "state": self.state,
            "closed_at": self.closed_at,
            "outcome": self.outcome,
        }


@dataclass(frozen=True)
class HumanDirective:
    kind: str
    target: UavId
    params: dict
    issued_at: int

    def __post_init__(self):
        if self.kind not in DIRECTIVE_KINDS:
            raise CoordinationError(f"unknown directive kind {self.kind!r}")
        missing = [p for p in DIRECTIVE_PARAMS[self.kind] if p not in self.params]
        if missing:
            raise CoordinationError(
                f"directive {self.kind!r} missing params: {', '.join(missing)}"
            )

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target.to_record(),
            "params": dict(self.params),
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_record(cls, r: dict) -> "HumanDirective":
        return cls(
            r["kind"], UavId.from_record(r["target"]), dict(r["params"]),
            r["issued_at"],
        )


# which directive kinds each vehicle state affords before overlays;
# camera-off states (standby, takeoff, RTL, land) exclude video_request
BASE_AFFORDANCES: dict[str, tuple[str, ...]] = {
    "standby": ("goal_update", "manual_override"),
    "takeoff": ("manual_override", "return_to_launch"),
    "searching": (
        "altitude_change", "goal_update", "manual_override",
        "return_to_launch", "video_request",
    ),
    "surveillance": (
        "altitude_change", "goal_update", "manual_override",
        "return_to_launch", "video_request",
    ),
    "victim_detected": (
        "altitude_change", "manual_override", "return_to_launch",
        "video_request",
    ),
    "tracking": (
        "altitude_change", "goal_update", "manual_override",
        "return_to_launch", "video_request",
    ),
    "delivery": ("manual_override", "return_to_launch", "video_request"),
    "RTL": ("manual_override",),
    "land": ("manual_override",),
}

# states in which a manual override must still be refused outright
HARD_SAFETY_STATES = ("land",)


@dataclass(frozen=True)
class ActionLogEntry:
    """One observed pull on a control axis.

    direction is either a signed number (numeric axes like altitude) or
    a ("set"|"unset", value) pair for categorical axes like mode.
    failsafe-tagged machine actions are exempt from curtailment checks.
    """

    actor: str  # human | machine
    uav: str
    dimension: str
    direction: object
    at: int
    failsafe: bool = False

    def to_record(self) -> dict:
        direction = (
            list(self.direction)
            if isinstance(self.direction, tuple)
            else self.direction
        )
        return {
            "actor": self.actor,
            "uav": self.uav,
            "dimension": self.dimension,
            "direction": direction,
            "at": self.at,
            "failsafe": self.failsafe,
        }

    @classmethod
    def from_record(cls, r: dict) -> "ActionLogEntry":
        direction = r["direction"]
        if isinstance(direction, list):
            direction = tuple(direction)
        return cls(
            r["actor"], r["uav"], r["dimension"], direction, r["at"],
            r.get("failsafe", False),
        )


def opposing(a, b) -> bool:
    """Opposite pulls: numeric by sign, categorical by set/unset of the
    same value."""
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return (a > 0) != (b > 0) and a != 0 and b != 0
    if isinstance(a, tuple) and isinstance(b, tuple):
        return a[1] == b[1] and a[0] != b[0]
    return False


@dataclass(frozen=True)
class Conflict:
    uav: str
    dimension: str
    alternations: int
    window: int
    detected_at: int


@dataclass(frozen=True)
class AutonomyRestriction:
    reason: str
    since: int


def longest_alternation_chain(entries: list[ActionLogEntry]) -> int:
    """Alternations in the longest subsequence whose consecutive entries
    have different actors and opposing directions.

    Greedy per pattern class: such a chain fixes, from its first element,
    the exact (actor, direction side) expected at every later position,
    so scanning once per possible start signature and taking every match
    is optimal. Numeric sides are the two signs; categorical sides are
    (set, v)/(unset, v) per value v.
    """
    # zero pulls oppose nothing, so they can never sit inside a chain
    entries = [
        e for e in entries
        if isinstance(e.direction, tuple) or e.direction != 0
    ]
    if not entries:
        return 0
    signatures: set[tuple] = set()
    for e in entries:
        if isinstance(e.direction, tuple):
            signatures.add((e.actor, ("cat", e.direction[0], e.direction[1])))
        else:
            signatures.add((e.actor, ("num", e.direction > 0)))
    best = 0
    for actor0, side0 in signatures:
        count = 0
        expect_actor, expect_side = actor0, side0
        for e in entries:
            if e.actor != expect_actor:
                continue
            if isinstance(e.direction, tuple):
                side = ("cat", e.direction[0], e.direction[1])
                flipped = ("cat", "unset" if side[1] == "set" else "set", side[2])
            else:
                side = ("num", e.direction > 0)
                flipped = ("num", not side[1])
            if side != expect_side:
                continue
            count += 1
            expect_actor = "machine" if expect_actor == "human" else "human"
            expect_side = flipped
        best = max(best, count)
    return max(0, best - 1)


class CoordinationService:
    """Single-writer session store plus action log and autonomy status."""

    def __init__(
        self,
        waiting_period: int = DEFAULT_WAITING_PERIOD_MS,
        alternations: int = DEFAULT_ALTERNATIONS,
        window: int = DEFAULT_WINDOW_MS,
    ):
        self.waiting_period = waiting_period
        self.alternations = alternations
        self.window = window
        self._sessions: dict[str, CoordinationSession] = {}
        self._by_detection: dict[tuple[str, int], str] = {}
        self._counter = 0
        self._actions: dict[str, list[ActionLogEntry]] = {}
        self._curtailed: dict[tuple[str, str], AutonomyRestriction] = {}
        # restoring autonomy wipes the conflict slate for that dimension
        self._reset_at: dict[tuple[str, str], int] = {}

    # ---- sessions ----

    def open_session(
        self,
        detection: DetectionEvent,
        at: int,
        waiting_period: int | None = None,
    ) -> CoordinationSession:
        if detection.key in self._by_detection:
            raise DuplicateSessionError(
                f"session already open for detection {detection.key}"
            )
        self._counter += 1
        session = CoordinationSession(
            id=f"cs-{self._counter:04d}",
            uav=detection.uav,
            detection=detection,
            waiting_period=(
                self.waiting_period if waiting_period is None else waiting_period
            ),
            opened_at=at,
        )
        self._sessions[session.id] = session
        self._by_detection[detection.key] = session.id
        return session

    def session(self, session_id: str) -> CoordinationSession:
        if session_id not in self._sessions:
            raise UnknownSessionError(session_id)
        return self._sessions[session_id]

    def all_sessions(self) -> tuple[CoordinationSession, ...]:
        return tuple(sorted(self._sessions.values(), key=lambda s: s.id))

    def open_sessions(self, uav: str | None = None) -> tuple[CoordinationSession, ...]:
        out = [
            s
            for s in self._sessions.values()
            if not s.terminal and (uav is None or s.uav.name == uav)
        ]
        return tuple(sorted(out, key=lambda s: s.id))

    def resolve(self, session_id: str, decision: str, at: int) -> CoordinationSession:
        """Apply a human confirm/reject. Beyond the waiting period or on a
        terminal session the action is stale; at the deadline exactly, the
        human wins (callers apply responses before tick for equal times)."""
        session = self.session(session_id)
        if session.terminal:
            raise StaleActionError(
                f"session {session_id} already {session.state}"
            )
        if at > session.deadline:
            raise StaleActionError(
                f"response at {at} after waiting period ending {session.deadline}"
            )
        if decision not in ("confirm", "reject"):
            raise CoordinationError(f"unknown decision {decision!r}")
        session.state = CONFIRMED if decision == "confirm" else REFUTED
        session.closed_at = at
        session.outcome = OUTCOME_MESSAGES[session.state]
        return session

    def tick(self, now: int) -> list[CoordinationSession]:
        """Time out every open session whose waiting period has elapsed.
        closed_at lands on the deadline itself, not on the observing tick."""
        expired = []
        for session in sorted(self._sessions.values(), key=lambda s: s.id):
            if not session.terminal and now >= session.deadline:
                session.state = TIMED_OUT
                session.closed_at = session.deadline
                session.outcome = OUTCOME_MESSAGES[TIMED_OUT]
                expired.append(session)
        return expired

    def due_sessions(self, now: int) -> tuple[CoordinationSession, ...]:
        """Open sessions whose waiting period has elapsed, untouched.
        Event-sourced callers announce first and mutate only when the
        announcement comes back through :meth:`apply_outcome`."""
        return tuple(
            s for s in sorted(self._sessions.values(), key=lambda s: s.id)
            if not s.terminal and now >= s.deadline
        )

    def apply_outcome(
        self, session_id: str, state: str, closed_at: int
    ) -> CoordinationSession:
        """Adopt an already-announced terminal state, idempotently."""
        session = self.session(session_id)
        if state not in TERMINAL_STATES:
            raise CoordinationError(f"{state!r} is not a terminal session state")
        if session.terminal:
            return session
        session.state = state
        session.closed_at = closed_at
        session.outcome = OUTCOME_MESSAGES[state]
        return session

    # ---- affordances ----

    def compute_affordances(self, uav: str, state: str) -> tuple[str, ...]:
        """Directive kinds available against one vehicle right now.
        Unknown states afford nothing; callers surface the drift."""
        base = BASE_AFFORDANCES.get(state)
        if base is None:
            return ()
        allowed = set(base)
        if self.open_sessions(uav):
            allowed |= {"confirm_detection", "reject_detection"}
        if self.curtailed_dimensions(uav):
            allowed.add("restore_autonomy")
            allowed.discard("goal_update")
        return tuple(sorted(allowed))

    # ---- tug-of-war ----

    def record_action(self, entry: ActionLogEntry) -> None:
        log = self._actions.setdefault(entry.uav, [])
        if log and entry.at < log[-1].at:
            raise CoordinationError(
                f"action log for {entry.uav!r} must be chronological"
            )
        log.append(entry)

    def actions(self, uav: str) -> tuple[ActionLogEntry, ...]:
        return tuple(self._actions.get(uav, []))

    def detect_tug_of_war(
        self,
        uav: str,
        now: int | None = None,
        window: int | None = None,
        k: int | None = None,
    ) -> Conflict | None:
        """Report the worst conflicting dimension, if any crosses k."""
        entries = self._actions.get(uav, [])
        if not entries:
            return None
        window = self.window if window is None else window
        k = self.alternations if k is None else k
        now = entries[-1].at if now is None else now
        recent = [
            e for e in entries
            if now - window <= e.at <= now
            and e.at > self._reset_at.get((uav, e.dimension), -1)
        ]
        best: Conflict | None = None
        for dimension in sorted({e.dimension for e in recent}):
            chain = longest_alternation_chain(
                [e for e in recent if e.dimension == dimension]
            )
            if chain >= k and (best is None or chain > best.alternations):
                best = Conflict(uav, dimension, chain, window, now)
        return best

    # ---- autonomy curtailment ----

    def break_cycle(self, conflict: Conflict, at: int) -> AutonomyRestriction:
        restriction = AutonomyRestriction(
            reason=f"tug_of_war:{conflict.dimension}", since=at
        )
        self._curtailed[(conflict.uav, conflict.dimension)] = restriction
        return restriction

    def curtail(self, uav: str, dimension: str, reason: str, at: int) -> None:
        """Explicit human-requested curtailment."""
        self._curtailed[(uav, dimension)] = AutonomyRestriction(reason, at)

    def restore_autonomy(self, uav: str, dimension: str, actor: str, at: int) -> None:
        if actor != "human":
            raise MachineRestoreError(
                f"{actor!r} may not restore autonomy for {uav!r}"
            )
        if dimension == "all":
            for key in [k for k in self._curtailed if k[0] == uav]:
                self._reset_at[key] = at
                del self._curtailed[key]
            return
        self._curtailed.pop((uav, dimension), None)
        self._reset_at[(uav, dimension)] = at

    def is_curtailed(self, uav: str, dimension: str) -> bool:
        return (uav, dimension) in self._curtailed

    def curtailed_dimensions(self, uav: str) -> tuple[str, ...]:
        return tuple(sorted(d for (u, d) in self._curtailed if u == uav))

    def autonomy_status(self, uav: str) -> dict:
        dims = {
            d: {"reason": r.reason, "since": r.since}
            for (u, d), r in self._curtailed.items()
            if u == uav
        }
        return {"uav": uav, "mode": "curtailed" if dims else "full",
                "dimensions": dims}
