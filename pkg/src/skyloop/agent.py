"""One simulated UAV: a MAPE loop over a task state machine.

Each step runs exactly one monitor/analyze/plan/execute iteration:

* monitor drains the inbox (directives, session outcomes, autonomy and
  dispatch messages) and advances the vehicle's physics,
* analyze turns sensor truth into conditions: sightings from the
  simulated camera, weather degradation, battery floor crossings,
* plan maps conditions onto state machine events, setpoint changes, and
  help requests under the detection decision policy,
* execute fires transitions and publishes every externally visible
  effect on the bus in the same step it happened.

All randomness comes from one injected, per-agent seeded stream, so an
agent's emitted envelope sequence is a pure function of (seed, scenario,
inbound messages).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bus import Outbox
from .common import DetectionEvent, UavId
from .coordination import (
    BASE_AFFORDANCES,
    HARD_SAFETY_STATES,
    ActionLogEntry,
    HumanDirective,
)
from .explain import AdaptationEvent
from .statemachine import TaskStateMachine, default_search_machine
from .world import GeoPoint, LocalFrame, MistRegion, MotionModel, Target, in_footprint

ACT_AUTONOMOUSLY = "act_autonomously"
CONTINUE_SEARCH = "continue_search"
REQUEST_HELP = "request_help"

CAMERA_ACTIVE_STATES = (
    "searching", "surveillance", "victim_detected", "tracking", "delivery",
)

# event snippet shared with ground-side consumers that classify adaptations
WEATHER_EVENT = "misty weather conditions"


@dataclass(frozen=True)
class ThresholdPolicy:
    confidence_act: float = 0.8
    reliability_act: float = 0.8
    trust_floor: float = 0.5

    def to_record(self) -> dict:
        return {
            "confidence_act": self.confidence_act,
            "reliability_act": self.reliability_act,
            "trust_floor": self.trust_floor,
        }


def decide_detection(
    d: DetectionEvent,
    policy: ThresholdPolicy,
    trust_score: float,
    waive_trust: bool = False,
) -> str:
    """Three-way gate over (confidence, reliability, trust).

    Confidence below threshold always means keep searching. Above it,
    the vehicle acts alone only when reliability and calibrated trust
    both clear their floors; a reliability or trust shortfall asks the
    human instead. waive_trust implements responsibility reversion after
    an unanswered help request: the vehicle decides on its scores alone.
    """
    if d.confidence < policy.confidence_act:
        return CONTINUE_SEARCH
    trust_ok = waive_trust or trust_score >= policy.trust_floor
    if d.reliability >= policy.reliability_act and trust_ok:
        return ACT_AUTONOMOUSLY
    if waive_trust:
        return CONTINUE_SEARCH
    return REQUEST_HELP


@dataclass
class CalibratedTrust:
    """Exponential moving agreement score for one machine capability."""

    capability: str = "person-detection"
    score: float = 0.5
    alpha: float = 0.2
    history: list = field(default_factory=list)

    def update(self, outcome: str) -> float:
        if outcome not in ("confirmed", "refuted"):
            raise ValueError(f"unknown trust outcome {outcome!r}")
        value = 1.0 if outcome == "confirmed" else 0.0
        self.score = (1.0 - self.alpha) * self.score + self.alpha * value
        self.history.append(outcome)
        return self.score

    def to_record(self) -> dict:
        return {
            "capability": self.capability,
            "score": self.score,
            "alpha": self.alpha,
            "samples": len(self.history),
        }


@dataclass(frozen=True)
class NoiseProfile:
    """Uniform score noise: mean +/- spread, clamped to [0, 1]."""

    confidence_mean: float
    confidence_spread: float
    reliability_mean: float
    reliability_spread: float

    def sample(self, rng) -> tuple[float, float]:
        conf = rng.uniform(
            self.confidence_mean - self.confidence_spread,
            self.confidence_mean + self.confidence_spread,
        )
        rel = rng.uniform(
            self.reliability_mean - self.reliability_spread,
            self.reliability_mean + self.reliability_spread,
        )
        return (min(1.0, max(0.0, conf)), min(1.0, max(0.0, rel)))

    @classmethod
    def from_record(cls, r: dict) -> "NoiseProfile":
        return cls(
            r["confidence_mean"], r["confidence_spread"],
            r["reliability_mean"], r["reliability_spread"],
        )


CLEAR_PROFILE = NoiseProfile(0.93, 0.04, 0.90, 0.05)
MIST_PROFILE = NoiseProfile(0.90, 0.05, 0.55, 0.10)


@dataclass
class AgentConfig:
    home: GeoPoint
    route: list[GeoPoint] = field(default_factory=list)
    loop_route: bool = False
    cruise_altitude_m: float = 40.0
    mist_ceiling_m: float = 36.0
    mist_drop_m: float = 8.0
    speed_mps: float = 8.0
    climb_mps: float = 4.0
    camera_half_angle_deg: float = 30.0
    battery_rate_pct_s: float = 0.05
    battery_floor_pct: float = 20.0
    delivery_capable: bool = False
    delivery_radius_m: float = 12.0
    delivery_duration_ms: int = 5000
    land_duration_ms: int = 3000
    target_cooldown_ms: int = 2000
    auto_launch: bool = False
    policy: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    trust_initial: float = 0.5
    trust_alpha: float = 0.2
    clear_profile: NoiseProfile = CLEAR_PROFILE
    mist_profile: NoiseProfile = MIST_PROFILE


@dataclass
class WorldView:
    """Scenario ground truth the simulated sensors sample from."""

    frame: LocalFrame
    targets: list[Target] = field(default_factory=list)
    mist_regions: list[MistRegion] = field(default_factory=list)

    def in_mist(self, p: GeoPoint) -> bool:
        return any(m.covers(p, self.frame) for m in self.mist_regions)


class UavAgent:
    """Single logical actor; stepped exclusively by the simulation driver."""

    def __init__(
        self,
        uav: UavId,
        config: AgentConfig,
        world: WorldView,
        outbox: Outbox,
        rng,
        machine: TaskStateMachine | None = None,
    ):
        self.uav = uav
        self.config = config
        self.world = world
        self.outbox = outbox
        self.rng = rng
        self.machine = machine if machine is not None else default_search_machine()
        self.motion = MotionModel(
            frame=world.frame,
            position=config.home,
            speed_mps=config.speed_mps,
            climb_mps=config.climb_mps,
        )
        self.trust = CalibratedTrust(
            score=config.trust_initial, alpha=config.trust_alpha
        )
        self.battery = 100.0
        self.health = "nominal"
        self.inbox: list = []
        self.frame_counter = 0
        self.curtailed_dims: set[str] = set()
        self.dismissed_targets: set[str] = set()
        self._cooldowns: dict[str, int] = {}
        self._pending_help: dict[tuple[str, int], DetectionEvent] = {}
        self._tracked_target: str | None = None
        self._held_route: list[GeoPoint] | None = None
        self._dispatch_target: GeoPoint | None = None
        self._phase_entered_at = 0
        self._last_at = 0
        self._launched = False

    # ---- plumbing ----

    @property
    def state(self) -> str:
        return self.machine.current

    def deliver(self, envelope) -> None:
        self.inbox.append(envelope)

    def _publish(self, channel: str, payload: dict, qos: str = "standard"):
        return self.outbox.send(f"uav/{self.uav.name}/{channel}", payload, qos=qos)

    def _fire(self, event: str, now: int) -> str | None:
        """Fire a machine event and publish the transition immediately."""
        source = self.machine.current
        target = self.machine.fire(event)
        if target is not None:
            self._phase_entered_at = now
            self._publish(
                "state",
                {"from": source, "event": event, "to": target, "at": now},
            )
            self._on_enter(target, now)
        return target

    def _on_enter(self, state: str, now: int) -> None:
        if state == "takeoff":
            self.motion.altitude_setpoint_m = self.config.cruise_altitude_m
        elif state == "searching":
            if self._held_route is not None:
                self.motion.set_route(self._held_route, self.config.loop_route)
                self._held_route = None
        elif state == "RTL":
            self.motion.set_route([self.config.home])
            self._held_route = None
        elif state == "land":
            self.motion.altitude_setpoint_m = 0.0

    # ---- MAPE step ----

    def step(self, now: int) -> None:
        dt_ms = now - self._last_at
        self._last_at = now
        # monitor: inbound messages, then physics
        for envelope in self.inbox:
            self._handle_message(envelope, now)
        self.inbox.clear()
        self._update_physics(dt_ms, now)
        # analyze + plan + execute, one pass
        self._run_phases(now)
        self._publish_telemetry(now)

    def _update_physics(self, dt_ms: int, now: int) -> None:
        if self.state not in ("standby", "land"):
            self.motion.step(dt_ms)
            self.battery = max(
                0.0, self.battery - self.config.battery_rate_pct_s * dt_ms / 1000.0
            )

    def _run_phases(self, now: int) -> None:
        state = self.state
        if state == "standby":
            if self.config.auto_launch and not self._launched:
                self._launch(now)
            return
        # battery failsafe dominates every flight state, takeoff included
        if self.battery <= self.config.battery_floor_pct and state not in (
            "RTL", "land",
        ):
            self._battery_failsafe(now)
            return
        if state == "takeoff":
            if self.motion.altitude_m >= self.config.cruise_altitude_m:
                self._fire("cruise_altitude", now)
        elif state in ("searching", "surveillance"):
            self._adapt_to_weather(now)
            self._sense_and_decide(now)
        elif state == "tracking":
            self._adapt_to_weather(now)
            if self.config.delivery_capable and self._near_tracked_target():
                self._fire("begin_delivery", now)
        elif state == "delivery":
            if now - self._phase_entered_at >= self.config.delivery_duration_ms:
                self._fire("payload_released", now)
        elif state == "RTL":
            if self.motion.at_route_end() and self._near(self.config.home, 5.0):
                self._fire("home_reached", now)
        elif state == "land":
            if now - self._phase_entered_at >= self.config.land_duration_ms:
                self._fire("shutdown", now)

    # ---- monitor: message handling ----

    def _handle_message(self, envelope, now: int) -> None:
        topic, payload = envelope.topic, envelope.payload
        if topic == "human/directive":
            record = payload.get("directive", payload)
            if record.get("target", {}).get("name") != self.uav.name:
                return
            self.apply_directive(HumanDirective.from_record(record), now)
        elif topic.startswith("gcs/coord/"):
            if payload.get("phase") == "resolved":
                self._handle_session_outcome(payload["session"], now)
        elif topic == f"gcs/autonomy/{self.uav.name}":
            self.curtailed_dims = set(payload.get("dimensions", {}))
        elif topic == "gcs/mission":
            if (
                payload.get("kind") == "dispatch"
                and payload.get("uav") == self.uav.name
            ):
                self._handle_dispatch(payload, now)

    def _handle_dispatch(self, payload: dict, now: int) -> None:
        target = GeoPoint.from_record(payload["target"])
        self._dispatch_target = target
        self.config.route = [target]
        self.config.loop_route = False
        if self.state == "standby":
            self._launch(now)
        else:
            self.motion.set_route([target])

    def _launch(self, now: int) -> None:
        self._launched = True
        self.motion.set_route(list(self.config.route), self.config.loop_route)
        self._fire("launch", now)

    def _handle_session_outcome(self, session: dict, now: int) -> None:
        key = (session["detection"]["uav"]["name"], session["detection"]["frame"])
        if key not in self._pending_help:
            return
        detection = self._pending_help.pop(key)
        outcome = session["outcome"]
        if outcome == "CONFIRMATION":
            self._update_trust("confirmed", now)
            self._begin_tracking(detection, now, initiator="human")
        elif outcome == "REFUTATION":
            self._update_trust("refuted", now)
            self._dismiss(detection, now, "human refuted sighting")
        elif outcome == "NO_RESPONSE":
            # responsibility reverts: decide again on scores alone
            decision = decide_detection(
                detection, self.config.policy, self.trust.score, waive_trust=True
            )
            self._publish(
                "detection",
                {
                    "detection": detection.to_record(),
                    "decision": decision,
                    "reverted": True,
                    "at": now,
                },
                qos="critical",
            )
            if decision == ACT_AUTONOMOUSLY:
                self._begin_tracking(detection, now, initiator="machine")
            else:
                self._dismiss(detection, now, "no response within waiting period")

    def _update_trust(self, outcome: str, now: int) -> None:
        score = self.trust.update(outcome)
        self._publish(
            "trust",
            {
                "capability": self.trust.capability,
                "score": score,
                "outcome": outcome,
                "at": now,
            },
        )

    def _dismiss(self, detection: DetectionEvent, now: int, reason: str) -> None:
        for target in self.world.targets:
            if self._target_matches(target, detection):
                self.dismissed_targets.add(target.ident)
        self._fire("detection_rejected", now)

    def _target_matches(self, target: Target, detection: DetectionEvent) -> bool:
        return (
            abs(target.location.lat - detection.location[0]) < 1e-9
            and abs(target.location.lon - detection.location[1]) < 1e-9
        )

    # ---- analyze/plan/execute helpers ----

    def _adapt_to_weather(self, now: int) -> None:
        """Shed altitude when visibility-limited flight is both commanded
        (setpoint above the mist ceiling) and real (measured altitude above
        it). Gating on measured altitude makes the reaction to a human
        raise track the climb physics instead of firing instantly."""
        if not self.world.in_mist(self.motion.position):
            return
        if self.motion.altitude_setpoint_m <= self.config.mist_ceiling_m:
            return
        if self.motion.altitude_m <= self.config.mist_ceiling_m:
            return
        if "altitude" in self.curtailed_dims:
            return  # curtailed: only human directives may move this axis
        drop = self.config.mist_drop_m
        self.motion.altitude_setpoint_m -= drop
        drop_text = f"{drop:g} m"
        self._emit_adaptation(
            AdaptationEvent(
                uav=self.uav,
                trigger="external",
                initiator="machine",
                event_snippet=WEATHER_EVENT,
                action_snippet=f"reduced altitude by {drop_text}",
                rationale_snippet="limited visibility",
                at=now,
            )
        )
        self._record_action("machine", "altitude", -1, now)

    def _sense_and_decide(self, now: int) -> None:
        detection = self.detect(now)
        if detection is None:
            return
        decision = decide_detection(detection, self.config.policy, self.trust.score)
        self._publish(
            "detection",
            {"detection": detection.to_record(), "decision": decision, "at": now},
            qos="critical",
        )
        if decision == ACT_AUTONOMOUSLY:
            self._fire("victim_sighted", now)
            self._begin_tracking(detection, now, initiator="machine")
        elif decision == REQUEST_HELP:
            self._pending_help[detection.key] = detection
            self._fire("victim_sighted", now)
            # hold position while the human looks at the stream
            self._held_route = self.motion.remaining_route()
            self.motion.set_route([])
        else:
            self._cooldowns[self._nearest_target_id(detection)] = (
                now + self.config.target_cooldown_ms
            )

    def detect(self, now: int) -> DetectionEvent | None:
        """Sample the simulated camera; at most one sighting per step."""
        if self.state not in CAMERA_ACTIVE_STATES:
            return None
        self.frame_counter += 1
        for target in self.world.targets:
            if target.ident in self.dismissed_targets:
                continue
            if self._cooldowns.get(target.ident, 0) > now:
                continue
            if not in_footprint(
                self.world.frame,
                self.motion.position,
                self.motion.altitude_m,
                target.location,
                self.config.camera_half_angle_deg,
            ):
                continue
            profile = (
                self.config.mist_profile
                if self.world.in_mist(self.motion.position)
                else self.config.clear_profile
            )
            confidence, reliability = profile.sample(self.rng)
            return DetectionEvent(
                object_class=target.object_class,
                confidence=confidence,
                reliability=reliability,
                location=(target.location.lat, target.location.lon),
                frame=self.frame_counter,
                uav=self.uav,
            )
        return None

    def _nearest_target_id(self, detection: DetectionEvent) -> str:
        for target in self.world.targets:
            if self._target_matches(target, detection):
                return target.ident
        return "unknown"

    def _begin_tracking(
        self, detection: DetectionEvent, now: int, initiator: str
    ) -> None:
        self._tracked_target = self._nearest_target_id(detection)
        self._held_route = None
        self.motion.set_route(
            [GeoPoint(detection.location[0], detection.location[1])]
        )
        self._fire("detection_confirmed", now)
        rationale = (
            "high confidence in victim sighting"
            if initiator == "machine"
            else "human confirmed the sighting"
        )
        self._emit_adaptation(
            AdaptationEvent(
                uav=self.uav,
                trigger="external",
                initiator="machine",
                event_snippet="victim detected",
                action_snippet="switched to tracking mode",
                rationale_snippet=rationale,
                at=now,
            )
        )
        self._record_action(initiator, "mode", ("set", "tracking"), now)

    def _battery_failsafe(self, now: int) -> None:
        self.health = "failsafe"
        self._emit_adaptation(
            AdaptationEvent(
                uav=self.uav,
                trigger="internal",
                initiator="machine",
                event_snippet="battery below failsafe floor",
                action_snippet="returning to launch",
                rationale_snippet="preserve safe landing margin",
                at=now,
            )
        )
        self._record_action("machine", "mode", ("set", "RTL"), now, failsafe=True)
        self._fire("low_battery", now)

    def _emit_adaptation(self, event: AdaptationEvent) -> None:
        self._publish("adaptation", event.to_record())

    def _record_action(
        self, actor: str, dimension: str, direction, now: int, failsafe: bool = False
    ) -> None:
        entry = ActionLogEntry(
            actor=actor,
            uav=self.uav.name,
            dimension=dimension,
            direction=direction,
            at=now,
            failsafe=failsafe,
        )
        self._publish("action", entry.to_record())

    # ---- directives ----

    def affordances(self) -> tuple[str, ...]:
        """The agent's own view of what a human may ask of it right now."""
        base = BASE_AFFORDANCES.get(self.state, ())
        allowed = set(base)
        if self._pending_help:
            allowed |= {"confirm_detection", "reject_detection"}
        if self.curtailed_dims:
            allowed.add("restore_autonomy")
            allowed.discard("goal_update")
        return tuple(sorted(allowed))

    def apply_directive(self, d: HumanDirective, now: int) -> dict:
        """Gate on affordances, apply, and ack or nack with the violated
        constraint. Manual override bypasses the gate except in hard
        safety states."""
        bypass = d.kind == "manual_override" and self.state not in HARD_SAFETY_STATES
        if not bypass and d.kind not in self.affordances():
            return self._ack(d, now, ok=False,
                             reason=f"{d.kind} not available in state {self.state}")
        handler = {
            "return_to_launch": self._do_rtl,
            "altitude_change": self._do_altitude,
            "goal_update": self._do_goal,
            "manual_override": self._do_override,
            "video_request": self._do_video,
            "restore_autonomy": self._do_restore,
        }.get(d.kind)
        if handler is None:
            return self._ack(d, now, ok=False,
                             reason=f"{d.kind} is not handled by the vehicle")
        return handler(d, now)

    def _ack(self, d: HumanDirective, now: int, ok: bool, reason: str | None = None):
        payload = {
            "kind": d.kind,
            "result": "ack" if ok else "nack",
            "reason": reason,
            "at": now,
        }
        self._publish("ack", payload)
        return payload

    def _do_rtl(self, d: HumanDirective, now: int):
        self._fire("return_ordered", now)
        self._record_action("human", "mode", ("set", "RTL"), now)
        return self._ack(d, now, ok=True)

    def _do_altitude(self, d: HumanDirective, now: int):
        delta = float(d.params["delta_m"])
        if delta == 0:
            return self._ack(d, now, ok=False, reason="zero altitude change")
        proposed = self.motion.altitude_setpoint_m + delta
        if proposed < 0:
            return self._ack(d, now, ok=False, reason="altitude below ground")
        self.motion.altitude_setpoint_m = proposed
        self._record_action("human", "altitude", 1 if delta > 0 else -1, now)
        return self._ack(d, now, ok=True)

    def _do_goal(self, d: HumanDirective, now: int):
        """Steer toward a goal state one declared transition away. The
        machine arbitrates: whatever event reaches the goal from here is
        fired, so the same directive works from any compatible state."""
        goal = d.params["goal"]
        if self.state == "standby" and goal in ("launch", "takeoff"):
            self._launch(now)
            fired = self.state
        else:
            event = next(
                (e for e in self.machine.events_from()
                 if self.machine.peek(e) == goal),
                None,
            )
            fired = self._fire(event, now) if event is not None else None
        if fired is None:
            return self._ack(
                d, now, ok=False,
                reason=f"goal {goal!r} unreachable from state {self.state}",
            )
        self._record_action("human", "goal", ("set", goal), now)
        self._emit_adaptation(
            AdaptationEvent(
                uav=self.uav,
                trigger="external",
                initiator="human",
                event_snippet="operator goal update",
                desired_changes_snippet=f"transition to {goal}",
                rationale_snippet="align the vehicle with operator intent",
                at=now,
            )
        )
        return self._ack(d, now, ok=True)

    def _do_override(self, d: HumanDirective, now: int):
        if self.state in HARD_SAFETY_STATES:
            return self._ack(d, now, ok=False,
                             reason=f"override refused in state {self.state}")
        command = d.params["command"]
        if command == "return_to_launch":
            self._fire("return_ordered", now)
        elif command == "hold":
            self._held_route = self.motion.remaining_route()
            self.motion.set_route([])
        else:
            return self._ack(d, now, ok=False,
                             reason=f"unknown override command {command!r}")
        self._record_action("human", "mode", ("set", command), now)
        return self._ack(d, now, ok=True)

    def _do_video(self, d: HumanDirective, now: int):
        # camera states afford it; streaming itself is outside the model
        return self._ack(d, now, ok=True)

    def _do_restore(self, d: HumanDirective, now: int):
        dimension = d.params["dimension"]
        if dimension == "all":
            if not self.curtailed_dims:
                return self._ack(d, now, ok=False, reason="nothing is curtailed")
            self.curtailed_dims.clear()
        elif dimension in self.curtailed_dims:
            self.curtailed_dims.discard(dimension)
        else:
            return self._ack(
                d, now, ok=False, reason=f"{dimension!r} is not curtailed"
            )
        # logged on its own axis so conflict chains stay per-dimension
        self._record_action("human", "autonomy", ("restore", dimension), now)
        return self._ack(d, now, ok=True)

    # ---- telemetry ----

    def _near(self, p: GeoPoint, radius_m: float) -> bool:
        return self.world.frame.distance_m(self.motion.position, p) <= radius_m

    def _near_tracked_target(self) -> bool:
        for target in self.world.targets:
            if target.ident == self._tracked_target:
                return self._near(target.location, self.config.delivery_radius_m)
        return False

    def _publish_telemetry(self, now: int) -> None:
        self._publish(
            "telemetry",
            {
                "position": [self.motion.position.lat, self.motion.position.lon],
                "altitude": round(self.motion.altitude_m, 3),
                "battery": round(self.battery, 3),
                "health": self.health,
                "at": now,
            },
        )
