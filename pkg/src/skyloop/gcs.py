"""Ground-control service: runtime models, event log, command API, replay.

The service is event-sourced end to end. Every envelope the bus delivers
is appended to the log and folded into the runtime models by
:meth:`RuntimeModels.apply`; the service's own outputs (session
announcements, dispatches, autonomy restrictions, rule changes) are
published back onto the bus, so they too arrive through the same fold.
``apply`` is the single mutation path shared by the live service and
:func:`replay`, which is what makes a replayed log land bit-exactly on
the live model states at every sequence number.

The one asymmetry is reaction: the live service turns apply effects into
publications, while replay discards them (the log already contains what
they produced).
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass

from .agent import (
    ACT_AUTONOMOUSLY,
    REQUEST_HELP,
    WEATHER_EVENT,
    UavAgent,
    WorldView,
)
from .bus import Envelope, MessageBus, Outbox, ServiceClass, SimClock
from .common import DetectionEvent, UavId, dumps_compact
from .coordination import (
    OUTCOME_MESSAGES,
    ActionLogEntry,
    CoordinationError,
    CoordinationService,
    HumanDirective,
    StaleActionError,
    UnknownSessionError,
)
from .explain import AdaptationEvent, ExplanationEngine
from .fleet import FleetModel
from .mission import MissionSpec, parse_mission
from .triage import Alert, AlertTriage, ResponsivenessMetric

TIMEOUT_NOTE = "human failure to respond"
ALERT_TTL_MS = 120_000
RECENT_EXPLANATIONS = 10

OUTCOME_STATES = {message: state for state, message in OUTCOME_MESSAGES.items()}


class GcsError(Exception):
    pass


class LifecycleError(GcsError):
    pass


class LogGapError(GcsError):
    """The record stream skipped a sequence number."""


@dataclass(frozen=True)
class EventLogRecord:
    seq: int
    at: int  # simulated ms at delivery
    envelope: Envelope

    def to_record(self) -> dict:
        return {"seq": self.seq, "at": self.at, "envelope": self.envelope.to_record()}

    @classmethod
    def from_record(cls, r: dict) -> "EventLogRecord":
        return cls(r["seq"], r["at"], Envelope.from_record(r["envelope"]))


class RuntimeModels:
    """The knowledge base: every runtime model, fed by one pure fold.

    Holds no bus handles and performs no IO; apply(record) -> effects is
    deterministic, so any two folds of the same record stream agree.
    """

    def __init__(self, spec: MissionSpec):
        self.spec = spec
        self.fleet = FleetModel()
        for frag in spec.uavs:
            self.fleet.register(UavId(frag.name, frag.color), frag.build_machine(), 0)
        self.triage = AlertTriage()
        for view in spec.views:
            self.triage.register_view(view.name, view.max_displayed)
        self.triage.load_rules(
            [
                {
                    "alert_type": r.alert_type,
                    "view": r.view,
                    "essential": r.essential,
                    "priority": r.priority,
                    "origin": "config",
                }
                for r in spec.alert_rules
            ]
        )
        self.coordination = CoordinationService(
            waiting_period=spec.coordination.waiting_period_ms,
            alternations=spec.coordination.alternation_threshold,
            window=spec.coordination.window_ms,
        )
        self.engine = ExplanationEngine()
        self.metric = ResponsivenessMetric()
        self.trust: dict[str, dict] = {}
        self.telemetry: dict[str, dict] = {}
        self.acks: dict[str, dict] = {}
        self.recent_explanations: deque = deque(maxlen=RECENT_EXPLANATIONS)
        self._alert_counter = 0
        self.applied_seq = 0

    # ---- the fold ----

    def apply(self, record: EventLogRecord) -> list[dict]:
        """Fold one delivered envelope into the models; return effects.

        Effects are domain facts the live service may react to (by
        publishing); they carry no state of their own.
        """
        env, at = record.envelope, record.at
        self.applied_seq = record.seq
        self.triage.expire(at)
        parts = env.topic.split("/")
        if parts[0] == "uav" and len(parts) == 3:
            return self._apply_uav(parts[1], parts[2], env.payload, at)
        if env.topic == "human/response":
            return self._apply_response(env.payload, at)
        if env.topic == "human/directive":
            return self._apply_directive(env.payload, at)
        if parts[0] == "gcs" and parts[1] == "coord":
            return self._apply_session_announcement(env.payload, at)
        if parts[0] == "gcs" and parts[1] == "alerts":
            return self._apply_alert_channel(parts[2], env.payload, at)
        # gcs/mission and gcs/autonomy are announcements for the agents
        # and the console; their state changes were applied at the source
        return []

    def _apply_uav(self, name: str, channel: str, p: dict, at: int) -> list[dict]:
        if channel == "telemetry":
            self.telemetry[name] = dict(p)
            return []
        if channel == "state":
            self.fleet.update_token(name, p["to"], at)
            return [{"kind": "state_changed", "uav": name}]
        if channel == "trust":
            prev = self.trust.get(name, {"updates": 0})
            self.trust[name] = {
                "capability": p["capability"],
                "score": p["score"],
                "updates": prev["updates"] + 1,
            }
            return []
        if channel == "adaptation":
            event = AdaptationEvent.from_record(p)
            explanation = self.engine.ingest(event)
            self.recent_explanations.append(explanation.to_record())
            if event.event_snippet == WEATHER_EVENT:
                self._raise_alert("weather_adaptation", name, explanation.text, at)
            return []
        if channel == "detection":
            return self._apply_detection(name, p, at)
        if channel == "action":
            return self._apply_action(p, at)
        if channel == "ack":
            self.acks[name] = dict(p)
            return []
        return []

    def _apply_detection(self, name: str, p: dict, at: int) -> list[dict]:
        detection = DetectionEvent.from_record(p["detection"])
        decision = p["decision"]
        message = (
            f"responsibility reverted to {name}: {decision}"
            if p.get("reverted")
            else f"{detection.object_class} sighted by {name} ({decision})"
        )
        self._raise_alert("detection", name, message, at)
        if decision == REQUEST_HELP:
            session = self.coordination.open_session(detection, at)
            self._raise_alert(
                "help_request",
                name,
                f"{name} requests confirmation of {detection.object_class} sighting",
                at,
            )
            return [{"kind": "session_opened", "session": session, "uav": name}]
        if decision == ACT_AUTONOMOUSLY:
            return [{"kind": "autonomous_track", "detection": detection, "uav": name}]
        return []

    def _apply_action(self, p: dict, at: int) -> list[dict]:
        entry = ActionLogEntry.from_record(p)
        self.coordination.record_action(entry)
        effects: list[dict] = []
        if entry.failsafe:
            self._raise_alert(
                "battery_low", entry.uav, f"{entry.uav} entered failsafe return", at
            )
        conflict = self.coordination.detect_tug_of_war(entry.uav, now=entry.at)
        if conflict is not None and not self.coordination.is_curtailed(
            conflict.uav, conflict.dimension
        ):
            self.coordination.break_cycle(conflict, at)
            self._raise_alert(
                "tug_of_war",
                entry.uav,
                f"opposing {conflict.dimension} commands on {entry.uav} "
                f"({conflict.alternations} alternations)",
                at,
            )
            effects.append(
                {"kind": "conflict_detected", "conflict": conflict, "uav": entry.uav}
            )
        return effects

    def _apply_response(self, p: dict, at: int) -> list[dict]:
        sid = p["session"]
        try:
            session = self.coordination.resolve(sid, p["decision"], at)
        except (StaleActionError, UnknownSessionError) as e:
            return [{"kind": "response_rejected", "session": sid, "reason": str(e)}]
        self.metric.record(session.closed_at - session.opened_at)
        effects: list[dict] = [
            {"kind": "session_resolved", "session": session, "uav": session.uav.name}
        ]
        effects += self._adapt_rules()
        return effects

    def _apply_session_announcement(self, p: dict, at: int) -> list[dict]:
        if p.get("phase") != "resolved":
            return []
        rec = p["session"]
        session = self.coordination.session(rec["id"])
        if session.terminal:
            return []  # resolution already folded via human/response
        state = OUTCOME_STATES[rec["outcome"]]
        self.coordination.apply_outcome(rec["id"], state, rec["closed_at"])
        effects: list[dict] = [{"kind": "state_relevant", "uav": session.uav.name}]
        if state == "timed_out":
            self.metric.record(None)
            self._raise_alert(
                "human_timeout", session.uav.name, TIMEOUT_NOTE, at
            )
            effects += self._adapt_rules()
        return effects

    def _apply_directive(self, p: dict, at: int) -> list[dict]:
        rec = p.get("directive", p)
        target = rec["target"]["name"]
        if rec["kind"] == "restore_autonomy":
            self.coordination.restore_autonomy(
                target, rec["params"]["dimension"], actor="human", at=at
            )
            return [{"kind": "autonomy_changed", "uav": target}]
        return [{"kind": "state_relevant", "uav": target}]

    def _apply_alert_channel(self, view: str, p: dict, at: int) -> list[dict]:
        kind = p.get("kind")
        if kind == "dismiss":
            self.triage.dismiss(p["alert"])
        elif kind == "rule_update":
            self.triage.update_rule(
                p["alert_type"],
                view,
                origin=p.get("origin", "human"),
                essential=bool(p.get("essential", False)),
                priority=p.get("priority"),
            )
        # kind == "rule_change" is the echo of a fold-side adjustment
        return []

    def _adapt_rules(self) -> list[dict]:
        return [
            {"kind": "rule_adjusted", **adj}
            for adj in self.triage.adapt_frequency(self.metric)
        ]

    def _raise_alert(self, alert_type: str, source: str, message: str, at: int):
        self._alert_counter += 1
        self.triage.submit_alert(
            Alert(
                id=f"al-{self._alert_counter:04d}",
                alert_type=alert_type,
                source=source,
                message=message,
                raised_at=at,
                expires_at=at + ALERT_TTL_MS,
            )
        )

    # ---- read side ----

    def serialized_state(self) -> str:
        """Canonical serialization of every replay-checked model."""
        state = {
            "fleet": self.fleet.snapshot().to_record(),
            "triage": {
                "rules": self.triage.rules_snapshot(),
                "views": {
                    v: self.triage.view_state(v).to_record()
                    for v in self.triage.views
                },
                "live": [a.to_record() for a in self.triage.live_alerts()],
            },
            "coordination": {
                "sessions": [s.to_record() for s in self.coordination.all_sessions()],
                "autonomy": {
                    f.name: self.coordination.autonomy_status(f.name)
                    for f in self.spec.uavs
                },
                "actions": {
                    f.name: [a.to_record() for a in self.coordination.actions(f.name)]
                    for f in self.spec.uavs
                },
            },
            "trust": self.trust,
            "explanations": len(self.engine),
            "applied_seq": self.applied_seq,
        }
        return dumps_compact(state)


class GcsService:
    """Live mission shell: wires the bus, hosts the models, logs, reacts.

    Lifecycle: configured -> running <-> paused; abort flips to aborting
    while the fleet flies home. The simulation driver owns the clock
    loop and calls :meth:`step` once per tick.
    """

    def __init__(
        self,
        spec: MissionSpec,
        doc: dict,
        clock_mode: str = "lockstep",
        seed: int | None = None,
    ):
        self.spec = spec
        self.doc = doc
        self.clock_mode = clock_mode
        self.seed = spec.seed if seed is None else seed
        if self.seed is None:
            raise GcsError("a seed is required (mission or explicit)")
        self.clock = SimClock(mode=clock_mode)
        classes = {
            name: ServiceClass(name, bound) for name, bound in spec.service_classes
        }
        self.bus = MessageBus(self.clock, seed=self.seed, classes=classes)
        self.bus.on_fire = self._on_fire
        self.models = RuntimeModels(spec)
        self.log: list[EventLogRecord] = []
        self.agents: dict[str, UavAgent] = {}
        self.world: WorldView | None = None
        self.lifecycle = "configured"
        self._outbox = Outbox(self.bus, "gcs")
        self._console = Outbox(self.bus, "console")
        self._watermark: dict[str, int] = {}
        self._timeout_announced: set[str] = set()
        self._dispatched: set = set()
        self._frame_subs: list = []
        self._next_frame_at = 0
        self.stale_rejections = 0

    # ---- lifecycle ----

    def start(self) -> str:
        if self.lifecycle == "running":
            raise LifecycleError("mission already running")
        if self.lifecycle != "configured":
            raise LifecycleError(f"cannot start from {self.lifecycle!r}")
        frame = self.spec.frame()
        self.world = WorldView(
            frame=frame,
            targets=[v.to_target() for v in self.spec.ground_truth.victims],
            mist_regions=list(self.spec.ground_truth.mist_regions),
        )
        for frag in self.spec.uavs:
            uav = UavId(frag.name, frag.color)
            agent = UavAgent(
                uav,
                frag.to_agent_config(),
                self.world,
                Outbox(self.bus, frag.name),
                random.Random(f"{self.seed}/agent/{frag.name}"),
                machine=frag.build_machine(),
            )
            self.agents[frag.name] = agent
            self.bus.subscribe("human/directive", frag.name)
            self.bus.subscribe("gcs/coord/+", frag.name)
            self.bus.subscribe(f"gcs/autonomy/{frag.name}", frag.name)
            self.bus.subscribe("gcs/mission", frag.name)
        self._outbox.send(
            "gcs/mission",
            {
                "kind": "mission_config",
                "mission": self.doc,
                "seed": self.seed,
                "clock": self.clock_mode,
            },
        )
        self.lifecycle = "running"
        return self.lifecycle

    def pause(self) -> str:
        if self.lifecycle not in ("running", "aborting"):
            raise LifecycleError(f"cannot pause from {self.lifecycle!r}")
        self._resume_to = self.lifecycle
        self.lifecycle = "paused"
        if self.clock.mode == "realtime":
            self.clock.pause()
        return self.lifecycle

    def resume(self) -> str:
        if self.lifecycle != "paused":
            raise LifecycleError(f"cannot resume from {self.lifecycle!r}")
        self.lifecycle = getattr(self, "_resume_to", "running")
        if self.clock.mode == "realtime":
            self.clock.resume()
        return self.lifecycle

    def abort(self) -> str:
        """Order the whole fleet home; the mission winds down in flight."""
        if self.lifecycle not in ("running", "paused"):
            raise LifecycleError(f"cannot abort from {self.lifecycle!r}")
        now = self.clock.now
        for frag in self.spec.uavs:
            directive = HumanDirective(
                kind="manual_override",
                target=UavId(frag.name, frag.color),
                params={"command": "return_to_launch"},
                issued_at=now,
            )
            self._outbox.send(
                "human/directive", {"directive": directive.to_record()}, qos="critical"
            )
        self.lifecycle = "aborting"
        return self.lifecycle

    # ---- delivery tap: log, fold, react ----

    def _on_fire(self, deadline: int, env: Envelope, subscribers) -> None:
        record = EventLogRecord(len(self.log) + 1, deadline, env)
        self.log.append(record)
        effects = self.models.apply(record)
        for effect in effects:
            self._react(effect, record)

    def _react(self, effect: dict, record: EventLogRecord) -> None:
        kind = effect["kind"]
        uav = effect.get("uav")
        if uav is not None:
            self._watermark[uav] = record.seq
        now = self.clock.now
        if kind == "session_opened":
            session = effect["session"]
            self._outbox.send(
                f"gcs/coord/{session.id}",
                {"phase": "open", "session": session.to_record()},
                qos="critical",
            )
        elif kind == "session_resolved":
            session = effect["session"]
            self._outbox.send(
                f"gcs/coord/{session.id}",
                {"phase": "resolved", "session": session.to_record()},
                qos="critical",
            )
            if session.outcome == "CONFIRMATION":
                self._maybe_dispatch(session.detection, ("session", session.id))
        elif kind == "autonomous_track":
            self._maybe_dispatch(
                effect["detection"], ("detection",) + effect["detection"].key
            )
        elif kind == "conflict_detected":
            conflict = effect["conflict"]
            status = self.models.coordination.autonomy_status(uav)
            status["conflict"] = {
                "dimension": conflict.dimension,
                "alternations": conflict.alternations,
            }
            status["at"] = now
            self._outbox.send(f"gcs/autonomy/{uav}", status, qos="critical")
        elif kind == "autonomy_changed":
            status = self.models.coordination.autonomy_status(uav)
            status["at"] = now
            self._outbox.send(f"gcs/autonomy/{uav}", status, qos="critical")
        elif kind == "rule_adjusted":
            change = {k: v for k, v in effect.items() if k != "kind"}
            change["kind"] = "rule_change"
            change["at"] = now
            self._outbox.send(f"gcs/alerts/{effect['view']}", change)
        elif kind == "response_rejected":
            self._outbox.send(
                f"gcs/coord/{effect['session']}",
                {
                    "phase": "response_rejected",
                    "session": effect["session"],
                    "reason": effect["reason"],
                    "at": now,
                },
            )

    def _maybe_dispatch(self, detection: DetectionEvent, key) -> None:
        delivery = self.spec.delivery_uav
        if delivery is None or delivery == detection.uav.name:
            return
        if key in self._dispatched:
            return
        self._dispatched.add(key)
        self._outbox.send(
            "gcs/mission",
            {
                "kind": "dispatch",
                "uav": delivery,
                "target": list(detection.location),
                "at": self.clock.now,
            },
            qos="critical",
        )

    # ---- per-tick service work ----

    def step(self, now: int) -> None:
        if self.lifecycle not in ("running", "aborting"):
            return
        for session in self.models.coordination.due_sessions(now):
            if session.id in self._timeout_announced:
                continue
            self._timeout_announced.add(session.id)
            rec = session.to_record()
            rec["state"] = "timed_out"
            rec["closed_at"] = session.deadline
            rec["outcome"] = "NO_RESPONSE"
            self._outbox.send(
                f"gcs/coord/{session.id}",
                {"phase": "resolved", "session": rec, "note": TIMEOUT_NOTE},
                qos="critical",
            )
        if now >= self._next_frame_at:
            self._next_frame_at = now + self.spec.ui_refresh_ms
            if self._frame_subs:
                frame = self.build_frame(now)
                for callback in list(self._frame_subs):
                    callback(frame)

    # ---- state stream ----

    def subscribe_frames(self, callback) -> None:
        if callback not in self._frame_subs:
            self._frame_subs.append(callback)

    def unsubscribe_frames(self, callback) -> None:
        if callback in self._frame_subs:
            self._frame_subs.remove(callback)

    def build_frame(self, now: int) -> dict:
        """One self-contained console frame; version stamps every widget."""
        m = self.models
        placement = {
            name: node for name, node in m.fleet.snapshot().placement.tokens
        }
        frame = {
            "type": "frame",
            "version": m.applied_seq,
            "at": now,
            "mission": {"name": self.spec.name, "lifecycle": self.lifecycle},
            "fleet": m.fleet.snapshot().to_record(),
            "alerts": {
                v: m.triage.view_state(v).to_record() for v in m.triage.views
            },
            "alert_details": {
                a.id: a.to_record() for a in m.triage.live_alerts()
            },
            "sessions": [
                {**s.to_record(), "remaining_ms": max(0, s.deadline - now)}
                for s in m.coordination.open_sessions()
            ],
            "affordances": {
                f.name: list(
                    m.coordination.compute_affordances(
                        f.name, placement.get(f.name, "")
                    )
                )
                for f in self.spec.uavs
            },
            "autonomy": {
                f.name: m.coordination.autonomy_status(f.name)
                for f in self.spec.uavs
            },
            # copies, not references: a delivered frame must stay frozen
            # while the fold keeps updating the live models
            "trust": dict(m.trust),
            "telemetry": dict(m.telemetry),
            "explanations": list(m.recent_explanations),
            "watermarks": dict(sorted(self._watermark.items())),
        }
        return frame

    # ---- console command API ----

    def handle_command(self, cmd: dict) -> dict:
        """Validate and route one console command; never raises on bad
        input, the caller gets a structured rejection instead."""
        if self.lifecycle not in ("running", "aborting"):
            return {"accepted": False, "reason": "mission is not running"}
        kind = cmd.get("kind")
        if kind == "resolve_session":
            return self._cmd_resolve(cmd)
        if kind == "directive":
            return self._cmd_directive(cmd)
        if kind == "dismiss_alert":
            alert = cmd.get("alert")
            if alert not in {a.id for a in self.models.triage.live_alerts()}:
                return {"accepted": False, "reason": f"unknown alert {alert!r}"}
            return self._cmd_alert_channel(cmd, {"kind": "dismiss", "alert": alert})
        if kind == "update_rule":
            # validate up front; the fold must never see a malformed rule
            essential = bool(cmd.get("essential", False))
            priority = cmd.get("priority")
            if essential and priority is not None:
                return {
                    "accepted": False,
                    "reason": "a rule is either essential or prioritized, not both",
                }
            if not essential and (
                not isinstance(priority, int) or not 1 <= priority <= 5
            ):
                return {"accepted": False, "reason": "priority must be in 1..5"}
            if not isinstance(cmd.get("alert_type"), str):
                return {"accepted": False, "reason": "alert_type must be a string"}
            return self._cmd_alert_channel(
                cmd,
                {
                    "kind": "rule_update",
                    "alert_type": cmd["alert_type"],
                    "essential": essential,
                    "priority": priority,
                    "origin": "human",
                },
            )
        return {"accepted": False, "reason": f"unknown command kind {kind!r}"}

    def _reject_stale(self, uav: str, stamp, watermark: int) -> dict:
        self.stale_rejections += 1
        self._outbox.send(
            "gcs/mission",
            {
                "kind": "command_rejected",
                "reason": "stale",
                "uav": uav,
                "stamp": stamp,
                "watermark": watermark,
                "at": self.clock.now,
            },
        )
        return {
            "accepted": False,
            "reason": "stale",
            "watermark": watermark,
        }

    def _check_stamp(self, uav: str, cmd: dict) -> dict | None:
        stamp = cmd.get("stamp")
        if not isinstance(stamp, int):
            return {"accepted": False, "reason": "missing version stamp"}
        watermark = self._watermark.get(uav, 0)
        if stamp < watermark:
            return self._reject_stale(uav, stamp, watermark)
        return None

    def _cmd_resolve(self, cmd: dict) -> dict:
        sid = cmd.get("session")
        decision = cmd.get("decision")
        if decision not in ("confirm", "reject"):
            return {"accepted": False, "reason": f"unknown decision {decision!r}"}
        try:
            session = self.models.coordination.session(sid)
        except UnknownSessionError:
            return {"accepted": False, "reason": f"unknown session {sid!r}"}
        if session.terminal:
            return {"accepted": False, "reason": f"session already {session.state}"}
        rejection = self._check_stamp(session.uav.name, cmd)
        if rejection is not None:
            return rejection
        self._console.send(
            "human/response",
            {"session": sid, "decision": decision, "at": self.clock.now},
            qos="critical",
        )
        return {"accepted": True, "session": sid}

    def _cmd_directive(self, cmd: dict) -> dict:
        name = cmd.get("uav")
        frag = next((f for f in self.spec.uavs if f.name == name), None)
        if frag is None:
            return {"accepted": False, "reason": f"unknown uav {name!r}"}
        spec = cmd.get("directive") or {}
        try:
            directive = HumanDirective(
                kind=spec.get("kind"),
                target=UavId(frag.name, frag.color),
                params=dict(spec.get("params", {})),
                issued_at=self.clock.now,
            )
        except CoordinationError as e:
            return {"accepted": False, "reason": str(e)}
        # the hand-held radio path skips the console protocol entirely
        bypass = directive.kind == "manual_override"
        if not bypass:
            rejection = self._check_stamp(name, cmd)
            if rejection is not None:
                return rejection
            placement = {
                n: node
                for n, node in self.models.fleet.snapshot().placement.tokens
            }
            allowed = self.models.coordination.compute_affordances(
                name, placement.get(name, "")
            )
            if directive.kind not in allowed:
                return {
                    "accepted": False,
                    "reason": f"{directive.kind} not currently afforded by {name}",
                }
        self._console.send(
            "human/directive", {"directive": directive.to_record()}, qos="critical"
        )
        return {"accepted": True, "uav": name}

    def _cmd_alert_channel(self, cmd: dict, payload: dict) -> dict:
        view = cmd.get("view")
        if view not in self.models.triage.views:
            return {"accepted": False, "reason": f"unknown view {view!r}"}
        payload["at"] = self.clock.now
        self._console.send(f"gcs/alerts/{view}", payload)
        return {"accepted": True, "view": view}

    # ---- log IO ----

    def write_log(self, path: str) -> str:
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.log:
                fh.write(dumps_compact(record.to_record()))
                fh.write("\n")
        return path


def read_log(path: str) -> list[EventLogRecord]:
    """Load and integrity-check an event log (dense seq, ordered time)."""
    records: list[EventLogRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(EventLogRecord.from_record(json.loads(line)))
    for i, record in enumerate(records):
        if record.seq != i + 1:
            raise LogGapError(f"expected seq {i + 1}, found {record.seq}")
        if i and record.at < records[i - 1].at:
            raise LogGapError(f"time went backwards at seq {record.seq}")
    return records


def mission_config_of(records: list[EventLogRecord]) -> dict:
    for record in records:
        p = record.envelope.payload
        if record.envelope.topic == "gcs/mission" and p.get("kind") == "mission_config":
            return p
    raise GcsError("log carries no mission configuration envelope")


def replay(
    records: list[EventLogRecord],
    spec: MissionSpec | None = None,
    upto_seq: int | None = None,
) -> RuntimeModels:
    """Reconstruct model states from a log alone (optionally to a prefix)."""
    if spec is None:
        config = mission_config_of(records)
        # seed presence was checked when the live run loaded the mission
        spec = parse_mission(config["mission"], clock="replay")
    models = RuntimeModels(spec)
    for record in records:
        if upto_seq is not None and record.seq > upto_seq:
            break
        models.apply(record)
    return models
