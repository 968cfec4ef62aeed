"""Headless experiment driver: scripted humans, scenario runs, metrics.

A scenario run wires a ground-control service, its fleet of simulated
vehicles, and one scripted human onto a shared lockstep bus, then ticks
the whole arrangement until the mission duration (or a hard time cap)
elapses. Everything observable ends up in the event log; metrics are
recomputed purely from that log so a saved run and a live run can never
disagree.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .bus import Envelope, Outbox
from .common import UavId, dumps_compact
from .coordination import HumanDirective
from .gcs import (
    EventLogRecord,
    GcsService,
    RuntimeModels,
    mission_config_of,
    read_log,
    replay,
)
from .mission import MissionSpec, parse_mission

TIME_CAP_MS = 30 * 60 * 1000  # hard ceiling regardless of mission duration
TICK_MS = 10
AGENT_STEP_MS = 50

POLICY_KINDS = ("always_confirm", "always_reject", "ground_truth_oracle")


class HarnessError(Exception):
    pass


@dataclass(frozen=True)
class ScriptDirective:
    at: int
    uav: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class HumanScript:
    """Stochastic-but-seeded stand-in for the operator.

    availability is the chance a help prompt gets answered at all;
    answered prompts resolve after a delay drawn from the configured
    distribution, using the decision policy.
    """

    availability: float = 1.0
    delay_fixed_ms: int | None = 2000
    delay_range_ms: tuple[int, int] | None = None
    policy: str = "always_confirm"
    accuracy: float = 1.0
    directives: tuple[ScriptDirective, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.availability <= 1.0:
            raise HarnessError("availability must be within [0, 1]")
        if self.policy not in POLICY_KINDS:
            raise HarnessError(f"unknown decision policy {self.policy!r}")
        if self.delay_fixed_ms is None and self.delay_range_ms is None:
            raise HarnessError("a response delay distribution is required")
        if self.delay_fixed_ms is not None and self.delay_fixed_ms < 0:
            raise HarnessError("delays must be >= 0")
        if self.delay_range_ms is not None:
            lo, hi = self.delay_range_ms
            if lo < 0 or hi < lo:
                raise HarnessError("delay range must satisfy 0 <= lo <= hi")

    def draw_delay(self, rng: random.Random) -> int:
        if self.delay_range_ms is not None:
            return rng.randint(*self.delay_range_ms)
        return self.delay_fixed_ms


def parse_script(data: dict) -> HumanScript:
    """Decode the JSON script shape into a HumanScript."""
    if not isinstance(data, dict):
        raise HarnessError("script document must be an object")
    delay = data.get("response_delay", {"fixed": 2000})
    fixed = delay.get("fixed")
    uniform = delay.get("uniform")
    policy = data.get("decision_policy", {"kind": "always_confirm"})
    directives = []
    for i, raw in enumerate(data.get("directives", [])):
        for key in ("at", "uav", "kind"):
            if key not in raw:
                raise HarnessError(f"directives[{i}] missing {key!r}")
        directives.append(
            ScriptDirective(
                at=raw["at"],
                uav=raw["uav"],
                kind=raw["kind"],
                params=dict(raw.get("params", {})),
            )
        )
    return HumanScript(
        availability=data.get("availability", 1.0),
        delay_fixed_ms=fixed if uniform is None else None,
        delay_range_ms=tuple(uniform) if uniform is not None else None,
        policy=policy.get("kind", "always_confirm"),
        accuracy=policy.get("accuracy", 1.0),
        directives=tuple(directives),
    )


def load_script(path: str) -> HumanScript:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_script(json.load(fh))


class ScriptedHuman:
    """Bus actor that answers help prompts per the script.

    Subscribes to the session channel; every open announcement rolls
    availability, draws a delay, and queues the decision. Scheduled
    directives fire at their scripted times independently.
    """

    def __init__(
        self,
        script: HumanScript,
        spec: MissionSpec,
        outbox: Outbox,
        rng: random.Random,
    ):
        self.script = script
        self.spec = spec
        self.outbox = outbox
        self.rng = rng
        self._pending_responses: list[tuple[int, str, str]] = []
        self._pending_directives = sorted(
            script.directives, key=lambda d: (d.at, d.uav, d.kind)
        )
        self._colors = {u.name: u.color for u in spec.uavs}

    def deliver(self, env: Envelope, now: int) -> None:
        if not env.topic.startswith("gcs/coord/"):
            return
        if env.payload.get("phase") != "open":
            return
        session = env.payload["session"]
        if self.rng.random() >= self.script.availability:
            return  # operator looked away; the waiting period will expire
        delay = self.script.draw_delay(self.rng)
        decision = self._decide(session)
        self._pending_responses.append((now + delay, session["id"], decision))
        self._pending_responses.sort()

    def _decide(self, session: dict) -> str:
        if self.script.policy == "always_confirm":
            return "confirm"
        if self.script.policy == "always_reject":
            return "reject"
        truth = self._matches_victim(session["detection"])
        if self.rng.random() < self.script.accuracy:
            return "confirm" if truth else "reject"
        return "reject" if truth else "confirm"

    def _matches_victim(self, detection: dict) -> bool:
        lat, lon = detection["location"]
        return any(
            abs(v.location.lat - lat) < 1e-9 and abs(v.location.lon - lon) < 1e-9
            for v in self.spec.ground_truth.victims
        )

    def step(self, now: int) -> None:
        while self._pending_responses and self._pending_responses[0][0] <= now:
            _, session_id, decision = self._pending_responses.pop(0)
            self.outbox.send(
                "human/response",
                {"session": session_id, "decision": decision, "at": now},
                qos="critical",
            )
        while self._pending_directives and self._pending_directives[0].at <= now:
            d = self._pending_directives.pop(0)
            color = self._colors.get(d.uav)
            if color is None:
                raise HarnessError(f"scripted directive names unknown uav {d.uav!r}")
            directive = HumanDirective(
                kind=d.kind,
                target=UavId(d.uav, color),
                params=dict(d.params),
                issued_at=now,
            )
            self.outbox.send(
                "human/directive",
                {"directive": directive.to_record()},
                qos="critical",
            )


# ---- metrics ----

@dataclass(frozen=True)
class RunMetrics:
    detections_true: int
    detections_false: int
    sessions_opened: int
    sessions_confirmed: int
    sessions_refuted: int
    sessions_timed_out: int
    mean_response_ms: float | None
    alerts_displayed: dict
    alerts_suppressed: dict
    adaptations: int
    explanations: int
    tug_of_war_conflicts: int
    duration_ms: int
    complete: bool

    def to_record(self) -> dict:
        return {
            "detections": {
                "true": self.detections_true,
                "false": self.detections_false,
            },
            "sessions": {
                "opened": self.sessions_opened,
                "confirmed": self.sessions_confirmed,
                "refuted": self.sessions_refuted,
                "timed_out": self.sessions_timed_out,
            },
            "mean_response_ms": self.mean_response_ms,
            "alerts": {
                "displayed": dict(self.alerts_displayed),
                "suppressed": dict(self.alerts_suppressed),
            },
            "adaptations": self.adaptations,
            "explanations": self.explanations,
            "tug_of_war_conflicts": self.tug_of_war_conflicts,
            "duration_ms": self.duration_ms,
            "complete": self.complete,
        }

    def validate(self) -> None:
        if self.explanations != self.adaptations:
            raise HarnessError(
                f"{self.explanations} explanations for {self.adaptations} adaptations"
            )
        resolved = (
            self.sessions_confirmed + self.sessions_refuted + self.sessions_timed_out
        )
        if resolved > self.sessions_opened:
            raise HarnessError("resolved sessions exceed opened sessions")


def metrics_from_log(records: list[EventLogRecord]) -> RunMetrics:
    """Recompute run metrics from the event log alone.

    The log's own mission-configuration envelope supplies ground truth,
    view names, and the configured duration, so a saved log file is
    fully self-describing (including the completeness flag).
    """
    config = mission_config_of(records)
    spec = parse_mission(config["mission"], clock="replay")
    models = replay(records, spec=spec)

    victims = {
        (v.location.lat, v.location.lon) for v in spec.ground_truth.victims
    }
    detections_true = detections_false = 0
    adaptations = 0
    conflicts = 0
    opened = confirmed = refuted = timed_out = 0
    response_totals: list[int] = []
    terminal_seen: set[str] = set()
    for record in records:
        env = record.envelope
        parts = env.topic.split("/")
        if parts[0] == "uav" and parts[-1] == "detection":
            if not env.payload.get("reverted"):
                lat, lon = env.payload["detection"]["location"]
                if (lat, lon) in victims:
                    detections_true += 1
                else:
                    detections_false += 1
        elif parts[0] == "uav" and parts[-1] == "adaptation":
            adaptations += 1
        elif parts[0] == "gcs" and parts[1] == "coord":
            phase = env.payload.get("phase")
            session = env.payload.get("session")
            if phase == "open":
                opened += 1
            elif phase == "resolved" and session["id"] not in terminal_seen:
                terminal_seen.add(session["id"])
                state = session["state"]
                if state == "confirmed":
                    confirmed += 1
                elif state == "refuted":
                    refuted += 1
                elif state == "timed_out":
                    timed_out += 1
                if state in ("confirmed", "refuted"):
                    response_totals.append(
                        session["closed_at"] - session["opened_at"]
                    )
        elif parts[0] == "gcs" and parts[1] == "autonomy":
            if "conflict" in env.payload:
                conflicts += 1

    displayed = {}
    suppressed = {}
    for view in models.triage.views:
        state = models.triage.view_state(view).to_record()
        displayed[view] = len(state["displayed"])
        suppressed[view] = len(state["suppressed"])

    mean_response = (
        sum(response_totals) / len(response_totals) if response_totals else None
    )
    metrics = RunMetrics(
        detections_true=detections_true,
        detections_false=detections_false,
        sessions_opened=opened,
        sessions_confirmed=confirmed,
        sessions_refuted=refuted,
        sessions_timed_out=timed_out,
        mean_response_ms=mean_response,
        alerts_displayed=displayed,
        alerts_suppressed=suppressed,
        adaptations=adaptations,
        explanations=len(models.engine),
        tug_of_war_conflicts=conflicts,
        duration_ms=records[-1].at if records else 0,
        complete=spec.duration_ms <= TIME_CAP_MS,
    )
    metrics.validate()
    return metrics


# ---- the driver ----

@dataclass
class ScenarioRun:
    metrics: RunMetrics
    gcs: GcsService
    human: ScriptedHuman
    log: list[EventLogRecord]


def run_scenario(
    doc: dict,
    script: HumanScript,
    seed: int | None = None,
) -> ScenarioRun:
    """Drive one lockstep mission to its end (or the hard time cap)."""
    spec = parse_mission(doc)
    gcs = GcsService(spec, doc, clock_mode="lockstep", seed=seed)
    human = ScriptedHuman(
        script,
        spec,
        Outbox(gcs.bus, "human"),
        random.Random(f"{gcs.seed}/human"),
    )
    gcs.bus.subscribe("gcs/coord/+", "human")
    gcs.start()

    horizon = min(spec.duration_ms, TIME_CAP_MS)
    agent_order = sorted(gcs.agents)
    inboxes: dict[str, list[Envelope]] = {name: [] for name in agent_order}

    now = 0
    while now < horizon:
        deliveries = gcs.bus.advance(1)  # one 10 ms tick
        now = gcs.clock.now
        for env, subscriber in deliveries:
            if subscriber in inboxes:
                inboxes[subscriber].append(env)
            elif subscriber == "human":
                human.deliver(env, now)
        if now % AGENT_STEP_MS == 0:
            for name in agent_order:
                agent = gcs.agents[name]
                agent.inbox.extend(inboxes[name])
                inboxes[name].clear()
                agent.step(now)
        human.step(now)
        gcs.step(now)

    metrics = metrics_from_log(gcs.log)
    return ScenarioRun(metrics=metrics, gcs=gcs, human=human, log=gcs.log)


def run_and_save(
    doc: dict,
    script: HumanScript,
    log_path: str,
    seed: int | None = None,
) -> RunMetrics:
    run = run_scenario(doc, script, seed=seed)
    run.gcs.write_log(log_path)
    return run.metrics


# ---- determinism checks ----

def compare_logs(
    a: list[EventLogRecord], b: list[EventLogRecord]
) -> tuple[str, int | None]:
    """Byte-level comparison; returns ("equal", None) or the first
    divergent sequence number."""
    for ra, rb in zip(a, b):
        if dumps_compact(ra.to_record()) != dumps_compact(rb.to_record()):
            return ("divergent", ra.seq)
    if len(a) != len(b):
        return ("divergent", min(len(a), len(b)) + 1)
    return ("equal", None)


def compare_log_files(path_a: str, path_b: str) -> tuple[str, int | None]:
    return compare_logs(read_log(path_a), read_log(path_b))


def replay_models(records: list[EventLogRecord]) -> RuntimeModels:
    """Convenience wrapper used by determinism and fidelity checks."""
    return replay(records)


__all__ = [
    "AGENT_STEP_MS",
    "TICK_MS",
    "TIME_CAP_MS",
    "HarnessError",
    "HumanScript",
    "RunMetrics",
    "ScenarioRun",
    "ScriptDirective",
    "ScriptedHuman",
    "compare_log_files",
    "compare_logs",
    "load_script",
    "metrics_from_log",
    "parse_script",
    "replay_models",
    "run_and_save",
    "run_scenario",
]
