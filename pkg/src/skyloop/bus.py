"""In-process topic-based publish-subscribe fabric with service classes.

The bus is the only coupling between actors (UAV agents, ground-control
services, the scripted or live human). It supports two clock modes:

* ``lockstep`` -- simulated time advances only through :meth:`MessageBus.advance`,
  yielding fully deterministic delivery schedules for a given seed.
* ``realtime`` -- time follows the wall clock; a driver loop calls
  :meth:`MessageBus.pump` periodically.

Delivery latency is drawn per envelope from a seeded RNG, uniformly within
the envelope's service-class bound. When a later envelope of the same
(sender, topic) stream draws an earlier deadline, the pending earlier
envelopes are pulled forward to it; tightening a deadline can never violate
its bound, and the (deadline, sender, seq) delivery order then preserves
per-stream FIFO unconditionally.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable

DEFAULT_TICK_MS = 10
DEFAULT_PAYLOAD_CAP = 64 * 1024


class BusError(Exception):
    """Base for all bus rejections."""


class UnknownServiceClass(BusError):
    pass


class InvalidTopic(BusError):
    pass


class InvalidPattern(BusError):
    pass


class PayloadTooLarge(BusError):
    pass


class SequenceError(BusError):
    """Sender violated per-sender seq/sent_at monotonicity."""


class ClockModeError(BusError):
    pass


@dataclass(frozen=True)
class ServiceClass:
    name: str
    max_latency: int  # simulated ms, delivery bound

    def __post_init__(self):
        if self.max_latency <= 0:
            raise ValueError("max_latency must be positive")


def default_service_classes() -> dict[str, ServiceClass]:
    """Two-tier delivery contract: critical beats standard."""
    return {
        "critical": ServiceClass("critical", 50),
        "standard": ServiceClass("standard", 250),
    }


@dataclass(frozen=True)
class Envelope:
    topic: str
    sender: str
    seq: int
    sent_at: int  # simulated ms
    qos: str  # service class name
    payload: dict[str, Any]

    def to_record(self) -> dict[str, Any]:
        return {
            "topic": self.topic,
            "sender": self.sender,
            "seq": self.seq,
            "sent_at": self.sent_at,
            "qos": self.qos,
            "payload": self.payload,
        }

    @staticmethod
    def from_record(rec: dict[str, Any]) -> "Envelope":
        return Envelope(
            topic=rec["topic"],
            sender=rec["sender"],
            seq=rec["seq"],
            sent_at=rec["sent_at"],
            qos=rec["qos"],
            payload=rec["payload"],
        )


def valid_topic(topic: str) -> bool:
    if not topic:
        return False
    levels = topic.split("/")
    return all(levels) and "+" not in topic


def valid_pattern(pattern: str) -> bool:
    if not pattern:
        return False
    levels = pattern.split("/")
    return all(lvl == "+" or ("+" not in lvl and lvl) for lvl in levels)


def topic_matches(pattern: str, topic: str) -> bool:
    """Single-level wildcard match: '+' matches exactly one topic level."""
    plv = pattern.split("/")
    tlv = topic.split("/")
    if len(plv) != len(tlv):
        return False
    return all(p == "+" or p == t for p, t in zip(plv, tlv))


@dataclass(frozen=True)
class Subscription:
    pattern: str
    subscriber: str


@dataclass(frozen=True)
class Receipt:
    envelope: Envelope
    deadline: int  # assigned delivery time, simulated ms
    matched: int  # subscriber count frozen at publish


class SimClock:
    """Simulated-milliseconds clock.

    In lockstep mode ``now`` moves only via :meth:`step`; in realtime mode it
    follows the wall clock (minus paused intervals), quantized to ``tick``.
    """

    def __init__(self, mode: str = "lockstep", tick: int = DEFAULT_TICK_MS):
        if mode not in ("lockstep", "realtime"):
            raise ValueError(f"unknown clock mode {mode!r}")
        if tick <= 0:
            raise ValueError("tick must be positive")
        self.mode = mode
        self.tick = tick
        self.now = 0
        self._wall_start = time.monotonic()
        self._paused_at: float | None = None
        self._paused_total = 0.0

    def step(self, steps: int = 1) -> int:
        if self.mode != "lockstep":
            raise ClockModeError("step() only valid in lockstep mode")
        self.now += steps * self.tick
        return self.now

    def sync(self) -> int:
        if self.mode != "realtime":
            raise ClockModeError("sync() only valid in realtime mode")
        if self._paused_at is not None:
            return self.now
        elapsed = time.monotonic() - self._wall_start - self._paused_total
        wall_ms = int(elapsed * 1000)
        quantized = (wall_ms // self.tick) * self.tick
        if quantized > self.now:
            self.now = quantized
        return self.now

    def pause(self):
        if self._paused_at is None:
            self._paused_at = time.monotonic()

    def resume(self):
        if self._paused_at is not None:
            self._paused_total += time.monotonic() - self._paused_at
            self._paused_at = None

    @property
    def paused(self) -> bool:
        return self._paused_at is not None


# Delivery-log hook: (fire_time, envelope, subscribers) per fired envelope.
FireHook = Callable[[int, Envelope, tuple[str, ...]], None]


class MessageBus:
    """Deterministic topic bus with per-class latency bounds.

    Publish freezes the matching subscriber set, so an envelope reaches every
    subscriber whose subscription predates the publish and no one else.
    """

    def __init__(
        self,
        clock: SimClock,
        seed: int | str = 0,
        classes: dict[str, ServiceClass] | None = None,
        payload_cap: int = DEFAULT_PAYLOAD_CAP,
    ):
        self.clock = clock
        self.classes = dict(classes) if classes is not None else default_service_classes()
        self.payload_cap = payload_cap
        self._rng = random.Random(f"{seed}/bus")
        self._subs: list[Subscription] = []
        # pending deliveries keyed for the (deadline, sender, seq) total order
        self._pending: list[tuple[int, str, int, Envelope, tuple[str, ...]]] = []
        self._last_seq: dict[str, int] = {}
        self._last_sent: dict[str, int] = {}
        self.on_fire: FireHook | None = None

    # -- subscription ----------------------------------------------------

    def subscribe(self, pattern: str, subscriber: str) -> Subscription:
        if not valid_pattern(pattern):
            raise InvalidPattern(f"invalid topic pattern {pattern!r}")
        sub = Subscription(pattern, subscriber)
        if sub not in self._subs:  # duplicate -> idempotent success
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        if sub in self._subs:
            self._subs.remove(sub)

    def subscribers_for(self, topic: str) -> tuple[str, ...]:
        seen: list[str] = []
        for sub in self._subs:
            if topic_matches(sub.pattern, topic) and sub.subscriber not in seen:
                seen.append(sub.subscriber)
        return tuple(sorted(seen))

    # -- publication -----------------------------------------------------

    def publish(self, env: Envelope) -> Receipt:
        if not valid_topic(env.topic):
            raise InvalidTopic(f"invalid topic {env.topic!r}")
        qos = self.classes.get(env.qos)
        if qos is None:
            raise UnknownServiceClass(f"unregistered service class {env.qos!r}")
        size = len(json.dumps(env.payload, sort_keys=True, separators=(",", ":")))
        if size > self.payload_cap:
            raise PayloadTooLarge(f"payload {size} B exceeds cap {self.payload_cap} B")
        last_seq = self._last_seq.get(env.sender)
        if last_seq is not None and env.seq <= last_seq:
            raise SequenceError(f"{env.sender}: seq {env.seq} not after {last_seq}")
        last_sent = self._last_sent.get(env.sender)
        if last_sent is not None and env.sent_at < last_sent:
            raise SequenceError(f"{env.sender}: sent_at {env.sent_at} before {last_sent}")

        deadline = env.sent_at + self._rng.randint(1, qos.max_latency)
        # FIFO repair: an in-flight earlier envelope of this stream may not
        # outlive this one, so pull it forward; seq breaks the deadline tie.
        for i, (d, s, q, pe, subs) in enumerate(self._pending):
            if s == env.sender and pe.topic == env.topic and d > deadline:
                self._pending[i] = (deadline, s, q, pe, subs)

        self._last_seq[env.sender] = env.seq
        self._last_sent[env.sender] = env.sent_at
        subscribers = self.subscribers_for(env.topic)
        self._pending.append((deadline, env.sender, env.seq, env, subscribers))
        return Receipt(env, deadline, len(subscribers))

    # -- delivery --------------------------------------------------------

    def advance(self, steps: int = 1) -> list[tuple[Envelope, str]]:
        """Advance simulated time and deliver everything that came due."""
        if self.clock.mode != "lockstep":
            raise ClockModeError("advance() only valid in lockstep mode")
        self.clock.step(steps)
        return self._deliver_due()

    def pump(self) -> list[tuple[Envelope, str]]:
        """Realtime delivery driven by the wall clock."""
        if self.clock.mode != "realtime":
            raise ClockModeError("pump() only valid in realtime mode")
        self.clock.sync()
        return self._deliver_due()

    def _deliver_due(self) -> list[tuple[Envelope, str]]:
        now = self.clock.now
        due = [item for item in self._pending if item[0] <= now]
        if not due:
            return []
        self._pending = [item for item in self._pending if item[0] > now]
        due.sort(key=lambda item: (item[0], item[1], item[2]))
        delivered: list[tuple[Envelope, str]] = []
        for deadline, _sender, _seq, env, subscribers in due:
            if self.on_fire is not None:
                self.on_fire(deadline, env, subscribers)
            for name in subscribers:
                delivered.append((env, name))
        return delivered

    @property
    def pending_count(self) -> int:
        return len(self._pending)


class Outbox:
    """Per-actor publishing helper that owns the sender's seq counter."""

    def __init__(self, bus: MessageBus, sender: str):
        self.bus = bus
        self.sender = sender
        self._seq = 0

    def send(self, topic: str, payload: dict[str, Any], qos: str = "standard") -> Receipt:
        self._seq += 1
        env = Envelope(
            topic=topic,
            sender=self.sender,
            seq=self._seq,
            sent_at=self.bus.clock.now,
            qos=qos,
            payload=payload,
        )
        return self.bus.publish(env)
