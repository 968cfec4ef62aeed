"""Alert prioritization: per-view triage under display-count thresholds.

Every registered view owns a threshold for how many non-essential alerts
it may show at once. Essential alerts always render; prioritized alerts
(1 = highest, 5 = lowest) compete for the capped slots under the total
order (priority, raised_at, id). Triage state is a pure function of the
live alert set and the rule table, which is what makes re-triage after a
rule edit equivalent to replaying every live alert under the new rules.

Rules adapt at runtime: humans and the machine may re-prioritize, and a
responsiveness monitor demotes non-essential noise when the human falls
behind, restoring it toward the configured baseline when they recover.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

DEFAULT_PRIORITY = 3
DEFAULT_LAG_MS = 5000
DEFAULT_RECOVERY_MS = 2000
WILDCARD = "*"


class TriageError(Exception):
    pass


class DuplicateViewError(TriageError):
    pass


class UnknownViewError(TriageError):
    pass


class DuplicateAlertError(TriageError):
    pass


@dataclass(frozen=True)
class Alert:
    id: str
    alert_type: str
    source: str
    message: str
    raised_at: int
    expires_at: int | None = None

    def __post_init__(self):
        if self.expires_at is not None and self.raised_at > self.expires_at:
            raise TriageError(f"alert {self.id!r} expires before it is raised")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "alert_type": self.alert_type,
            "source": self.source,
            "message": self.message,
            "raised_at": self.raised_at,
            "expires_at": self.expires_at,
        }

    @classmethod
    def from_record(cls, r: dict) -> "Alert":
        return cls(
            r["id"], r["alert_type"], r["source"], r["message"],
            r["raised_at"], r.get("expires_at"),
        )


@dataclass
class RuleEntry:
    """Triage rule for one (alert_type, view) pair.

    Exactly one of essential/priority applies; baseline remembers the
    configured (or human-chosen) priority so machine adjustments can be
    rolled back without drifting.
    """

    essential: bool
    priority: int | None
    origin: str  # config | human | machine
    baseline: int | None

    def to_record(self) -> dict:
        rec: dict = {"origin": self.origin}
        if self.essential:
            rec["essential"] = True
        else:
            rec["priority"] = self.priority
        return rec


@dataclass(frozen=True)
class ViewTriageState:
    view: str
    max_threshold: int
    displayed: tuple[str, ...]  # essentials first, then ranked non-essentials
    suppressed: tuple[str, ...]

    def to_record(self) -> dict:
        return {
            "view": self.view,
            "max_threshold": self.max_threshold,
            "displayed": list(self.displayed),
            "suppressed": list(self.suppressed),
        }


@dataclass
class ResponsivenessMetric:
    """Rolling window of human prompt latencies; None marks no answer."""

    window: int = 20
    samples: deque = field(default_factory=lambda: deque(maxlen=20))
    version: int = 0  # bumps per recorded sample, drives adjustment hysteresis

    def __post_init__(self):
        self.samples = deque(self.samples, maxlen=self.window)

    def record(self, latency_ms: float | None) -> None:
        self.samples.append(latency_ms)
        self.version += 1

    @property
    def answered(self) -> list[float]:
        return [s for s in self.samples if s is not None]

    @property
    def mean_ms(self) -> float | None:
        answered = self.answered
        if not answered:
            return None
        return sum(answered) / len(answered)

    @property
    def availability(self) -> float:
        if not self.samples:
            return 1.0
        return len(self.answered) / len(self.samples)


def _validate_rule(essential: bool, priority: int | None) -> None:
    if essential:
        if priority is not None:
            raise TriageError("a rule is either essential or prioritized, not both")
        return
    if priority is None or not 1 <= priority <= 5:
        raise TriageError(f"priority must be in 1..5, got {priority!r}")


class AlertTriage:
    """Single-writer triage engine; views read immutable state snapshots."""

    def __init__(
        self,
        lag_ms: int = DEFAULT_LAG_MS,
        recovery_ms: int = DEFAULT_RECOVERY_MS,
        default_priority: int = DEFAULT_PRIORITY,
    ):
        self.lag_ms = lag_ms
        self.recovery_ms = recovery_ms
        self.default_priority = default_priority
        self._rules: dict[tuple[str, str], RuleEntry] = {}
        self._thresholds: dict[str, int] = {}
        self._alerts: dict[str, Alert] = {}
        self._metric_version_seen = -1

    # ---- views ----

    def register_view(self, view: str, max_threshold: int) -> ViewTriageState:
        if view in self._thresholds:
            raise DuplicateViewError(view)
        if max_threshold < 0:
            raise TriageError("threshold must be non-negative")
        self._thresholds[view] = max_threshold
        # per-view fallback rule so unknown alert types rank mid-band
        self._rules.setdefault(
            (WILDCARD, view),
            RuleEntry(False, self.default_priority, "config", self.default_priority),
        )
        return self.view_state(view)

    def deregister_view(self, view: str) -> None:
        if view not in self._thresholds:
            raise UnknownViewError(view)
        del self._thresholds[view]
        self._rules = {k: v for k, v in self._rules.items() if k[1] != view}

    @property
    def views(self) -> tuple[str, ...]:
        return tuple(sorted(self._thresholds))

    # ---- rules ----

    def update_rule(
        self,
        alert_type: str,
        view: str,
        origin: str,
        essential: bool = False,
        priority: int | None = None,
    ) -> None:
        """Set the rule for (alert_type, view); affected view re-triages
        lazily since state is recomputed from rules on every read."""
        _validate_rule(essential, priority)
        baseline = None
        if not essential:
            if origin == "machine":
                prev = self._rules.get((alert_type, view))
                baseline = prev.baseline if prev and prev.baseline else priority
            else:
                baseline = priority  # config and human edits move the baseline
        self._rules[(alert_type, view)] = RuleEntry(essential, priority, origin, baseline)

    def load_rules(self, records: list[dict]) -> None:
        for r in records:
            self.update_rule(
                r["alert_type"],
                r["view"],
                origin=r.get("origin", "config"),
                essential=bool(r.get("essential", False)),
                priority=r.get("priority"),
            )

    def rules_snapshot(self) -> dict:
        return {
            f"{t}/{v}": entry.to_record()
            for (t, v), entry in sorted(self._rules.items())
        }

    def _entry(self, alert_type: str, view: str) -> RuleEntry:
        entry = self._rules.get((alert_type, view))
        if entry is None:
            entry = self._rules[(WILDCARD, view)]
        return entry

    # ---- alerts ----

    def submit_alert(self, alert: Alert) -> dict[str, ViewTriageState]:
        if alert.id in self._alerts:
            raise DuplicateAlertError(alert.id)
        self._alerts[alert.id] = alert
        return {v: self.view_state(v) for v in self.views}

    def dismiss(self, alert_id: str) -> bool:
        return self._alerts.pop(alert_id, None) is not None

    def expire(self, now: int) -> tuple[str, ...]:
        gone = tuple(
            sorted(
                a.id
                for a in self._alerts.values()
                if a.expires_at is not None and a.expires_at <= now
            )
        )
        for alert_id in gone:
            del self._alerts[alert_id]
        return gone

    def live_alerts(self) -> tuple[Alert, ...]:
        return tuple(sorted(self._alerts.values(), key=lambda a: (a.raised_at, a.id)))

    def decision_for(self, view: str, alert_id: str) -> str:
        state = self.view_state(view)
        return "display" if alert_id in state.displayed else "suppress"

    def view_state(self, view: str) -> ViewTriageState:
        """Pure triage of the live alert set under current rules."""
        if view not in self._thresholds:
            raise UnknownViewError(view)
        threshold = self._thresholds[view]
        essentials: list[Alert] = []
        ranked: list[tuple[int, int, str]] = []
        for a in self._alerts.values():
            entry = self._entry(a.alert_type, view)
            if entry.essential:
                essentials.append(a)
            else:
                ranked.append((entry.priority, a.raised_at, a.id))
        essentials.sort(key=lambda a: (a.raised_at, a.id))
        ranked.sort()
        displayed = tuple(a.id for a in essentials) + tuple(
            r[2] for r in ranked[:threshold]
        )
        suppressed = tuple(r[2] for r in ranked[threshold:])
        return ViewTriageState(view, threshold, displayed, suppressed)

    # ---- responsiveness adaptation ----

    def adapt_frequency(self, metric: ResponsivenessMetric) -> list[dict]:
        """Demote non-essential rules when the human lags; restore toward
        baseline when they recover. At most one direction fires per call,
        and never twice on the same metric snapshot."""
        mean = metric.mean_ms
        if mean is None:
            return []
        if metric.version == self._metric_version_seen:
            return []  # no new evidence since the last adjustment
        adjustments: list[dict] = []
        if mean > self.lag_ms:
            for key, entry in sorted(self._rules.items()):
                if entry.essential or key[1] not in self._thresholds:
                    continue
                new = min(5, entry.priority + 1)
                if new != entry.priority:
                    adjustments.append(self._adjust(key, entry, new))
        elif mean < self.recovery_ms:
            for key, entry in sorted(self._rules.items()):
                if entry.essential or key[1] not in self._thresholds:
                    continue
                if entry.baseline is not None and entry.priority > entry.baseline:
                    adjustments.append(self._adjust(key, entry, entry.priority - 1))
        if adjustments:
            self._metric_version_seen = metric.version
        return adjustments

    def _adjust(self, key: tuple[str, str], entry: RuleEntry, new: int) -> dict:
        old = entry.priority
        self._rules[key] = RuleEntry(False, new, "machine", entry.baseline)
        return {
            "alert_type": key[0],
            "view": key[1],
            "old_priority": old,
            "new_priority": new,
            "origin": "machine",
        }
