"""Adaptation explanations: four templates keyed by (trigger, initiator).

Whenever a vehicle adapts, it reports snippets for what happened, what
changed (or what change it needs from the human), and why. This module
owns the snippet-carrying event type, selects the matching template for
the 2x2 space of {external, internal} x {human, machine}, and fills the
slots verbatim. A small append-only feed supports filtered, chronological
review of everything rendered during a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .common import UavId

TRIGGERS = ("external", "internal")
INITIATORS = ("human", "machine")

SLOT_ID = "{id/color}"
SLOT_EVENT = "{Event}"
SLOT_ACTION = "{Action - internal changes}"
SLOT_DESIRED = "{Desired Changes}"
SLOT_RATIONALE = "{Rationale}"
SLOT_CAUSE = "{cause}"


class ExplanationError(Exception):
    pass


class MissingSnippetError(ExplanationError):
    """Raised when an event lacks a snippet its template requires."""

    def __init__(self, slot: str):
        self.slot = slot
        super().__init__(f"missing snippet for slot {slot!r}")


@dataclass(frozen=True)
class ExplanationTemplate:
    trigger: str
    initiator: str
    pattern: str

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(
            s for s in (
                SLOT_ID, SLOT_EVENT, SLOT_ACTION, SLOT_DESIRED,
                SLOT_RATIONALE, SLOT_CAUSE,
            ) if s in self.pattern
        )


TEMPLATES: dict[tuple[str, str], ExplanationTemplate] = {
    ("external", "machine"): ExplanationTemplate(
        "external", "machine",
        "UAV-{id/color} identified {Event} in the environment. "
        "Therefore, adapting {Action - internal changes} to {Rationale}",
    ),
    ("external", "human"): ExplanationTemplate(
        "external", "human",
        "UAV-{id/color} identified {Event} in the environment. "
        "Therefore, need {Desired Changes} to {Rationale}",
    ),
    ("internal", "machine"): ExplanationTemplate(
        "internal", "machine",
        "UAV-{id/color} observed {Event}. "
        "Therefore, {Action - internal changes} to {Rationale}",
    ),
    ("internal", "human"): ExplanationTemplate(
        "internal", "human",
        "UAV-{id/color} observed {Event} due to {cause}. "
        "Therefore, need {Desired Changes} to {Rationale}",
    ),
}


@dataclass(frozen=True)
class AdaptationEvent:
    """One self-adaptation (or human-needed change) with its snippets.

    Machine-initiated events carry action_snippet; human-directed ones
    carry desired_changes_snippet; internally triggered human events add
    cause_snippet. Construction enforces the class so downstream
    rendering is total.
    """

    uav: UavId
    trigger: str
    initiator: str
    event_snippet: str
    rationale_snippet: str
    action_snippet: str | None = None
    desired_changes_snippet: str | None = None
    cause_snippet: str | None = None
    at: int = 0

    def __post_init__(self):
        if self.trigger not in TRIGGERS:
            raise ExplanationError(f"unknown trigger {self.trigger!r}")
        if self.initiator not in INITIATORS:
            raise ExplanationError(f"unknown initiator {self.initiator!r}")
        for slot, value in self._slot_values().items():
            if value is None:
                raise MissingSnippetError(slot)

    def _slot_values(self) -> dict[str, str | None]:
        template = TEMPLATES[(self.trigger, self.initiator)]
        values: dict[str, str | None] = {}
        for slot in template.slots:
            if slot == SLOT_ID:
                values[slot] = display_name(self.uav)
            elif slot == SLOT_EVENT:
                values[slot] = self.event_snippet
            elif slot == SLOT_ACTION:
                values[slot] = self.action_snippet
            elif slot == SLOT_DESIRED:
                values[slot] = self.desired_changes_snippet
            elif slot == SLOT_RATIONALE:
                values[slot] = self.rationale_snippet
            elif slot == SLOT_CAUSE:
                values[slot] = self.cause_snippet
        return values

    def to_record(self) -> dict:
        rec = {
            "uav": self.uav.to_record(),
            "trigger": self.trigger,
            "initiator": self.initiator,
            "event_snippet": self.event_snippet,
            "rationale_snippet": self.rationale_snippet,
            "at": self.at,
        }
        for key, value in (
            ("action_snippet", self.action_snippet),
            ("desired_changes_snippet", self.desired_changes_snippet),
            ("cause_snippet", self.cause_snippet),
        ):
            if value is not None:
                rec[key] = value
        return rec

    @classmethod
    def from_record(cls, r: dict) -> "AdaptationEvent":
        return cls(
            uav=UavId.from_record(r["uav"]),
            trigger=r["trigger"],
            initiator=r["initiator"],
            event_snippet=r["event_snippet"],
            rationale_snippet=r["rationale_snippet"],
            action_snippet=r.get("action_snippet"),
            desired_changes_snippet=r.get("desired_changes_snippet"),
            cause_snippet=r.get("cause_snippet"),
            at=r["at"],
        )


def display_name(uav: UavId) -> str:
    return uav.color[:1].upper() + uav.color[1:]


def select_template(e: AdaptationEvent) -> ExplanationTemplate:
    return TEMPLATES[(e.trigger, e.initiator)]


@dataclass(frozen=True)
class Explanation:
    text: str
    source: AdaptationEvent
    rendered_at: int

    def to_record(self) -> dict:
        return {
            "text": self.text,
            "source": self.source.to_record(),
            "rendered_at": self.rendered_at,
        }


def render(e: AdaptationEvent, rendered_at: int | None = None) -> Explanation:
    """Fill the matching template with the event's snippets verbatim."""
    template = select_template(e)
    text = template.pattern
    for slot, value in e._slot_values().items():
        if value is None:
            raise MissingSnippetError(slot)
        text = text.replace(slot, value)
    return Explanation(
        text=text, source=e, rendered_at=e.at if rendered_at is None else rendered_at
    )


class ExplanationEngine:
    """Stateless renderer over an append-only explanation log."""

    def __init__(self):
        self._log: list[Explanation] = []

    def ingest(self, e: AdaptationEvent, at: int | None = None) -> Explanation:
        explanation = render(e, rendered_at=at)
        self._log.append(explanation)
        return explanation

    def __len__(self) -> int:
        return len(self._log)

    def feed(
        self,
        start: int | None = None,
        end: int | None = None,
        uav: str | None = None,
    ) -> tuple[Explanation, ...]:
        """Matching explanations in chronological order. The uav filter
        matches either the name or the color token."""
        out = [
            x
            for x in self._log
            if (start is None or x.rendered_at >= start)
            and (end is None or x.rendered_at <= end)
            and (uav is None or uav in (x.source.uav.name, x.source.uav.color))
        ]
        return tuple(sorted(out, key=lambda x: x.rendered_at))
