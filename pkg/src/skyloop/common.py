"""Small shared vocabulary used across modules."""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class UavId:
    """Identity of one vehicle: short name plus display color token."""

    name: str
    color: str

    def to_record(self) -> dict:
        return {"name": self.name, "color": self.color}

    @classmethod
    def from_record(cls, record: dict) -> "UavId":
        return cls(record["name"], record["color"])


def dumps_compact(obj) -> str:
    """Canonical JSON: sorted keys, no whitespace. Log lines and replay
    comparison both rely on this exact encoding."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class DetectionEvent:
    """One computer-vision sighting with its two uncertainty scores.

    confidence is the detector's class probability; reliability accounts
    for context mismatch (weather, lighting) that the detector itself
    cannot see past. Both live in [0, 1].
    """

    object_class: str
    confidence: float
    reliability: float
    location: tuple[float, float]  # latitude, longitude degrees
    frame: int
    uav: UavId

    def __post_init__(self):
        for label, score in (("confidence", self.confidence),
                             ("reliability", self.reliability)):
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"{label} out of [0,1]: {score}")

    @property
    def key(self) -> tuple[str, int]:
        """Identity of the sighting: one session at most per key."""
        return (self.uav.name, self.frame)

    def to_record(self) -> dict:
        return {
            "object_class": self.object_class,
            "confidence": self.confidence,
            "reliability": self.reliability,
            "location": list(self.location),
            "frame": self.frame,
            "uav": self.uav.to_record(),
        }

    @classmethod
    def from_record(cls, r: dict) -> "DetectionEvent":
        return cls(
            r["object_class"], r["confidence"], r["reliability"],
            (r["location"][0], r["location"][1]), r["frame"],
            UavId.from_record(r["uav"]),
        )
