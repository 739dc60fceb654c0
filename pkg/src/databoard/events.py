"""Interaction events: the trigger substrate for proactive guidance.

Only major events (the ones carrying user intent) participate in trigger
evaluation and prompt context; minor ones such as moving or resizing
instances are retained in the full log but never counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BadArgument, ClockRegression

EVENT_KINDS = (
    "workspace-created", "element-captured", "cell-edited", "cell-deleted",
    "column-named", "sort-applied", "filter-applied", "table-created",
    "viz-created", "viz-edited", "selection-made", "chat-sent",
    "suggestion-applied", "suggestion-dismissed",
)

# the four behavior categories used for timeline analysis
CATEGORY_BY_KIND = {
    "suggestion-applied": None,   # resolved from the payload's guidance type
    "chat-sent": "chat",
}


@dataclass(frozen=True)
class InteractionEvent:
    timestamp: float            # milliseconds
    kind: str
    payload: dict = field(default_factory=dict)
    major: bool = True

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise BadArgument(f"unknown event kind {self.kind!r}")

    def category(self) -> str:
        """Timeline category: in-situ / peripheral / chat / manual."""
        if self.kind == "chat-sent":
            return "chat"
        if self.kind == "suggestion-applied":
            return self.payload.get("modality", "peripheral")
        return "manual"

    def to_json(self) -> dict:
        return {"timestamp": self.timestamp, "kind": self.kind,
                "payload": self.payload, "major": self.major}

    @staticmethod
    def from_json(obj: dict) -> "InteractionEvent":
        return InteractionEvent(obj["timestamp"], obj["kind"],
                                obj.get("payload", {}), obj.get("major", True))

    def describe(self) -> str:
        bits = [self.kind]
        for key in ("instance_id", "column", "title", "text", "trigger"):
            if key in self.payload:
                bits.append(f"{key}={self.payload[key]}")
        return " ".join(bits)


class EventLog:
    """Full append-only log; context extraction caps at the configured
    number of most recent major events."""

    def __init__(self, context_cap: int = 15):
        self.context_cap = context_cap
        self._events: list[InteractionEvent] = []

    def record(self, event: InteractionEvent) -> None:
        if self._events and event.timestamp < self._events[-1].timestamp:
            raise ClockRegression(
                f"timestamp {event.timestamp} precedes {self._events[-1].timestamp}")
        self._events.append(event)

    def all_events(self) -> list[InteractionEvent]:
        return list(self._events)

    def major_events(self) -> list[InteractionEvent]:
        return [e for e in self._events if e.major]

    def context_slice(self) -> list[InteractionEvent]:
        return self.major_events()[-self.context_cap:]

    def last_major(self) -> InteractionEvent | None:
        for event in reversed(self._events):
            if event.major:
                return event
        return None

    def to_json(self) -> list[dict]:
        return [e.to_json() for e in self._events]

    @staticmethod
    def from_json(records: list[dict], context_cap: int = 15) -> "EventLog":
        log = EventLog(context_cap)
        for record in records:
            log.record(InteractionEvent.from_json(record))
        return log
