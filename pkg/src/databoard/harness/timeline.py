"""Interaction-timeline merging for behavior analysis.

Consecutive events of the same category whose gap stays within the
threshold collapse into one block carrying a count; a block reads as an
active period devoted to one interaction modality.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import BadArgument

DEFAULT_GAP_THRESHOLD_MS = 90000.0   # 1.5 minutes


@dataclass(frozen=True)
class TimelineBlock:
    category: str
    start: float
    end: float
    count: int

    def to_json(self) -> dict:
        return {"category": self.category, "start": self.start,
                "end": self.end, "count": self.count}


def merge_timeline(events: list[dict],
                   gap_threshold_ms: float = DEFAULT_GAP_THRESHOLD_MS
                   ) -> list[TimelineBlock]:
    """`events` are {"timestamp", "category"} records in time order."""
    blocks: list[TimelineBlock] = []
    previous_ts = None
    for event in events:
        ts = event["timestamp"]
        category = event["category"]
        if previous_ts is not None and ts < previous_ts:
            raise BadArgument("events must be time-ordered")
        previous_ts = ts
        if blocks:
            last = blocks[-1]
            if last.category == category and ts - last.end <= gap_threshold_ms:
                blocks[-1] = TimelineBlock(category, last.start, ts, last.count + 1)
                continue
        blocks.append(TimelineBlock(category, ts, ts, 1))
    return blocks
