"""Injectable clocks. Idle gating and replay both run on simulated time."""

from __future__ import annotations

import time


class SystemClock:
    def now(self) -> float:
        """Milliseconds."""
        return time.time() * 1000.0


class ScriptedClock:
    """Deterministic clock a driver advances explicitly."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, ms: float) -> float:
        if ms < 0:
            raise ValueError("clocks only move forward")
        self._now += ms
        return self._now

    def set(self, ms: float) -> float:
        if ms < self._now:
            raise ValueError("clocks only move forward")
        self._now = float(ms)
        return self._now
