"""Suggestion and plan records exchanged between engine, planner, and UI."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .catalog import ToolCall
from .errors import BadArgument

MICRO = "micro"
MACRO = "macro"
IN_SITU = "in-situ"
PERIPHERAL = "peripheral"

# lifecycle: offered -> applied | dismissed | withdrawn | stale | held
OFFERED = "offered"
APPLIED = "applied"
DISMISSED = "dismissed"
WITHDRAWN = "withdrawn"
STALE = "stale"
HELD = "held"     # touches off-viewport instances; waiting for permission


def _render_step(index: int, call: ToolCall) -> str:
    args = {k: v for k, v in call.args.items() if k not in ("newInstance", "pattern")}
    parts = ", ".join(f"{k}={v!r}" for k, v in sorted(args.items()))
    return f"Step {index}: {call.tool_name}({parts})"


@dataclass(frozen=True)
class ToolPlan:
    steps: tuple[ToolCall, ...]

    def __post_init__(self):
        if not self.steps:
            raise BadArgument("plans must have at least one step")

    @property
    def rendered_steps(self) -> tuple[str, ...]:
        return tuple(_render_step(i + 1, call) for i, call in enumerate(self.steps))

    def touched_instance_ids(self) -> set[str]:
        from .catalog import referenced_instance_ids
        touched = set()
        for call in self.steps:
            touched.update(referenced_instance_ids(call))
        return touched

    def to_json(self) -> dict:
        return {"steps": [c.to_json() for c in self.steps],
                "rendered_steps": list(self.rendered_steps)}

    @staticmethod
    def from_json(obj: dict) -> "ToolPlan":
        return ToolPlan(tuple(ToolCall.from_json(c) for c in obj["steps"]))


_suggestion_counter = itertools.count(1)


def reset_suggestion_ids() -> None:
    """Restart the id sequence; replays call this for bit-identical runs."""
    global _suggestion_counter
    _suggestion_counter = itertools.count(1)


@dataclass(frozen=True)
class Suggestion:
    id: str
    scope: str                      # micro | macro
    trigger_rule: str
    description: str
    plan: ToolPlan
    confidence: float
    base_version: int
    modality: str                   # in-situ | peripheral
    status: str = OFFERED
    trigger_recency: float = 0.0    # timestamp of the triggering evidence
    ghost_diff: dict | None = None  # in-situ preview payload for the UI
    needs_navigation: bool = False

    def __post_init__(self):
        if self.scope == MICRO and self.modality != IN_SITU:
            raise BadArgument("micro suggestions are in-situ")
        if self.scope == MACRO and self.modality != PERIPHERAL:
            raise BadArgument("macro suggestions are peripheral")
        if not 0.0 <= self.confidence <= 1.0:
            raise BadArgument("confidence must be within [0, 1]")

    def with_status(self, status: str) -> "Suggestion":
        return replace(self, status=status)

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "scope": self.scope,
            "trigger_rule": self.trigger_rule,
            "description": self.description,
            "plan": self.plan.to_json(),
            "confidence": self.confidence,
            "base_version": self.base_version,
            "modality": self.modality,
            "status": self.status,
        }
        if self.ghost_diff is not None:
            out["ghost_diff"] = self.ghost_diff
        if self.needs_navigation:
            out["needs_navigation"] = True
        return out


def new_suggestion(scope: str, trigger_rule: str, description: str, plan: ToolPlan,
                   confidence: float, base_version: int, trigger_recency: float = 0.0,
                   ghost_diff: dict | None = None) -> Suggestion:
    modality = IN_SITU if scope == MICRO else PERIPHERAL
    return Suggestion(
        id=f"sugg-{next(_suggestion_counter)}",
        scope=scope,
        trigger_rule=trigger_rule,
        description=description,
        plan=plan,
        confidence=confidence,
        base_version=base_version,
        modality=modality,
        trigger_recency=trigger_recency,
        ghost_diff=ghost_diff,
    )
