"""Session: one workspace, its snapshots, guidance, chat, and persistence.

Chat plans auto-execute (a typed command is an explicit instruction), while
peripheral suggestions always wait for an explicit apply. Both paths are
atomic: a failing step rolls the workspace back and reports the failure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import ToolExecutor
from .clock import SystemClock
from .config import EngineConfig
from .errors import (EngineError, MentionError, PersistError, PlanFailure,
                     ProviderError)
from .events import InteractionEvent
from .extraction import SnapshotStore, capture_element, trace_source
from .gateway import (INVALID_ACTION_MARKER, PlanGateway, TriggerPlanner,
                      assemble_context)
from .guidance import Focus, GuidanceEngine
from .workspace import Workspace

MAGIC = "databoard-session"
SCHEMA_VERSION = 1

_MENTION_TOKEN = re.compile(r"[A-Za-z0-9_]+")


@dataclass
class ChatMessage:
    role: str                   # user | assistant
    text: str
    mentions: list[str] = field(default_factory=list)
    attached_plan: dict | None = None
    version_id: int | None = None
    error: str | None = None

    def to_json(self) -> dict:
        out = {"role": self.role, "text": self.text, "mentions": self.mentions}
        if self.attached_plan is not None:
            out["attached_plan"] = self.attached_plan
        if self.version_id is not None:
            out["version_id"] = self.version_id
        if self.error is not None:
            out["error"] = self.error
        return out

    @staticmethod
    def from_json(obj: dict) -> "ChatMessage":
        return ChatMessage(obj["role"], obj["text"], obj.get("mentions", []),
                           obj.get("attached_plan"), obj.get("version_id"),
                           obj.get("error"))


def resolve_mentions(text: str, version) -> tuple[list[str], list[dict]]:
    """Longest-match "@name" resolution against instance names.

    Returns (resolved instance ids, rejections). A rejection carries the
    ambiguous token and its candidate completions for the UI selector.
    """
    names = {}
    for inst in version.instances.values():
        names[inst.name] = inst.id
        names.setdefault(inst.id, inst.id)
    mentions, rejections = [], []
    pos = 0
    while True:
        at = text.find("@", pos)
        if at < 0:
            break
        rest = text[at + 1:]
        matches = [name for name in names if rest.startswith(name)]
        if matches:
            best = max(matches, key=len)
            mentions.append(names[best])
            pos = at + 1 + len(best)
            continue
        token_match = _MENTION_TOKEN.match(rest)
        token = token_match.group(0) if token_match else ""
        candidates = sorted({name for name in names if name.startswith(token)})
        rejections.append({"token": token, "candidates": candidates})
        pos = at + 1 + max(len(token), 1)
    return mentions, rejections


class Session:
    def __init__(self, title: str = "", config: EngineConfig | None = None,
                 clock=None, provider=None):
        self.config = config or EngineConfig()
        self.clock = clock or SystemClock()
        self.workspace = Workspace(title)
        self.store = SnapshotStore()
        self.executor = ToolExecutor(self.store)
        self.chat_log: list[ChatMessage] = []
        self.focus = Focus()
        self.invalid_markers: list[str] = []
        self.gateway = PlanGateway(provider, self.config) if provider else None
        planner = None
        if self.gateway is not None:
            planner = TriggerPlanner(self.gateway, self._bundle_with_markers)
        self.guidance = GuidanceEngine(self.workspace, self.store, self.config,
                                       self.clock, planner)

    # --- context assembly (the gateway's bundle factory) ---

    def assemble_context(self, markers: tuple[str, ...] = ()):
        return assemble_context(
            self.store, self.workspace.current, self.focus,
            [m.to_json() for m in self.chat_log], self.guidance.log,
            html_budget=self.config.context_html_budget,
            extra_markers=tuple(self.invalid_markers) + tuple(markers))

    def _bundle_with_markers(self, markers):
        return self.assemble_context(markers)

    # --- events / focus ---

    def record_event(self, kind: str, payload: dict | None = None,
                     major: bool = True, timestamp: float | None = None) -> InteractionEvent:
        event = InteractionEvent(
            timestamp if timestamp is not None else self.clock.now(),
            kind, payload or {}, major)
        self.guidance.record_event(event)
        return event

    def set_focus(self, view: str, instance_id: str | None = None,
                  tab_url: str | None = None) -> None:
        self.focus = Focus(view, instance_id, tab_url)

    def mark_invalid_action(self) -> None:
        """Driver-level invalid action: the warning joins the prompt context."""
        self.invalid_markers.append(INVALID_ACTION_MARKER)

    # --- workspace plumbing ---

    def apply_call(self, call, base_version_id: int | None = None):
        base = base_version_id if base_version_id is not None \
            else self.workspace.current_version_id
        version = self.workspace.apply_versioned(base, call, self.executor)
        self.guidance.invalidate("version-advance")
        return version, self.executor.last_report

    def ingest(self, html: str, url: str):
        return self.store.ingest(html, url)

    def capture(self, snapshot_id: str, node_id: int):
        snapshot = self.store.get(snapshot_id)
        return capture_element(snapshot, node_id)

    def trace(self, ref):
        return trace_source(self.store, ref)

    def tick(self):
        """One proactive evaluation cycle at the current clock time."""
        return self.guidance.evaluation_cycle(self.focus)

    def apply_suggestion(self, suggestion_id: str, fail_at_step: int | None = None):
        version = self.guidance.execute_plan(suggestion_id, fail_at_step)
        suggestion = self.guidance.suggestions[suggestion_id]
        payload = {"suggestion_id": suggestion_id,
                   "trigger": suggestion.trigger_rule,
                   "modality": suggestion.modality}
        ghost = suggestion.ghost_diff or {}
        carried = {k: ghost[k] for k in
                   ("instance_id", "selector", "snapshot_id", "match_count")
                   if k in ghost}
        if carried:
            payload["ghost"] = carried
        self.record_event("suggestion-applied", payload)
        return version

    def dismiss_suggestion(self, suggestion_id: str) -> None:
        self.guidance.dismiss(suggestion_id)
        self.record_event("suggestion-dismissed", {"suggestion_id": suggestion_id})

    # --- chat ---

    def handle_chat(self, text: str) -> ChatMessage:
        mentions, rejections = resolve_mentions(text, self.workspace.current)
        if rejections:
            raise MentionError(
                f"could not resolve @{rejections[0]['token']}",
                rejections[0]["candidates"])
        user = ChatMessage("user", text, mentions)
        self.chat_log.append(user)
        self.record_event("chat-sent", {"text": text})
        # a typed command is a strong intent change: clear stale guidance
        self.guidance.invalidate("intent-change")
        if self.gateway is None:
            assistant = ChatMessage("assistant",
                                    "No plan provider is configured.",
                                    error="provider-unconfigured")
            self.chat_log.append(assistant)
            return assistant
        try:
            response = self.gateway.request_plan_with_retry(
                self._bundle_with_markers, text, self.workspace.current)
        except ProviderError as exc:
            assistant = ChatMessage("assistant", f"The planner failed: {exc}",
                                    error=exc.code)
            self.chat_log.append(assistant)
            return assistant
        if response.parsed is None:
            assistant = ChatMessage(
                "assistant",
                f"I could not produce a valid plan: {response.parse_error}",
                error="parse-error")
            self.chat_log.append(assistant)
            return assistant
        plan = response.parsed
        try:
            self.workspace.apply_plan(self.workspace.current_version_id,
                                      list(plan.steps), self.executor)
        except (PlanFailure, EngineError) as exc:
            assistant = ChatMessage(
                "assistant",
                f"The plan failed and the workspace was left unchanged: {exc}",
                attached_plan=plan.to_json(),
                error=getattr(exc, "code", "plan-failure"))
            self.chat_log.append(assistant)
            return assistant
        self.guidance.invalidate("version-advance")
        steps_text = "\n".join(plan.rendered_steps)
        assistant = ChatMessage(
            "assistant",
            (response.description or "Done.") + "\n" + steps_text,
            mentions=[],
            attached_plan=plan.to_json(),
            version_id=self.workspace.current_version_id)
        self.chat_log.append(assistant)
        return assistant

    # --- persistence ---

    def persist(self, path: str | Path) -> None:
        record = {
            "magic": MAGIC,
            "schema_version": SCHEMA_VERSION,
            "title": self.workspace.title,
            "workspace": self.workspace.to_json(),
            "snapshots": self.store.to_json(),
            "events": self.guidance.log.to_json(),
            "chat": [m.to_json() for m in self.chat_log],
            "invalid_markers": list(self.invalid_markers),
        }
        from .instances import canonical_json
        Path(path).write_text(canonical_json(record) + "\n")

    @staticmethod
    def restore(path: str | Path, config: EngineConfig | None = None,
                clock=None, provider=None) -> "Session":
        try:
            record = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise PersistError(f"unreadable session file: {exc}") from exc
        if not isinstance(record, dict) or record.get("magic") != MAGIC:
            raise PersistError("not a session file (bad magic)")
        if record.get("schema_version") != SCHEMA_VERSION:
            raise PersistError(
                f"unsupported schema version {record.get('schema_version')!r}")
        try:
            session = Session(record.get("title", ""), config, clock, provider)
            session.workspace = Workspace.from_json(record["workspace"])
            session.store = SnapshotStore.from_json(record["snapshots"])
            session.executor = ToolExecutor(session.store)
            session.guidance.workspace = session.workspace
            session.guidance.store = session.store
            session.guidance.executor = session.executor
            from .events import EventLog
            session.guidance.log = EventLog.from_json(
                record["events"], session.config.context_event_cap)
            session.chat_log = [ChatMessage.from_json(m) for m in record["chat"]]
            session.invalid_markers = list(record.get("invalid_markers", []))
        except PersistError:
            raise
        except Exception as exc:
            raise PersistError(f"corrupted session file: {exc}") from exc
        return session
