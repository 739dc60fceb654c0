"""Headless task replay over the wire protocol.

A virtual user (scripted, or a pluggable live driver) emits actions; each
action becomes protocol frames against a fresh session. Guidance offers and
applications are logged with latency and pre/post state hashes, invalid
actions inject the warning marker into the interaction context, and the
final workspace is written out for scoring.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..cells import Cell
from ..clock import ScriptedClock
from ..config import EngineConfig
from ..errors import BadArgument, ProviderError, TaskTimeout
from ..gateway import ScriptedProvider
from ..protocol import ProtocolClient
from ..session import Session
from ..suggestions import IN_SITU
from .pages import field_node, item_nodes
from .tasks import BenchmarkTask, classify_difficulty


@dataclass
class GuidanceLogEntry:
    guidance_type: str            # in-situ | peripheral | chat
    latency_ms: float
    description: str
    pre_state_hash: str
    post_state_hash: str | None = None   # recorded only when applied
    applied: bool = False

    def to_json(self) -> dict:
        out = {"guidance_type": self.guidance_type,
               "latency_ms": round(self.latency_ms, 3),
               "description": self.description,
               "pre_state_hash": self.pre_state_hash,
               "applied": self.applied}
        if self.applied:
            out["post_state_hash"] = self.post_state_hash
        return out


@dataclass
class RunReport:
    task_id: str
    difficulty: str
    steps: int = 0
    invalid_actions: int = 0
    final_version_id: int = 0
    final_state_hash: str = ""
    guidance: list[GuidanceLogEntry] = field(default_factory=list)

    def to_json(self) -> dict:
        counts = {"in-situ": 0, "peripheral": 0, "chat": 0}
        for entry in self.guidance:
            counts[entry.guidance_type] = counts.get(entry.guidance_type, 0) + 1
        return {"task_id": self.task_id, "difficulty": self.difficulty,
                "steps": self.steps, "invalid_actions": self.invalid_actions,
                "final_version_id": self.final_version_id,
                "final_state_hash": self.final_state_hash,
                "suggestion_counts": counts,
                "guidance": [e.to_json() for e in self.guidance]}


class ScriptedUser:
    """Deterministic virtual user: replays a task's driver script."""

    def __init__(self, script: list[dict]):
        self.script = list(script)
        self.position = 0

    def next_action(self, state: dict) -> dict | None:
        if self.position >= len(self.script):
            return None
        action = self.script[self.position]
        self.position += 1
        return action


class LiveVirtualUser:
    """Model-driven virtual user shell; needs a configured action provider."""

    def __init__(self, provider=None):
        if provider is None:
            raise ProviderError("a live virtual user needs an action provider")
        self.provider = provider

    def next_action(self, state: dict) -> dict | None:
        return self.provider.next_action(state)


class TaskReplayer:
    def __init__(self, task: BenchmarkTask, provider=None,
                 config: EngineConfig | None = None, step_budget: int = 600):
        from ..catalog import reset_call_ids
        from ..suggestions import reset_suggestion_ids

        # one replay per process owns the id sequences: resets make repeated
        # in-process runs byte-identical
        reset_call_ids()
        reset_suggestion_ids()
        self.task = task
        self.config = config or EngineConfig()
        self.step_budget = step_budget
        self.clock = ScriptedClock()
        if provider is not None:
            self.provider = provider
        elif task.fixtures_path() is not None:
            self.provider = ScriptedProvider.from_file(task.fixtures_path())
        else:
            self.provider = ScriptedProvider()
        self.session = Session(task.statement, self.config, self.clock, self.provider)
        self.client = ProtocolClient(self.session)
        self.report = RunReport(task.id, classify_difficulty(task.criteria))
        self._entries_by_suggestion: dict[str, GuidanceLogEntry] = {}
        self._snapshots_by_url: dict[str, object] = {}

    # --- driver actions ---

    def run(self, user) -> RunReport:
        self.client.hello()
        while True:
            action = user.next_action(self._view_state())
            if action is None:
                break
            self.report.steps += 1
            if self.report.steps > self.step_budget:
                raise TaskTimeout(
                    f"task {self.task.id} exceeded {self.step_budget} steps")
            self._apply_action(action)
        self.report.final_version_id = self.session.workspace.current_version_id
        self.report.final_state_hash = self.session.workspace.state_hash()
        self.report.guidance = list(self._entries_by_suggestion.values())
        return self.report

    def _view_state(self) -> dict:
        return {
            "version_id": self.session.workspace.current_version_id,
            "instances": sorted(self.session.workspace.current.instances),
            "peripheral": [self.session.guidance.suggestions[sid].description
                           for sid in self.session.guidance.peripheral_order],
            "in_situ": [s.description for s in self.session.guidance.active_micro()],
            "invalid_actions": self.report.invalid_actions,
        }

    def _send(self, kind: str, body: dict) -> dict:
        started = time.perf_counter()
        response = self.client.send(kind, body)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        self._collect_offers(elapsed_ms)
        if response["kind"] == "error":
            self.report.invalid_actions += 1
            self.session.mark_invalid_action()
        return response

    def _collect_offers(self, elapsed_ms: float) -> None:
        for sid, suggestion in self.session.guidance.suggestions.items():
            if sid not in self._entries_by_suggestion:
                self._entries_by_suggestion[sid] = GuidanceLogEntry(
                    guidance_type=("in-situ" if suggestion.modality == IN_SITU
                                   else "peripheral"),
                    latency_ms=elapsed_ms,
                    description=suggestion.description,
                    pre_state_hash=self.session.workspace.state_hash(),
                )

    def _apply_action(self, action: dict) -> None:
        kind = action.get("do")
        handler = getattr(self, "_do_" + str(kind).replace("-", "_"), None)
        if handler is None:
            raise BadArgument(f"unknown driver action {kind!r}")
        handler(action)

    def _do_advance(self, action):
        self.clock.advance(action["ms"])

    def _do_tick(self, action):
        self._send("event", {})

    def _do_focus(self, action):
        self._send("event", {"focus": {"view": action.get("view", "canvas"),
                                       "instance_id": action.get("instance"),
                                       "tab_url": action.get("url")}})

    def _do_ingest(self, action):
        html = (self.task.base_dir / action["file"]).read_text()
        self._send("event", {"ingest": {"html": html, "url": action["url"]}})
        snapshot = self.session.store.latest_for_url(action["url"])
        self._snapshots_by_url[action["url"]] = snapshot

    def _do_workspace_created(self, action):
        self._send("event", {"event": {
            "kind": "workspace-created",
            "payload": {"title": action.get("title", self.session.workspace.title)}}})

    def _do_create_table(self, action):
        instance = {
            "kind": "table",
            "id": action["id"],
            "name": action.get("name", action["id"]),
            "columns": action["columns"],
            "rows": [],
            "lineage": [],
        }
        self._send("event", {
            "mutation": {"tool": "createInstance", "args": {"instance": instance},
                         "call_id": f"driver-create-{action['id']}"},
            "event": {"kind": "table-created",
                      "payload": {"instance_id": action["id"]}}})

    def _locate(self, url: str, locator: dict):
        snapshot = self._snapshots_by_url.get(url) or \
            self.session.store.latest_for_url(url)
        if snapshot is None:
            raise BadArgument(f"no snapshot ingested for {url!r}")
        cards = item_nodes(snapshot)
        index = locator.get("item", 0)
        if index >= len(cards):
            raise BadArgument(f"item index {index} out of range")
        node = field_node(cards[index], locator["field"])
        if node is None:
            raise BadArgument(f"no field {locator['field']!r} on item {index}")
        return snapshot, node

    def _do_capture_into(self, action):
        try:
            snapshot, node = self._locate(action["url"], action["locator"])
        except BadArgument:
            # deliberate bad locator: drive the invalid-action path
            self._send("capture-request", {"snapshot_id": "snap-missing",
                                           "node_id": 0})
            return
        result = self._send("capture-request", {
            "snapshot_id": snapshot.snapshot_id, "node_id": node.node_id})
        body = result["body"]
        edit = {"row": action["row"], "col": action["col"],
                "value": body["cell"], "sourceRef": body["source_ref"]}
        self._send("event", {
            "mutation": {"tool": "editCells",
                         "args": {"instanceId": action["instance"], "edits": [edit]},
                         "call_id": f"driver-capture-{self.report.steps}"},
            "event": {"kind": "element-captured",
                      "payload": {"snapshot_id": snapshot.snapshot_id,
                                  "node_id": node.node_id,
                                  "instance_id": action["instance"]}}})

    def _current_cell(self, instance_id: str, row: int, column_index: int):
        table = self.session.workspace.current.instances.get(instance_id)
        if table is None or row >= len(table.rows):
            return Cell.missing()
        return table.rows[row][column_index]

    def _column_index(self, instance_id: str, action: dict) -> int:
        table = self.session.workspace.current.instances[instance_id]
        if "col" in action:
            return action["col"]
        return table.column_index(action["column"])

    def _do_edit_cell(self, action):
        instance_id = action["instance"]
        col = self._column_index(instance_id, action)
        old = self._current_cell(instance_id, action["row"], col)
        value = action["value"]
        table = self.session.workspace.current.instances[instance_id]
        column_name = table.columns[col].name
        self._send("event", {
            "mutation": {"tool": "editCells",
                         "args": {"instanceId": instance_id,
                                  "edits": [{"row": action["row"], "col": col,
                                             "value": value}]},
                         "call_id": f"driver-edit-{self.report.steps}"},
            "event": {"kind": "cell-edited",
                      "payload": {"instance_id": instance_id,
                                  "column": column_name,
                                  "row": action["row"],
                                  "old": old.to_json(), "new": value}}})

    def _do_delete_cell(self, action):
        instance_id = action["instance"]
        col = self._column_index(instance_id, action)
        old = self._current_cell(instance_id, action["row"], col)
        table = self.session.workspace.current.instances[instance_id]
        column_name = table.columns[col].name
        self._send("event", {
            "mutation": {"tool": "editCells",
                         "args": {"instanceId": instance_id,
                                  "edits": [{"row": action["row"], "col": col,
                                             "value": {"t": "missing"}}]},
                         "call_id": f"driver-delete-{self.report.steps}"},
            "event": {"kind": "cell-deleted",
                      "payload": {"instance_id": instance_id,
                                  "column": column_name,
                                  "row": action["row"], "old": old.to_json()}}})

    def _do_apply_tool(self, action):
        body = {"mutation": {"tool": action["tool"], "args": action["args"],
                             "call_id": f"driver-tool-{self.report.steps}"}}
        if "event" in action:
            body["event"] = action["event"]
        self._send("event", body)

    def _do_event(self, action):
        self._send("event", {"event": {"kind": action["kind"],
                                       "payload": action.get("payload", {}),
                                       "major": action.get("major", True)}})

    def _find_suggestion(self, trigger: str, modality: str) -> str | None:
        candidates = []
        for sid, suggestion in self.session.guidance.suggestions.items():
            if suggestion.status == "offered" and \
                    suggestion.trigger_rule == trigger and \
                    suggestion.modality == modality:
                candidates.append(sid)
        return sorted(candidates)[-1] if candidates else None

    def _apply_suggestion(self, sid: str) -> None:
        pre_hash = self.session.workspace.state_hash()
        started = time.perf_counter()
        response = self._send("apply-suggestion", {"suggestion_id": sid})
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        entry = self._entries_by_suggestion.get(sid)
        if entry is not None and response["kind"] != "error":
            entry.applied = True
            entry.pre_state_hash = pre_hash
            entry.post_state_hash = self.session.workspace.state_hash()
            entry.latency_ms = elapsed_ms

    def _do_accept_insitu(self, action):
        trigger = action.get("trigger")
        repeat = action.get("repeat", False)
        while True:
            self._send("event", {})    # evaluation cycle
            if trigger:
                sid = self._find_suggestion(trigger, "in-situ")
            else:
                active = sorted(s.id for s in self.session.guidance.active_micro())
                sid = active[-1] if active else None
            if sid is None:
                if not repeat:
                    self.report.invalid_actions += 1
                    self.session.mark_invalid_action()
                return
            self._apply_suggestion(sid)
            if not repeat:
                return

    def _do_accept_peripheral(self, action):
        self._send("event", {})
        sid = self._find_suggestion(action.get("trigger"), "peripheral")
        if sid is None:
            self.report.invalid_actions += 1
            self.session.mark_invalid_action()
            return
        self._apply_suggestion(sid)

    def _do_dismiss_peripheral(self, action):
        sid = self._find_suggestion(action.get("trigger"), "peripheral")
        if sid is not None:
            self._send("event", {"event": {
                "kind": "suggestion-dismissed",
                "payload": {"suggestion_id": sid}}})

    def _do_chat(self, action):
        pre_hash = self.session.workspace.state_hash()
        started = time.perf_counter()
        response = self._send("chat-send", {"text": action["text"]})
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        applied = response["kind"] == "chat-response" and \
            response["body"]["message"].get("error") is None
        entry = GuidanceLogEntry(
            guidance_type="chat",
            latency_ms=elapsed_ms,
            description=action["text"],
            pre_state_hash=pre_hash,
            post_state_hash=self.session.workspace.state_hash() if applied else None,
            applied=applied,
        )
        self._entries_by_suggestion[f"chat-{self.report.steps}"] = entry
        if response["kind"] == "error":
            return

    def _do_invalid_capture(self, action):
        self._send("capture-request", {"snapshot_id": "snap-missing", "node_id": 99})


def replay_task(task: BenchmarkTask, provider=None, out_dir: str | Path | None = None,
                config: EngineConfig | None = None,
                step_budget: int = 600) -> RunReport:
    replayer = TaskReplayer(task, provider, config, step_budget)
    report = replayer.run(ScriptedUser(task.driver_script))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
        with open(out / "guidance.jsonl", "w") as handle:
            for entry in report.guidance:
                handle.write(json.dumps(entry.to_json()) + "\n")
        (out / "workspace.json").write_text(replayer.session.workspace.serialize() + "\n")
        replayer.session.persist(out / "session.json")
    return report
