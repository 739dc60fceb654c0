"""Versioned workspace of data instances.

The workspace is an event-sourced store: every mutation is a validated tool
call applied through a compare-and-swap guard, producing a new immutable
version. Undo moves the current pointer without discarding history, and
replaying the lineage from version 0 reproduces the current state exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import DuplicateId, NothingToRedo, NothingToUndo, StaleBase
from .instances import Instance, canonical_json, instance_from_json, sanitize_id


def _stamp_lineage(old: dict[str, Instance], new: dict[str, Instance],
                   version_id: int, call_id: str) -> dict[str, Instance]:
    """Append a lineage entry to every instance the call replaced.

    Freshly created instances start with an empty lineage; the version
    graph's tool_call record still captures the creating call for replay.
    """
    stamped = {}
    for iid, inst in new.items():
        if iid in old and inst is not old[iid]:
            inst = inst.with_lineage(version_id, call_id)
        stamped[iid] = inst
    return stamped


@dataclass(frozen=True)
class WorkspaceVersion:
    version_id: int
    parent_id: int | None
    instances: dict[str, Instance]  # never mutated after construction
    tool_call: dict | None = None   # the call that produced this version

    def instance(self, instance_id: str) -> Instance:
        return self.instances[instance_id]

    def serialize(self) -> str:
        """Canonical JSON of this version; identical state -> identical bytes."""
        ordered = sorted(self.instances.values(), key=lambda inst: inst.id)
        provenance = []
        for inst in ordered:
            if inst.kind == "table":
                provenance.extend(inst.provenance_records())
        lineage = []
        for inst in ordered:
            for version_id, call_id in inst.lineage:
                lineage.append({"instance_id": inst.id, "version_id": version_id, "call_id": call_id})
        lineage.sort(key=lambda e: (e["version_id"], e["instance_id"], e["call_id"]))
        doc = {
            "version_id": self.version_id,
            "instances": [inst.to_json() for inst in ordered],
            "lineage": lineage,
            "provenance": provenance,
        }
        return canonical_json(doc)

    def state_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()


class Workspace:
    """Single-writer version store with CAS application and undo/redo."""

    def __init__(self, title: str = ""):
        self.title = title
        root = WorkspaceVersion(0, None, {})
        self._versions: dict[int, WorkspaceVersion] = {0: root}
        self._path: list[int] = [0]   # applied path, cursor points into it
        self._cursor = 0
        self._next_id = 1
        self._plan_boundaries: list[tuple[int, int]] = []  # (pre_plan_vid, last_vid)

    # --- reads ---

    @property
    def current(self) -> WorkspaceVersion:
        return self._versions[self._path[self._cursor]]

    @property
    def current_version_id(self) -> int:
        return self._path[self._cursor]

    def version(self, version_id: int) -> WorkspaceVersion:
        return self._versions[version_id]

    def all_version_ids(self) -> list[int]:
        return sorted(self._versions)

    def serialize(self) -> str:
        return self.current.serialize()

    def state_hash(self) -> str:
        return self.current.state_hash()

    def generate_instance_id(self, name: str) -> str:
        """Engine-generated handle: sanitized name, numeric suffix on collision."""
        base = sanitize_id(name)
        if base not in self.current.instances:
            return base
        suffix = 2
        while f"{base}_{suffix}" in self.current.instances:
            suffix += 1
        return f"{base}_{suffix}"

    # --- writes (single logical writer) ---

    def _append(self, instances: dict[str, Instance], tool_call: dict | None) -> WorkspaceVersion:
        version = WorkspaceVersion(self._next_id, self.current_version_id, instances, tool_call)
        self._next_id += 1
        self._versions[version.version_id] = version
        del self._path[self._cursor + 1:]   # a new application drops the redo tail
        self._path.append(version.version_id)
        self._cursor += 1
        return version

    def create_instance(self, inst: Instance) -> WorkspaceVersion:
        if inst.id in self.current.instances:
            raise DuplicateId(f"instance id {inst.id!r} already exists")
        call = {"tool": "createInstance", "args": {"instance": inst.to_json()},
                "call_id": f"create-{inst.id}-{self._next_id}"}
        instances = dict(self.current.instances)
        instances[inst.id] = inst
        return self._append(instances, call)

    def apply_versioned(self, base_version_id: int, change, executor) -> WorkspaceVersion:
        """Compare-and-swap application of one validated tool call.

        `executor(version, change) -> dict[str, Instance]` computes the new
        instance map; it must not mutate the input version. Raises StaleBase
        without mutation when the base is no longer current.
        """
        if base_version_id != self.current_version_id:
            raise StaleBase(
                f"base {base_version_id} is not current {self.current_version_id}")
        new_instances = executor(self.current, change)
        stamped = _stamp_lineage(self.current.instances, new_instances,
                                 self._next_id, change.call_id)
        record = {"tool": change.tool_name, "args": change.args, "call_id": change.call_id}
        version = self._append(stamped, record)
        return version

    def apply_plan(self, base_version_id: int, changes, executor) -> list[WorkspaceVersion]:
        """Atomically apply an ordered list of tool calls.

        All steps are staged first; only if every step succeeds are versions
        committed (one per step) plus a plan boundary for whole-plan undo.
        Any failure leaves the workspace untouched.
        """
        from .errors import EngineError, PlanFailure

        if base_version_id != self.current_version_id:
            raise StaleBase(
                f"base {base_version_id} is not current {self.current_version_id}")
        staged = []
        scratch = self.current
        next_id = self._next_id
        for index, change in enumerate(changes):
            try:
                new_instances = executor(scratch, change)
            except EngineError as exc:
                raise PlanFailure(index, exc) from exc
            stamped = _stamp_lineage(scratch.instances, new_instances,
                                     next_id, change.call_id)
            record = {"tool": change.tool_name, "args": change.args, "call_id": change.call_id}
            scratch = WorkspaceVersion(next_id, scratch.version_id, stamped, record)
            staged.append(scratch)
            next_id += 1
        pre_plan = self.current_version_id
        versions = []
        for staged_version in staged:
            versions.append(self._append(staged_version.instances, staged_version.tool_call))
        if versions:
            self._plan_boundaries.append((pre_plan, versions[-1].version_id))
        return versions

    def undo(self) -> WorkspaceVersion:
        if self._cursor == 0:
            raise NothingToUndo("already at version 0")
        self._cursor -= 1
        return self.current

    def redo(self) -> WorkspaceVersion:
        if self._cursor == len(self._path) - 1:
            raise NothingToRedo("nothing to redo")
        self._cursor += 1
        return self.current

    def undo_last_plan(self) -> WorkspaceVersion:
        """Single-step undo of a whole composite plan via its boundary marker."""
        for pre_plan, last in reversed(self._plan_boundaries):
            if last == self.current_version_id and pre_plan in self._path:
                self._cursor = self._path.index(pre_plan)
                return self.current
        return self.undo()

    # --- replay / persistence ---

    def lineage_calls(self) -> list[dict]:
        """Tool calls along the path from version 0 to the current version."""
        calls = []
        vid = self.current_version_id
        while vid is not None:
            version = self._versions[vid]
            if version.tool_call is not None:
                calls.append(version.tool_call)
            vid = version.parent_id
        calls.reverse()
        return calls

    def to_json(self) -> dict:
        versions = []
        for vid in sorted(self._versions):
            v = self._versions[vid]
            ordered = sorted(v.instances.values(), key=lambda inst: inst.id)
            versions.append({
                "version_id": v.version_id,
                "parent_id": v.parent_id,
                "tool_call": v.tool_call,
                "instances": [inst.to_json() for inst in ordered],
                "provenance": [rec for inst in ordered if inst.kind == "table"
                               for rec in inst.provenance_records()],
            })
        return {
            "title": self.title,
            "versions": versions,
            "path": list(self._path),
            "cursor": self._cursor,
            "next_id": self._next_id,
            "plan_boundaries": [[a, b] for a, b in self._plan_boundaries],
        }

    @staticmethod
    def from_json(obj: dict) -> "Workspace":
        ws = Workspace(obj.get("title", ""))
        ws._versions = {}
        for vobj in obj["versions"]:
            instances = {}
            for iobj in vobj["instances"]:
                inst = instance_from_json(iobj, vobj.get("provenance", []))
                instances[inst.id] = inst
            ws._versions[vobj["version_id"]] = WorkspaceVersion(
                vobj["version_id"], vobj["parent_id"], instances, vobj.get("tool_call"))
        ws._path = list(obj["path"])
        ws._cursor = obj["cursor"]
        ws._next_id = obj["next_id"]
        ws._plan_boundaries = [(a, b) for a, b in obj.get("plan_boundaries", [])]
        return ws
