"""Wire protocol between the engine and UI / replay drivers.

Frames are length-prefixed, newline-delimited JSON: an ASCII decimal byte
length, a newline, the payload, a newline. Every message is
{"kind", "seq", "body"}; seq increases strictly per direction. Unknown or
malformed frames are answered with an error frame, never dropped silently.
Field-by-field message documentation lives in docs/protocol.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .catalog import ToolCall
from .errors import (EngineError, FrameTooLarge, MentionError,
                     ProtocolVersionMismatch)
from .instances import SourceRef, canonical_json

PROTOCOL_VERSION = 1

REQUEST_RESPONSE = {
    "hello": "state-sync",
    "state-sync": "state-sync",
    "event": "state-sync",
    "apply-suggestion": "state-sync",
    "chat-send": "chat-response",
    "capture-request": "capture-result",
    "trace-request": "trace-result",
}

KINDS = tuple(REQUEST_RESPONSE) + ("suggestion-push", "chat-response",
                                   "capture-result", "trace-result", "error")


def encode_frame(message: dict, max_bytes: int = 4 * 1024 * 1024) -> bytes:
    payload = canonical_json(message).encode("utf-8")
    if len(payload) > max_bytes:
        raise FrameTooLarge(f"frame of {len(payload)} bytes exceeds {max_bytes}")
    return str(len(payload)).encode("ascii") + b"\n" + payload + b"\n"


def read_frame(stream, max_bytes: int = 4 * 1024 * 1024) -> dict | None:
    """Read one frame from a binary stream; None at EOF."""
    header = stream.readline()
    if not header:
        return None
    try:
        length = int(header.strip())
    except ValueError:
        raise EngineError(f"bad frame header {header[:32]!r}")
    if length < 0 or length > max_bytes:
        raise FrameTooLarge(f"declared frame length {length}")
    payload = stream.read(length)
    if len(payload) != length:
        raise EngineError("truncated frame")
    stream.readline()   # trailing newline
    try:
        return json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise EngineError(f"bad frame payload: {exc}")


@dataclass
class FrameStats:
    handled: int = 0
    errors: int = 0


class ProtocolServer:
    """Session-facing frame handler; transport loops call handle_frame."""

    def __init__(self, session):
        self.session = session
        self.server_seq = 0
        self.last_client_seq = 0
        self.hello_done = False
        self.closed = False
        self.stats = FrameStats()
        self._published_ids: list[str] = []

    # --- frame plumbing ---

    def _next_seq(self) -> int:
        self.server_seq += 1
        return self.server_seq

    def _message(self, kind: str, body: dict) -> dict:
        return {"kind": kind, "seq": self._next_seq(), "body": body}

    def _error(self, code: str, message: str, extra: dict | None = None) -> dict:
        body = {"code": code, "message": message}
        if extra:
            body.update(extra)
        self.stats.errors += 1
        return self._message("error", body)

    def _state_sync(self, mode: str = "full") -> dict:
        ws = self.session.workspace
        body = {
            "mode": mode,
            "version_id": ws.current_version_id,
            "state_hash": ws.state_hash(),
        }
        if mode == "full":
            body["workspace"] = json.loads(ws.serialize())
            body["title"] = ws.title
            # charts render from engine-produced declarative specs
            specs = {}
            for inst in ws.current.instances.values():
                if inst.kind != "visualization" or not inst.valid:
                    continue
                source = ws.current.instances.get(inst.source_instance_id)
                if source is not None and source.kind == "table":
                    specs[inst.id] = inst.to_chart_spec(source)
            if specs:
                body["chart_specs"] = specs
        return self._message("state-sync", body)

    def _suggestion_pushes(self) -> list[dict]:
        """Push a frame whenever the published peripheral list changed."""
        published = self.session.guidance.peripheral_order
        frames = []
        if published != self._published_ids:
            self._published_ids = list(published)
            suggestions = [self.session.guidance.suggestions[sid].to_json()
                           for sid in published]
            micro = [s.to_json() for s in self.session.guidance.active_micro()]
            frames.append(self._message("suggestion-push", {
                "peripheral": suggestions, "in_situ": micro}))
        else:
            micro = [s.to_json() for s in self.session.guidance.active_micro()]
            if micro:
                frames.append(self._message("suggestion-push", {
                    "peripheral": [self.session.guidance.suggestions[sid].to_json()
                                   for sid in published],
                    "in_situ": micro}))
        return frames

    # --- dispatch ---

    def handle_frame(self, message: dict) -> list[dict]:
        self.stats.handled += 1
        if self.closed:
            return [self._error("closed", "connection is closed")]
        if not isinstance(message, dict):
            return [self._error("bad-frame", "frame body must be an object")]
        kind = message.get("kind")
        seq = message.get("seq")
        if not isinstance(seq, int) or seq <= self.last_client_seq:
            return [self._error("bad-seq",
                                f"seq must increase (last {self.last_client_seq})")]
        self.last_client_seq = seq
        body = message.get("body")
        if not isinstance(body, dict):
            return [self._error("bad-frame", "missing body object")]
        if kind not in REQUEST_RESPONSE:
            return [self._error("unknown-kind", f"unknown message kind {kind!r}")]
        if not self.hello_done and kind != "hello":
            return [self._error("no-hello", "hello must be the first message")]
        handler = getattr(self, "_on_" + kind.replace("-", "_"))
        try:
            return handler(body)
        except MentionError as exc:
            return [self._error(exc.code, str(exc), {"candidates": exc.candidates})]
        except ProtocolVersionMismatch as exc:
            self.closed = True
            return [self._error(exc.code, str(exc))]
        except EngineError as exc:
            return [self._error(exc.code, str(exc))]
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            # malformed body shapes answer with an error, never a crash
            return [self._error("bad-frame", f"{type(exc).__name__}: {exc}")]

    # --- handlers ---

    def _on_hello(self, body: dict) -> list[dict]:
        version = body.get("protocol_version")
        if version != PROTOCOL_VERSION:
            raise ProtocolVersionMismatch(
                f"protocol version {version!r} is not {PROTOCOL_VERSION}")
        self.hello_done = True
        return [self._state_sync("full")]

    def _on_state_sync(self, body: dict) -> list[dict]:
        return [self._state_sync("full")]

    def _on_event(self, body: dict) -> list[dict]:
        if "focus" in body:
            focus = body["focus"]
            self.session.set_focus(focus.get("view", "canvas"),
                                   focus.get("instance_id"),
                                   focus.get("tab_url"))
        if "ingest" in body:
            record = body["ingest"]
            self.session.ingest(record["html"], record["url"])
        mutated = False
        report = None
        if "mutation" in body:
            call = ToolCall.from_json(body["mutation"])
            base = body.get("base_version",
                            self.session.workspace.current_version_id)
            _, report = self.session.apply_call(call, base)
            mutated = True
        if "event" in body:
            record = body["event"]
            self.session.record_event(
                record["kind"], record.get("payload", {}),
                record.get("major", True), record.get("timestamp"))
            if record["kind"] == "suggestion-dismissed":
                sid = record.get("payload", {}).get("suggestion_id")
                if sid in self.session.guidance.suggestions:
                    self.session.guidance.dismiss(sid)
        self.session.tick()
        sync = self._state_sync("delta" if mutated else "ack")
        if report:
            sync["body"]["report"] = report   # conversion/replacement counts
        responses = [sync]
        responses.extend(self._suggestion_pushes())
        return responses

    def _on_apply_suggestion(self, body: dict) -> list[dict]:
        suggestion_id = body.get("suggestion_id", "")
        fail_at = body.get("fail_at_step")
        self.session.apply_suggestion(suggestion_id, fail_at)
        responses = [self._state_sync("delta")]
        responses.extend(self._suggestion_pushes())
        return responses

    def _on_chat_send(self, body: dict) -> list[dict]:
        message = self.session.handle_chat(body.get("text", ""))
        response = self._message("chat-response", {
            "message": message.to_json(),
            "version_id": self.session.workspace.current_version_id,
            "state_hash": self.session.workspace.state_hash(),
        })
        return [response] + self._suggestion_pushes()

    def _on_capture_request(self, body: dict) -> list[dict]:
        if "html" in body:
            snapshot = self.session.ingest(body["html"], body.get("url", ""))
            snapshot_id = snapshot.snapshot_id
        else:
            snapshot_id = body["snapshot_id"]
        cell, ref = self.session.capture(snapshot_id, body["node_id"])
        return [self._message("capture-result", {
            "cell": cell.to_json(), "source_ref": ref.to_json()})]

    def _on_trace_request(self, body: dict) -> list[dict]:
        ref = SourceRef.from_json(body["source_ref"])
        result = self.session.trace(ref)
        return [self._message("trace-result", {
            "snapshot_id": result.snapshot_id, "node_id": result.node_id,
            "stale": result.stale})]


def serve(session, transport, max_bytes: int | None = None) -> FrameStats:
    """Run a frame loop over a bidirectional binary stream until EOF.

    Malformed frames produce error frames; an unrecoverable stream (bad
    length header) closes this connection but never the process.
    """
    server = ProtocolServer(session)
    limit = max_bytes or session.config.max_frame_bytes
    while True:
        try:
            message = read_frame(transport, limit)
        except EngineError as exc:
            transport.write(encode_frame(
                {"kind": "error", "seq": server._next_seq(),
                 "body": {"code": exc.code, "message": str(exc)}}, limit))
            _flush(transport)
            if not isinstance(exc, FrameTooLarge):
                break    # framing is lost; close this connection
            continue
        if message is None:
            break
        for response in server.handle_frame(message):
            transport.write(encode_frame(response, limit))
        _flush(transport)
        if server.closed:
            break
    return server.stats


def _flush(transport) -> None:
    flush = getattr(transport, "flush", None)
    if flush is not None:
        flush()


class LoopbackTransport:
    """In-memory duplex pipe: the driver feeds inbound bytes, the server
    reads them and writes its responses to a separate outbound buffer."""

    def __init__(self):
        self._inbound = bytearray()
        self._read_pos = 0
        self._outbound = bytearray()

    def feed(self, data: bytes) -> None:
        self._inbound.extend(data)

    def write(self, data: bytes) -> None:
        self._outbound.extend(data)

    def read(self, count: int) -> bytes:
        end = min(self._read_pos + count, len(self._inbound))
        data = bytes(self._inbound[self._read_pos:end])
        self._read_pos = end
        return data

    def readline(self) -> bytes:
        newline = self._inbound.find(b"\n", self._read_pos)
        if newline < 0:
            data = bytes(self._inbound[self._read_pos:])
            self._read_pos = len(self._inbound)
            return data
        data = bytes(self._inbound[self._read_pos:newline + 1])
        self._read_pos = newline + 1
        return data

    def drain_frames(self, max_bytes: int = 4 * 1024 * 1024) -> list[dict]:
        """Parse and clear everything the server wrote."""
        import io
        stream = io.BytesIO(bytes(self._outbound))
        self._outbound.clear()
        frames = []
        while True:
            frame = read_frame(stream, max_bytes)
            if frame is None:
                break
            frames.append(frame)
        return frames


class ProtocolClient:
    """Minimal driver-side client over a ProtocolServer (in process)."""

    def __init__(self, session):
        self.server = ProtocolServer(session)
        self.client_seq = 0
        self.pushes: list[dict] = []

    def send(self, kind: str, body: dict) -> dict:
        self.client_seq += 1
        responses = self.server.handle_frame(
            {"kind": kind, "seq": self.client_seq, "body": body})
        direct = responses[0]
        for extra in responses[1:]:
            self.pushes.append(extra)
        return direct

    def hello(self) -> dict:
        return self.send("hello", {"protocol_version": PROTOCOL_VERSION})
