"""Plan-provider gateway.

Assembles the five-part prompt context (page html, instance state, user
focus, conversation, recent interactions), talks to a pluggable provider,
and parses/validates the returned tool-call plan against the catalog. The
scripted provider answers from fixture files keyed by a fingerprint of
(intent, instance schemas), which makes whole-system replays
bit-deterministic.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .catalog import check_signature, make_call, referenced_instance_ids
from .errors import ParseError, ProviderError, ProviderTimeout
from .instances import canonical_json
from .suggestions import ToolPlan

INVALID_ACTION_MARKER = "[INVALID ACTION]"


@dataclass(frozen=True)
class ContextBundle:
    """Exactly the five context kinds every provider request carries."""

    html_context: tuple[dict, ...]        # {url, content_hash, html | digest}
    instance_context: tuple[dict, ...]    # serialized instances
    user_focus: dict                      # {view, instance_id, tab_url}
    conversation_history: tuple[dict, ...]
    interaction_history: tuple[str, ...]  # rendered events + injected markers

    def to_json(self) -> dict:
        return {
            "html_context": list(self.html_context),
            "instance_context": list(self.instance_context),
            "user_focus": self.user_focus,
            "conversation_history": list(self.conversation_history),
            "interaction_history": list(self.interaction_history),
        }

    def size(self) -> int:
        return len(canonical_json(self.to_json()))


def assemble_context(store, version, focus, conversation, event_log,
                     html_budget: int = 20000, extra_markers: tuple[str, ...] = ()
                     ) -> ContextBundle:
    """Deterministic context assembly; oversize documents are digested."""
    html_context = []
    for snapshot in store.all_snapshots():
        entry = {"url": snapshot.url, "content_hash": snapshot.content_hash}
        if len(snapshot.html) <= html_budget:
            entry["html"] = snapshot.html
        else:
            entry["digest"] = snapshot.content_hash
            entry["text"] = snapshot.dom.root.text_content()[:html_budget]
        html_context.append(entry)
    instance_context = [inst.to_json()
                        for inst in sorted(version.instances.values(),
                                           key=lambda i: i.id)]
    history = tuple(e.describe() for e in event_log.context_slice()) + tuple(extra_markers)
    return ContextBundle(
        html_context=tuple(html_context),
        instance_context=tuple(instance_context),
        user_focus=focus.to_json() if hasattr(focus, "to_json") else dict(focus),
        conversation_history=tuple(conversation),
        interaction_history=history,
    )


def workspace_fingerprint(version, intent: str) -> str:
    """Hash of instance schemas plus the intent; cosmetic state is excluded
    so fixtures stay valid across row edits."""
    schemas = []
    for inst in sorted(version.instances.values(), key=lambda i: i.id):
        if inst.kind == "table":
            schemas.append({"id": inst.id,
                            "columns": [[c.name, c.declared_type] for c in inst.columns]})
        else:
            schemas.append({"id": inst.id, "chart": inst.chart_type,
                            "encodings": [[ch, col] for ch, col in inst.encodings]})
    key = canonical_json({"intent": intent, "schemas": schemas})
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass
class ProviderResponse:
    raw_text: str
    parsed: ToolPlan | None = None
    parse_error: str | None = None
    confidence: float = 0.5
    description: str = ""


_FENCED = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def parse_tool_calls(raw_text: str) -> ToolPlan:
    """Extract the structured tool-call plan from a provider response.

    Accepts prose around exactly one fenced JSON block (or a bare JSON
    array); rejects multiple plans, unknown tools, and malformed payloads.
    Never raises anything but ParseError.
    """
    if not isinstance(raw_text, str) or not raw_text.strip():
        raise ParseError("empty-response")
    blocks = _FENCED.findall(raw_text)
    if len(blocks) > 1:
        raise ParseError("multiple-plans", f"{len(blocks)} fenced blocks")
    candidate = blocks[0] if blocks else raw_text
    try:
        payload = json.loads(candidate)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ParseError("invalid-json", str(exc)) from None
    if isinstance(payload, dict) and "steps" in payload:
        payload = payload["steps"]
    if not isinstance(payload, list) or not payload:
        raise ParseError("not-a-plan", "expected a non-empty tool-call array")
    calls = []
    for i, step in enumerate(payload):
        if not isinstance(step, dict):
            raise ParseError("bad-step", f"step {i} is not an object")
        tool = step.get("tool") or step.get("tool_name") or step.get("name")
        if not isinstance(tool, str):
            raise ParseError("bad-step", f"step {i} has no tool name")
        args = step.get("args", {})
        if not isinstance(args, dict):
            raise ParseError("bad-step", f"step {i} args is not an object")
        call = make_call(tool, args, step.get("call_id"))
        try:
            check_signature(call)
        except Exception as exc:
            reason = "unknown-tool" if tool not in _catalog_names() else "bad-args"
            raise ParseError(reason, str(exc)) from None
        calls.append(call)
    return ToolPlan(tuple(calls))


def _catalog_names():
    from .catalog import SIGNATURES
    return SIGNATURES


def validate_plan_references(plan: ToolPlan, version) -> None:
    for call in plan.steps:
        for ref in referenced_instance_ids(call):
            if ref not in version.instances:
                raise ParseError("unknown-instance",
                                 f"{call.tool_name} references {ref!r}")


class ScriptedProvider:
    """Deterministic provider answering from fixtures.

    Fixture files map fingerprints (and optionally bare intents, as a
    fallback) to canned responses: {"<fingerprint>": {"response": ...,
    "confidence": ..., "description": ...}, "by_intent": {...}}.
    """

    kind = "scripted"

    def __init__(self, fixtures: dict | None = None):
        self.fixtures = dict(fixtures or {})
        self.by_intent = dict(self.fixtures.pop("by_intent", {}))
        self.calls: list[str] = []

    @staticmethod
    def from_file(path: str | Path) -> "ScriptedProvider":
        return ScriptedProvider(json.loads(Path(path).read_text()))

    def add_fixture(self, fingerprint: str, response: str,
                    confidence: float = 0.9, description: str = "") -> None:
        self.fixtures[fingerprint] = {"response": response,
                                      "confidence": confidence,
                                      "description": description}

    def add_intent_fixture(self, intent: str, response: str,
                           confidence: float = 0.9, description: str = "") -> None:
        self.by_intent[intent] = {"response": response,
                                  "confidence": confidence,
                                  "description": description}

    def request(self, bundle: ContextBundle, intent: str, fingerprint: str) -> ProviderResponse:
        self.calls.append(fingerprint)
        entry = self.fixtures.get(fingerprint) or self.by_intent.get(intent)
        if entry is None:
            raise ProviderError(f"no fixture for intent {intent!r} "
                                f"(fingerprint {fingerprint})")
        if isinstance(entry, list):
            # a fixture may stage multiple responses (bad-then-good retries)
            if not entry:
                raise ProviderError("fixture sequence exhausted")
            record = entry.pop(0)
        else:
            record = entry
        return ProviderResponse(raw_text=record["response"],
                                confidence=record.get("confidence", 0.9),
                                description=record.get("description", ""))


class LiveProvider:
    """HTTP provider shell. The endpoint, model, and key come from config /
    the environment; the transport is injectable so tests never hit the
    network."""

    kind = "live"
    API_KEY_ENV = "WORKBENCH_LLM_API_KEY"

    def __init__(self, endpoint: str = "", model: str = "",
                 timeout_ms: float = 20000.0, api_key: str | None = None,
                 post=None):
        import os
        self.endpoint = endpoint
        self.model = model
        self.timeout_ms = timeout_ms
        self.api_key = api_key if api_key is not None else os.environ.get(self.API_KEY_ENV)
        self._post = post or self._default_post

    def _default_post(self, url, payload, timeout_s):
        import urllib.error
        import urllib.request
        request = urllib.request.Request(
            url, data=json.dumps(payload).encode("utf-8"),
            headers={"Content-Type": "application/json",
                     "Authorization": f"Bearer {self.api_key}"})
        try:
            with urllib.request.urlopen(request, timeout=timeout_s) as response:
                return response.read().decode("utf-8")
        except urllib.error.URLError as exc:
            if isinstance(getattr(exc, "reason", None), TimeoutError) or \
                    "timed out" in str(exc).lower():
                raise TimeoutError(str(exc)) from exc
            raise ProviderError(str(exc)) from exc

    def request(self, bundle: ContextBundle, intent: str, fingerprint: str) -> ProviderResponse:
        if not self.endpoint or not self.api_key:
            raise ProviderError("live provider is not configured "
                                f"(endpoint and ${self.API_KEY_ENV} required)")
        payload = {"model": self.model, "intent": intent,
                   "context": bundle.to_json()}
        last_error = None
        for _ in range(2):        # one retry on transient failure
            try:
                text = self._post(self.endpoint, payload, self.timeout_ms / 1000.0)
                return ProviderResponse(raw_text=text)
            except TimeoutError as exc:
                last_error = ProviderTimeout(str(exc))
            except ProviderError as exc:
                last_error = exc
        raise last_error


def make_provider(config: dict):
    """Build a provider from the config block {kind, endpoint, model,
    timeout_ms, max_retries, fixtures}."""
    kind = config.get("kind", "scripted")
    if kind == "scripted":
        fixtures = config.get("fixtures")
        if fixtures:
            return ScriptedProvider.from_file(fixtures)
        return ScriptedProvider()
    if kind == "live":
        return LiveProvider(endpoint=config.get("endpoint", ""),
                            model=config.get("model", ""),
                            timeout_ms=config.get("timeout_ms", 20000.0))
    raise ProviderError(f"unknown provider kind {kind!r}")


class PlanGateway:
    """Request/parse/validate loop with the invalid-action retry protocol."""

    def __init__(self, provider, config=None):
        self.provider = provider
        self.config = config
        self.invalid_markers: list[str] = []

    @property
    def max_retries(self) -> int:
        return getattr(self.config, "provider_max_retries", 2)

    def request_plan(self, bundle: ContextBundle, intent: str, version) -> ProviderResponse:
        fingerprint = workspace_fingerprint(version, intent)
        response = self.provider.request(bundle, intent, fingerprint)
        try:
            plan = parse_tool_calls(response.raw_text)
            validate_plan_references(plan, version)
            response.parsed = plan
        except ParseError as exc:
            response.parse_error = str(exc)
        return response

    def request_plan_with_retry(self, make_bundle, intent: str, version) -> ProviderResponse:
        """`make_bundle(markers)` rebuilds context with the warning markers
        appended to the interaction history after each invalid response."""
        markers: list[str] = []
        response = self.request_plan(make_bundle(tuple(markers)), intent, version)
        retries = 0
        while response.parsed is None and retries < self.max_retries:
            markers.append(INVALID_ACTION_MARKER)
            self.invalid_markers.append(intent)
            retries += 1
            response = self.request_plan(make_bundle(tuple(markers)), intent, version)
        return response


class TriggerPlanner:
    """Adapter giving the guidance engine provider-backed macro plans."""

    def __init__(self, gateway: PlanGateway, make_bundle):
        self.gateway = gateway
        self.make_bundle = make_bundle

    def plan_for_trigger(self, rule: str, payload: dict, version):
        response = self.gateway.request_plan_with_retry(
            lambda markers: self.make_bundle(markers), rule, version)
        if response.parsed is None:
            raise ProviderError(response.parse_error or "no plan produced")
        description = response.description or f"Suggested plan for {rule}"
        return response.parsed, response.confidence, description
