"""Engine configuration with documented defaults.

All tunables live here so deterministic replays can pin them; the rule
confidence table gives template (non-LLM) plans a stable display order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_RULE_CONFIDENCE = {
    "webpage-suggestion": 0.6,
    "element-selection": 0.7,
    "schema-inference": 0.75,
    "batch-extraction": 0.9,
    "autocomplete": 0.85,
    "computed-columns": 0.5,
    "sorting-filtering-rule": 0.3,
    "joining-tables": 0.8,
    "entity-resolution": 0.7,
    "remove-extraneous": 0.75,
    "fill-missing": 0.6,
    "type-correction": 0.65,
    "auto-viz": 0.55,
    "alternative-chart": 0.45,
    "interactive-filter": 0.4,
}


DEFAULT_PROVIDER = {
    "kind": "scripted",        # scripted | live
    "endpoint": "",
    "model": "",
    "timeout_ms": 20000.0,
    "max_retries": 2,
    "fixtures": "",            # fixture file for the scripted provider
}


@dataclass
class EngineConfig:
    idle_threshold_ms: float = 5000.0
    context_event_cap: int = 15
    ghost_rows_per_round: int = 5
    missing_cell_threshold: int = 3      # "several" missing cells for fill-missing
    provider_max_retries: int = 2
    provider_timeout_ms: float = 20000.0
    context_html_budget: int = 20000     # chars per document before digesting
    max_frame_bytes: int = 4 * 1024 * 1024
    rule_confidence: dict = field(default_factory=lambda: dict(DEFAULT_RULE_CONFIDENCE))
    provider: dict = field(default_factory=lambda: dict(DEFAULT_PROVIDER))

    @staticmethod
    def load(path: str | Path) -> "EngineConfig":
        data = json.loads(Path(path).read_text())
        config = EngineConfig()
        for key, value in data.items():
            if not hasattr(config, key):
                raise KeyError(f"unknown config key {key!r}")
            if key in ("rule_confidence", "provider"):
                getattr(config, key).update(value)
            else:
                setattr(config, key, value)
        return config

    def dump(self, path: str | Path) -> None:
        record = {
            "idle_threshold_ms": self.idle_threshold_ms,
            "context_event_cap": self.context_event_cap,
            "ghost_rows_per_round": self.ghost_rows_per_round,
            "missing_cell_threshold": self.missing_cell_threshold,
            "provider_max_retries": self.provider_max_retries,
            "provider_timeout_ms": self.provider_timeout_ms,
            "context_html_budget": self.context_html_budget,
            "max_frame_bytes": self.max_frame_bytes,
            "rule_confidence": self.rule_confidence,
            "provider": self.provider,
        }
        Path(path).write_text(json.dumps(record, indent=2) + "\n")
