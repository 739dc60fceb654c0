"""Exception hierarchy for the workbench engine.

Every error raised by the engine derives from EngineError so service
boundaries can convert failures into structured protocol error frames
without catching bare Exception.
"""


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "engine-error"

    def to_payload(self) -> dict:
        return {"code": self.code, "message": str(self)}


# --- workspace ---

class DuplicateId(EngineError):
    code = "duplicate-id"


class StaleBase(EngineError):
    code = "stale-base"


class NothingToUndo(EngineError):
    code = "nothing-to-undo"


class NothingToRedo(EngineError):
    code = "nothing-to-redo"


# --- tools / transforms ---

class ValidationError(EngineError):
    code = "validation-error"


class UnknownColumn(ValidationError):
    code = "unknown-column"


class TypeMismatch(ValidationError):
    code = "type-mismatch"


class BadArgument(ValidationError):
    code = "bad-argument"


class UnknownTool(ValidationError):
    code = "unknown-tool"


class UnknownInstance(ValidationError):
    code = "unknown-instance"


class FormulaParseError(ValidationError):
    code = "formula-parse-error"


class JoinTypeMismatch(ValidationError):
    code = "join-type-mismatch"


class NoNonMissingValues(ValidationError):
    code = "no-non-missing-values"


# --- extraction ---

class EmptyDocument(EngineError):
    code = "empty-document"


class UnknownSnapshot(EngineError):
    code = "unknown-snapshot"


class UnknownNode(EngineError):
    code = "unknown-node"


class NoCommonPattern(EngineError):
    code = "no-common-pattern"


class SourceGone(EngineError):
    code = "source-gone"


# --- pattern inference ---

class ConflictingExamples(EngineError):
    code = "conflicting-examples"


# --- guidance ---

class ClockRegression(EngineError):
    code = "clock-regression"


class StaleSuggestion(EngineError):
    code = "stale-suggestion"


class UnknownSuggestion(EngineError):
    code = "unknown-suggestion"


class PlanFailure(EngineError):
    """A composite plan failed at a step; the workspace was rolled back."""

    code = "plan-failure"

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"plan failed at step {step}: {cause}")
        self.step = step
        self.cause = cause

    def to_payload(self) -> dict:
        payload = super().to_payload()
        payload["step"] = self.step
        return payload


# --- provider / gateway ---

class ParseError(EngineError):
    code = "parse-error"

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class ProviderError(EngineError):
    code = "provider-error"


class ProviderTimeout(ProviderError):
    code = "provider-timeout"


# --- session / protocol ---

class MentionError(EngineError):
    code = "mention-error"

    def __init__(self, message: str, candidates: list[str] | None = None):
        super().__init__(message)
        self.candidates = candidates or []

    def to_payload(self) -> dict:
        payload = super().to_payload()
        payload["candidates"] = self.candidates
        return payload


class FrameTooLarge(EngineError):
    code = "frame-too-large"


class ProtocolVersionMismatch(EngineError):
    code = "version-mismatch"


class PersistError(EngineError):
    code = "persist-error"


# --- harness ---

class TaskTimeout(EngineError):
    code = "task-timeout"


class BenchmarkError(EngineError):
    code = "benchmark-error"
