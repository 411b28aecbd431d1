"""Exception hierarchy shared across the package.

Every error carries a machine-readable ``code`` that the HTTP layer maps
onto the ``{"error": {"code", "message"}}`` envelope.
"""


class AssistantError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- ingestion ---

class MalformedRowError(AssistantError):
    code = "malformed-row"


class DuplicateKeyError(AssistantError):
    code = "duplicate-key"


class NegativeQuantityError(AssistantError):
    code = "negative-quantity"


class CommittedExceedsCapacityError(AssistantError):
    code = "committed-exceeds-capacity"


class InfeasibleParametersError(AssistantError):
    code = "infeasible-parameters"


# --- forecasting ---

class InsufficientHistoryError(AssistantError):
    code = "insufficient-history"


class InsufficientDataError(AssistantError):
    code = "insufficient-data"


class DegenerateDesignError(AssistantError):
    code = "degenerate-design"


class DimensionMismatchError(AssistantError):
    code = "dimension-mismatch"


# --- explainer ---

class DegenerateFitError(AssistantError):
    code = "degenerate-fit"


# --- knowledge graph ---

class DuplicateEntityError(AssistantError):
    code = "duplicate-entity"


class UnknownEntityError(AssistantError):
    code = "unknown-entity"


class SchemaViolationError(AssistantError):
    code = "schema-violation"


class CardinalityViolationError(AssistantError):
    code = "cardinality-violation"


class CycleDetectedError(AssistantError):
    code = "cycle-detected"


class OptionNotInSnapshotError(AssistantError):
    code = "option-not-in-snapshot"


class OrphanNodeError(AssistantError):
    code = "orphan-node"


class NoBindingError(AssistantError):
    code = "no-binding"


# --- recommender ---

class AlreadySelectedError(AssistantError):
    code = "already-selected"


class CapacityExceededError(AssistantError):
    code = "capacity-exceeded"


# --- feedback ---

class UnknownTargetError(AssistantError):
    code = "unknown-target"


class SessionClosedError(AssistantError):
    code = "session-closed"


class InvalidPayloadError(AssistantError):
    code = "invalid-payload"


class NoSelectionYetError(AssistantError):
    code = "no-selection-yet"


# --- service ---

class UnknownMaterialError(AssistantError):
    code = "unknown-material"


class UnknownSessionError(AssistantError):
    code = "unknown-session"


class NoModelError(AssistantError):
    code = "no-model"


class NoModelsError(AssistantError):
    code = "no-models"
