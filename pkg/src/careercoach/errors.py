"""Error taxonomy shared by every module.

Each error carries a stable machine-readable ``code`` so the HTTP layer
(and the CLI) can map failures onto responses without string matching.
Details that matter to callers (chunk index, violation lists, last raw
model output) travel in ``detail``.
"""

from __future__ import annotations

from typing import Any


class CoachError(Exception):
    """Base class for all domain errors."""

    code = "internal"

    def __init__(self, message: str = "", **detail: Any):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail


# --- model gateway ---------------------------------------------------------

class SchemaViolation(CoachError):
    """Model output never validated against the required schema."""
    code = "schema_violation"


class ProviderUnavailable(CoachError):
    """The model provider could not be reached or had no scripted answer."""
    code = "provider_unavailable"


class DuplicateProvider(CoachError):
    """A provider with this id is already registered."""
    code = "duplicate_provider"


# --- embeddings ------------------------------------------------------------

class EmbedderUnavailable(CoachError):
    """The embedding service could not be reached."""
    code = "embedder_unavailable"


class EmptyText(CoachError):
    """Input text is empty after trimming."""
    code = "empty_text"


class DimensionMismatch(CoachError):
    """Vector dimensions disagree."""
    code = "dimension_mismatch"


# --- resume ingest ---------------------------------------------------------

class UnreadableDocument(CoachError):
    """Upload could not be decoded (corrupt or encrypted)."""
    code = "unreadable_document"


class EmptyDocument(CoachError):
    """Upload contained no extractable text."""
    code = "empty_document"


class ConflictingIdentity(CoachError):
    """Partial extractions disagree on the candidate's name."""
    code = "conflicting_identity"


# --- career tree -----------------------------------------------------------

class InvalidTree(CoachError):
    """Career tree document violates its invariants.

    ``detail["violations"]`` lists ``{"code": ..., ...}`` entries with codes
    ``duplicate``, ``dangling``, ``cycle``, ``empty_roots``, ``self_edge``,
    ``unreachable``, ``invalid_document``.
    """
    code = "invalid_tree"


class UnmappableRole(CoachError):
    """No tree node is similar enough to the candidate's current role."""
    code = "unmappable_role"


class NoExperience(CoachError):
    """Resume has no experience entries to map from."""
    code = "no_experience"


class UnknownNode(CoachError):
    """Referenced node id does not exist in the tree."""
    code = "unknown_node"


# --- skills ----------------------------------------------------------------

class MissingBenchmarks(CoachError):
    """A target role has no skill requirements configured."""
    code = "missing_benchmarks"


# --- courses ---------------------------------------------------------------

class MalformedCsv(CoachError):
    """Course CSV is missing a required column or has a bad row."""
    code = "malformed_csv"


class EmptyCollection(CoachError):
    """Vector collection has no entries to search."""
    code = "empty_collection"


class NoGaps(CoachError):
    """Skill report has no gaps; there is nothing to query for."""
    code = "no_gaps"


# --- coaching sessions -----------------------------------------------------

class UnknownQuestion(CoachError):
    """Answer refers to a question id not present in the session."""
    code = "unknown_question"


# --- profile store ---------------------------------------------------------

class StorageUnavailable(CoachError):
    """Backing store could not be read or written."""
    code = "storage_unavailable"


class UnknownProfile(CoachError):
    """No profile with this id."""
    code = "unknown_profile"


class UnknownCourse(CoachError):
    """Course was never recommended to this profile."""
    code = "unknown_course"


class IllegalTransition(CoachError):
    """Requested course status change is not allowed."""
    code = "illegal_transition"
