"""Error types shared by every layer.

Each error carries a stable machine-readable ``code`` (the closed set the
HTTP layer exposes) and an optional ``field`` naming the offending input.
"""

from __future__ import annotations


class CampusNotifyError(Exception):
    """Base class for all service errors."""

    code = "invalid_request"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.message = message
        self.field = field


class InvalidRequest(CampusNotifyError):
    code = "invalid_request"


class MalformedEvent(InvalidRequest):
    """A tag-detection event that fails structural validation."""


class ExpiryParseError(InvalidRequest):
    """Expiry text that does not parse; ``field`` names the bad component."""

    def __init__(self, field: str, message: str):
        super().__init__(message, field=field)


class NotFound(CampusNotifyError):
    code = "not_found"


class ExpiryInPast(CampusNotifyError):
    code = "expiry_in_past"


class InvalidTargeting(CampusNotifyError):
    code = "invalid_targeting"


class UnknownReader(CampusNotifyError):
    code = "unknown_reader"


class UnknownTag(CampusNotifyError):
    code = "unknown_tag"


class ClockSkew(CampusNotifyError):
    code = "clock_skew"


class InvalidQuery(CampusNotifyError):
    code = "invalid_query"


class ScriptError(CampusNotifyError):
    """Scenario script failed validation; never reaches the HTTP layer."""

    code = "script_error"
