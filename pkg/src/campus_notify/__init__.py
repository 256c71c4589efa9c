"""Context-aware campus notification service.

Staff post notices with 12-hour expiries and one targeting ground (named
students, a course, or a preference broadcast, optionally scoped to a
building). RFID-style tag detections at registered readers assemble a
(time, identity, location) context, and an IF-THEN rule engine decides what
each kiosk shows.
"""

from .clock import Clock, PinnedClock, WallClock
from .context_model import (
    Context,
    ExpirySpec,
    Location,
    Meridiem,
    PreferenceCategory,
    StudentProfile,
    assemble_context,
    format_expiry,
    format_instant,
    normalize_name,
    parse_expiry,
    parse_instant,
    to_instant,
)
from .errors import (
    CampusNotifyError,
    ClockSkew,
    ExpiryInPast,
    ExpiryParseError,
    InvalidQuery,
    InvalidRequest,
    InvalidTargeting,
    MalformedEvent,
    NotFound,
    ScriptError,
    UnknownReader,
    UnknownTag,
)
from .gateway import (
    DisplayPayload,
    ReaderGateway,
    ScenarioReport,
    ScenarioScript,
    TagDetectionEvent,
    load_bundled_scenario,
    run_scenario,
    simulate_readers,
)
from .rule_engine import (
    Condition,
    MatchResult,
    Rule,
    compile_rule,
    evaluate,
    is_active,
    matches,
)
from .store import (
    FeedEntry,
    Notification,
    NotificationDraft,
    NotificationStore,
    SearchQuery,
    Targeting,
)

__version__ = "0.1.0"

__all__ = [
    "CampusNotifyError",
    "Clock",
    "ClockSkew",
    "Condition",
    "Context",
    "DisplayPayload",
    "ExpiryInPast",
    "ExpiryParseError",
    "ExpirySpec",
    "FeedEntry",
    "InvalidQuery",
    "InvalidRequest",
    "InvalidTargeting",
    "Location",
    "MalformedEvent",
    "MatchResult",
    "Meridiem",
    "NotFound",
    "Notification",
    "NotificationDraft",
    "NotificationStore",
    "PinnedClock",
    "PreferenceCategory",
    "ReaderGateway",
    "Rule",
    "ScenarioReport",
    "ScenarioScript",
    "ScriptError",
    "SearchQuery",
    "StudentProfile",
    "TagDetectionEvent",
    "Targeting",
    "UnknownReader",
    "UnknownTag",
    "WallClock",
    "assemble_context",
    "compile_rule",
    "evaluate",
    "format_expiry",
    "format_instant",
    "is_active",
    "load_bundled_scenario",
    "matches",
    "normalize_name",
    "parse_expiry",
    "parse_instant",
    "run_scenario",
    "simulate_readers",
    "to_instant",
]
