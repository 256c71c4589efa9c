"""Context vocabulary: who was detected, where, and when.

Every detection assembles a (timestamp, identity, location) triple from the
event plus the profile and reader registries. The 12-hour expiry form staff
type in also lives here, together with its conversion to the single UTC
instant domain all comparisons run in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import ExpiryParseError, InvalidRequest, UnknownReader, UnknownTag

if TYPE_CHECKING:
    from .gateway import TagDetectionEvent

_WS_RUN = re.compile(r"\s+")


def normalize_name(value: str) -> str:
    """Canonical form for building/venue/course comparison.

    Lowercases, trims, and maps internal whitespace runs to single
    underscores, so "Sports Complex" and "sports_complex" compare equal.
    """
    return _WS_RUN.sub("_", value.strip().lower())


class PreferenceCategory(Enum):
    """The five notification categories a student can subscribe to."""

    BOOK = "Book"
    CLASS = "Class"
    SPORTS = "Sports"
    EVENTS = "Events"
    MISC = "Misc"

    @classmethod
    def parse(cls, token: str) -> "PreferenceCategory":
        """Case-insensitive parse; anything outside the five is an error."""
        wanted = token.strip().lower()
        for member in cls:
            if member.value.lower() == wanted:
                return member
        raise ValueError(f"unknown preference category: {token!r}")


class Meridiem(Enum):
    AM = "AM"
    PM = "PM"


@dataclass(frozen=True)
class ExpirySpec:
    """Expiry exactly as staff enter it: date + AM/PM + 12-hour time."""

    date: date
    meridiem: Meridiem
    hour: int
    minute: int

    def __post_init__(self):
        if not 1 <= self.hour <= 12:
            raise ExpiryParseError("hour", f"hour {self.hour} outside 1..12")
        if not 0 <= self.minute <= 59:
            raise ExpiryParseError("minute", f"minute {self.minute} outside 0..59")


_EXPIRY_RE = re.compile(r"^(\d{4}-\d{2}-\d{2}) (\S+) (\d{1,2}):(\d{2})$")


def parse_expiry(text: str) -> ExpirySpec:
    """Parse the canonical "YYYY-MM-DD AM|PM H:MM" form.

    Hour may omit the leading zero; everything else is fixed-width.
    """
    m = _EXPIRY_RE.match(text.strip())
    if m is None:
        raise ExpiryParseError(
            "expiry", f"malformed expiry {text!r}; expected 'YYYY-MM-DD AM|PM H:MM'"
        )
    date_text, meridiem_text, hour_text, minute_text = m.groups()
    try:
        day = date.fromisoformat(date_text)
    except ValueError:
        raise ExpiryParseError("date", f"invalid calendar date {date_text!r}") from None
    try:
        meridiem = Meridiem(meridiem_text.upper())
    except ValueError:
        raise ExpiryParseError(
            "meridiem", f"expected AM or PM, got {meridiem_text!r}"
        ) from None
    return ExpirySpec(day, meridiem, int(hour_text), int(minute_text))


def format_expiry(spec: ExpirySpec) -> str:
    """Canonical zero-padded text form; inverse of parse_expiry."""
    return f"{spec.date.isoformat()} {spec.meridiem.value} {spec.hour:02d}:{spec.minute:02d}"


def to_instant(spec: ExpirySpec) -> datetime:
    """Map the 12-hour form to a UTC instant (12 AM -> 00:xx, 12 PM -> 12:xx)."""
    hour24 = spec.hour % 12
    if spec.meridiem is Meridiem.PM:
        hour24 += 12
    return datetime(
        spec.date.year, spec.date.month, spec.date.day, hour24, spec.minute,
        tzinfo=timezone.utc,
    )


def parse_instant(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into a UTC instant at second precision."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError:
        raise InvalidRequest(f"invalid RFC 3339 timestamp: {text!r}", field="timestamp") from None
    if parsed.tzinfo is None:
        raise InvalidRequest(f"timestamp missing UTC offset: {text!r}", field="timestamp")
    return parsed.astimezone(timezone.utc).replace(microsecond=0)


def format_instant(instant: datetime) -> str:
    return instant.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, eq=False)
class Location:
    """Where a reader sits; venue is empty when one reader covers a building.

    Equality is case-insensitive with whitespace runs collapsed, matching how
    the same place gets written in prose ("Sports Complex") and in rules
    ("sports_complex").
    """

    building_name: str
    venue_name: str = ""

    def __post_init__(self):
        if not self.building_name.strip():
            raise InvalidRequest("building_name must be non-empty", field="building_name")

    @property
    def key(self) -> tuple[str, str]:
        return (normalize_name(self.building_name), normalize_name(self.venue_name))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Location):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def to_dict(self) -> dict:
        return {"building_name": self.building_name, "venue_name": self.venue_name}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Location":
        try:
            return cls(str(data["building_name"]), str(data.get("venue_name", "")))
        except KeyError as exc:
            raise InvalidRequest(f"location missing {exc.args[0]}", field="location") from None


@dataclass(frozen=True)
class StudentProfile:
    """Identity context: a registered matrix card plus enrollment and interests.

    Preferences may be empty; such a student only ever receives notifications
    targeted directly at them or their course.
    """

    tag_id: str
    course_ids: frozenset[str]
    preferences: frozenset[PreferenceCategory] = field(default_factory=frozenset)
    display_name: str = ""

    def __post_init__(self):
        if not self.tag_id.strip():
            raise InvalidRequest("tag_id must be non-empty", field="tag_id")
        if not self.course_ids:
            raise InvalidRequest("profile needs at least one course", field="course_ids")
        if any(not c.strip() for c in self.course_ids):
            raise InvalidRequest("course ids must be non-empty", field="course_ids")

    def to_dict(self) -> dict:
        return {
            "tag_id": self.tag_id,
            "course_ids": sorted(self.course_ids),
            "preferences": sorted(p.value for p in self.preferences),
            "display_name": self.display_name,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "StudentProfile":
        try:
            tag_id = str(data["tag_id"])
            courses = data["course_ids"]
        except KeyError as exc:
            raise InvalidRequest(f"profile missing {exc.args[0]}", field=exc.args[0]) from None
        try:
            preferences = frozenset(
                PreferenceCategory.parse(p) for p in data.get("preferences", [])
            )
        except ValueError as exc:
            raise InvalidRequest(str(exc), field="preferences") from None
        return cls(
            tag_id=tag_id,
            course_ids=frozenset(str(c) for c in courses),
            preferences=preferences,
            display_name=str(data.get("display_name", "")),
        )


@dataclass(frozen=True)
class Context:
    """The assembled (time, identity, location) triple for one detection."""

    timestamp: datetime
    identity: StudentProfile
    location: Location


def assemble_context(
    event: "TagDetectionEvent",
    profiles: Mapping[str, StudentProfile],
    readers: Mapping[str, Location],
) -> Context:
    """Resolve a detection event against the registries.

    Every output field traces back to the event or a registry entry; nothing
    is fabricated. An unregistered reader rejects the event outright; an
    unregistered tag is reported so callers can fall back to a broadcast-safe
    (empty) feed instead of an error screen.
    """
    location = readers.get(event.reader_id)
    if location is None:
        raise UnknownReader(f"reader {event.reader_id!r} is not registered", field="reader_id")
    profile = profiles.get(event.tag_id)
    if profile is None:
        raise UnknownTag(f"tag {event.tag_id!r} is not registered", field="tag_id")
    return Context(timestamp=event.timestamp, identity=profile, location=location)


def parse_preferences(tokens: Iterable[str]) -> frozenset[PreferenceCategory]:
    return frozenset(PreferenceCategory.parse(t) for t in tokens)
