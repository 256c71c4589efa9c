"""Durable registry and notification store.

One JSONL file holds everything: profiles, readers, notifications, and
per-student read state, each line tagged with a "kind". Mutations append a
line and fsync before returning; loading replays the file with last-wins
semantics, so the append-only log and the compacted export share one format.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import IO, Iterable, Mapping, Optional

from .context_model import (
    Context,
    ExpirySpec,
    Location,
    PreferenceCategory,
    StudentProfile,
    format_expiry,
    format_instant,
    normalize_name,
    parse_expiry,
    parse_instant,
    to_instant,
)
from .errors import (
    ExpiryInPast,
    InvalidQuery,
    InvalidRequest,
    InvalidTargeting,
    NotFound,
    UnknownReader,
)
from .rule_engine import evaluate

READ_STATES = ("unread", "read", "deleted")

RECORD_KINDS = ("profile", "reader", "notification", "read_state")


@dataclass(frozen=True)
class Targeting:
    """Exactly one ground: named students, one course, or a category broadcast."""

    students: Optional[frozenset[str]] = None
    course: Optional[str] = None
    broadcast: Optional[PreferenceCategory] = None

    def __post_init__(self):
        grounds = [g for g in (self.students, self.course, self.broadcast) if g is not None]
        if len(grounds) != 1:
            raise InvalidTargeting(
                "targeting must name exactly one of students, course, broadcast",
                field="targeting",
            )
        if self.students is not None and not self.students:
            raise InvalidTargeting("student targeting needs at least one tag", field="targeting")
        if self.students is not None and any(not t.strip() for t in self.students):
            raise InvalidTargeting("student tag ids must be non-empty", field="targeting")
        if self.course is not None and not self.course.strip():
            raise InvalidTargeting("course id must be non-empty", field="targeting")

    def to_dict(self) -> dict:
        if self.students is not None:
            return {"students": sorted(self.students)}
        if self.course is not None:
            return {"course": self.course}
        assert self.broadcast is not None
        return {"broadcast": self.broadcast.value}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Targeting":
        if not isinstance(data, Mapping):
            raise InvalidRequest("targeting must be an object", field="targeting")
        keys = [k for k in ("students", "course", "broadcast") if data.get(k) is not None]
        if len(keys) != 1:
            raise InvalidTargeting(
                "targeting must name exactly one of students, course, broadcast",
                field="targeting",
            )
        if keys[0] == "students":
            students = data["students"]
            if not isinstance(students, (list, tuple)):
                raise InvalidRequest("students must be a list of tag ids", field="targeting")
            return cls(students=frozenset(str(t) for t in students))
        if keys[0] == "course":
            return cls(course=str(data["course"]))
        try:
            return cls(broadcast=PreferenceCategory.parse(str(data["broadcast"])))
        except ValueError as exc:
            raise InvalidRequest(str(exc), field="targeting") from None


@dataclass(frozen=True)
class Notification:
    """A stored notice; id and created_at are server-assigned."""

    id: int
    title: str
    body: str
    sender_name: str
    created_at: datetime
    expiry: ExpirySpec
    targeting: Targeting
    location_scope: Optional[Location] = None
    details: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "details": self.details,
            "sender_name": self.sender_name,
            "created_at": format_instant(self.created_at),
            "expiry": format_expiry(self.expiry),
            "targeting": self.targeting.to_dict(),
            "location_scope": self.location_scope.to_dict() if self.location_scope else None,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Notification":
        try:
            scope = data.get("location_scope")
            return cls(
                id=int(data["id"]),
                title=str(data["title"]),
                body=str(data["body"]),
                details=str(data.get("details", "")),
                sender_name=str(data["sender_name"]),
                created_at=parse_instant(str(data["created_at"])),
                expiry=parse_expiry(str(data["expiry"])),
                targeting=Targeting.from_dict(data["targeting"]),
                location_scope=Location.from_dict(scope) if scope else None,
            )
        except KeyError as exc:
            raise InvalidRequest(
                f"notification record missing {exc.args[0]}", field=exc.args[0]
            ) from None


@dataclass(frozen=True)
class NotificationDraft:
    """Client-supplied half of a notification, before the server stamps it."""

    title: str
    body: str
    expiry: ExpirySpec
    targeting: Targeting
    location_scope: Optional[Location] = None
    details: str = ""

    @classmethod
    def from_dict(cls, data: Mapping) -> "NotificationDraft":
        if not isinstance(data, Mapping):
            raise InvalidRequest("notification must be an object")
        missing = [k for k in ("title", "body", "expiry", "targeting") if k not in data]
        if missing:
            raise InvalidRequest(f"missing field {missing[0]!r}", field=missing[0])
        scope = data.get("location_scope")
        return cls(
            title=str(data["title"]),
            body=str(data["body"]),
            expiry=parse_expiry(str(data["expiry"])),
            targeting=Targeting.from_dict(data["targeting"]),
            location_scope=Location.from_dict(scope) if scope else None,
            details=str(data.get("details", "")),
        )


@dataclass(frozen=True)
class FeedEntry:
    """One notification as it lands on a display, with its read flag."""

    notification: Notification
    read: bool
    matched_via: str


@dataclass(frozen=True)
class SearchQuery:
    """Exactly one criterion; construction rejects none or several."""

    poster: Optional[str] = None
    created_on: Optional[date] = None
    title_substring: Optional[str] = None

    def __post_init__(self):
        given = [
            v for v in (self.poster, self.created_on, self.title_substring) if v is not None
        ]
        if len(given) != 1:
            raise InvalidQuery("search needs exactly one of poster, created_on, title")


class NotificationStore:
    """All durable state behind one lock.

    With a path, every mutation appends one JSONL line and fsyncs; with
    path=None the store is memory-only (scenario replay uses this).
    """

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.RLock()
        self._profiles: dict[str, StudentProfile] = {}
        self._readers: dict[str, Location] = {}
        self._notifications: dict[int, Notification] = {}
        self._read_states: dict[tuple[str, int], str] = {}
        self._log: Optional[IO[str]] = None
        if self.path is not None and self.path.exists():
            self._replay_file()
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._log = open(self.path, "a", encoding="utf-8")

    # -- persistence ------------------------------------------------------

    def _replay_file(self) -> None:
        assert self.path is not None
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InvalidRequest(
                        f"{self.path}:{lineno}: not valid JSON ({exc.msg})"
                    ) from None
                try:
                    self._apply_record(record)
                except InvalidRequest as exc:
                    raise InvalidRequest(f"{self.path}:{lineno}: {exc.message}") from None

    def _apply_record(self, record: Mapping) -> None:
        """Replay one log line into memory; later lines win."""
        kind = record.get("kind")
        if kind == "profile":
            profile = StudentProfile.from_dict(record)
            self._profiles[profile.tag_id] = profile
        elif kind == "reader":
            try:
                reader_id = str(record["reader_id"])
            except KeyError:
                raise InvalidRequest("reader record missing reader_id", field="reader_id")
            self._readers[reader_id] = Location.from_dict(record.get("location", record))
        elif kind == "notification":
            notification = Notification.from_dict(record)
            self._notifications[notification.id] = notification
        elif kind == "read_state":
            try:
                tag_id = str(record["tag_id"])
                notification_id = int(record["notification_id"])
                state = str(record["state"])
            except (KeyError, TypeError, ValueError):
                raise InvalidRequest("malformed read_state record")
            if state not in READ_STATES:
                raise InvalidRequest(f"unknown read state {state!r}", field="state")
            self._read_states[(tag_id, notification_id)] = state
        else:
            raise InvalidRequest(f"unknown record kind {kind!r}", field="kind")

    def _append(self, record: dict) -> None:
        if self._log is None:
            return
        self._log.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._log.flush()
        os.fsync(self._log.fileno())

    def close(self) -> None:
        with self._lock:
            if self._log is not None:
                self._log.close()
                self._log = None

    # -- registries -------------------------------------------------------

    def register_profile(self, profile: StudentProfile) -> StudentProfile:
        with self._lock:
            if profile.tag_id in self._profiles:
                raise InvalidRequest(
                    f"tag {profile.tag_id!r} already registered", field="tag_id"
                )
            self._profiles[profile.tag_id] = profile
            self._append({"kind": "profile", **profile.to_dict()})
            return profile

    def register_reader(self, reader_id: str, location: Location) -> None:
        if not reader_id.strip():
            raise InvalidRequest("reader_id must be non-empty", field="reader_id")
        with self._lock:
            if reader_id in self._readers:
                raise InvalidRequest(
                    f"reader {reader_id!r} already registered", field="reader_id"
                )
            self._readers[reader_id] = location
            self._append(
                {"kind": "reader", "reader_id": reader_id, "location": location.to_dict()}
            )

    def get_profile(self, tag_id: str) -> Optional[StudentProfile]:
        return self._profiles.get(tag_id)

    def get_reader(self, reader_id: str) -> Optional[Location]:
        return self._readers.get(reader_id)

    @property
    def profiles(self) -> Mapping[str, StudentProfile]:
        return self._profiles

    @property
    def readers(self) -> Mapping[str, Location]:
        return self._readers

    def courses(self) -> list[str]:
        """Every course id any profile mentions, normalized and sorted."""
        found = {normalize_name(c) for p in self._profiles.values() for c in p.course_ids}
        return sorted(found)

    # -- notifications ----------------------------------------------------

    def create_notification(
        self, draft: NotificationDraft, sender_name: str, now: datetime
    ) -> Notification:
        """Stamp, validate, persist. The server owns id and created_at."""
        if not draft.title.strip():
            raise InvalidRequest("title must be non-empty", field="title")
        if not sender_name.strip():
            raise InvalidRequest("sender name must be non-empty", field="sender")
        if draft.targeting.course is not None:
            if normalize_name(draft.targeting.course) not in self.courses():
                raise InvalidTargeting(
                    f"course {draft.targeting.course!r} has no registered students",
                    field="targeting",
                )
        if to_instant(draft.expiry) < now:
            raise ExpiryInPast(
                f"expiry {format_expiry(draft.expiry)} is already past", field="expiry"
            )
        with self._lock:
            next_id = max(self._notifications, default=0) + 1
            notification = Notification(
                id=next_id,
                title=draft.title,
                body=draft.body,
                details=draft.details,
                sender_name=sender_name,
                created_at=now,
                expiry=draft.expiry,
                targeting=draft.targeting,
                location_scope=draft.location_scope,
            )
            self._notifications[next_id] = notification
            self._append({"kind": "notification", **notification.to_dict()})
            return notification

    def get_notification(self, notification_id: int) -> Notification:
        notification = self._notifications.get(notification_id)
        if notification is None:
            raise NotFound(f"no notification with id {notification_id}", field="notification_id")
        return notification

    def notifications(self) -> list[Notification]:
        return [self._notifications[k] for k in sorted(self._notifications)]

    def search(self, query: SearchQuery) -> list[Notification]:
        """Filter by the single given criterion; expired notices still show."""
        results = []
        for notification in self.notifications():
            if query.poster is not None:
                keep = notification.sender_name.lower() == query.poster.lower()
            elif query.created_on is not None:
                keep = notification.created_at.date() == query.created_on
            else:
                assert query.title_substring is not None
                keep = query.title_substring.lower() in notification.title.lower()
            if keep:
                results.append(notification)
        return results

    # -- read state ---------------------------------------------------------

    def read_state(self, tag_id: str, notification_id: int) -> str:
        return self._read_states.get((tag_id, notification_id), "unread")

    def set_read_state(self, tag_id: str, notification_id: int, state: str) -> None:
        """unread <-> read toggle freely; deleted is a terminal tombstone."""
        if state not in READ_STATES:
            raise InvalidRequest(
                f"state must be one of {', '.join(READ_STATES)}", field="state"
            )
        with self._lock:
            if tag_id not in self._profiles:
                raise NotFound(f"tag {tag_id!r} is not registered", field="tag_id")
            self.get_notification(notification_id)
            current = self._read_states.get((tag_id, notification_id), "unread")
            if current == "deleted" and state != "deleted":
                raise InvalidRequest(
                    "notification was deleted for this student; deletion is final",
                    field="state",
                )
            self._read_states[(tag_id, notification_id)] = state
            self._append(
                {
                    "kind": "read_state",
                    "tag_id": tag_id,
                    "notification_id": notification_id,
                    "state": state,
                }
            )

    # -- feeds --------------------------------------------------------------

    def feed_for(self, tag_id: str, reader_id: str, now: datetime) -> list[FeedEntry]:
        """Everything this student should see on this reader right now.

        Unknown reader is an error; unknown tag quietly yields an empty feed
        so a misread card never crashes a public display.
        """
        location = self._readers.get(reader_id)
        if location is None:
            raise UnknownReader(f"reader {reader_id!r} is not registered", field="reader_id")
        profile = self._profiles.get(tag_id)
        if profile is None:
            return []
        ctx = Context(timestamp=now, identity=profile, location=location)
        visible = [
            n
            for n in self.notifications()
            if self.read_state(tag_id, n.id) != "deleted"
        ]
        entries = []
        for result in evaluate(ctx, visible):
            notification = self._notifications[result.notification_id]
            entries.append(
                FeedEntry(
                    notification=notification,
                    read=self.read_state(tag_id, notification.id) == "read",
                    matched_via=result.matched_via,
                )
            )
        return entries

    # -- bulk import/export --------------------------------------------------

    def export_records(self) -> list[dict]:
        """Compacted snapshot in load order: registries first, then notices."""
        records: list[dict] = []
        for tag_id in sorted(self._profiles):
            records.append({"kind": "profile", **self._profiles[tag_id].to_dict()})
        for reader_id in sorted(self._readers):
            records.append(
                {
                    "kind": "reader",
                    "reader_id": reader_id,
                    "location": self._readers[reader_id].to_dict(),
                }
            )
        for notification_id in sorted(self._notifications):
            records.append(
                {"kind": "notification", **self._notifications[notification_id].to_dict()}
            )
        for (tag_id, notification_id) in sorted(self._read_states):
            records.append(
                {
                    "kind": "read_state",
                    "tag_id": tag_id,
                    "notification_id": notification_id,
                    "state": self._read_states[(tag_id, notification_id)],
                }
            )
        return records

    def seed_records(self, records: Iterable[Mapping]) -> dict[str, int]:
        """Apply a batch atomically: validate everything, then write.

        Records identical to existing state are skipped, so re-seeding the
        same file is harmless; a key collision with different content is an
        error. Returns per-kind counts of the records in the batch.
        """
        staged: list[Mapping] = []
        counts = {kind: 0 for kind in RECORD_KINDS}
        probe = NotificationStore(path=None)
        probe._profiles.update(self._profiles)
        probe._readers.update(self._readers)
        probe._notifications.update(self._notifications)
        probe._read_states.update(self._read_states)
        for index, record in enumerate(records, start=1):
            kind = record.get("kind") if isinstance(record, Mapping) else None
            if kind not in RECORD_KINDS:
                raise InvalidRequest(f"record {index}: unknown kind {kind!r}", field="kind")
            try:
                self._check_seed_conflict(probe, record)
                probe._apply_record(record)
            except InvalidRequest as exc:
                raise InvalidRequest(f"record {index}: {exc.message}", field=exc.field) from None
            counts[kind] += 1
            staged.append(record)
        with self._lock:
            for record in staged:
                if self._seed_is_noop(record):
                    continue
                self._apply_record(record)
                self._append(dict(record))
        return counts

    def _check_seed_conflict(self, probe: "NotificationStore", record: Mapping) -> None:
        kind = record["kind"]
        if kind == "profile":
            incoming = StudentProfile.from_dict(record)
            existing = probe._profiles.get(incoming.tag_id)
            if existing is not None and existing != incoming:
                raise InvalidRequest(
                    f"tag {incoming.tag_id!r} already registered with different data",
                    field="tag_id",
                )
        elif kind == "reader":
            reader_id = str(record.get("reader_id", ""))
            existing = probe._readers.get(reader_id)
            if existing is not None and existing != Location.from_dict(
                record.get("location", record)
            ):
                raise InvalidRequest(
                    f"reader {reader_id!r} already registered with different location",
                    field="reader_id",
                )
        elif kind == "notification":
            incoming = Notification.from_dict(record)
            existing = probe._notifications.get(incoming.id)
            if existing is not None and existing != incoming:
                raise InvalidRequest(
                    f"notification id {incoming.id} already present with different data",
                    field="id",
                )

    def _seed_is_noop(self, record: Mapping) -> bool:
        kind = record["kind"]
        if kind == "profile":
            incoming = StudentProfile.from_dict(record)
            return self._profiles.get(incoming.tag_id) == incoming
        if kind == "reader":
            reader_id = str(record.get("reader_id", ""))
            location = Location.from_dict(record.get("location", record))
            return self._readers.get(reader_id) == location
        if kind == "notification":
            incoming = Notification.from_dict(record)
            return self._notifications.get(incoming.id) == incoming
        tag_id = str(record["tag_id"])
        notification_id = int(record["notification_id"])
        return self._read_states.get((tag_id, notification_id)) == str(record["state"])
