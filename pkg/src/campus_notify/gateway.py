"""Reader-side traffic: detection events in, display payloads out.

Also home to the two offline drivers built on the same wire formats: the
bulk simulator (load/smoke runs) and the scenario runner (scripted replay
with a pinned clock and inline expectations).
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .clock import Clock, PinnedClock
from .context_model import (
    Location,
    StudentProfile,
    format_instant,
    parse_instant,
)
from .errors import (
    CampusNotifyError,
    ClockSkew,
    MalformedEvent,
    ScriptError,
    UnknownReader,
)
from .store import NotificationDraft, NotificationStore

MAX_SKEW_SECONDS = 300


@dataclass(frozen=True)
class TagDetectionEvent:
    """One card waved at one reader, as reported over the wire."""

    tag_id: str
    reader_id: str
    timestamp: datetime
    nonce: str

    def __post_init__(self):
        if not self.tag_id.strip():
            raise MalformedEvent("tag_id must be non-empty", field="tag_id")
        if not self.reader_id.strip():
            raise MalformedEvent("reader_id must be non-empty", field="reader_id")
        if not self.nonce.strip():
            raise MalformedEvent("nonce must be non-empty", field="nonce")

    def to_dict(self) -> dict:
        return {
            "tag_id": self.tag_id,
            "reader_id": self.reader_id,
            "timestamp": format_instant(self.timestamp),
            "nonce": self.nonce,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TagDetectionEvent":
        if not isinstance(data, Mapping):
            raise MalformedEvent("event must be an object")
        missing = [k for k in ("tag_id", "reader_id", "timestamp", "nonce") if k not in data]
        if missing:
            raise MalformedEvent(f"event missing {missing[0]!r}", field=missing[0])
        try:
            timestamp = parse_instant(str(data["timestamp"]))
        except CampusNotifyError:
            raise MalformedEvent(
                f"event timestamp {data['timestamp']!r} is not RFC 3339 with offset",
                field="timestamp",
            ) from None
        return cls(
            tag_id=str(data["tag_id"]),
            reader_id=str(data["reader_id"]),
            timestamp=timestamp,
            nonce=str(data["nonce"]),
        )


@dataclass(frozen=True)
class DisplayPayload:
    """What a kiosk renders after a detection: greeting plus feed entries."""

    reader_id: str
    display_name: str
    entries: tuple = ()

    def to_dict(self) -> dict:
        return {
            "reader_id": self.reader_id,
            "display_name": self.display_name,
            "entries": [
                {
                    "id": e.notification.id,
                    "title": e.notification.title,
                    "body": e.notification.body,
                    "details": e.notification.details,
                    "sender_name": e.notification.sender_name,
                    "created_at": format_instant(e.notification.created_at),
                    "expiry": e.notification.to_dict()["expiry"],
                    "read": e.read,
                    "matched_via": e.matched_via,
                }
                for e in self.entries
            ],
        }


class ReaderGateway:
    """Validates and answers detection events against one store.

    Ingestion never mutates the store, so redelivering an event (same nonce)
    is harmless: it just recomputes the payload from current state.
    """

    def __init__(self, store: NotificationStore, clock: Clock):
        self.store = store
        self.clock = clock
        self.seen_nonces: set[str] = set()

    def ingest_event(self, event: TagDetectionEvent) -> DisplayPayload:
        """Check the event, then build its feed as of the event timestamp."""
        if self.store.get_reader(event.reader_id) is None:
            raise UnknownReader(
                f"reader {event.reader_id!r} is not registered", field="reader_id"
            )
        skew = abs((event.timestamp - self.clock.now()).total_seconds())
        if skew > MAX_SKEW_SECONDS:
            raise ClockSkew(
                f"event timestamp is {skew:.0f}s from server time "
                f"(limit {MAX_SKEW_SECONDS}s)",
                field="timestamp",
            )
        self.seen_nonces.add(event.nonce)
        return self.payload_for(event.tag_id, event.reader_id, event.timestamp)

    def payload_for(self, tag_id: str, reader_id: str, now: datetime) -> DisplayPayload:
        """Same assembly the event path uses; shared with the pull API."""
        entries = tuple(self.store.feed_for(tag_id, reader_id, now))
        profile = self.store.get_profile(tag_id)
        display_name = profile.display_name if profile is not None else ""
        return DisplayPayload(reader_id=reader_id, display_name=display_name, entries=entries)


# -- bulk simulation ---------------------------------------------------------


@dataclass
class SimulationResult:
    """Outcome of a simulated event stream."""

    events_total: int = 0
    delivered: int = 0
    payloads: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    elapsed_seconds: float = 0.0


def simulate_readers(
    gateway: ReaderGateway,
    events: Sequence[TagDetectionEvent],
    *,
    deliver: Optional[Callable[[dict], dict]] = None,
    pacing: str = "fast",
) -> SimulationResult:
    """Push a stream of events through the documented wire format.

    Every event is serialized to its JSON shape and handed to `deliver`,
    which returns the payload dict; the default deliverer stays in-process
    but still round-trips through JSON text, so simulated traffic exercises
    exactly what a networked reader would send. pacing="real-time" sleeps
    out the gaps between event timestamps; "fast" does not.
    """
    if pacing not in ("fast", "real-time"):
        raise ValueError(f"pacing must be 'fast' or 'real-time', not {pacing!r}")

    if deliver is None:
        def deliver(event_dict: dict) -> dict:
            wire_in = json.loads(json.dumps(event_dict))
            payload = gateway.ingest_event(TagDetectionEvent.from_dict(wire_in))
            return json.loads(json.dumps(payload.to_dict()))

    result = SimulationResult(events_total=len(events))
    started = time.monotonic()
    previous: Optional[datetime] = None
    for index, event in enumerate(events):
        if pacing == "real-time" and previous is not None:
            gap = (event.timestamp - previous).total_seconds()
            if gap > 0:
                time.sleep(gap)
        previous = event.timestamp
        try:
            result.payloads.append(deliver(event.to_dict()))
            result.delivered += 1
        except CampusNotifyError as exc:
            result.errors.append(
                {"index": index, "nonce": event.nonce, "code": exc.code, "message": exc.message}
            )
    result.elapsed_seconds = time.monotonic() - started
    return result


def random_events(
    store: NotificationStore, count: int, seed: int, base_time: datetime
) -> list[TagDetectionEvent]:
    """Plausible traffic for smoke runs: registered tags and readers only."""
    import random

    rng = random.Random(seed)
    tags = sorted(store.profiles)
    readers = sorted(store.readers)
    if not tags or not readers:
        raise ScriptError("need at least one profile and one reader to simulate")
    events = []
    for i in range(count):
        events.append(
            TagDetectionEvent(
                tag_id=rng.choice(tags),
                reader_id=rng.choice(readers),
                timestamp=base_time,
                nonce=f"sim-{seed}-{i}",
            )
        )
    return events


# -- scenario replay ----------------------------------------------------------

SCENARIO_ACTIONS = (
    "seed_profile",
    "seed_reader",
    "post_notification",
    "detect",
    "expect_feed_contains",
    "expect_feed_excludes",
)


@dataclass(frozen=True)
class ScenarioStep:
    at: datetime
    action: str
    payload: Mapping

    @classmethod
    def from_dict(cls, data: Mapping, index: int) -> "ScenarioStep":
        for key in ("at", "action", "payload"):
            if key not in data:
                raise ScriptError(f"step {index}: missing {key!r}")
        try:
            at = parse_instant(str(data["at"]))
        except CampusNotifyError as exc:
            raise ScriptError(f"step {index}: {exc.message}") from None
        action = str(data["action"])
        if action not in SCENARIO_ACTIONS:
            raise ScriptError(f"step {index}: unknown action {action!r}")
        payload = data["payload"]
        if not isinstance(payload, Mapping):
            raise ScriptError(f"step {index}: payload must be an object")
        return cls(at=at, action=action, payload=payload)


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    steps: tuple[ScenarioStep, ...]

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioScript":
        if not isinstance(data, Mapping):
            raise ScriptError("scenario must be an object")
        name = str(data.get("name", "")).strip()
        if not name:
            raise ScriptError("scenario needs a non-empty name")
        raw_steps = data.get("steps")
        if not isinstance(raw_steps, list) or not raw_steps:
            raise ScriptError("scenario needs a non-empty steps list")
        steps = tuple(
            ScenarioStep.from_dict(raw, index) for index, raw in enumerate(raw_steps, start=1)
        )
        for earlier, later in zip(steps, steps[1:]):
            if later.at < earlier.at:
                raise ScriptError("steps must be ordered by their 'at' timestamps")
        script = cls(name=name, steps=steps)
        _validate_references(script)
        return script


def _validate_references(script: ScenarioScript) -> None:
    """Static pass: every id a step mentions must be seeded/posted earlier.

    Runs before any step executes, so a bad script fails whole, not halfway.
    """
    tags: set[str] = set()
    readers: set[str] = set()
    refs: set[str] = set()
    for index, step in enumerate(script.steps, start=1):
        p = step.payload
        if step.action == "seed_profile":
            tags.add(str(p.get("tag_id", "")))
        elif step.action == "seed_reader":
            readers.add(str(p.get("reader_id", "")))
        elif step.action == "post_notification":
            ref = p.get("ref")
            if ref is not None:
                refs.add(str(ref))
            targeting = p.get("targeting")
            if isinstance(targeting, Mapping):
                for tag in targeting.get("students") or []:
                    if str(tag) not in tags:
                        raise ScriptError(
                            f"step {index}: targets unseeded tag {tag!r}"
                        )
        elif step.action == "detect":
            if str(p.get("reader_id", "")) not in readers:
                raise ScriptError(
                    f"step {index}: detect at unseeded reader {p.get('reader_id')!r}"
                )
        else:  # expectations
            if str(p.get("reader_id", "")) not in readers:
                raise ScriptError(
                    f"step {index}: expectation at unseeded reader {p.get('reader_id')!r}"
                )
            if str(p.get("tag_id", "")) not in tags:
                raise ScriptError(
                    f"step {index}: expectation for unseeded tag {p.get('tag_id')!r}"
                )
            ref = p.get("ref")
            if ref is not None and str(ref) not in refs:
                raise ScriptError(f"step {index}: unknown notification ref {ref!r}")


@dataclass(frozen=True)
class ExpectationOutcome:
    step_index: int
    action: str
    passed: bool
    detail: str


@dataclass
class ScenarioReport:
    name: str
    outcomes: list[ExpectationOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "expectations": [
                {
                    "step": o.step_index,
                    "action": o.action,
                    "passed": o.passed,
                    "detail": o.detail,
                }
                for o in self.outcomes
            ],
        }


def run_scenario(script: ScenarioScript) -> ScenarioReport:
    """Replay a script against a fresh in-memory store.

    The clock is pinned to each step's 'at' before the step runs; wall time
    is never consulted, so replays are exact no matter when they run.
    """
    clock = PinnedClock(script.steps[0].at)
    store = NotificationStore(path=None)
    gateway = ReaderGateway(store, clock)
    refs: dict[str, int] = {}
    report = ScenarioReport(name=script.name)
    for index, step in enumerate(script.steps, start=1):
        clock.pin(step.at)
        try:
            _run_step(step, index, store, gateway, refs, report)
        except ScriptError:
            raise
        except CampusNotifyError as exc:
            raise ScriptError(f"step {index} ({step.action}): {exc.message}") from None
    return report


def _run_step(
    step: ScenarioStep,
    index: int,
    store: NotificationStore,
    gateway: ReaderGateway,
    refs: dict[str, int],
    report: ScenarioReport,
) -> None:
    p = step.payload
    if step.action == "seed_profile":
        store.register_profile(StudentProfile.from_dict(p))
    elif step.action == "seed_reader":
        location = p.get("location", p)
        store.register_reader(str(p.get("reader_id", "")), Location.from_dict(location))
    elif step.action == "post_notification":
        draft = NotificationDraft.from_dict(p)
        sender = str(p.get("sender", "")).strip()
        if not sender:
            raise ScriptError(f"step {index}: post_notification needs a sender")
        notification = store.create_notification(draft, sender, now=step.at)
        ref = p.get("ref")
        if ref is not None:
            refs[str(ref)] = notification.id
    elif step.action == "detect":
        nonce = str(p.get("nonce") or f"step-{index}-{uuid.uuid4().hex[:8]}")
        event = TagDetectionEvent(
            tag_id=str(p.get("tag_id", "")),
            reader_id=str(p.get("reader_id", "")),
            timestamp=step.at,
            nonce=nonce,
        )
        gateway.ingest_event(event)
    else:
        outcome = _check_expectation(step, index, gateway, refs)
        report.outcomes.append(outcome)


def _check_expectation(
    step: ScenarioStep, index: int, gateway: ReaderGateway, refs: dict[str, int]
) -> ExpectationOutcome:
    p = step.payload
    tag_id = str(p.get("tag_id", ""))
    reader_id = str(p.get("reader_id", ""))
    payload = gateway.payload_for(tag_id, reader_id, step.at)
    entries = payload.to_dict()["entries"]
    where = f"feed for {tag_id} at {reader_id} ({format_instant(step.at)})"

    ref = p.get("ref")
    body = p.get("body")
    if ref is not None:
        wanted_id = refs[str(ref)]
        hits = [e for e in entries if e["id"] == wanted_id]
        label = f"notice '{ref}'"
    elif body is not None:
        hits = [e for e in entries if e["body"] == str(body)]
        label = f"body {str(body)!r}"
    else:
        hits = entries
        label = "any entry"

    if step.action == "expect_feed_contains":
        passed = bool(hits)
        if passed and p.get("only"):
            passed = len(entries) == len(hits) == 1
            label += " and nothing else"
        detail = f"{where} {'contains' if passed else 'does not contain'} {label}"
    else:
        passed = not hits
        verb = "excludes" if passed else "unexpectedly contains"
        if ref is None and body is None:
            label = "all entries (empty feed)"
        detail = f"{where} {verb} {label}"
    return ExpectationOutcome(step_index=index, action=step.action, passed=passed, detail=detail)


def load_scenario_text(text: str) -> ScenarioScript:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScriptError(f"scenario is not valid JSON: {exc.msg}") from None
    return ScenarioScript.from_dict(data)


def bundled_scenario_names() -> list[str]:
    from importlib.resources import files

    fixture_dir = files("campus_notify") / "fixtures"
    return sorted(
        p.name[: -len(".json")]
        for p in fixture_dir.iterdir()
        if p.name.endswith(".json")
    )


def load_bundled_scenario(name: str) -> ScenarioScript:
    from importlib.resources import files

    resource = files("campus_notify") / "fixtures" / f"{name}.json"
    if not resource.is_file():
        raise ScriptError(
            f"no bundled scenario {name!r}; have: {', '.join(bundled_scenario_names())}"
        )
    return load_scenario_text(resource.read_text(encoding="utf-8"))
