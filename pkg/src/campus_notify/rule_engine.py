"""IF-THEN matching core.

Each stored notification compiles to a single rule: a conjunction of
equality conditions over context attributes. A condition group on a
multi-valued attribute (tag_id, course_id) is a disjunction of
alternatives; groups combine with AND. Expiry is deliberately not a
condition: it is a lifecycle gate checked separately, so a rule can be
inspected without knowing the current time.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import TYPE_CHECKING, Iterable, Sequence

from .context_model import Context, normalize_name, to_instant
from .errors import InvalidTargeting

if TYPE_CHECKING:
    from .store import Notification

ATTRIBUTES = (
    "hour",
    "meridiem",
    "date",
    "building",
    "venue",
    "tag_id",
    "course_id",
    "preference_category",
)

# Attributes where several conditions form alternatives instead of conflicting.
MULTI_VALUED = ("tag_id", "course_id")


@dataclass(frozen=True)
class Condition:
    """One equality test: context attribute == value."""

    attribute: str
    value: str

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise InvalidTargeting(f"unknown rule attribute: {self.attribute!r}")


@dataclass(frozen=True)
class Rule:
    """The compiled form of one notification's targeting."""

    notification_id: int
    conditions: tuple[Condition, ...]

    def __post_init__(self):
        seen = set()
        for cond in self.conditions:
            if cond.attribute in seen and cond.attribute not in MULTI_VALUED:
                raise InvalidTargeting(
                    f"duplicate condition on single-valued attribute {cond.attribute!r}"
                )
            seen.add(cond.attribute)


@dataclass(frozen=True)
class MatchResult:
    """Why a notification landed in a feed."""

    notification_id: int
    matched_via: str  # direct_student | course_batch | preference_broadcast


def compile_rule(notification: "Notification") -> Rule:
    """Translate stored targeting into conditions.

    Exactly one targeting ground must be present: named students, a course,
    or a preference broadcast. A location scope adds building (and venue,
    when given) conditions on top.
    """
    conditions: list[Condition] = []
    targeting = notification.targeting
    if targeting.students:
        for tag_id in sorted(targeting.students):
            conditions.append(Condition("tag_id", tag_id))
    elif targeting.course:
        conditions.append(Condition("course_id", normalize_name(targeting.course)))
    elif targeting.broadcast:
        conditions.append(
            Condition("preference_category", targeting.broadcast.value.lower())
        )
    else:
        raise InvalidTargeting(
            f"notification {notification.id} has no targeting ground"
        )
    scope = notification.location_scope
    if scope is not None:
        conditions.append(Condition("building", normalize_name(scope.building_name)))
        if scope.venue_name.strip():
            conditions.append(Condition("venue", normalize_name(scope.venue_name)))
    return Rule(notification_id=notification.id, conditions=tuple(conditions))


def _clock_hour(instant: datetime) -> int:
    """12-hour clock value of a UTC instant (1..12)."""
    hour = instant.hour % 12
    if hour == 0:
        hour = 12
    return hour


def _meridiem_of(instant: datetime) -> str:
    if instant.hour < 12:
        return "am"
    return "pm"


def _condition_satisfied(cond: Condition, ctx: Context) -> bool:
    if cond.attribute == "hour":
        try:
            wanted = int(cond.value)
        except ValueError:
            return False
        return _clock_hour(ctx.timestamp) == wanted
    if cond.attribute == "meridiem":
        return _meridiem_of(ctx.timestamp) == cond.value.strip().lower()
    if cond.attribute == "date":
        return ctx.timestamp.date().isoformat() == cond.value.strip()
    if cond.attribute == "building":
        return normalize_name(ctx.location.building_name) == normalize_name(cond.value)
    if cond.attribute == "venue":
        return normalize_name(ctx.location.venue_name) == normalize_name(cond.value)
    if cond.attribute == "tag_id":
        return ctx.identity.tag_id == cond.value
    if cond.attribute == "course_id":
        courses = {normalize_name(c) for c in ctx.identity.course_ids}
        return normalize_name(cond.value) in courses
    if cond.attribute == "preference_category":
        prefs = {p.value.lower() for p in ctx.identity.preferences}
        return cond.value.strip().lower() in prefs
    return False


def matches(rule: Rule, ctx: Context) -> bool:
    """Total match test: AND across attributes, OR within multi-valued groups.

    Never raises for any well-formed rule/context pair; unknown values on a
    condition simply fail to match.
    """
    groups: dict[str, list[Condition]] = {}
    for cond in rule.conditions:
        groups.setdefault(cond.attribute, []).append(cond)
    for attribute_conds in groups.values():
        if not any(_condition_satisfied(c, ctx) for c in attribute_conds):
            return False
    return True


def is_active(notification: "Notification", now: datetime) -> bool:
    """Active strictly before the expiry instant; at the instant it is gone."""
    return now < to_instant(notification.expiry)


def _matched_via(rule: Rule, ctx: Context) -> str:
    """Name the targeting ground that admitted this context.

    Grounds are mutually exclusive at creation, so at most one is present;
    the precedence order only matters as documentation of intent.
    """
    grounds = {c.attribute for c in rule.conditions}
    if "tag_id" in grounds:
        return "direct_student"
    if "course_id" in grounds:
        return "course_batch"
    if "preference_category" in grounds:
        return "preference_broadcast"
    raise InvalidTargeting(f"rule {rule.notification_id} has no targeting ground")


def evaluate(
    ctx: Context,
    notifications: Iterable["Notification"],
    now: datetime | None = None,
) -> list[MatchResult]:
    """Run every active rule against one context.

    Activity is judged at the context timestamp unless an explicit `now` is
    given (scenario replay pins it). Results come back newest-first by
    created_at, with ascending id breaking ties.
    """
    judged_at = now if now is not None else ctx.timestamp
    survivors = []
    for notification in notifications:
        if not is_active(notification, judged_at):
            continue
        rule = compile_rule(notification)
        if matches(rule, ctx):
            survivors.append((notification, rule))
    survivors.sort(key=lambda pair: pair[0].id)
    survivors.sort(key=lambda pair: pair[0].created_at, reverse=True)
    return [
        MatchResult(notification_id=n.id, matched_via=_matched_via(rule, ctx))
        for n, rule in survivors
    ]


def rules_for(notifications: Sequence["Notification"]) -> list[Rule]:
    """Compile a batch; handy for inspection and tests."""
    return [compile_rule(n) for n in notifications]
