"""Injectable time source.

Wall time is read in exactly one place (``WallClock``); everything else
receives a clock so scenarios and tests replay deterministically.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Protocol


class Clock(Protocol):
    def now(self) -> datetime:
        """Current instant, UTC, second precision."""
        ...


class WallClock:
    """Production clock: real UTC time truncated to whole seconds."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc).replace(microsecond=0)


class PinnedClock:
    """Controllable clock for scenario replay and tests."""

    def __init__(self, instant: datetime):
        self._now = instant

    def now(self) -> datetime:
        return self._now

    def pin(self, instant: datetime) -> None:
        self._now = instant
