"""Virtual clock and the (time, seq)-ordered event queue."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Any

SimTime = int  # milliseconds of virtual time

WORLD = -1  # target of events handled by the world itself (slot ticks)


class EventKind(enum.IntEnum):
    BLOCK_ARRIVAL = 1
    SLOT_TICK = 2
    MINING_COMPLETE = 3
    TIMER = 4


@dataclass(frozen=True, slots=True)
class SimEvent:
    at: SimTime
    seq: int
    target: int
    kind: EventKind
    payload: Any = None


class TimeTravel(ValueError):
    """An event was scheduled before the current virtual time."""


class EventQueue:
    def __init__(self) -> None:
        self._heap: list[tuple[int, int, SimEvent]] = []
        self.now: SimTime = 0
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def next_seq(self) -> int:
        s = self._seq
        self._seq += 1
        return s

    def schedule(self, event: SimEvent) -> "EventQueue":
        if event.at < self.now:
            raise TimeTravel(f"event at {event.at} scheduled at time {self.now}")
        heapq.heappush(self._heap, (event.at, event.seq, event))
        return self

    def push(self, at: SimTime, target: int, kind: EventKind, payload: Any = None) -> SimEvent:
        ev = SimEvent(at, self.next_seq(), target, kind, payload)
        self.schedule(ev)
        return ev

    def peek_time(self) -> SimTime | None:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> SimEvent:
        at, _, ev = heapq.heappop(self._heap)
        self.now = at
        return ev
