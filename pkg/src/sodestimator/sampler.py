"""Send-on-delta event generation and the bounds implied by an event stream."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Event",
    "EventStream",
    "SamplerState",
    "BoundEnvelope",
    "EmptyEnvelopeError",
    "EnvelopeCoverageError",
    "sample_step",
    "sample_signal",
    "envelope",
    "slope_sign",
    "write_events_csv",
    "read_events_csv",
]


class EmptyEnvelopeError(ValueError):
    """Raised when a channel has no events to build bounds from."""


class EnvelopeCoverageError(IndexError):
    """Raised when a grid step lies outside every envelope piece."""


class Event(NamedTuple):
    channel: int
    step: int
    value: float


@dataclass(frozen=True, eq=False)
class EventStream:
    events: tuple
    deltas: np.ndarray
    total_steps: int

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.events == other.events
            and np.array_equal(self.deltas, other.deltas)
            and self.total_steps == other.total_steps
        )

    def __post_init__(self):
        events = tuple(sorted((Event(*e) for e in self.events), key=lambda e: (e.step, e.channel)))
        deltas = np.array(self.deltas, dtype=float).reshape(-1)
        deltas.setflags(write=False)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "deltas", deltas)

    @property
    def p(self) -> int:
        return len(self.deltas)

    def channel_events(self, channel: int):
        """``(steps, values)`` arrays for one channel, in time order."""
        sel = [e for e in self.events if e.channel == channel]
        steps = np.array([e.step for e in sel], dtype=np.int64)
        values = np.array([e.value for e in sel], dtype=float)
        return steps, values

    def counts(self):
        counts = np.zeros(self.p, dtype=np.int64)
        for e in self.events:
            counts[e.channel] += 1
        return counts


@dataclass
class SamplerState:
    """Last transmitted value and its step, per channel."""

    last_value: np.ndarray
    last_step: np.ndarray

    @classmethod
    def empty(cls, p: int) -> "SamplerState":
        return cls(np.full(p, np.nan), np.full(p, -1, dtype=np.int64))


def sample_step(state: SamplerState, k: int, y_k, deltas):
    """Run the trigger for grid step ``k``.

    A channel fires when ``|y_k[i] - last_value[i]| >= deltas[i]``, and
    always at ``k == 0``.  Returns the updated state and the emitted events.
    """
    y_k = np.asarray(y_k, dtype=float)
    last_value = state.last_value.copy()
    last_step = state.last_step.copy()
    events = []
    for i in range(len(y_k)):
        if k == 0 or abs(y_k[i] - last_value[i]) >= deltas[i]:
            last_value[i] = y_k[i]
            last_step[i] = k
            events.append(Event(i, k, float(y_k[i])))
    return SamplerState(last_value, last_step), events


def sample_signal(outputs, deltas) -> EventStream:
    """Send-on-delta sample a whole ``(steps, p)`` output record."""
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim == 1:
        outputs = outputs[:, None]
    n_steps, p = outputs.shape
    deltas = np.broadcast_to(np.asarray(deltas, dtype=float), (p,))
    events = []
    for i in range(p):
        col = outputs[:, i]
        d = deltas[i]
        last = col[0]
        events.append(Event(i, 0, float(last)))
        for k in range(1, n_steps):
            if abs(col[k] - last) >= d:
                last = col[k]
                events.append(Event(i, k, float(last)))
    return EventStream(tuple(events), deltas, n_steps)


@dataclass(frozen=True)
class BoundEnvelope:
    """Piecewise-constant bounds ``[value - delta, value + delta]``.

    Piece ``j`` is valid on ``steps[j] <= k < steps[j + 1]``; the last one
    runs to ``end_step`` (exclusive).
    """

    channel: int
    delta: float
    steps: np.ndarray
    values: np.ndarray
    end_step: int

    @property
    def lower(self):
        return self.values - self.delta

    @property
    def upper(self):
        return self.values + self.delta

    @property
    def breakpoints(self):
        return list(zip(self.steps.tolist(), self.lower.tolist(), self.upper.tolist()))

    def piece_index(self, k):
        k = np.asarray(k)
        if np.any(k < self.steps[0]) or np.any(k >= self.end_step):
            raise EnvelopeCoverageError(
                f"steps outside envelope coverage [{self.steps[0]}, {self.end_step})"
            )
        return np.searchsorted(self.steps, k, side="right") - 1

    def held(self, start: int, stop: int):
        """Zero-order hold of the event values over ``start <= k < stop``."""
        return self.values[self.piece_index(np.arange(start, stop))]

    def bounds(self, start: int, stop: int):
        held = self.held(start, stop)
        return held - self.delta, held + self.delta


def envelope(stream: EventStream, channel: int, end_step: int | None = None) -> BoundEnvelope:
    """Bounds on channel ``channel`` implied by its events."""
    steps, values = stream.channel_events(channel)
    if len(steps) == 0:
        raise EmptyEnvelopeError(f"channel {channel} has no events")
    end = stream.total_steps if end_step is None else end_step
    return BoundEnvelope(channel, float(stream.deltas[channel]), steps, values, int(end))


def slope_sign(stream: EventStream, channel: int):
    """Signed slope at each event: the change from the previous event value.

    Repeated values carry the previous slope forward; the first event gets 0.
    """
    _, values = stream.channel_events(channel)
    if len(values) == 0:
        raise EmptyEnvelopeError(f"channel {channel} has no events")
    out = [0.0]
    for prev, cur in zip(values[:-1], values[1:]):
        out.append(float(cur - prev) if cur != prev else out[-1])
    return out


def write_events_csv(stream: EventStream, path):
    with open(path, "w", newline="") as fh:
        fh.write("channel,step,value\n")
        for e in stream.events:
            fh.write(f"{e.channel},{e.step},{e.value:.8e}\n")


def read_events_csv(path, deltas, total_steps: int) -> EventStream:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["channel", "step", "value"]:
            raise ValueError(f"unexpected events header {reader.fieldnames}")
        events = [Event(int(r["channel"]), int(r["step"]), float(r["value"])) for r in reader]
    return EventStream(tuple(events), deltas, total_steps)
