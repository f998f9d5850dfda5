"""Band-limited reconstruction of send-on-delta signals by alternating projections.

Two convex sets are used: sequences whose spectrum vanishes above ``omega``
and sequences lying inside the event envelope.  Starting from the held
event values, the iterate is clipped to the envelope and then low-passed,
``iterations`` times.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .sampler import BoundEnvelope, EventStream, envelope as _envelope

__all__ = [
    "PocsConfig",
    "ReconstructionWindow",
    "project_bandlimit",
    "project_bounds",
    "out_of_band_fraction",
    "build_window",
    "reconstruct",
    "StreamingReconstructor",
]

EDGE_MODES = ("periodic", "reflect")


@dataclass(frozen=True)
class PocsConfig:
    """Reconstruction settings.

    ``omega`` is the band limit in rad/s; ``None`` means ``0.01 * pi / T``,
    resolved by :meth:`resolved`.  ``window`` is the number of grid samples
    per reconstruction and ``stride`` the longest gap between two
    reconstructions of a live stream.
    """

    omega: float | None = None
    iterations: int = 10
    window: int = 4096
    stride: int = 1000
    edge: str = "reflect"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.window < 8:
            raise ValueError("window must be >= 8")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.edge not in EDGE_MODES:
            raise ValueError(f"edge must be one of {EDGE_MODES}")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")

    def resolved(self, T: float) -> "PocsConfig":
        omega = 0.01 * np.pi / T if self.omega is None else self.omega
        if omega > np.pi / T * (1 + 1e-12):
            raise ValueError(f"omega {omega} exceeds the Nyquist rate {np.pi / T}")
        return PocsConfig(omega, self.iterations, self.window, self.stride, self.edge)


def _extend(samples, edge):
    if edge == "reflect":
        return np.concatenate([samples, samples[::-1]])
    return samples


def _passband(n, omega, T):
    return 2.0 * np.pi * scipy.fft.rfftfreq(n, d=T) <= omega


def project_bandlimit(samples, omega, T, edge="periodic"):
    """Zero every spectral component above ``omega`` rad/s.

    ``edge="periodic"`` masks the DFT of the samples as given.  With
    ``edge="reflect"`` the samples are mirrored first, so the implicit
    periodic continuation has no jump at either end; the result is the
    orthogonal projection onto sequences whose mirrored extension is
    band-limited.
    """
    samples = np.asarray(samples, dtype=float)
    ext = _extend(samples, edge)
    spec = scipy.fft.rfft(ext)
    spec[~_passband(len(ext), omega, T)] = 0.0
    return scipy.fft.irfft(spec, n=len(ext))[: len(samples)]


def out_of_band_fraction(samples, omega, T, edge="periodic"):
    """Share of spectral energy above ``omega`` (same transform as the projection)."""
    ext = _extend(np.asarray(samples, dtype=float), edge)
    spec = np.abs(scipy.fft.fft(ext)) ** 2
    freqs = 2.0 * np.pi * np.abs(scipy.fft.fftfreq(len(ext), d=T))
    total = spec.sum()
    if total == 0.0:
        return 0.0
    return float(spec[freqs > omega].sum() / total)


def project_bounds(samples, envelope: BoundEnvelope, start_step: int = 0):
    """Clip ``samples[j]`` (grid step ``start_step + j``) into the envelope."""
    samples = np.asarray(samples, dtype=float)
    lower, upper = envelope.bounds(start_step, start_step + len(samples))
    return np.minimum(np.maximum(samples, lower), upper)


@dataclass(frozen=True)
class ReconstructionWindow:
    """Grid samples ``start_step .. start_step + len(samples) - 1`` of one channel."""

    channel: int
    start_step: int
    samples: np.ndarray
    envelope: BoundEnvelope

    def __post_init__(self):
        if self.start_step < self.envelope.steps[0]:
            raise ValueError("window starts before the first event")
        if self.start_step + len(self.samples) > self.envelope.end_step:
            raise ValueError("window extends past the envelope")


def build_window(stream: EventStream, channel: int, end_step: int, length: int) -> ReconstructionWindow:
    """Window of at most ``length`` samples ending at ``end_step`` (inclusive).

    The samples are the zero-order hold of the event values.
    """
    env = _envelope(stream, channel, end_step=end_step + 1)
    start = max(end_step - length + 1, int(env.steps[0]))
    return ReconstructionWindow(channel, start, env.held(start, end_step + 1), env)


def reconstruct(window: ReconstructionWindow, config: PocsConfig, T: float, return_history=False):
    """Alternate envelope clipping and band limiting from ``window.samples``.

    Returns the final iterate, or ``(final, history)`` where ``history``
    holds every iterate including the initial one.
    """
    cfg = config.resolved(T)
    x = np.asarray(window.samples, dtype=float)
    history = [x]
    for _ in range(cfg.iterations):
        x = project_bounds(x, window.envelope, window.start_step)
        x = project_bandlimit(x, cfg.omega, T, cfg.edge)
        if return_history:
            history.append(x)
    if return_history:
        return x, history
    return x


class StreamingReconstructor:
    """Causal reconstruction of one channel from events as they arrive.

    A window ending at the current step is rebuilt on every new event and
    whenever ``stride`` steps have passed since the last rebuild.  In
    between, the last reconstructed value is held and clipped to the
    current envelope piece.
    """

    def __init__(self, channel: int, delta: float, config: PocsConfig, T: float):
        self.channel = channel
        self.delta = float(delta)
        self.config = config.resolved(T)
        self.T = T
        self._steps: list[int] = []
        self._values: list[float] = []
        self.last_rebuild = None
        self._dirty = False
        self.value = np.nan

    def observe(self, step: int, value: float):
        if self._steps and step <= self._steps[-1]:
            raise ValueError(f"event step {step} not after {self._steps[-1]}")
        self._steps.append(int(step))
        self._values.append(float(value))
        self._dirty = True

    def envelope(self, end_step: int, start_step: int = 0) -> BoundEnvelope:
        """Envelope of the events seen so far, trimmed to those covering ``start_step`` onward."""
        first = max(bisect_right(self._steps, start_step) - 1, 0)
        return BoundEnvelope(
            self.channel,
            self.delta,
            np.array(self._steps[first:], dtype=np.int64),
            np.array(self._values[first:]),
            end_step,
        )

    def advance(self, k: int) -> float:
        """Reconstruction value at step ``k``; ``nan`` before the first event."""
        if not self._steps:
            return np.nan
        held = self._values[-1]
        if self._dirty or self.last_rebuild is None or k - self.last_rebuild >= self.config.stride:
            start = max(k - self.config.window + 1, self._steps[0])
            env = self.envelope(k + 1, start)
            window = ReconstructionWindow(self.channel, start, env.held(start, k + 1), env)
            self.value = float(reconstruct(window, self.config, self.T)[-1])
            self.last_rebuild = k
            self._dirty = False
            return self.value
        return min(max(self.value, held - self.delta), held + self.delta)
