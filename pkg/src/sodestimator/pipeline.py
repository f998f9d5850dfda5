"""End-to-end estimator run: plant, sampler, transport, filters, reconstruction."""

from __future__ import annotations

import dataclasses
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kalman
from .lti import ContinuousLTI, discretize
from .pocs import PocsConfig, StreamingReconstructor
from .sampler import EventStream, SamplerState, sample_step
from .simulation import TRANSPORT_STREAM, NoiseSource, Trajectory, simulate

__all__ = [
    "ROLES",
    "MAX_STEPS",
    "ChannelMeta",
    "TransportStub",
    "Metrics",
    "RunResult",
    "comparator_select",
    "compute_metrics",
    "run_scenario",
]

log = logging.getLogger(__name__)

ROLES = ("rms-voltage", "active-power", "reactive-power", "dc-current", "generic")
MAX_STEPS = 10_000_000


@dataclass(frozen=True)
class ChannelMeta:
    name: str
    role: str = "generic"
    delta: float = 0.0

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"channel {self.name!r}: unknown role {self.role!r}")
        if not self.delta >= 0:
            raise ValueError(f"channel {self.name!r}: delta must be >= 0")


@dataclass
class TransportStub:
    """In-process link: fixed delivery delay and independent random drops.

    Events are delivered ``delay_steps`` after they were sampled, in the
    order they were sent.
    """

    delay_steps: int = 0
    drop_probability: float = 0.0
    delivery_log: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.delay_steps < 0:
            raise ValueError("delay_steps must be >= 0")
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError("drop_probability must lie in [0, 1]")
        self._queue = deque()
        self._rng = None

    def reset(self, seed: int):
        self._queue.clear()
        self.delivery_log = []
        self._rng = NoiseSource(seed, TRANSPORT_STREAM).generator

    def send(self, k: int, events):
        for e in events:
            if self.drop_probability > 0 and self._rng.random() < self.drop_probability:
                continue
            self._queue.append((k + self.delay_steps, e))

    def deliver(self, k: int):
        out = []
        while self._queue and self._queue[0][0] <= k:
            out.append(self._queue.popleft()[1])
        for e in out:
            self.delivery_log.append((k, e))
        return out


@dataclass(frozen=True)
class Metrics:
    mse_per_state: np.ndarray
    event_count_per_channel: np.ndarray
    compression_ratio: np.ndarray
    baseline_mse_per_state: np.ndarray


@dataclass(frozen=True)
class RunResult:
    trajectory: Trajectory
    estimates: np.ndarray
    baseline_estimates: np.ndarray
    events: EventStream
    reconstructions: np.ndarray
    held: np.ndarray
    event_flags: np.ndarray
    metrics: Metrics | None = None
    covariance_health: dict | None = None


def comparator_select(y_pred, y_rec, y_held, deltas):
    """Per channel, keep the held value unless prediction and reconstruction disagree.

    Channel ``i`` takes ``y_rec[i]`` when ``|y_pred[i] - y_rec[i]| >= deltas[i]``
    and ``y_held[i]`` otherwise.  A ``nan`` reconstruction never wins.
    """
    y_pred = np.asarray(y_pred, dtype=float)
    y_rec = np.asarray(y_rec, dtype=float)
    y_held = np.asarray(y_held, dtype=float)
    switch = np.abs(y_pred - y_rec) >= np.asarray(deltas, dtype=float)
    return np.where(switch, y_rec, y_held)


def compute_metrics(result: RunResult) -> Metrics:
    truth = result.trajectory.states
    if len(truth) == 0:
        raise ValueError("empty run")
    if result.estimates.shape != truth.shape or result.baseline_estimates.shape != truth.shape:
        raise ValueError("estimate arrays do not match the trajectory grid")
    counts = result.events.counts()
    return Metrics(
        mse_per_state=np.mean((result.estimates - truth) ** 2, axis=0),
        event_count_per_channel=counts,
        compression_ratio=counts / float(len(truth)),
        baseline_mse_per_state=np.mean((result.baseline_estimates - truth) ** 2, axis=0),
    )


def run_scenario(
    model: ContinuousLTI,
    x0,
    channels,
    T: float,
    duration: float,
    seed: int,
    pocs: PocsConfig | None = PocsConfig(),
    transport: TransportStub | None = None,
    x0_hat=None,
    P0=None,
    check_covariance: bool = False,
) -> RunResult:
    """Simulate the plant and run the proposed estimator next to the baseline.

    Each grid step: sample the outputs, pass the events through the
    transport, let the comparator pick between held values and the
    reconstruction, then update and predict both filters.  The baseline
    sees the same held values with nominal ``R`` and no reconstruction.

    Passing ``pocs=None`` disables reconstruction and the comparator.
    With ``check_covariance`` every covariance is checked for symmetry and
    its smallest eigenvalue is recorded in ``covariance_health``.
    """
    steps = int(round(duration / T))
    if steps < 1 or abs(steps * T - duration) > 1e-9 * max(duration, 1.0):
        raise ValueError(f"duration {duration} is not a positive multiple of T={T}")
    if steps + 1 > MAX_STEPS:
        raise ValueError(f"{steps + 1} steps exceeds the budget of {MAX_STEPS}")
    if len(channels) != model.p:
        raise ValueError(f"{len(channels)} channels given for {model.p} outputs")
    transport = TransportStub() if transport is None else transport
    transport.reset(seed)

    dmodel = discretize(model, T)
    traj = simulate(dmodel, x0, steps, NoiseSource(seed))
    n, p = model.n, model.p
    deltas = np.array([c.delta for c in channels], dtype=float)
    zero = np.zeros(p)
    C = np.ascontiguousarray(dmodel.C)
    R = np.ascontiguousarray(dmodel.R)

    x0_hat = np.zeros(n) if x0_hat is None else np.asarray(x0_hat, dtype=float)
    P0 = 10.0 * np.eye(n) if P0 is None else np.asarray(P0, dtype=float)
    prop = kalman.init(x0_hat, P0, C)
    base = kalman.init(x0_hat, P0, C)

    recons = None
    if pocs is not None:
        recons = [StreamingReconstructor(i, deltas[i], pocs, T) for i in range(p)]
        log.info("reconstruction band limit omega = %.6g rad/s", recons[0].config.omega)

    estimates = np.empty((steps + 1, n))
    baseline = np.empty((steps + 1, n))
    rec_trace = np.full((steps + 1, p), np.nan)
    held_trace = np.empty((steps + 1, p))
    flags = np.zeros((steps + 1, p), dtype=np.int8)
    emitted = []
    sampler = SamplerState.empty(p)
    min_eig, max_asym = np.inf, 0.0

    outputs = traj.outputs
    for k in range(steps + 1):
        sampler, events = sample_step(sampler, k, outputs[k], deltas)
        for e in events:
            flags[k, e.channel] = 1
        emitted.extend(events)
        transport.send(k, events)
        delivered = transport.deliver(k)
        received = [(e.channel, e.value) for e in delivered]

        measurement = None
        if recons is not None:
            for e in delivered:
                recons[e.channel].observe(e.step, e.value)
            y_rec = np.array([r.advance(k) for r in recons])
            rec_trace[k] = y_rec
            y_held = prop.y_last.copy()
            for ch, value in received:
                y_held[ch] = value
            measurement = comparator_select(C @ prop.x_pred, y_rec, y_held, deltas)

        try:
            prop = kalman.measurement_update(prop, received, R, deltas, C, measurement)
            base = kalman.measurement_update(base, received, R, zero, C)
        except kalman.NumericalError as exc:
            raise kalman.NumericalError(f"{exc} (run step {k})") from exc
        estimates[k] = prop.x_est
        baseline[k] = base.x_est
        held_trace[k] = prop.y_last
        if check_covariance:
            for P in (prop.P_pred, prop.P_est, base.P_pred, base.P_est):
                max_asym = max(max_asym, float(np.max(np.abs(P - P.T))))
                min_eig = min(min_eig, float(np.linalg.eigvalsh(P)[0]))
        prop = kalman.project_ahead(prop, dmodel)
        base = kalman.project_ahead(base, dmodel)

    stream = EventStream(tuple(emitted), deltas, steps + 1)
    for arr in (estimates, baseline, rec_trace, held_trace, flags):
        arr.setflags(write=False)
    health = {"min_eigenvalue": min_eig, "max_asymmetry": max_asym} if check_covariance else None
    result = RunResult(traj, estimates, baseline, stream, rec_trace, held_trace, flags, None, health)
    return dataclasses.replace(result, metrics=compute_metrics(result))
