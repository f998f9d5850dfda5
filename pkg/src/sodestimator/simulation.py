"""Seeded ground-truth trajectories for a sampled LTI plant."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lti import DiscreteLTI

__all__ = [
    "PROCESS_STREAM",
    "MEASUREMENT_STREAM",
    "TRANSPORT_STREAM",
    "NoiseSource",
    "Trajectory",
    "psd_factor",
    "gaussian_vector",
    "simulate",
]

PROCESS_STREAM = 0
MEASUREMENT_STREAM = 1
TRANSPORT_STREAM = 2


@dataclass
class NoiseSource:
    """Independent random stream identified by ``(seed, stream_id)``.

    Two sources with the same pair produce the same draws bit for bit.
    """

    seed: int
    stream_id: int = 0
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self._rng = np.random.default_rng(ss)

    @property
    def generator(self) -> np.random.Generator:
        return self._rng

    def stream(self, stream_id: int) -> "NoiseSource":
        """Fresh source with the same seed and a different stream id."""
        return NoiseSource(self.seed, stream_id)

    def standard_normal(self, size=None):
        return self._rng.standard_normal(size)


def psd_factor(cov):
    """Lower factor ``L`` with ``L @ L.T == cov`` for a symmetric PSD matrix.

    Tries Cholesky, then Cholesky with a single diagonal jitter of
    ``1e-12 * trace / m``, then a clipped eigendecomposition.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    m = cov.shape[0]
    if cov.shape != (m, m):
        raise ValueError(f"covariance must be square, got {cov.shape}")
    if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-10 * max(1.0, np.abs(cov).max()):
        raise ValueError("covariance is not symmetric")
    eig = np.linalg.eigvalsh(cov)
    if eig.size and eig.min() < -1e-8:
        raise ValueError(f"covariance has negative eigenvalue {eig.min():.3e}")
    if not np.any(cov):
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * np.trace(cov) / m
    try:
        return np.linalg.cholesky(cov + jitter * np.eye(m))
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(cov)
        return V * np.sqrt(np.clip(w, 0.0, None))


def gaussian_vector(cov, noise: NoiseSource):
    """One zero-mean draw with covariance ``cov``."""
    L = psd_factor(cov)
    return L @ noise.standard_normal(L.shape[0])


@dataclass(frozen=True)
class Trajectory:
    """Truth and noisy outputs on the grid ``k * T``, ``k = 0 .. steps``.

    ``process_noise[k]`` is the draw carrying ``states[k]`` to
    ``states[k + 1]``; ``measurement_noise[k]`` is added to ``outputs[k]``.
    """

    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    process_noise: np.ndarray
    measurement_noise: np.ndarray

    def __len__(self):
        return len(self.times)


def simulate(model: DiscreteLTI, x0, steps: int, noise) -> Trajectory:
    """Propagate ``x[k+1] = Ad x[k] + w[k]`` and emit ``y[k] = C x[k] + v[k]``.

    ``noise`` is a :class:`NoiseSource` or an integer seed.  The process and
    measurement draws come from the streams ``PROCESS_STREAM`` and
    ``MEASUREMENT_STREAM`` of that seed, so they never share a sequence.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.n,):
        raise ValueError(f"x0 has shape {x0.shape}, model has {model.n} states")
    seed = noise.seed if isinstance(noise, NoiseSource) else int(noise)
    w_src = NoiseSource(seed, PROCESS_STREAM)
    v_src = NoiseSource(seed, MEASUREMENT_STREAM)

    Lw = psd_factor(model.Qd)
    Lv = psd_factor(model.R)
    w = w_src.standard_normal((steps, model.n)) @ Lw.T
    v = v_src.standard_normal((steps + 1, model.p)) @ Lv.T

    Ad = model.Ad
    x = np.empty((steps + 1, model.n))
    x[0] = x0
    for k in range(steps):
        x[k + 1] = Ad @ x[k] + w[k]
    y = x @ model.C.T + v
    times = np.arange(steps + 1) * model.T
    for arr in (times, x, y, w, v):
        arr.setflags(write=False)
    return Trajectory(times, x, y, w, v)
