"""Kalman filter for send-on-delta measurements.

Silent channels keep their last received value, and their measurement
variance is raised by ``(2 delta)**2 / 12``. That is the variance of a
deviation spread uniformly over ``[-delta, delta]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .lti import DiscreteLTI

__all__ = [
    "FilterState",
    "InflatedNoise",
    "NumericalError",
    "init",
    "inflate_noise",
    "measurement_update",
    "project_ahead",
]

MAX_INNOVATION_COND = 1e12


class NumericalError(ArithmeticError):
    pass


@dataclass
class FilterState:
    x_pred: np.ndarray
    P_pred: np.ndarray
    x_est: np.ndarray
    P_est: np.ndarray
    y_last: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class InflatedNoise:
    R_bar: np.ndarray


@njit(cache=True)
def _update(x_pred, P_pred, y, C, R_bar):
    PCt = P_pred @ np.ascontiguousarray(C.T)
    S = C @ PCt + R_bar
    cond = np.linalg.cond(S)
    Kt = np.linalg.solve(S, np.ascontiguousarray(PCt.T))
    K = np.ascontiguousarray(Kt.T)
    x = x_pred + K @ (y - C @ x_pred)
    P = (np.eye(x_pred.shape[0]) - K @ C) @ P_pred
    P = 0.5 * (P + P.T)
    return x, np.ascontiguousarray(P), cond


@njit(cache=True)
def _inflate(R, deltas, silent):
    R_bar = R.copy()
    for i in range(R.shape[0]):
        if silent[i]:
            R_bar[i, i] = R_bar[i, i] + (2.0 * deltas[i]) ** 2 / 12.0
    return R_bar


@njit(cache=True)
def _predict(x_est, P_est, Ad, Qd):
    x = Ad @ x_est
    P = Ad @ P_est @ np.ascontiguousarray(Ad.T) + Qd
    return x, P


def init(x0_pred, P0_pred, C) -> FilterState:
    """Initial state with ``y_last = C x0_pred``."""
    x0 = np.asarray(x0_pred, dtype=float).copy()
    P0 = np.array(P0_pred, dtype=float)
    C = np.asarray(C, dtype=float)
    if P0.shape != (len(x0), len(x0)):
        raise ValueError(f"P0 has shape {P0.shape}, expected {(len(x0), len(x0))}")
    if np.max(np.abs(P0 - P0.T)) > 1e-9:
        raise ValueError("P0 is not symmetric")
    if np.min(np.linalg.eigvalsh(P0)) < -1e-9:
        raise ValueError("P0 is not positive semidefinite")
    return FilterState(
        x_pred=x0,
        P_pred=P0,
        x_est=x0.copy(),
        P_est=P0.copy(),
        y_last=C @ x0,
        k=0,
    )


def inflate_noise(R, deltas, silent) -> InflatedNoise:
    """``R`` with ``(2 delta_i)**2 / 12`` added on each silent channel."""
    R = np.ascontiguousarray(R, dtype=float)
    deltas = np.broadcast_to(np.asarray(deltas, dtype=float), (R.shape[0],))
    silent = np.broadcast_to(np.asarray(silent, dtype=np.bool_), (R.shape[0],))
    return InflatedNoise(_inflate(R, np.ascontiguousarray(deltas), np.ascontiguousarray(silent)))


def measurement_update(state: FilterState, received, R, deltas, C, measurement=None) -> FilterState:
    """Correct the prediction for step ``state.k``.

    Parameters
    ----------
    state : FilterState
        Filter after the previous prediction.
    received : iterable of (channel, value)
        Measurements that arrived at this step.  They overwrite ``y_last``.
    R, deltas : array_like
        Nominal measurement covariance and send-on-delta thresholds.
    C : array_like
        Output matrix.  ``R``, ``deltas`` and ``C`` must be float arrays.
    measurement : array_like, optional
        Vector used in the innovation in place of ``y_last``.  The stored
        ``y_last`` is not changed by it.

    Raises
    ------
    NumericalError
        If the innovation covariance is numerically singular.
    """
    y_last = state.y_last.copy()
    silent = np.ones(len(y_last), dtype=np.bool_)
    for channel, value in received:
        if not silent[channel]:
            raise ValueError(f"channel {channel} received twice at step {state.k}")
        y_last[channel] = value
        silent[channel] = False
    R_bar = _inflate(R, deltas, silent)
    y = y_last if measurement is None else measurement
    x, P, cond = _update(state.x_pred, state.P_pred, y, C, R_bar)
    if not cond <= MAX_INNOVATION_COND:
        raise NumericalError(
            f"innovation covariance singular at step {state.k} (condition number {cond:.3e})"
        )
    return FilterState(state.x_pred, state.P_pred, x, P, y_last, state.k)


def project_ahead(state: FilterState, model: DiscreteLTI) -> FilterState:
    """Propagate the corrected estimate one period and advance ``k``."""
    x, P = _predict(state.x_est, state.P_est, model.Ad, model.Qd)
    return FilterState(x, P, state.x_est, state.P_est, state.y_last, state.k + 1)
