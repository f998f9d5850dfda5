"""Event-based state estimation with send-on-delta measurements.

A Kalman filter that tolerates silent sensor channels, a band-limited
signal reconstructor working from event streams, and the rule that
combines them.
"""

from .kalman import FilterState, InflatedNoise, NumericalError, inflate_noise, init, measurement_update, project_ahead
from .lti import ContinuousLTI, DiscreteLTI, discretize, matrix_exponential
from .pipeline import ChannelMeta, Metrics, RunResult, TransportStub, comparator_select, compute_metrics, run_scenario
from .pocs import PocsConfig, ReconstructionWindow, build_window, project_bandlimit, project_bounds, reconstruct
from .sampler import BoundEnvelope, Event, EventStream, SamplerState, envelope, sample_signal, sample_step, slope_sign
from .simulation import NoiseSource, Trajectory, gaussian_vector, simulate

__version__ = "0.1.0"
