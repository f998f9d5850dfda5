import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import sod_events_bruteforce
from sodestimator.sampler import (
    EmptyEnvelopeError,
    EnvelopeCoverageError,
    Event,
    EventStream,
    SamplerState,
    envelope,
    read_events_csv,
    sample_signal,
    sample_step,
    slope_sign,
    write_events_csv,
)

signals = arrays(float, st.integers(1, 300), elements=st.floats(-50, 50))


def stream_of(values, delta=6.0, total=None):
    events = [Event(0, s, v) for s, v in values]
    return EventStream(tuple(events), [delta], total or (values[-1][0] + 1))


def test_step_sequence_example():
    state = SamplerState.empty(1)
    fired = []
    for k, y in enumerate([0.0, 1.0, 2.0, 7.0]):
        state, ev = sample_step(state, k, [y], [6.0])
        fired += ev
    assert fired == [Event(0, 0, 0.0), Event(0, 3, 7.0)]
    assert state.last_step[0] == 3 and state.last_value[0] == 7.0


def test_example_matches_bruteforce():
    steps, values = sod_events_bruteforce(np.array([0.0, 1.0, 2.0, 7.0]), 6.0)
    stream = sample_signal([0.0, 1.0, 2.0, 7.0], 6.0)
    assert [(e.step, e.value) for e in stream.events] == list(zip(steps, values))


def test_constant_signal_single_event():
    stream = sample_signal(np.full(1000, 3.3), 0.1)
    assert stream.events == (Event(0, 0, 3.3),)


def test_tie_fires_and_downward_fires():
    stream = sample_signal([0.0, 6.0, 0.0, -5.9], 6.0)
    assert [e.step for e in stream.events] == [0, 1, 2]


def test_step_and_bulk_agree():
    rng = np.random.default_rng(2)
    y = np.cumsum(rng.standard_normal((500, 3)), axis=0)
    deltas = np.array([1.0, 2.5, 0.0])
    state, events = SamplerState.empty(3), []
    for k in range(len(y)):
        state, ev = sample_step(state, k, y[k], deltas)
        events += ev
    assert EventStream(tuple(events), deltas, len(y)).events == sample_signal(y, deltas).events


@settings(max_examples=60, deadline=None)
@given(signals, st.floats(0.0, 20.0))
def test_matches_bruteforce(y, delta):
    steps, values = sod_events_bruteforce(y, delta)
    s, v = sample_signal(y, delta).channel_events(0)
    np.testing.assert_array_equal(s, steps)
    np.testing.assert_array_equal(v, values)


@settings(max_examples=60, deadline=None)
@given(signals, st.floats(0.01, 20.0))
def test_inter_event_bound_and_envelope_membership(y, delta):
    stream = sample_signal(y, delta)
    env = envelope(stream, 0)
    held = env.held(0, len(y))
    assert np.all(np.abs(y - held) < delta)
    lo, hi = env.bounds(0, len(y))
    assert np.all(lo - 1e-12 <= y) and np.all(y <= hi + 1e-12)
    s, v = stream.channel_events(0)
    assert np.all(np.abs(np.diff(v)) >= delta)


@settings(max_examples=40, deadline=None)
@given(signals, st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_monotone_compression(y, d1, d2):
    lo, hi = sorted((d1, d2))
    assert sample_signal(y, hi).counts()[0] <= sample_signal(y, lo).counts()[0]


def test_zero_delta_fires_every_step():
    y = np.zeros(123)
    assert sample_signal(y, 0.0).counts()[0] == 123


def test_envelope_single_event():
    env = envelope(stream_of([(0, 3.0)], total=50), 0)
    assert env.breakpoints == [(0, -3.0, 9.0)]
    lo, hi = env.bounds(0, 50)
    assert np.all(lo == -3.0) and np.all(hi == 9.0)


def test_envelope_two_events():
    env = envelope(stream_of([(0, 0.0), (3, 7.0)], total=10), 0)
    assert env.breakpoints == [(0, -6.0, 6.0), (3, 1.0, 13.0)]
    lo, hi = env.bounds(0, 10)
    np.testing.assert_array_equal(lo, [-6, -6, -6, 1, 1, 1, 1, 1, 1, 1])
    np.testing.assert_array_equal(hi, [6, 6, 6, 13, 13, 13, 13, 13, 13, 13])


def test_envelope_width():
    rng = np.random.default_rng(0)
    y = np.cumsum(rng.standard_normal(2000))
    env = envelope(sample_signal(y, 1.7), 0)
    width = env.upper - env.lower
    np.testing.assert_allclose(width, 3.4, rtol=0, atol=4 * np.spacing(np.abs(env.values).max() + 1.7))


def test_empty_envelope():
    stream = EventStream((Event(1, 0, 1.0),), [1.0, 1.0], 5)
    with pytest.raises(EmptyEnvelopeError):
        envelope(stream, 0)


def test_coverage_error():
    env = envelope(stream_of([(2, 0.0)], total=5), 0)
    with pytest.raises(EnvelopeCoverageError):
        env.bounds(0, 5)
    with pytest.raises(EnvelopeCoverageError):
        env.bounds(2, 6)


@pytest.mark.parametrize(
    "values, expected",
    [
        ([0.0, 7.0], [0.0, 7.0]),
        ([0.0, 7.0, 7.0], [0.0, 7.0, 7.0]),
        ([5.0, -2.0, -9.0], [0.0, -7.0, -7.0]),
    ],
)
def test_slope_sign(values, expected):
    stream = stream_of([(k, v) for k, v in enumerate(values)])
    assert slope_sign(stream, 0) == expected


def test_events_sorted_by_step_then_channel():
    y = np.array([[0.0, 0.0], [10.0, 10.0], [10.0, 0.0]])
    stream = sample_signal(y, [6.0, 6.0])
    assert [(e.step, e.channel) for e in stream.events] == [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1)]


def test_events_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    y = np.cumsum(rng.standard_normal((400, 2)), axis=0) * 1e3
    stream = sample_signal(y, [500.0, 900.0])
    path = tmp_path / "events.csv"
    write_events_csv(stream, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "channel,step,value"
    assert all(len(line.split(",")[2].split("e")[0].replace("-", "").replace(".", "")) == 9 for line in lines[1:])
    back = read_events_csv(path, stream.deltas, stream.total_steps)
    assert [(e.channel, e.step) for e in back.events] == [(e.channel, e.step) for e in stream.events]
    np.testing.assert_allclose([e.value for e in back.events], [e.value for e in stream.events], rtol=5e-9)
