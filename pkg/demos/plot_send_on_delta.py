"""
Send-on-delta sampling of a slow signal
=======================================

A channel transmits only when its value has moved by at least ``delta``
since the last transmission. Between events the receiver knows the signal
stays within ``delta`` of the held value. That band is the envelope used
later for reconstruction.
"""

import numpy as np

from sodestimator import envelope, sample_signal, slope_sign

T = 1e-3
t = np.arange(5000) * T
y = 2.0 * np.sin(2 * np.pi * 0.5 * t) + 0.5 * np.sin(2 * np.pi * 1.7 * t)

stream = sample_signal(y, 0.4)
print(f"{len(stream.events)} events for {len(y)} samples "
      f"(compression {len(stream.events) / len(y):.4f})")

# the held value and its bounds, step by step
env = envelope(stream, 0)
held = env.held(0, len(y))
lower, upper = env.bounds(0, len(y))
print("max |y - held| between events:", np.abs(y - held).max())

# signed change at each event (first event has no predecessor)
print("first slopes:", np.round(slope_sign(stream, 0)[:6], 3))

# larger thresholds never send more
for delta in (0.1, 0.2, 0.4, 0.8, 1.6):
    print(f"delta={delta:4.1f}  events={sample_signal(y, delta).counts()[0]}")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    steps, values = stream.channel_events(0)
    plt.plot(t, y, "k", lw=1, label="signal")
    plt.step(t, held, where="post", label="held")
    plt.fill_between(t, lower, upper, step="post", alpha=0.2, label="envelope")
    plt.plot(steps * T, values, "o", ms=3, label="events")
    plt.legend()
    plt.show()
