"""Integrate the oscillator and measure how long it sticks to the belt.

Run with ``python3 demos/time_response.py``.
"""

import numpy as np

from mobsurrogate import IntegratorConfig, State, StickingConfig, SystemParams, integrate, sticking_time

p = SystemParams(K1=0.75, K2=0.3, Omega=0.6)
traj = integrate(p, State(), 250.0, IntegratorConfig(record_dt=0.01))

window = traj.t >= 150.0
v_rel = p.V0 - traj.Xdot[window]
print(f"samples in window:      {window.sum()}")
print(f"displacement range [m]: {traj.X[window].min():.4f} .. {traj.X[window].max():.4f}")
print(f"max belt-relative |V_R| [m/s]: {np.abs(v_rel).max():.4f}")
print(f"sticking time [s]:      {sticking_time(p, cfg=StickingConfig()):.4f}")
