"""Run a small seeded ensemble of the closed-loop benchmark and watch the
availability (the storage function) collapse as trajectories settle at the
open-loop-unstable operating point.

The full 64-trajectory artifact run is one command:
    phreactor casestudy --out artifacts/
"""

import numpy as np

from phreactor import SimConfig, ensemble
from phreactor.presets import (
    benchmark_gains,
    benchmark_initial_state,
    benchmark_network,
    benchmark_setpoint,
)

net = benchmark_network()
sp = benchmark_setpoint(net)
gains = benchmark_gains()
x0 = benchmark_initial_state(net)

print("start:  T = 342.0 K, N = (1, 1) mol")
print(f"target: T* = {sp.T_star} K, N* = ({sp.N_star[0]:g}, "
      f"{sp.N_star[1]:g}) mol (open-loop unstable)")

# Eight seeded trajectories, 10 s horizon
cfg = SimConfig(dt=1e-3, t_end=10.0, seed=42, n_traj=8, mode="closed_loop")
stats = ensemble(net, sp, gains, cfg, x0)

# Ensemble-mean temperature and availability at one-second checkpoints
idx = [int(t / 0.01) for t in range(0, 11)]
print("\n  t [s]   mean T [K]   std T [K]   mean availability")
for i in idx:
    print(f"  {stats.times[i]:5.1f}   {stats.mean['T'][i]:9.3f}   "
          f"{stats.std['T'][i]:9.4f}   {stats.mean['avail'][i]:12.4e}")

print(f"\nterminal |T - T*|: mean {stats.terminal_T_error.mean():.4f} K, "
      f"max {stats.terminal_T_error.max():.4f} K")
print(f"terminal composition error: mean "
      f"{stats.terminal_N_error.mean():.5f} mol")
print(f"trajectories aborted: {stats.n_aborted}")
