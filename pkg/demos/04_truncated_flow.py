"""
The truncated flow y_t + L y = 0
================================

On ``span{e^{inx} : |n| <= N}`` the flow splits into the mean, which is
conserved, and two conjugate sectors driven by ``+-i A_N^T``.  For tiny
``eps`` the flow is the transport ``y(x, t) = y0(x - t)``.  For moderate
``eps`` the truncated propagator amplifies some data enormously, and the
amplification grows quickly with ``N``.
"""

import numpy as np

from bfheat import TrigPoly, evolve, propagate, transient_growth

x = np.linspace(-np.pi, np.pi, 9)
y = propagate(TrigPoly.cos(1), 1.0, 16, 1e-12)
print("eps ~ 0, t = 1: max |y - cos(x - 1)| =", np.max(np.abs(y(x) - np.cos(x - 1.0))))

trace = evolve(TrigPoly.cos(1) + TrigPoly.constant(2.0), [0.0, 0.25, 0.5, 1.0], 8, 0.5)
for t, state, g in zip(trace.times, trace.states, trace.growth):
    print(f"t = {t:4.2f}: mean {state.coeffs[state.degree].real:.3f}, "
          f"norm {state.norm():.4f}, propagator norm {g:.3e}")

print("\nlog10 of the worst-case amplification at t = 1, eps = 0.5:")
for N in (4, 8, 16, 32, 64):
    print(f"N = {N:3d}: {transient_growth(1.0, N, 0.5, log=True) / np.log(10):9.2f}")
