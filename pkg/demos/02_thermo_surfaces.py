"""Walk the thermodynamic closures: energy/temperature inversion, entropy
along a heating path, and the curvature that powers every stability
argument (the negative-entropy Hessian is positive semidefinite)."""

import numpy as np

from phreactor import (
    ThermoState,
    internal_energy,
    neg_entropy_hessian,
    temperature,
)
from phreactor.presets import benchmark_network

net = benchmark_network()
N = np.array([1.3, 0.7])

# Energy <-> temperature is a closed-form pair
U = internal_energy(net, N, 331.9)
print(f"U(N, 331.9 K) = {U:.4f} J")
print(f"T(U, N)       = {temperature(net, U, N):.10f} K  (round trip)")

# Entropy and enthalpy along a heating sweep at fixed composition
print("\n   T [K]    U [J]       S [J/K]   mu_A/T      mu_B/T")
for T in np.linspace(300.0, 420.0, 7):
    st = ThermoState.from_temperature(net, N, T)
    print(f"  {T:6.1f}  {st.U:9.2f}  {st.S:9.4f}  {st.mu_over_T[0]:9.4f} "
          f" {st.mu_over_T[1]:9.4f}")

# Concavity of entropy: Hess(-S) is PSD wherever moles are positive
rng = np.random.default_rng(2)
worst = np.inf
for _ in range(200):
    T = rng.uniform(280.0, 420.0)
    N_rand = 10.0 ** rng.uniform(-2.0, 0.7, size=2)
    st = ThermoState.from_temperature(net, N_rand, T)
    eig = np.linalg.eigvalsh(neg_entropy_hessian(net, st.x))
    worst = min(worst, eig.min())
print(f"\nsmallest Hessian eigenvalue over 200 random states: {worst:.3e}")
print("(nonnegative up to rounding: entropy is concave on the domain)")
