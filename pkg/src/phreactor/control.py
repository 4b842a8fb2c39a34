"""Passivity-based stabilizing feedback for the reactor.

The controller damps the passive output of the availability-shifted
system: with y = g^T grad A + delta u, the law u = -K y for a symmetric
positive definite gain K gives y^T u = -y^T K y <= 0.  Because the output
feeds through delta(x), solving the implicit relation gives the explicit
form

    u(x) = -(I + K delta(x))^(-1) K g(x)^T grad A(x).

Physically u = (q, Qdot): inlet/outlet flow and jacket heat.  The flow is
clamped to [0, q_max] by default (a pump cannot run backwards), and the
heat input is realized through a jacket at temperature T_w = Qdot/lambda + T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import ReactionNetwork
from .thermo import ThermoState
from .transform import Setpoint
from .structure import inlet_enthalpy_density, mixing_noise_scale, sde_fields

#: Default upper clamp on the flow input, m^3/s.
Q_MAX_DEFAULT = 1e-2


@dataclass(frozen=True)
class ControllerGains:
    """Symmetric positive definite gain on the passive output."""

    K: np.ndarray

    def __post_init__(self):
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        object.__setattr__(self, "K", K)
        if K.shape[0] != K.shape[1]:
            raise ValueError("gain matrix must be square")
        if not np.allclose(K, K.T):
            raise ValueError("gain matrix must be symmetric")
        if np.any(np.linalg.eigvalsh(K) <= 0):
            raise ValueError("gain matrix must be positive definite")

    @classmethod
    def diagonal(cls, k_flow: float, k_heat: float) -> "ControllerGains":
        return cls(np.diag([float(k_flow), float(k_heat)]))


@dataclass(frozen=True)
class ControlAction:
    """One evaluation of the feedback: applied inputs, jacket temperature,
    whether the flow clamp engaged, and the raw (unclamped) flow."""

    q: float
    Qdot: float
    T_w: float
    saturated: bool
    q_raw: float

    @property
    def u(self) -> np.ndarray:
        return np.array([self.q, self.Qdot])


def jacket_temperature(net: ReactionNetwork, Qdot: float, T: float) -> float:
    """Jacket temperature realizing a heat input: T_w = Qdot/lambda + T.

    Undefined for lambda = 0 (no heat transfer path)."""
    lam = net.reactor.lam
    if lam == 0:
        raise ValueError("jacket temperature is undefined for lambda = 0")
    return Qdot / lam + T


def solve_feedback(K: np.ndarray, d1: float, d2: float, o1: float,
                   o2: float) -> tuple[float, float]:
    """Closed-form 2x2 solve of u = -(I + K diag(d1, d2))^(-1) K (o1, o2)."""
    k00, k01 = K[0, 0], K[0, 1]
    k10, k11 = K[1, 0], K[1, 1]
    b1 = -(k00 * o1 + k01 * o2)
    b2 = -(k10 * o1 + k11 * o2)
    a11 = 1.0 + k00 * d1
    a12 = k01 * d2
    a21 = k10 * d1
    a22 = 1.0 + k11 * d2
    det = a11 * a22 - a12 * a21
    return (a22 * b1 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det


def _gain_times_output(net: ReactionNetwork, sp: Setpoint, gains: ControllerGains,
                       st: ThermoState) -> np.ndarray:
    """Solve u = -(I + K delta)^(-1) K g^T grad A at a state."""
    V = net.reactor.V
    g00 = inlet_enthalpy_density(net) - float(st.N @ st.h) / V
    dc = net.c_in - st.N / V
    grad_U = 1.0 / sp.T_star - 1.0 / st.T
    grad_N = st.mu_over_T - sp.mu_star_over_T
    o1 = g00 * grad_U + float(dc @ grad_N)
    o2 = grad_U
    M = mixing_noise_scale(net, st)
    rho = net.noise
    d1 = 0.5 * rho.rho2 ** 2 * M / st.theta
    d2 = 0.5 * rho.rho3 ** 2 / st.theta
    return np.array(solve_feedback(gains.K, d1, d2, o1, o2))


def control_law(net: ReactionNetwork, sp: Setpoint, gains: ControllerGains, x,
                clamp: bool = True, q_max: float = Q_MAX_DEFAULT) -> ControlAction:
    """Evaluate the stabilizing feedback at a state.

    With ``clamp`` (the default) the flow is limited to [0, q_max] and the
    action reports whether the limit engaged.  The jacket temperature is
    derived from the heat input when the network has a heat transfer path,
    else it is NaN.
    """
    st = x if isinstance(x, ThermoState) else ThermoState.from_vector(net, x)
    u = _gain_times_output(net, sp, gains, st)
    q_raw, Qdot = float(u[0]), float(u[1])
    q = q_raw
    saturated = False
    if clamp:
        q = min(max(q_raw, 0.0), q_max)
        saturated = q != q_raw
    lam = net.reactor.lam
    T_w = Qdot / lam + st.T if lam > 0 else math.nan
    return ControlAction(q=q, Qdot=Qdot, T_w=T_w, saturated=saturated,
                         q_raw=q_raw)


def control_law_diagonal(net: ReactionNetwork, sp: Setpoint, k_flow: float,
                         k_heat: float, x) -> tuple[float, float]:
    """Scalar closed form of the feedback for a diagonal gain.

    Because the feedthrough is diagonal the two channels decouple:

        q    = -k_flow / (1 + k_flow rho2^2 M / (2 theta)) *
               (g00 (1/T* - 1/T) + dc^T (mu/T - mu*/T*))
        Qdot = -k_heat / (1 + k_heat rho3^2 / (2 theta)) * (1/T* - 1/T)

    Unclamped; used as an independent cross-check of :func:`control_law`.
    """
    st = x if isinstance(x, ThermoState) else ThermoState.from_vector(net, x)
    V = net.reactor.V
    g00 = inlet_enthalpy_density(net) - float(st.N @ st.h) / V
    dc = net.c_in - st.N / V
    grad_U = 1.0 / sp.T_star - 1.0 / st.T
    grad_N = st.mu_over_T - sp.mu_star_over_T
    M = mixing_noise_scale(net, st)
    rho = net.noise
    q = (-k_flow / (1.0 + k_flow * 0.5 * rho.rho2 ** 2 * M / st.theta)
         * (g00 * grad_U + float(dc @ grad_N)))
    Qdot = (-k_heat / (1.0 + k_heat * 0.5 * rho.rho3 ** 2 / st.theta) * grad_U)
    return q, Qdot


def closed_loop_drift(net: ReactionNetwork, sp: Setpoint, gains: ControllerGains,
                      x, clamp: bool = True,
                      q_max: float = Q_MAX_DEFAULT):
    """Drift and diffusion of the closed loop at a state (inputs from the
    feedback law)."""
    st = x if isinstance(x, ThermoState) else ThermoState.from_vector(net, x)
    action = control_law(net, sp, gains, st, clamp=clamp, q_max=q_max)
    return sde_fields(net, st, action.u)
