"""Euler-Maruyama simulation of the noisy reactor, single paths and
seeded ensembles.

Integration uses the Ito interpretation on a fixed grid with three
independent Wiener channels (reaction flux, flow input, heat input).
Each trajectory draws from its own counter-derived substream of the
master seed, so ensembles are reproducible draw for draw regardless of
how trajectories are scheduled.

Domain guards keep paths physical: mole numbers are clamped at a small
floor (logged as an event), and a step whose energy update would push the
temperature nonpositive is retried as two half steps, recursively up to
20 halvings, after which the trajectory aborts.  Non-finite arithmetic
aborts immediately with a diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import ReactionNetwork
from .thermo import ThermoState
from .transform import Setpoint, availability
from .control import ControllerGains, Q_MAX_DEFAULT, solve_feedback
from .structure import inlet_enthalpy_density, sde_fields

#: Trajectory mole floor (mol): components are clamped here, above the
#: thermodynamic domain floor, so the closures stay evaluable.
N_TRAJ_FLOOR = 1e-9

#: Maximum recursive step halvings before a trajectory aborts.
MAX_HALVINGS = 20

_MODES = ("closed_loop", "open_loop", "deterministic", "isolated")


class SimulationAbort(RuntimeError):
    """Raised internally when a trajectory cannot be continued."""


@dataclass
class SimConfig:
    """Integration settings.

    mode selects the input and noise wiring: ``closed_loop`` (feedback,
    noise on), ``deterministic`` (feedback, noise off), ``open_loop``
    (constant ``u_open``, noise on), ``isolated`` (zero inputs, noise
    off).  With ``open_loop_until > 0`` the first part of a feedback run
    applies ``u_open`` instead.  ``eps`` is the scaled ball radius used
    for the ensemble stabilization estimate.
    """

    dt: float = 1e-3
    t_end: float = 10.0
    seed: int = 0
    n_traj: int = 1
    record_every: int = 10
    mode: str = "closed_loop"
    u_open: tuple[float, float] = (0.0, 0.0)
    open_loop_until: float = 0.0
    clamp: bool = True
    q_max: float = Q_MAX_DEFAULT
    eps: float = 0.05

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_end / self.dt))

    @property
    def noise_on(self) -> bool:
        return self.mode in ("closed_loop", "open_loop")


@dataclass
class Trajectory:
    """One recorded path: the state series, the derived series used for
    reporting, and the event log (list of (step, code))."""

    index: int
    times: np.ndarray
    states: np.ndarray  # (n_records, 1 + n_species)
    T: np.ndarray
    S: np.ndarray
    avail: np.ndarray
    q: np.ndarray
    Qdot: np.ndarray
    T_w: np.ndarray
    events: list[tuple[int, str]] = field(default_factory=list)
    aborted: bool = False
    abort_reason: str | None = None

    @property
    def U(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def N(self) -> np.ndarray:
        return self.states[:, 1:]


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """The dedicated substream for one trajectory of one master seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(index,)))


def euler_maruyama_step(net: ReactionNetwork, x, u, dt: float, dW) -> np.ndarray:
    """One explicit Euler-Maruyama update of (U, N).

    Applies the mole floor clamp; raises :class:`SimulationAbort` if the
    update is non-finite or leaves the temperature domain.  The stepping
    loop in :func:`simulate` adds the halving retry on top of this.
    """
    st = ThermoState.from_vector(net, x)
    fields = sde_fields(net, st, u)
    x_new = st.x + fields.drift * dt + fields.diffusion @ np.asarray(dW, dtype=float)
    if not np.all(np.isfinite(x_new)):
        raise SimulationAbort("non-finite state update")
    np.clip(x_new[1:], N_TRAJ_FLOOR, None, out=x_new[1:])
    _temperature_of(net, x_new)
    return x_new


def _temperature_of(net: ReactionNetwork, x: np.ndarray) -> float:
    N = x[1:]
    T = net.reactor.T_ref + (x[0] + net.reactor.P * net.reactor.V
                             - float(N @ net.h_ref)) / float(N @ net.cp)
    if not T > 0:
        raise SimulationAbort(f"temperature left the domain ({T} K)")
    return T


def simulate(net: ReactionNetwork, sp: Setpoint | None,
             gains: ControllerGains | None, cfg: SimConfig, x0,
             traj_index: int = 0) -> Trajectory:
    """Integrate one trajectory from x0 = (U, N_1, ..., N_p).

    Uses substream ``traj_index`` of ``cfg.seed``.  Feedback modes require
    a setpoint and gains.  On abort the recorded prefix is returned with
    ``aborted`` set and the reason attached.
    """
    if cfg.mode in ("closed_loop", "deterministic") and (sp is None or gains is None):
        raise ValueError(f"mode {cfg.mode!r} needs a setpoint and gains")
    rng = trajectory_rng(cfg.seed, traj_index) if cfg.noise_on else None
    noise_on = cfg.noise_on

    # Hoisted network constants.  The step below fuses the feedback law and
    # the SDE fields with the exact same scalar operations as control_law
    # and sde_fields, so deterministic runs reproduce the public functions
    # bit for bit (locked by a test); it just avoids re-deriving them
    # through the per-state objects ten thousand times per trajectory.
    rx = net.reactor
    V, P, T_ref, lam, R = rx.V, rx.P, rx.T_ref, rx.lam, rx.R_gas
    PV = P * V
    cp, h_ref, s_ref, c_in = net.cp, net.h_ref, net.s_ref, net.c_in
    nu, zr, zp = net.stoich_net, net.stoich_reactants, net.stoich_products
    k0f, k0b, Ef, Eb = net.k0f, net.k0b, net.Ef, net.Eb
    rho1, rho2, rho3 = net.noise.rho1, net.noise.rho2, net.noise.rho3
    cinh = inlet_enthalpy_density(net)
    sqrt_dt_cache: dict[float, float] = {}
    if sp is not None:
        inv_T_star = 1.0 / sp.T_star
        mu_star = sp.mu_star_over_T
    K = gains.K if gains is not None else None
    u_fixed = (float(cfg.u_open[0]), float(cfg.u_open[1]))
    feedback = cfg.mode in ("closed_loop", "deterministic")

    events: list[tuple[int, str]] = []
    step_no = 0

    def input_at(U: float, N: np.ndarray, T: float, t: float,
                 log: bool = True) -> tuple[float, float]:
        if cfg.mode == "isolated":
            return 0.0, 0.0
        if not feedback or t < cfg.open_loop_until:
            return u_fixed
        h = cp * (T - T_ref) + h_ref
        g00 = cinh - float(N @ h) / V
        dc = c_in - N / V
        grad_U = inv_T_star - 1.0 / T
        x_frac = N / N.sum()
        mu_over_T = -cp * np.log(T / T_ref) + R * np.log(x_frac) - s_ref + h / T
        o1 = g00 * grad_U + float(dc @ (mu_over_T - mu_star))
        o2 = grad_U
        theta = T * T * float(N @ cp)
        hdc = float(h @ dc)
        quad = (hdc ** 2 - theta * R / N.sum() * dc.sum() ** 2
                + theta * R * float(dc @ (dc / N)))
        M = quad - 2.0 * g00 * hdc + g00 * g00
        d1 = 0.5 * rho2 ** 2 * M / theta
        d2 = 0.5 * rho3 ** 2 / theta
        q_raw, Qdot = solve_feedback(K, d1, d2, o1, o2)
        q = q_raw
        if cfg.clamp:
            q = min(max(q_raw, 0.0), cfg.q_max)
            if log and q != q_raw:
                events.append((step_no, "q_clamp"))
        return q, Qdot

    def advance(U: float, N: np.ndarray, T: float, t: float, dt: float,
                depth: int) -> tuple[float, np.ndarray, float]:
        q, Qdot = input_at(U, N, T, t)
        h = cp * (T - T_ref) + h_ref
        g00 = cinh - float(N @ h) / V
        dc = c_in - N / V
        RT = R * T
        c = N / V
        kf = k0f * np.exp(-Ef / RT)
        kb = k0b * np.exp(-Eb / RT)
        rate_net = (kf * np.prod(c[:, None] ** zr, axis=0)
                    - kb * np.prod(c[:, None] ** zp, axis=0))
        flux = V * (nu @ rate_net)
        U_new = U + (g00 * q + Qdot) * dt
        N_new = N + (flux + q * dc) * dt
        if noise_on:
            sqdt = sqrt_dt_cache.get(dt)
            if sqdt is None:
                sqdt = sqrt_dt_cache[dt] = math.sqrt(dt)
            dW = rng.standard_normal(3) * sqdt
            U_new += rho2 * q * g00 * dW[1] + rho3 * Qdot * dW[2]
            N_new = N_new + (rho1 * flux) * dW[0] + (rho2 * q * dc) * dW[1]
        if not (math.isfinite(U_new) and np.all(np.isfinite(N_new))):
            raise SimulationAbort("non-finite state update")
        low = N_new < N_TRAJ_FLOOR
        if np.any(low):
            for j in np.flatnonzero(low):
                events.append((step_no, f"floor_{net.species_names[j]}"))
            N_new = np.maximum(N_new, N_TRAJ_FLOOR)
        T_new = T_ref + (U_new + PV - float(N_new @ h_ref)) / float(N_new @ cp)
        if not T_new > 0:
            if depth >= MAX_HALVINGS:
                raise SimulationAbort(
                    f"temperature stayed nonpositive after {MAX_HALVINGS} "
                    f"step halvings at t={t:.6g}")
            events.append((step_no, "halve"))
            U_h, N_h, T_h = advance(U, N, T, t, 0.5 * dt, depth + 1)
            return advance(U_h, N_h, T_h, t + 0.5 * dt, 0.5 * dt, depth + 1)
        return U_new, N_new, T_new

    n_steps = cfg.n_steps
    record_steps = sorted({0, n_steps} | set(range(0, n_steps + 1,
                                                   cfg.record_every)))
    times, states, Ts, Ss, avs, qs, Qs, Tws = ([] for _ in range(8))

    def record(U: float, N: np.ndarray, T: float, t: float):
        st = ThermoState.from_energy(net, U, N)
        q, Qdot = input_at(U, N, T, t, log=False)
        times.append(t)
        states.append(st.x)
        Ts.append(st.T)
        Ss.append(st.S)
        avs.append(availability(net, sp, st.x) if sp is not None else math.nan)
        qs.append(q)
        Qs.append(Qdot)
        Tws.append(Qdot / lam + st.T if lam > 0 else math.nan)

    st0 = x0 if isinstance(x0, ThermoState) else ThermoState.from_vector(net, x0)
    U_cur, N_cur, T_cur = st0.U, st0.N.copy(), st0.T
    aborted = False
    reason = None
    record(U_cur, N_cur, T_cur, 0.0)
    rec_idx = 1
    try:
        for k in range(n_steps):
            step_no = k + 1
            U_cur, N_cur, T_cur = advance(U_cur, N_cur, T_cur, k * cfg.dt,
                                          cfg.dt, 0)
            if rec_idx < len(record_steps) and step_no == record_steps[rec_idx]:
                record(U_cur, N_cur, T_cur, step_no * cfg.dt)
                rec_idx += 1
    except SimulationAbort as exc:
        aborted = True
        reason = str(exc)

    return Trajectory(
        index=traj_index,
        times=np.array(times),
        states=np.array(states),
        T=np.array(Ts),
        S=np.array(Ss),
        avail=np.array(avs),
        q=np.array(qs),
        Qdot=np.array(Qs),
        T_w=np.array(Tws),
        events=events,
        aborted=aborted,
        abort_reason=reason,
    )


SERIES = ("U", "N", "T", "S", "avail", "q", "Qdot", "T_w")


@dataclass
class EnsembleStats:
    """Checkpoint statistics over an ensemble plus per-trajectory terminal
    errors.  Aborted trajectories are kept in ``trajectories`` but are
    excluded from the statistics."""

    times: np.ndarray
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    stabilization_probability: float
    terminal_T_error: np.ndarray
    terminal_N_error: np.ndarray
    sup_scaled_error: np.ndarray
    n_aborted: int
    trajectories: list[Trajectory]


def _series_matrix(trajs: list[Trajectory], name: str) -> np.ndarray:
    if name == "N":
        return np.stack([tr.N for tr in trajs])
    return np.stack([getattr(tr, name) for tr in trajs])


def scaled_errors(traj: Trajectory, sp: Setpoint) -> np.ndarray:
    """Per-checkpoint relative distance to the setpoint: the 2-norm of
    (x - x*) scaled componentwise by (|U*|, N*)."""
    scale = np.concatenate(([max(abs(sp.U_star), 1.0)], sp.N_star))
    return np.linalg.norm((traj.states - sp.x_star) / scale, axis=1)


def stability_estimate(trajs: list[Trajectory], sp: Setpoint,
                       eps: float) -> float:
    """Fraction of trajectories whose scaled distance to the setpoint
    stays strictly inside eps over the whole recorded window."""
    if not trajs:
        return 0.0
    inside = [float(np.max(scaled_errors(tr, sp))) < eps for tr in trajs]
    return sum(inside) / len(trajs)


def ensemble(net: ReactionNetwork, sp: Setpoint | None,
             gains: ControllerGains | None, cfg: SimConfig, x0) -> EnsembleStats:
    """Run cfg.n_traj trajectories on substreams 0..n_traj-1 and
    aggregate checkpoint statistics."""
    trajs = [simulate(net, sp, gains, cfg, x0, traj_index=i)
             for i in range(cfg.n_traj)]
    ok = [tr for tr in trajs if not tr.aborted]
    if not ok:
        raise SimulationAbort("every trajectory aborted")
    times = ok[0].times
    mean: dict[str, np.ndarray] = {}
    std: dict[str, np.ndarray] = {}
    for name in SERIES:
        stack = _series_matrix(ok, name)
        mean[name] = stack.mean(axis=0)
        std[name] = stack.std(axis=0)
    if sp is not None:
        terminal_T = np.array([abs(tr.T[-1] - sp.T_star) for tr in ok])
        terminal_N = np.array([float(np.linalg.norm(tr.N[-1] - sp.N_star))
                               for tr in ok])
        sup_err = np.array([float(np.max(scaled_errors(tr, sp))) for tr in ok])
        prob = stability_estimate(ok, sp, cfg.eps)
    else:
        terminal_T = terminal_N = sup_err = np.full(len(ok), math.nan)
        prob = math.nan
    return EnsembleStats(
        times=times,
        mean=mean,
        std=std,
        stabilization_probability=prob,
        terminal_T_error=terminal_T,
        terminal_N_error=terminal_N,
        sup_scaled_error=sup_err,
        n_aborted=len(trajs) - len(ok),
        trajectories=trajs,
    )
