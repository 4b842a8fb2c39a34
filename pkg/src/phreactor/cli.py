"""Command line front end: condition checks, steady-state tables, and
seeded trajectory/ensemble CSV artifacts.

Four subcommands share the flags --network (config file), --out (artifact
directory, default ``.``), and --seed where randomness is involved:

* ``check``       evaluate the noise bounds, the storage passivity
                  conditions, and the setpoint-shift residual at a state;
* ``equilibria``  tabulate every steady state under a constant flow and
                  jacket temperature over a temperature window;
* ``simulate``    integrate trajectories and write per-trajectory and
                  ensemble-summary CSV files;
* ``casestudy``   one-command run of the bundled benchmark stabilization
                  ensemble (64 trajectories, seed 42).

Exit codes: 0 success, 1 input error (unreadable flags or config), 2 a
checked condition failed under ``check --strict``, 3 a simulation aborted.

Every CSV uses '.' as the decimal mark, 17-significant-digit floats, LF
line endings, and always carries a header row, so repeated seeded runs
are byte-identical.  The trajectory schema is

    t, U, N_<species>..., T, S, H_bar, q, Qdot, T_w, events

where H_bar is the stored availability relative to the setpoint (nan when
no setpoint is in play) and events aggregates guard events since the
previous row as ``code:count`` pairs joined by ';'.  The summary schema is
``t`` followed by ``mean_<col>, std_<col>`` for each numeric trajectory
column, with a final ``stabilization_probability,<value>`` footer row.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import presets
from .control import ControllerGains, Q_MAX_DEFAULT
from .equilibrium import ConvergenceError, drift_residual, steady_states
from .network import ReactionNetwork, parse_network, serialize_network
from .sim import EnsembleStats, SimConfig, SimulationAbort, Trajectory, ensemble
from .structure import (
    check_input_noise_bound,
    check_passivity,
    check_reaction_noise_bound,
)
from .thermo import ThermoDomainError, ThermoState
from .transform import (
    AvailabilityHamiltonian,
    Setpoint,
    equivalence_residual,
    make_setpoint,
    setpoint_from_state,
)


class CliError(Exception):
    """Input error surfaced as exit code 1."""


def _fmt(value: float) -> str:
    """17-significant-digit decimal rendering used in every CSV cell."""
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows: list[list[str]],
               footer: list[str] | None = None) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    if footer is not None:
        lines.append(",".join(footer))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _parse_floats(text: str, flag: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")])
    except ValueError:
        raise CliError(f"{flag} expects comma-separated numbers, got {text!r}")


def _load_network(path: str | None) -> ReactionNetwork:
    if path is None:
        raise CliError("--network is required for this subcommand")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read network config: {exc}")
    return parse_network(text)


def _state_from_flags(net: ReactionNetwork, T: float, N_text: str,
                      flag: str) -> ThermoState:
    N = _parse_floats(N_text, flag)
    if N.size != net.n_species:
        raise CliError(f"{flag} must list {net.n_species} mole numbers, "
                       f"got {N.size}")
    return ThermoState.from_temperature(net, N, T)


def _setpoint_from_flags(net: ReactionNetwork, args) -> Setpoint:
    if args.setpoint_T is None or args.setpoint_q is None:
        raise CliError("--setpoint-T and --setpoint-q are required")
    if args.setpoint_N is not None:
        N = _parse_floats(args.setpoint_N, "--setpoint-N")
        if N.size != net.n_species:
            raise CliError(f"--setpoint-N must list {net.n_species} mole "
                           f"numbers, got {N.size}")
        return setpoint_from_state(net, N, args.setpoint_T, args.setpoint_q)
    return make_setpoint(net, args.setpoint_T, args.setpoint_q)


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    net = _load_network(args.network)
    state = _state_from_flags(net, args.T, args.N, "--N")
    sp = _setpoint_from_flags(net, args)
    field = AvailabilityHamiltonian(net, sp)

    norm = check_input_noise_bound(net, state)
    pas = check_passivity(net, state, field)
    rxn = check_reaction_noise_bound(net, state, V_star=sp.V_star)
    residual = equivalence_residual(net, sp, state.x)
    all_hold = norm.holds and pas.holds and rxn.holds

    def verdict(flag: bool) -> str:
        return "holds" if flag else "FAILS"

    print(f"input-noise bound     {verdict(norm.holds)}   "
          f"lhs={norm.lhs:.6g} rhs={norm.rhs:.6g} "
          f"(feedthrough norm {norm.delta_frobenius:.3g})")
    print(f"storage trace bound   {verdict(pas.trace_holds)}   "
          f"lhs={pas.trace_lhs:.6g} rhs={pas.trace_rhs:.6g}")
    print(f"feedthrough PSD       {verdict(pas.feedthrough_holds)}   "
          f"min eig={pas.feedthrough_min_eig:.3g}")
    print(f"reaction-noise bound  {verdict(rxn.holds)}   "
          f"lhs={rxn.lhs:.6g} rhs={rxn.rhs:.6g}")
    print(f"setpoint-shift residual = {residual:.6g}")
    print("all conditions hold" if all_hold else "some condition FAILS")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["all_hold",
              "input_noise_holds", "input_noise_lhs", "input_noise_rhs",
              "feedthrough_norm",
              "trace_holds", "trace_lhs", "trace_rhs",
              "feedthrough_psd_holds", "feedthrough_min_eig",
              "reaction_noise_holds", "reaction_noise_lhs",
              "reaction_noise_rhs", "equivalence_residual"]
    row = [str(all_hold).lower(),
           str(norm.holds).lower(), _fmt(norm.lhs), _fmt(norm.rhs),
           _fmt(norm.delta_frobenius),
           str(pas.trace_holds).lower(), _fmt(pas.trace_lhs),
           _fmt(pas.trace_rhs),
           str(pas.feedthrough_holds).lower(), _fmt(pas.feedthrough_min_eig),
           str(rxn.holds).lower(), _fmt(rxn.lhs), _fmt(rxn.rhs),
           _fmt(residual)]
    _write_csv(out / "check.csv", header, [row])

    if args.strict and not all_hold:
        return 2
    return 0


# ---------------------------------------------------------------------------
# equilibria


def cmd_equilibria(args) -> int:
    net = _load_network(args.network)
    roots = steady_states(net, args.q, args.Tw,
                          T_range=(args.Tmin, args.Tmax), grid=args.grid)

    header = (["T"] + [f"N_{name}" for name in net.species_names]
              + ["U", "Qdot_required", "classification", "max_re_lambda",
                 "residual"])
    rows = []
    for ss in roots:
        x = np.concatenate(([ss.U], ss.N))
        res = drift_residual(net, x, (ss.q, ss.Qdot))
        max_re = float(np.max(ss.eigenvalues.real))
        rows.append([_fmt(ss.T)] + [_fmt(n) for n in ss.N]
                    + [_fmt(ss.U), _fmt(ss.Qdot), ss.classification,
                       _fmt(max_re), _fmt(res)])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "equilibria.csv", header, rows)

    if not roots:
        print(f"no steady states in [{args.Tmin}, {args.Tmax}] K")
    for ss in roots:
        print(f"T={ss.T:.4f} K  N=({', '.join(f'{n:.6g}' for n in ss.N)}) mol"
              f"  U={ss.U:.6g} J  Qdot={ss.Qdot:.6g} W  {ss.classification}")
    print(f"wrote {out / 'equilibria.csv'}")
    return 0


# ---------------------------------------------------------------------------
# simulate / casestudy


def _record_steps(cfg: SimConfig) -> list[int]:
    n = cfg.n_steps
    return sorted({0, n} | set(range(0, n + 1, cfg.record_every)))


def _event_cells(traj: Trajectory, steps: list[int]) -> list[str]:
    """One events cell per recorded row: guard events since the previous
    row as sorted ``code:count`` pairs; abort lands on the last row."""
    n_rows = len(traj.times)
    cells = []
    for i in range(n_rows):
        lo = steps[i - 1] if i > 0 else -1
        hi = steps[i] if i < n_rows - 1 or not traj.aborted else float("inf")
        counts: dict[str, int] = {}
        for step, code in traj.events:
            if lo < step <= hi:
                counts[code] = counts.get(code, 0) + 1
        if i == n_rows - 1 and traj.aborted:
            counts["abort"] = 1
        cells.append(";".join(f"{code}:{n}" for code, n in sorted(counts.items())))
    return cells


def _write_trajectory(path: Path, net: ReactionNetwork, traj: Trajectory,
                      steps: list[int]) -> None:
    header = (["t", "U"] + [f"N_{name}" for name in net.species_names]
              + ["T", "S", "H_bar", "q", "Qdot", "T_w", "events"])
    cells = _event_cells(traj, steps)
    rows = []
    for i in range(len(traj.times)):
        rows.append([_fmt(traj.times[i]), _fmt(traj.U[i])]
                    + [_fmt(v) for v in traj.N[i]]
                    + [_fmt(traj.T[i]), _fmt(traj.S[i]), _fmt(traj.avail[i]),
                       _fmt(traj.q[i]), _fmt(traj.Qdot[i]), _fmt(traj.T_w[i]),
                       cells[i]])
    _write_csv(path, header, rows)


def _write_summary(path: Path, net: ReactionNetwork,
                   stats: EnsembleStats) -> None:
    cols = (["U"] + [f"N_{name}" for name in net.species_names]
            + ["T", "S", "H_bar", "q", "Qdot", "T_w"])
    header = ["t"]
    for col in cols:
        header += [f"mean_{col}", f"std_{col}"]

    def series(store: dict[str, np.ndarray], i: int) -> list[float]:
        values = [store["U"][i]]
        values += list(store["N"][i])
        values += [store[name][i] for name in ("T", "S", "avail", "q",
                                               "Qdot", "T_w")]
        return values

    rows = []
    for i in range(len(stats.times)):
        row = [_fmt(stats.times[i])]
        for m, s in zip(series(stats.mean, i), series(stats.std, i)):
            row += [_fmt(m), _fmt(s)]
        rows.append(row)
    footer = ["stabilization_probability", _fmt(stats.stabilization_probability)]
    _write_csv(path, header, rows, footer=footer)


def _run_ensemble(net: ReactionNetwork, sp: Setpoint | None,
                  gains: ControllerGains | None, cfg: SimConfig,
                  x0, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    try:
        stats = ensemble(net, sp, gains, cfg, x0)
    except SimulationAbort as exc:
        print(f"phreactor: simulation aborted: {exc}", file=sys.stderr)
        return 3
    steps = _record_steps(cfg)
    for traj in stats.trajectories:
        _write_trajectory(out / f"traj_{traj.index:03d}.csv", net, traj, steps)
    _write_summary(out / "summary.csv", net, stats)

    n = len(stats.trajectories)
    print(f"{n} trajectories, {stats.n_aborted} aborted; "
          f"wrote {out / 'summary.csv'}")
    if sp is not None and stats.n_aborted < n:
        print(f"mean terminal T = {stats.mean['T'][-1]:.4f} K "
              f"(target {sp.T_star:.4f} K); "
              f"mean |T error| = {np.mean(stats.terminal_T_error):.4g} K; "
              f"stabilization probability = "
              f"{stats.stabilization_probability:.4g}")
    if stats.n_aborted:
        for traj in stats.trajectories:
            if traj.aborted:
                print(f"trajectory {traj.index} aborted: {traj.abort_reason}",
                      file=sys.stderr)
        return 3
    return 0


def cmd_simulate(args) -> int:
    net = _load_network(args.network)
    cfg = SimConfig(
        dt=args.dt, t_end=args.t_end,
        seed=args.seed if args.seed is not None else 0,
        n_traj=args.n_traj, record_every=args.record_every, mode=args.mode,
        u_open=(args.q_open, args.Qdot_open),
        open_loop_until=args.open_until,
        clamp=not args.no_clamp, q_max=args.q_max, eps=args.eps,
    )
    x0 = _state_from_flags(net, args.T0, args.N0, "--N0")

    needs_feedback = cfg.mode in ("closed_loop", "deterministic")
    sp = None
    gains = None
    if needs_feedback or args.setpoint_T is not None:
        sp = _setpoint_from_flags(net, args)
        gains = ControllerGains.diagonal(args.k_flow, args.k_heat)
    return _run_ensemble(net, sp, gains, cfg, x0, Path(args.out))


def cmd_casestudy(args) -> int:
    net = presets.benchmark_network()
    sp = presets.benchmark_setpoint(net)
    gains = presets.benchmark_gains()
    x0 = presets.benchmark_initial_state(net)
    cfg = SimConfig(
        dt=args.dt, t_end=args.t_end,
        seed=args.seed if args.seed is not None else 42,
        n_traj=args.n_traj, record_every=args.record_every,
        mode=args.mode,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "network.cfg").write_text(serialize_network(net), newline="\n")
    print(f"benchmark: T*={sp.T_star} K, q*={sp.q_star} m^3/s, "
          f"N*=({', '.join(f'{n:.6g}' for n in sp.N_star)}) mol, "
          f"seed {cfg.seed}, {cfg.n_traj} trajectories")
    return _run_ensemble(net, sp, gains, cfg, x0, out)


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1 (input error)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--network", metavar="PATH",
                        help="reaction network config file")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="directory for CSV artifacts (default: .)")
    common.add_argument("--seed", type=int, default=None,
                        help="master seed for stochastic runs")

    parser = _Parser(prog="phreactor",
                     description="Stochastic port-Hamiltonian reactor "
                                 "toolkit: checks, steady states, and "
                                 "seeded simulations.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def setpoint_flags(p):
        p.add_argument("--setpoint-T", type=float, metavar="K",
                       help="target temperature")
        p.add_argument("--setpoint-q", type=float, metavar="M3_S",
                       help="target flow")
        p.add_argument("--setpoint-N", metavar="MOLES",
                       help="target mole numbers (comma separated); "
                            "omitted: solve the stationary mole balance")

    p = sub.add_parser("check", parents=[common],
                       help="evaluate passivity and noise-bound conditions "
                            "at a state")
    p.add_argument("--T", type=float, required=True, metavar="K",
                   help="temperature of the evaluation state")
    p.add_argument("--N", required=True, metavar="MOLES",
                   help="mole numbers of the evaluation state "
                        "(comma separated)")
    setpoint_flags(p)
    p.add_argument("--strict", action="store_true",
                   help="exit with code 2 if any condition fails")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("equilibria", parents=[common],
                       help="tabulate steady states under constant flow "
                            "and jacket temperature")
    p.add_argument("--q", type=float, required=True, metavar="M3_S",
                   help="flow")
    p.add_argument("--Tw", type=float, required=True, metavar="K",
                   help="jacket temperature")
    p.add_argument("--Tmin", type=float, default=250.0, metavar="K")
    p.add_argument("--Tmax", type=float, default=500.0, metavar="K")
    p.add_argument("--grid", type=int, default=2000,
                   help="temperature scan points (default: 2000)")
    p.set_defaults(func=cmd_equilibria)

    def sim_flags(p, dt=1e-3, t_end=10.0, n_traj=1):
        p.add_argument("--dt", type=float, default=dt,
                       help=f"time step (default: {dt})")
        p.add_argument("--t-end", type=float, default=t_end,
                       help=f"horizon (default: {t_end})")
        p.add_argument("--n-traj", type=int, default=n_traj,
                       help=f"ensemble size (default: {n_traj})")
        p.add_argument("--record-every", type=int, default=10,
                       help="record every k-th step (default: 10)")

    p = sub.add_parser("simulate", parents=[common],
                       help="integrate trajectories and write CSV files")
    p.add_argument("--T0", type=float, required=True, metavar="K",
                   help="initial temperature")
    p.add_argument("--N0", required=True, metavar="MOLES",
                   help="initial mole numbers (comma separated)")
    p.add_argument("--mode", default="closed_loop",
                   choices=("closed_loop", "open_loop", "deterministic",
                            "isolated"))
    sim_flags(p)
    setpoint_flags(p)
    p.add_argument("--k-flow", type=float, default=presets.K_FLOW,
                   help="flow-channel gain")
    p.add_argument("--k-heat", type=float, default=presets.K_HEAT,
                   help="heat-channel gain")
    p.add_argument("--q-open", type=float, default=0.0,
                   help="open-loop flow input")
    p.add_argument("--Qdot-open", type=float, default=0.0,
                   help="open-loop heat input")
    p.add_argument("--open-until", type=float, default=0.0,
                   help="apply the open-loop input before this time")
    p.add_argument("--q-max", type=float, default=Q_MAX_DEFAULT,
                   help="flow clamp ceiling")
    p.add_argument("--no-clamp", action="store_true",
                   help="disable the flow clamp")
    p.add_argument("--eps", type=float, default=0.05,
                   help="scaled ball radius of the stabilization estimate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("casestudy", parents=[common],
                       help="run the bundled benchmark stabilization "
                            "ensemble")
    sim_flags(p, n_traj=64)
    p.add_argument("--mode", default="closed_loop",
                   choices=("closed_loop", "deterministic"))
    p.set_defaults(func=cmd_casestudy)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, ThermoDomainError, ConvergenceError,
            OSError) as exc:
        print(f"phreactor: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
