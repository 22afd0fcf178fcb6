"""Command-line surface for running the protocols, sweeps, and verifications.

Every command prints a single flat JSON summary to stdout, except sweep and
steady which print a CSV table; trajectory CSVs are written on request.
Output is deterministic: identical flags (and seed) reproduce identical bytes,
apart from the wall-clock runtime_seconds field.

Exit codes: 0 success, 2 invalid arguments, 3 numerical or validation failure.
Units: gamma = 1 defines the unit of time unless overridden; all rates and
velocities are quoted in these units.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import bath, fivelevel, fourlevel, geomphase, lindblad
from .errors import ArgumentError, NumericsError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_BERRY_POINTS = 10_000


def _positive(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(x) and x > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _squeezing_amplitude(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(x) and 0.0 <= x <= bath.R_MAX):
        raise argparse.ArgumentTypeError(f"must lie in [0, {bath.R_MAX}], got {text}")
    return x


def _finite(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return x


def _positive_int(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return x


def _nonnegative_int(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return x


def _phidot_list(text):
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")
    if not values or any(not (math.isfinite(x) and x > 0) for x in values):
        raise argparse.ArgumentTypeError("phidot list entries must be positive")
    return values


def _fmt(x) -> str:
    """Decimal float with 17 significant digits (CSV convention)."""
    return format(float(x), ".17g")


def _config_string(args, keys) -> str:
    parts = [f"command={args.command}"]
    parts += [f"{key}={getattr(args, key)!r}" for key in keys]
    return " ".join(parts)


def _emit_summary(summary: dict):
    sys.stdout.write(json.dumps(summary) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _csv_to_stream(stream, header, rows):
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(x) for x in row) + "\n")


def _trajectory_rows(traj, names):
    for idx, t in enumerate(traj.times):
        row = [t]
        for name in names:
            val = traj.observables[name][idx]
            row.extend((val.real, val.imag))
        yield row


def _write_trajectory_csv(path, traj, names):
    header = ["t"]
    for name in names:
        header.extend((f"re_{name}", f"im_{name}"))
    _write_csv(path, header, _trajectory_rows(traj, names))


def cmd_four_level(args) -> int:
    p = bath.make_squeezing(args.r, 0.0, args.gamma)
    sched = bath.LoopSchedule(args.phi0, args.phidot, args.loops)
    started = time.perf_counter()
    run = fourlevel.run_full_loop(p, sched, step=args.step)
    runtime = time.perf_counter() - started
    args.step = run.step  # echo the resolved default into the config string
    berry = geomphase.discrete_berry_phase(
        geomphase.dark_state_loop(args.r, args.berry_points, phi0=args.phi0))
    if args.csv:
        _write_trajectory_csv(args.csv, run.trajectory, ["dark", "orth"])
    _emit_summary({
        "chi_measured": run.phase.geometric_phase,
        "chi_analytic": geomphase.analytic_dark_phase(args.r),
        "chi_berry_integral": berry,
        "visibility": run.phase.visibility,
        "visibility_predicted": run.phase.prediction_visibility,
        "closure_residual": fourlevel.closure_residual(run),
        "runtime_seconds": runtime,
        "config": _config_string(
            args, ["r", "gamma", "phidot", "step", "loops", "phi0", "berry_points"]),
    })
    return EXIT_OK


def cmd_five_level(args) -> int:
    p1 = bath.make_squeezing(args.r1, 0.0, args.gamma1)
    p2 = bath.make_squeezing(args.r2, 0.0, args.gamma2)
    sched = bath.LoopSchedule(args.phi0, args.phidot, args.loops)
    run = fivelevel.run_full_loop(p1, p2, sched, step=args.step)
    args.step = run.step
    measured = run.phase.geometric_phase
    if args.csv:
        _write_trajectory_csv(args.csv, run.trajectory, ["v11", "v12", "v21", "v22"])
    _emit_summary({
        "delta_chi_measured": measured,
        "delta_chi_magnitude": abs(measured),
        "delta_chi_analytic": (geomphase.analytic_dark_phase(args.r1)
                               - geomphase.analytic_dark_phase(args.r2)),
        "polarization_angle": run.polarization_angle,
        "visibility": run.phase.visibility,
        "closure_residual": fivelevel.closure_residual(run),
        "config": _config_string(
            args, ["r1", "r2", "gamma1", "gamma2", "phidot", "step", "loops", "phi0"]),
    })
    return EXIT_OK


def cmd_sweep(args) -> int:
    p = bath.make_squeezing(args.r, 0.0, args.gamma)
    step_rule = None if args.step is None else (lambda phi_dot: args.step)
    points = fourlevel.adiabatic_sweep(p, args.phidot_list, step_rule=step_rule,
                                       jobs=args.jobs)
    header = ["phidot", "phase_error", "visibility_loss", "predicted_loss"]
    rows = [(pt.phi_dot, pt.phase_error, pt.visibility_loss, pt.predicted_loss)
            for pt in points]
    if args.csv:
        _write_csv(args.csv, header, rows)
    else:
        _csv_to_stream(sys.stdout, header, rows)
    return EXIT_OK


def cmd_steady(args) -> int:
    p = bath.make_squeezing(args.r, args.phi0, args.gamma)
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[1, 1] = 1.0  # start from |0><0|, the fully coupled middle level
    report = lindblad.steady_state_report(p, rho0, args.tmax, args.step)
    rows = zip(report.times, report.fidelities)
    header = ["t", "fidelity"]
    if args.csv:
        _write_csv(args.csv, header, rows)
    else:
        _csv_to_stream(sys.stdout, header, rows)
    return EXIT_OK


def cmd_berry(args) -> int:
    loop = geomphase.dark_state_loop(args.r, args.points, phi0=args.phi0)
    _emit_summary({
        "phase": geomphase.discrete_berry_phase(loop),
        "config": _config_string(args, ["r", "points", "phi0"]),
    })
    return EXIT_OK


def cmd_spin_half(args) -> int:
    loop = geomphase.SpinLoop(args.theta, args.points)
    _emit_summary({
        "phase": geomphase.discrete_berry_phase(loop.up_states()),
        "config": _config_string(args, ["theta", "points"]),
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    checks = []

    single = [bath.make_squeezing(rng.uniform(0.0, 3.0), rng.uniform(0.0, 2 * math.pi), 1.0)
              for _ in range(args.draws)]

    resid = 0.0
    for p in single:
        resid = max(resid, abs(p.c ** 2 + p.s ** 2 - 1.0))
    checks.append(("squeeze_normalization", resid, 1e-12))

    resid = 0.0
    for p in single:
        m = bath.bath_moments(p)
        target = m.n_thermal * (m.n_thermal + 1.0)
        resid = max(resid, abs(abs(m.m_anomalous) ** 2 - target) / max(1.0, target))
    checks.append(("moment_identity", resid, 1e-10))

    ladder = bath.ladder_operator(3, 1)
    dark_resid = 0.0
    orth_resid = 0.0
    overlap_resid = 0.0
    for p in single:
        jump = bath.dressed_operator(p, ladder)
        dark = bath.dark_state(p)
        orth = bath.orthogonal_state(p)
        dark_resid = max(dark_resid, float(np.linalg.norm(jump @ dark)))
        orth_resid = max(orth_resid, float(np.linalg.norm(
            jump.conj().T @ (jump @ orth) - math.cosh(2 * p.r) * orth)))
        overlap_resid = max(overlap_resid, abs(np.vdot(dark, orth)))
    checks.append(("dark_kernel", dark_resid, 1e-12))
    checks.append(("orth_eigen", orth_resid, 1e-12))
    checks.append(("orthogonality", overlap_resid, 1e-12))

    cross_resid = 0.0
    tensor_resid = 0.0
    for _ in range(args.draws):
        p1 = bath.make_squeezing(rng.uniform(0.0, 3.0), rng.uniform(0.0, 2 * math.pi), 1.0)
        p2 = bath.make_squeezing(rng.uniform(0.0, 3.0), rng.uniform(0.0, 2 * math.pi), 1.0)
        cross_resid = max(cross_resid, max(fivelevel.identity_residuals(p1, p2).values()))
        phi_dot = rng.uniform(1e-4, 1e-1)
        k = fivelevel.two_channel_generator(p1, p2, phi_dot).matrix
        explicit = fivelevel.explicit_two_channel_matrix(p1, p2, phi_dot)
        tensor_resid = max(tensor_resid, float(np.max(np.abs(k - explicit))))
    checks.append(("five_level_identities", cross_resid, 1e-12))
    checks.append(("tensor_structure", tensor_resid, 1e-14))

    resid = 0.0
    for _ in range(args.draws):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        rho = a @ a.conj().T
        rho /= rho.trace()
        p = bath.make_squeezing(rng.uniform(0.0, 3.0), rng.uniform(0.0, 2 * math.pi), 1.0)
        channels = [lindblad.Channel(p.gamma, bath.dressed_operator(p, ladder))]
        resid = max(resid, abs(lindblad.dissipator_apply(rho, channels).trace()))
    checks.append(("dissipator_traceless", resid, 1e-12))

    summary = {}
    all_pass = True
    for name, resid, tol in checks:
        ok = resid <= tol
        all_pass &= ok
        summary[f"{name}_residual"] = resid
        summary[f"{name}_status"] = "PASS" if ok else "FAIL"
    summary["all_status"] = "PASS" if all_pass else "FAIL"
    summary["config"] = _config_string(args, ["seed", "draws"])
    _emit_summary(summary)
    return EXIT_OK if all_pass else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkphase",
        description="Geometric phases from cyclically modulated squeezed-bath dissipation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_loop_options(sp):
        sp.add_argument("--phidot", type=_positive, required=True,
                        help="phase velocity of the squeezing loop (rad per unit time)")
        sp.add_argument("--step", type=_positive, default=None,
                        help="integrator step (default 1e-2 / gamma_tilde)")
        sp.add_argument("--loops", type=_positive_int, default=1,
                        help="number of 2*pi loops (default 1)")
        sp.add_argument("--phi0", type=_finite, default=0.0,
                        help="initial squeezing phase (default 0)")
        sp.add_argument("--csv", default=None,
                        help="write the tracked-coherence trajectory to this CSV file")

    sp = sub.add_parser("four-level", help="single-channel loop with a reference level")
    sp.add_argument("--r", type=_squeezing_amplitude, required=True,
                    help="squeezing amplitude")
    sp.add_argument("--gamma", type=_positive, default=1.0, help="bare decay rate")
    add_loop_options(sp)
    sp.add_argument("--berry-points", dest="berry_points", type=_positive_int,
                    default=DEFAULT_BERRY_POINTS,
                    help="samples for the reference Berry-connection integral")
    sp.set_defaults(func=cmd_four_level)

    sp = sub.add_parser("five-level", help="two-channel loop with polarization readout")
    sp.add_argument("--r1", type=_squeezing_amplitude, required=True)
    sp.add_argument("--r2", type=_squeezing_amplitude, required=True)
    sp.add_argument("--gamma1", type=_positive, default=1.0)
    sp.add_argument("--gamma2", type=_positive, default=1.0)
    add_loop_options(sp)
    sp.set_defaults(func=cmd_five_level)

    sp = sub.add_parser("sweep", help="adiabaticity sweep over phase velocities")
    sp.add_argument("--r", type=_squeezing_amplitude, required=True)
    sp.add_argument("--gamma", type=_positive, default=1.0)
    sp.add_argument("--phidot-list", dest="phidot_list", type=_phidot_list, required=True,
                    help="comma-separated phase velocities")
    sp.add_argument("--step", type=_positive, default=None)
    sp.add_argument("--jobs", type=_positive_int, default=1,
                    help="concurrent sweep workers (rows stay in input order)")
    sp.add_argument("--csv", default=None, help="write the table here instead of stdout")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("steady", help="relaxation onto the dark state from |0><0|")
    sp.add_argument("--r", type=_squeezing_amplitude, required=True)
    sp.add_argument("--gamma", type=_positive, default=1.0)
    sp.add_argument("--phi0", type=_finite, default=0.0, help="static squeezing phase")
    sp.add_argument("--tmax", type=_positive, default=50.0)
    sp.add_argument("--step", type=_positive, default=1e-2)
    sp.add_argument("--csv", default=None, help="write the table here instead of stdout")
    sp.set_defaults(func=cmd_steady)

    sp = sub.add_parser("berry", help="discrete Berry-connection integral of the dark loop")
    sp.add_argument("--r", type=_squeezing_amplitude, required=True)
    sp.add_argument("--points", type=_positive_int, default=DEFAULT_BERRY_POINTS)
    sp.add_argument("--phi0", type=_finite, default=0.0)
    sp.set_defaults(func=cmd_berry)

    sp = sub.add_parser("spin-half", help="reference spin-1/2 Berry phase")
    sp.add_argument("--theta", type=_finite, required=True, help="polar angle in [0, pi]")
    sp.add_argument("--points", type=_positive_int, default=DEFAULT_BERRY_POINTS)
    sp.set_defaults(func=cmd_spin_half)

    sp = sub.add_parser("verify", help="randomized checks of the algebraic identities")
    sp.add_argument("--seed", type=_nonnegative_int, default=0)
    sp.add_argument("--draws", type=_positive_int, default=100)
    sp.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"darkphase: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericsError as exc:
        print(f"darkphase: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # Downstream consumer (e.g. head) closed the pipe; not an error.
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
