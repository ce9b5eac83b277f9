"""Command-line experiment runner.

Every subcommand writes CSV artifacts plus ``manifest.txt`` into
``--out-dir``.  Exit codes: 0 success, 2 parameter or phase refusal,
3 numerical validation failure, 4 I/O error.
"""

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import dynamics as dyn
from . import semiclassical as sc
from .exceptions import (
    ConvergenceError,
    CutoffError,
    DomainError,
    EnergyDriftError,
    PhaseError,
)
from .hilbert import embed, spin_operators
from .model import (
    PARAM_KEYS,
    ModelParams,
    build_dicke,
    build_mirror_driven,
    build_normal_phase,
    build_superradiant,
    dicke_parity,
    parse_params_text,
)
from .report import RunManifest, series_plot_script, write_rows
from .spectra import DEFAULT_SEED, ground_state
from .states import fock_state

log = logging.getLogger("dickemirror")

EXIT_OK, EXIT_REFUSED, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
DEFAULT_J_LIST = (1, 3, 7, 15)
G0_NOTE = "artifact default 0.2 (assumed value, override with --g0)"
J_LIST_NOTE = "artifact default 1,3,7,15 (assumed values, override with --J-list)"


class ValidationFailure(Exception):
    """Raised after all artifacts are written when a run fails validation."""


# ---------------------------------------------------------------------------
# argument handling


def _float_list(text):
    text = text.strip()
    if not text:
        return []
    return [float(x) for x in text.split(",")]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model parameters (override --config)")
    g.add_argument("--omega", type=float)
    g.add_argument("--omega0", type=float)
    g.add_argument("--omega-m", dest="omega_m", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--g0", type=float)
    g.add_argument("--J", type=float)
    g.add_argument("--cutoff-field", type=int)
    g.add_argument("--cutoff-mirror", type=int)
    g.add_argument("--cutoff-atom", type=int)
    common.add_argument("--config", help="key=value parameter file")
    common.add_argument("--J-list", dest="J_list", type=_float_list,
                        default=list(DEFAULT_J_LIST), help="comma separated, e.g. 1,3,7,15")
    common.add_argument("--tmax", type=float, help="final time in units of 1/omega")
    common.add_argument("--steps", type=int, help="number of output times")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--out-dir", default="out")
    common.add_argument("--cutoff-tol", type=float, default=dyn.CUTOFF_TOL,
                        help="max allowed population of the top Fock level")
    common.add_argument("--jobs", type=int, default=1, help="parallel per-J workers")
    common.add_argument("--plot", action="store_true", help="also render PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dickemirror", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fig2", parents=[common], help="mirror occupation versus J")
    sub.add_parser("fig3", parents=[common], help="mirror entropy versus J")
    p = sub.add_parser("phase-scan", parents=[common], help="mirror response across lambda_c")
    p.add_argument("--lambda-grid", type=_float_list,
                   default=[round(x, 10) for x in np.arange(0.30, 0.801, 0.05)])
    p = sub.add_parser("classical", parents=[common], help="semiclassical trajectory")
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--dt", type=float, help="RK4 step (default T_m/2000)")
    p.add_argument("--initial", default="fixed-point",
                   help="fixed-point | origin | q1,p1,q2,p2,q3,p3")
    p.add_argument("--drift-bound", type=float, default=1e-6,
                   help="relative energy drift allowed per mirror period")
    sub.add_parser("ground", parents=[common], help="Dicke ground state summary")
    p = sub.add_parser("evolve", parents=[common], help="single mirror trajectory")
    p.add_argument("--hamiltonian", choices=["full", "normal", "superradiant", "mirror"],
                   default="full")
    return parser


def resolve_params(args):
    kwargs = {}
    if args.config:
        with open(args.config) as fh:
            kwargs.update(parse_params_text(fh.read()))
    for attr in ("omega", "omega0", "omega_m", "lam", "g0", "J",
                 "cutoff_field", "cutoff_mirror", "cutoff_atom"):
        value = getattr(args, attr)
        if value is not None:
            kwargs[attr] = value
    return ModelParams(**kwargs)


def _times(args, params, periods):
    t_max = args.tmax if args.tmax is not None else periods * 2 * math.pi / params.omega_m
    steps = args.steps if args.steps is not None else 400
    if t_max <= 0 or steps < 2:
        raise ValueError("need --tmax > 0 and --steps >= 2")
    return np.linspace(0.0, t_max, steps)


def _j_tag(J):
    return f"{J:g}"


def _record_params(manifest, params, args):
    for key, (attr, _) in PARAM_KEYS.items():
        manifest[key] = getattr(params, attr)
    manifest["cutoff_atom_effective"] = params.atom_cutoff
    manifest.update(params.derived(), prefix="derived.")
    manifest["seed"] = args.seed
    manifest["g0_source"] = G0_NOTE if args.g0 is None else "user"
    manifest["units"] = "energies in units of omega; t in units of 1/omega"


def _refuse_normal_phase(params):
    if params.lam <= params.lambda_c:
        raise PhaseError(
            f"lambda={params.lam:g} is not in the super-radiant phase; this recipe needs lambda > lambda_c",
            params.lambda_c,
            params.mu,
        )


def _check_cutoffs(manifest, runs, tol):
    bad = []
    for J, run in runs.items():
        d = run.diagnostics
        worst = max(v for k, v in d.items() if k.startswith("top_population"))
        manifest[f"cutoff.J{_j_tag(J)}.top_population_field"] = d["top_population_field"]
        manifest[f"cutoff.J{_j_tag(J)}.top_population_mirror"] = d["top_population_mirror"]
        manifest[f"cutoff.J{_j_tag(J)}.ok"] = worst <= tol
        if worst > tol:
            bad.append(f"J={_j_tag(J)} (top population {worst:.3g})")
    manifest["cutoff_tolerance"] = tol
    if bad:
        raise ValidationFailure("cutoff validation failed for " + ", ".join(bad))


def _run_diagnostics(manifest, runs):
    for J, run in runs.items():
        d = run.diagnostics
        tag = _j_tag(J)
        for key in ("ground_energy", "ground_gap", "ground_degenerate", "norm_drift", "energy_drift"):
            if key in d:
                manifest[f"run.J{tag}.{key}"] = d[key]
    manifest["parity_sector"] = "even"


# ---------------------------------------------------------------------------
# subcommands


def cmd_fig2(args, params, manifest):
    _refuse_normal_phase(params)
    times = _times(args, params, periods=2)
    manifest["J_list"] = args.J_list
    manifest["J_list_source"] = J_LIST_NOTE if args.J_list == list(DEFAULT_J_LIST) else "user"
    runs = dyn.run_many(params, args.J_list, times, jobs=args.jobs, seed=args.seed,
                        cutoff_tol=math.inf)
    tl = dyn.limit_series(params, times)
    period = 2 * math.pi / params.omega_m
    tl_window = tl.window(period)
    names, rows = [], []
    for J in args.J_list:
        name = f"occupation_J{_j_tag(J)}.csv"
        runs[J].occupation.to_csv(manifest.add_file(name))
        names.append(name)
        dist = runs[J].occupation.window(period).linf_distance(tl_window)
        rows.append((J, dist))
        manifest[f"linf_distance.J{_j_tag(J)}"] = dist
    tl.to_csv(manifest.add_file("occupation_TL.csv"))
    names.append("occupation_TL.csv")
    write_rows(manifest.add_file("convergence.csv"), ["J", "linf_distance"], rows)
    dists = [r[1] for r in rows]
    manifest["linf_distance_decreasing"] = all(a > b for a, b in zip(dists, dists[1:]))
    _write_script(manifest, "plot_fig2.py", series_plot_script(names, "occupation"))
    if args.plot:
        from .plotting import plot_occupation

        plot_occupation([runs[J].occupation for J in args.J_list], tl, manifest.add_file("fig2.png"))
    _run_diagnostics(manifest, runs)
    _check_cutoffs(manifest, runs, args.cutoff_tol)


def cmd_fig3(args, params, manifest):
    _refuse_normal_phase(params)
    times = _times(args, params, periods=2)
    manifest["J_list"] = args.J_list
    manifest["J_list_source"] = J_LIST_NOTE if args.J_list == list(DEFAULT_J_LIST) else "user"
    runs = dyn.run_many(params, args.J_list, times, jobs=args.jobs, seed=args.seed,
                        cutoff_tol=math.inf)
    names, rows = [], []
    for J in args.J_list:
        name = f"entropy_J{_j_tag(J)}.csv"
        series = runs[J].entropy
        series.to_csv(manifest.add_file(name))
        names.append(name)
        rows.append((J, float(series.values[0]), float(series.values.max())))
    write_rows(manifest.add_file("entropy_summary.csv"), ["J", "entropy_t0", "max_entropy"], rows)
    peaks = [r[2] for r in rows]
    manifest["max_entropy_decreasing"] = all(a > b for a, b in zip(peaks, peaks[1:]))
    _write_script(manifest, "plot_fig3.py", series_plot_script(names, "entropy"))
    if args.plot:
        from .plotting import plot_entropy

        plot_entropy([runs[J].entropy for J in args.J_list], manifest.add_file("fig3.png"))
    _run_diagnostics(manifest, runs)
    _check_cutoffs(manifest, runs, args.cutoff_tol)


def cmd_phase_scan(args, params, manifest):
    times = _times(args, params, periods=1)
    rows = []
    for lam in args.lambda_grid:
        p = params.with_(lam=lam)
        Hd = build_dicke(p)
        gs = ground_state(Hd, parity=dicke_parity(Hd.basis), seed=args.seed)
        photons = dyn.expectation(dyn.number_operator(Hd.basis, 0), gs.state) / p.J
        run = dyn.simulate_mirror(p, times, seed=args.seed, cutoff_tol=math.inf)
        peak_tl = 4 * p.Omega**2 / p.omega_m**2 if p.lam > p.lambda_c else 0.0
        worst = max(v for k, v in run.diagnostics.items() if k.startswith("top_population"))
        rows.append((lam, float(run.occupation.values.max()), peak_tl, photons,
                     p.Omega, worst))
        log.info("lambda=%g peak=%.4g TL=%.4g", lam, rows[-1][1], peak_tl)
    write_rows(manifest.add_file("phase_scan.csv"),
               ["lambda", "peak_occupation", "peak_occupation_TL", "photons_per_J", "Omega",
                "top_population"], rows)
    manifest["lambda_grid"] = list(args.lambda_grid)
    manifest["parity_sector"] = "even"
    if args.plot:
        from .plotting import plot_phase_scan

        cols = list(zip(*rows))
        plot_phase_scan(cols[0], cols[1], cols[2], cols[3], params.lambda_c,
                        manifest.add_file("phase_scan.png"))
    bad = [r[0] for r in rows if r[5] > args.cutoff_tol]
    manifest["cutoff_tolerance"] = args.cutoff_tol
    if bad:
        raise ValidationFailure(f"cutoff validation failed at lambda={bad}")


def _initial_classical(choice, params):
    if choice == "fixed-point":
        fp = sc.fixed_point(params)
        return sc.ClassicalState(fp.q1, fp.p1, fp.q2, fp.p2, 0.0, 0.0, J=params.J)
    if choice == "origin":
        return sc.ClassicalState(J=params.J)
    values = _float_list(choice)
    if len(values) != 6:
        raise ValueError("--initial needs fixed-point, origin or six comma separated numbers")
    return sc.ClassicalState(*values, J=params.J)


def cmd_classical(args, params, manifest):
    period = 2 * math.pi / params.omega_m
    t_end = args.tmax if args.tmax is not None else 2 * period
    dt = args.dt if args.dt is not None else period / 2000
    s0 = _initial_classical(args.initial, params)
    drive = sc.forced_oscillator_drive(params, args.kappa)
    manifest.update({"kappa": args.kappa, "dt": dt, "t_end": t_end, "initial": args.initial,
                     "drive": drive.value, "drive_normal_phase": drive.normal_phase,
                     "lambda_c_kappa": drive.lambda_c})
    fps = sc.fixed_points(params)
    write_rows(manifest.add_file("fixed_points.csv"), ["branch", *sc.COORDS],
               [(i, *fp.as_array()) for i, fp in enumerate(fps)])
    bound = args.drift_bound * max(1.0, t_end / period)
    traj = sc.integrate_checked(s0, params, t_end, dt, bound)
    traj.to_csv(manifest.add_file("trajectory.csv"))
    manifest["dt_used"] = float(traj.times[1] - traj.times[0]) if len(traj.times) > 1 else dt
    manifest["energy_drift"] = traj.max_relative_drift
    manifest["truncated"] = traj.truncated
    if args.plot:
        from .plotting import plot_trajectory

        ref = sc.forced_response(traj.times, drive.value, params.omega_m)
        plot_trajectory(traj, ref, manifest.add_file("classical.png"))
    if traj.truncated:
        manifest["truncation_time"] = traj.truncation_time
        raise ValidationFailure(f"trajectory left the spin domain at t={traj.truncation_time:g}")


def cmd_ground(args, params, manifest):
    Hd = build_dicke(params)
    gs = ground_state(Hd, parity=dicke_parity(Hd.basis), seed=args.seed)
    na = dyn.expectation(dyn.number_operator(Hd.basis, 0), gs.state)
    jz = embed(spin_operators(Hd.basis.factors[1])[2], 1, Hd.basis)
    rows = [
        ("energy", gs.energy),
        ("photons", na),
        ("photons_per_J", na / params.J),
        ("photons_per_J_TL", params.alpha / params.J),
        ("Jz", dyn.expectation(jz, gs.state)),
        ("gap", gs.gap),
        ("degenerate", int(gs.degenerate)),
        ("residual", gs.residual),
        ("top_population_field", dyn.top_population(gs.state, 0)),
    ]
    write_rows(manifest.add_file("ground.csv"), ["quantity", "value"], rows)
    manifest["parity_sector"] = "even"
    manifest.update(dict(rows), prefix="ground.")
    for name, value in rows:
        print(f"{name}={value!r}")
    if rows[-1][1] > args.cutoff_tol:
        raise ValidationFailure(f"field top-level population {rows[-1][1]:.3g} exceeds tolerance")


def cmd_evolve(args, params, manifest):
    times = _times(args, params, periods=2)
    kind = args.hamiltonian
    manifest["hamiltonian"] = kind
    if kind == "mirror":
        H = build_mirror_driven(params)
        psi0 = fock_state(H.basis.factors[0], 0)
        nc = dyn.number_operator(H.basis, 0)
        occ = [dyn.expectation(nc, s) for _, s in dyn.propagate(H, psi0, times)]
        dyn.TimeSeries(times, occ, "mirror").to_csv(manifest.add_file("occupation.csv"))
        dyn.limit_series(params, times).to_csv(manifest.add_file("occupation_TL.csv"))
        return
    if kind == "full":
        run = dyn.simulate_mirror(params, times, seed=args.seed, cutoff_tol=math.inf)
        manifest["parity_sector"] = "even"
    else:
        builder = build_normal_phase if kind == "normal" else build_superradiant
        phase = "normal" if kind == "normal" else "superradiant"
        psi0, _ = dyn.effective_initial_state(params, phase, seed=args.seed)
        run = dyn.simulate_mirror(params, times, hamiltonian=builder(params), psi0=psi0,
                                  cutoff_tol=math.inf)
    run.occupation.to_csv(manifest.add_file("occupation.csv"))
    run.entropy.to_csv(manifest.add_file("entropy.csv"))
    dyn.limit_series(params, times).to_csv(manifest.add_file("occupation_TL.csv"))
    manifest.update({k: v for k, v in run.diagnostics.items()}, prefix="run.")
    _check_cutoffs(manifest, {params.J: run}, args.cutoff_tol)


def _write_script(manifest, name, text):
    with open(manifest.add_file(name), "w") as fh:
        fh.write(text)


COMMANDS = {
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "phase-scan": cmd_phase_scan,
    "classical": cmd_classical,
    "ground": cmd_ground,
    "evolve": cmd_evolve,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = RunManifest(args.out_dir, ["dickemirror", *argv])
    manifest["subcommand"] = args.command
    code = EXIT_OK
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        params = resolve_params(args)
        _record_params(manifest, params, args)
        COMMANDS[args.command](args, params, manifest)
    except PhaseError as exc:
        code = EXIT_REFUSED
        _fail(manifest, exc)
    except (ValidationFailure, CutoffError, ConvergenceError, EnergyDriftError, DomainError) as exc:
        code = EXIT_NUMERIC
        _fail(manifest, exc)
    except OSError as exc:
        code = EXIT_IO
        _fail(manifest, exc)
    except ValueError as exc:
        code = EXIT_REFUSED
        _fail(manifest, exc)
    finally:
        manifest["status"] = "ok" if code == EXIT_OK else "failed"
        manifest["exit_code"] = code
        try:
            manifest.write()
        except OSError as exc:
            print(f"error: could not write manifest: {exc}", file=sys.stderr)
            code = EXIT_IO
    return code


def _fail(manifest, exc):
    manifest["error"] = f"{type(exc).__name__}: {exc}"
    print(f"error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
