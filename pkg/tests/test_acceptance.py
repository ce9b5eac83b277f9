"""Acceptance criteria, each run at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in the
terminal summary.
"""

import math
import time

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import record_acceptance
from dickemirror.dynamics import (
    analytic_occupation,
    effective_initial_state,
    expectation,
    limit_series,
    number_operator,
    propagate,
    run_many,
    simulate_mirror,
)
from dickemirror.hilbert import FockMode, Operator, single
from dickemirror.model import (
    ModelParams,
    build_mirror_driven,
    build_normal_phase,
    build_superradiant,
    eta_zero_position,
)
from dickemirror.semiclassical import (
    ClassicalState,
    classical_energy,
    dissipative_lambda_c,
    eom_rhs,
    fixed_point,
    forced_oscillator_drive,
    forced_response,
    integrate,
)
from dickemirror.spectra import dense_spectrum, ground_state
from dickemirror.states import fock_state

J_LIST = (1, 3, 7, 15)
FIGURE = ModelParams(omega=1.0, omega0=1.0, omega_m=0.1, lam=0.6, g0=0.2)
PERIOD = 2 * math.pi / FIGURE.omega_m
TIMES = np.linspace(0.0, PERIOD, 201)


def strictly_decreasing(values):
    return all(a > b for a, b in zip(values, values[1:]))


@pytest.fixture(scope="session")
def figure_runs():
    return run_many(FIGURE, J_LIST, TIMES, cutoff_tol=math.inf)


@pytest.fixture(scope="session")
def normal_run_J15():
    return simulate_mirror(FIGURE.with_(lam=0.4, J=15), TIMES, cutoff_tol=math.inf)


def test_criterion_1_driven_mirror_law():
    p = FIGURE.with_(cutoff_mirror=60)
    assert abs(p.Omega) / p.omega_m <= 1
    times = np.linspace(0.0, 4 * math.pi / p.omega_m, 401)
    start = time.perf_counter()
    H = build_mirror_driven(p)
    nc = number_operator(H.basis, 0)
    psi0 = fock_state(H.basis.factors[0], 0)
    occ = np.array([expectation(nc, s) for _, s in propagate(H, psi0, times)])
    elapsed = time.perf_counter() - start
    err = float(np.max(np.abs(occ - analytic_occupation(times, p))))
    ok = err < 1e-8 and elapsed < 1.0
    record_acceptance(1, ok, f"max abs error {err:.2e} (< 1e-8), runtime {elapsed:.2f}s (< 1s)")
    assert ok


def test_criterion_2_occupation_converges_to_limit(figure_runs):
    tl = limit_series(FIGURE, TIMES)
    dists = [figure_runs[J].occupation.linf_distance(tl) for J in J_LIST]
    ok = strictly_decreasing(dists)
    detail = ", ".join(f"J={J}: {d:.4f}" for J, d in zip(J_LIST, dists))
    record_acceptance(2, ok, f"L-inf distance to limit curve {detail}; strictly decreasing required")
    assert ok, detail


def test_criterion_3_entropy_suppression(figure_runs):
    s0 = [figure_runs[J].entropy.values[0] for J in J_LIST]
    peaks = [figure_runs[J].entropy.values.max() for J in J_LIST]
    ok = max(s0) < 1e-10 and strictly_decreasing(peaks)
    detail = ", ".join(f"J={J}: {s:.4f}" for J, s in zip(J_LIST, peaks))
    record_acceptance(3, ok, f"max S(0) {max(s0):.1e}; max entropy {detail}")
    assert ok


def test_criterion_4_phase_dichotomy(figure_runs, normal_run_J15):
    sr_peak = figure_runs[15].occupation.values.max()
    np_peak = normal_run_J15.occupation.values.max()
    ratio = sr_peak / np_peak
    ok = ratio >= 10
    record_acceptance(4, ok, f"peak occupation lambda=0.6: {sr_peak:.4f}, lambda=0.4: {np_peak:.2e}, "
                             f"ratio {ratio:.0f} (>= 10)")
    assert ok


def test_criterion_5_effective_models_decouple_mirror():
    p = FIGURE.with_(J=15, cutoff_field=20, cutoff_atom=20, cutoff_mirror=40)
    psi_n, _ = effective_initial_state(p, "normal")
    run_n = simulate_mirror(p, TIMES, hamiltonian=build_normal_phase(p), psi0=psi_n, cutoff_tol=math.inf)
    psi_s, _ = effective_initial_state(p, "superradiant")
    run_s = simulate_mirror(p, TIMES, hamiltonian=build_superradiant(p), psi0=psi_s, cutoff_tol=math.inf)
    occ_drift = np.ptp(run_n.occupation.values)
    ent_n = np.ptp(run_n.entropy.values)
    ent_s = np.ptp(run_s.entropy.values)
    ok = occ_drift < 1e-10 and ent_n < 1e-10 and ent_s < 1e-10
    record_acceptance(5, ok, f"normal occupation drift {occ_drift:.1e}, entropy drift normal {ent_n:.1e} "
                             f"superradiant {ent_s:.1e} (< 1e-10)")
    assert ok


def test_criterion_6_semiclassical_forced_oscillator():
    J = 1e5
    fp = fixed_point(FIGURE, J)
    s0 = ClassicalState(fp.q1, fp.p1, fp.q2, fp.p2, 0.0, 0.0, J=J)
    traj = integrate(s0, FIGURE, 2 * PERIOD, PERIOD / 2000)
    F = math.sqrt(2) * FIGURE.omega_m * FIGURE.g0 * FIGURE.lam**2 / FIGURE.omega**2 * (1 - FIGURE.mu**2)
    ref = forced_response(traj.times, F, FIGURE.omega_m)
    rel = float(np.max(np.abs(traj["q3"] - ref)) / np.max(np.abs(ref)))
    ok = not traj.truncated and rel < 0.02
    record_acceptance(6, ok, f"relative amplitude error {rel:.2e} (< 0.02)")
    assert ok


def test_criterion_7_drive_identity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        omega, omega0 = rng.uniform(0.5, 2.0, 2)
        lam = math.sqrt(omega * omega0) / 2 * rng.uniform(1.01, 3.0)
        p = ModelParams(omega=omega, omega0=omega0, omega_m=rng.uniform(0.01, 0.5), lam=lam,
                        g0=rng.uniform(0.01, 1.0))
        F = forced_oscillator_drive(p).value
        target = math.sqrt(2) * p.omega_m * abs(p.Omega)
        worst = max(worst, abs(F - target) / target)
    ok = worst < 1e-10
    record_acceptance(7, ok, f"worst relative mismatch {worst:.1e} over 20 points (< 1e-10)")
    assert ok


def test_criterion_8_critical_values():
    lc = ModelParams(omega=1.0, omega0=1.0).lambda_c
    root = eta_zero_position()
    lck = dissipative_lambda_c(ModelParams(), 0.2)
    ok = lc == 0.5 and abs(root - 2.02876) <= 1e-5 and abs(lck - 0.509902) <= 1e-6
    record_acceptance(8, ok, f"lambda_c {lc}, eta root {root:.7f}, lambda_c(kappa=0.2) {lck:.7f}")
    assert ok


def _random_hermitian(dim, rng):
    A = sp.random(dim, dim, density=min(1.0, 10 / dim), random_state=rng, dtype=complex,
                  data_rvs=lambda n: rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return Operator(single(FockMode(dim - 1)), A + A.conj().T, True)


def _fd_flow(x, J, p, h=1e-6):
    grad = np.empty(6)
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        grad[i] = (classical_energy(ClassicalState.from_array(x + e, J), p)
                   - classical_energy(ClassicalState.from_array(x - e, J), p)) / (2 * h)
    return np.column_stack([grad[1::2], -grad[0::2]]).reshape(-1)


def test_criterion_9_solver_oracles():
    rng = np.random.default_rng(9)
    lanczos_err = 0.0
    for _ in range(50):
        H = _random_hermitian(int(rng.integers(50, 1501)), rng)
        ref = dense_spectrum(H, vectors=False).eigenvalues[0]
        lanczos_err = max(lanczos_err, abs(ground_state(H, seed=int(rng.integers(1 << 30))).energy - ref))

    J = 10.0
    fp = fixed_point(FIGURE, J)
    s0 = ClassicalState(fp.q1 + 0.5, 0.3, fp.q2 - 0.4, 0.2, 1.0, -0.5, J=J)
    drift = integrate(s0, FIGURE, PERIOD, PERIOD / 1e4).max_relative_drift

    fd_err = 0.0
    for _ in range(20):
        x = rng.uniform(-2, 2, 6)
        g = eom_rhs(ClassicalState.from_array(x, J), FIGURE)
        fd_err = max(fd_err, np.max(np.abs(g - _fd_flow(x, J, FIGURE))) / np.max(np.abs(g)))

    ok = lanczos_err < 1e-9 and drift < 1e-6 and fd_err < 1e-6
    record_acceptance(9, ok, f"Lanczos vs dense {lanczos_err:.1e} (< 1e-9), RK4 drift per period "
                             f"{drift:.1e} (< 1e-6), flow vs finite difference {fd_err:.1e} (< 1e-6)")
    assert ok
