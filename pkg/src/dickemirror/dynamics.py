"""Unitary dynamics, mirror observables and the driven-mirror reference law."""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import BasisError, ConvergenceError, CutoffError, StateError
from .hilbert import DENSE_THRESHOLD, FockMode, CompositeBasis, embed, fock_number
from .model import (
    build_dicke,
    build_full,
    dicke_parity,
    effective_dicke_block,
    full_basis,
    hp_basis,
)
from .spectra import DEFAULT_SEED, ground_state
from .states import DensityMatrix, PureState, fock_state, product_state

log = logging.getLogger(__name__)

CUTOFF_TOL = 1e-6


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly ascending")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite values in series {self.label!r}")

    def __len__(self):
        return len(self.times)

    def window(self, t_max):
        keep = self.times <= t_max * (1 + 1e-12)
        return TimeSeries(self.times[keep], self.values[keep], self.label)

    def linf_distance(self, other):
        if not np.array_equal(self.times, other.times):
            raise ValueError("series are sampled on different grids")
        return float(np.max(np.abs(self.values - other.values)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "value", "label"])
            for t, v in zip(self.times, self.values):
                writer.writerow([repr(float(t)), repr(float(v)), self.label])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        label = rows[0]["label"] if rows else ""
        return cls([float(r["t"]) for r in rows], [float(r["value"]) for r in rows], label)


# ---------------------------------------------------------------------------
# propagation


class KrylovPropagator:
    """exp(-iHt) v by Lanczos projection with adaptive step size.

    Each step grows the Krylov basis until the a-posteriori error estimate
    ``beta_m |e_m^T exp(-i tau T_m) e_1|`` drops below ``tol``; if the basis
    hits ``m_max`` first the step is halved on the same basis.
    """

    def __init__(self, H, tol=1e-9, m_max=40, dt_min=1e-12):
        self.A = H.matrix
        self.tol = tol
        self.m_max = min(m_max, H.dim)
        self.dt_min = dt_min
        self.dt = None
        self.steps = 0
        self.matvecs = 0

    def _project(self, alphas, betas, tau):
        d = np.asarray(alphas)
        if len(d) == 1:
            return np.array([np.exp(-1j * tau * d[0])]), None
        theta, S = eigh_tridiagonal(d, np.asarray(betas[: len(d) - 1]))
        y = S @ (np.exp(-1j * tau * theta) * S[0].conj())
        return y, theta

    def step(self, v, tau):
        """Advance ``v`` by at most ``tau``; return (new_v, tau_taken)."""
        n = v.shape[0]
        norm = np.linalg.norm(v)
        Q = np.empty((n, self.m_max), dtype=complex)
        Q[:, 0] = v / norm
        alphas, betas = [], []
        for j in range(self.m_max):
            w = self.A @ Q[:, j]
            self.matvecs += 1
            a = np.vdot(Q[:, j], w).real
            alphas.append(a)
            w -= a * Q[:, j]
            if j > 0:
                w -= betas[-1] * Q[:, j - 1]
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
            b = np.linalg.norm(w)
            m = j + 1
            y, _ = self._project(alphas, betas, tau)
            if b < 1e-14 * max(1.0, abs(a)):
                # invariant subspace: projection is exact for any tau
                return norm * (Q[:, :m] @ y), tau
            err = b * abs(y[-1])
            if err < self.tol:
                if m < self.m_max // 2:
                    self.dt = 2 * tau
                return norm * (Q[:, :m] @ y), tau
            if m == self.m_max:
                break
            betas.append(b)
            Q[:, m] = w / b
        # basis exhausted: shrink the step on the same basis
        while True:
            tau /= 2
            if tau < self.dt_min:
                raise ConvergenceError(f"Krylov step size underflow (tau < {self.dt_min:g})")
            y, _ = self._project(alphas, betas, tau)
            if b * abs(y[-1]) < self.tol:
                self.dt = tau
                return norm * (Q[:, : self.m_max] @ y), tau

    def advance(self, v, T):
        t = 0.0
        while T - t > 1e-15 * max(1.0, T):
            tau = T - t if self.dt is None else min(self.dt, T - t)
            v, taken = self.step(v, tau)
            t += taken
            self.steps += 1
        return v


def _dense_propagator(H):
    evals, evecs = np.linalg.eigh(H.toarray(threshold=None))

    def at(psi, t):
        return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi))

    return at


def propagate(H, psi0, times, method="auto", tol=1e-9, m_max=40, threshold=DENSE_THRESHOLD):
    """Yield ``(t, PureState)`` along ``times`` (ascending, may start above 0)."""
    if psi0.basis != H.basis:
        raise BasisError("initial state and Hamiltonian live on different bases")
    if not H.hermitian_hint:
        raise ValueError("time evolution requires a hermitian Hamiltonian")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("times must be non-negative and ascending")
    if method == "auto":
        method = "dense" if H.dim <= threshold else "krylov"
    psi = psi0.amplitudes.copy()
    if method == "dense":
        at = _dense_propagator(H)
        for t in times:
            yield t, PureState(at(psi, t), H.basis)
    elif method == "krylov":
        prop = KrylovPropagator(H, tol=tol, m_max=m_max)
        t_prev = 0.0
        for t in times:
            if t > t_prev:
                psi = prop.advance(psi, t - t_prev)
                t_prev = t
            yield t, PureState(psi.copy(), H.basis)
        log.debug("krylov: %d steps, %d matvecs", prop.steps, prop.matvecs)
    else:
        raise ValueError(f"unknown method {method!r}")


def evolve(H, psi0, times, **kw):
    """States exp(-iHt) psi0 at every requested time."""
    return [s for _, s in propagate(H, psi0, times, **kw)]


def evolve_density(H, rho0, times, threshold=DENSE_THRESHOLD):
    """Mixed-state evolution by dense eigendecomposition (small systems only)."""
    if rho0.basis != H.basis:
        raise BasisError("density matrix and Hamiltonian live on different bases")
    evals, evecs = np.linalg.eigh(H.toarray(threshold=threshold))
    r = evecs.conj().T @ rho0.matrix @ evecs
    out = []
    for t in times:
        ph = np.exp(-1j * evals * t)
        out.append(DensityMatrix(evecs @ (ph[:, None] * r * ph.conj()[None, :]) @ evecs.conj().T, H.basis))
    return out


# ---------------------------------------------------------------------------
# observables


def expectation(op, psi, imag_tol=1e-10):
    if op.basis != psi.basis:
        raise BasisError("operator and state live on different bases")
    val = np.vdot(psi.amplitudes, op.matrix @ psi.amplitudes)
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > imag_tol * scale:
        raise ValueError(f"expectation has imaginary part {val.imag:.3g}; operator not hermitian?")
    return float(val.real)


def number_operator(basis, slot):
    return embed(fock_number(basis.factors[slot]), slot, basis)


def analytic_occupation(t, params):
    """Mirror occupation of the driven oscillator started in vacuum."""
    params.require_superradiant(strict=True)
    Om = params.Omega
    wm = params.omega_m
    t = np.asarray(t, dtype=float)
    return 2 * Om**2 / wm**2 * (1 - np.cos(wm * t))


def partial_trace(psi, keep):
    """Reduced density matrix on the factors listed in ``keep``."""
    keep = sorted(keep)
    dims = psi.basis.dims
    if not keep or any(not 0 <= k < len(dims) for k in keep):
        raise BasisError(f"invalid subsystem selection {keep}")
    tens = np.moveaxis(psi.tensor(), keep, list(range(len(keep))))
    d_keep = int(np.prod([dims[k] for k in keep]))
    mat = tens.reshape(d_keep, -1)
    rho = mat @ mat.conj().T
    basis = CompositeBasis(tuple(psi.basis.factors[k] for k in keep))
    return DensityMatrix(rho, basis)


def reduce_to_mirror(psi):
    """Trace out the field and atoms; the mirror is the last factor."""
    if len(psi.basis) != 3 or not isinstance(psi.basis.factors[2], FockMode):
        raise BasisError(f"expected a (field, atoms, mirror) basis, got {psi.basis.labels}")
    return partial_trace(psi, [2])


def von_neumann_entropy(rho, neg_tol=1e-8):
    """-Tr rho ln rho in nats."""
    p = rho.eigenvalues()
    if p.min() < -neg_tol:
        raise StateError(f"density matrix eigenvalue {p.min():.3g} below {-neg_tol:g}")
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def top_population(psi, slot):
    """Probability of the highest Fock level of factor ``slot``."""
    tens = np.moveaxis(psi.tensor(), slot, 0)
    return float(np.sum(np.abs(tens[-1]) ** 2))


# ---------------------------------------------------------------------------
# finite-J mirror trajectories


def time_grid(params, periods=2.0, points=400):
    t_end = periods * 2 * np.pi / params.omega_m
    return np.linspace(0.0, t_end, points)


@dataclass
class MirrorRun:
    J: float
    occupation: TimeSeries
    entropy: TimeSeries
    diagnostics: dict = field(default_factory=dict)


def initial_state(params, seed=DEFAULT_SEED, sector=1):
    """Dicke ground state (even parity by default) times mirror vacuum."""
    Hd = build_dicke(params)
    gs = ground_state(Hd, parity=dicke_parity(Hd.basis), sector=sector, seed=seed)
    mirror_vac = fock_state(FockMode(params.cutoff_mirror, "mirror"), 0)
    psi0 = product_state(gs.state, mirror_vac)
    psi0 = PureState(psi0.amplitudes, full_basis(params))
    return psi0, gs


def simulate_mirror(params, times, seed=DEFAULT_SEED, sector=1, cutoff_tol=CUTOFF_TOL,
                    tol=1e-9, hamiltonian=None, psi0=None):
    """Evolve ground(Dicke) x |0>_mirror under the full model.

    Returns the mirror occupation and entropy series together with
    diagnostics: top-level populations, norm and energy drift, ground-state
    gap and the parity sector used.
    """
    H = hamiltonian if hamiltonian is not None else build_full(params)
    diag = {"J": params.J, "dim": H.dim}
    if psi0 is None:
        psi0, gs = initial_state(params, seed=seed, sector=sector)
        diag.update(ground_energy=gs.energy, ground_gap=gs.gap, ground_degenerate=gs.degenerate,
                    parity_sector="even" if sector == 1 else "odd")
    basis = H.basis
    nc = number_operator(basis, 2)
    E0 = expectation(H, psi0)
    occ, ent = [], []
    top_field = top_mirror = 0.0
    norm_drift = energy_drift = 0.0
    for _, psi in propagate(H, psi0, times, tol=tol):
        occ.append(expectation(nc, psi))
        ent.append(von_neumann_entropy(reduce_to_mirror(psi)))
        top_field = max(top_field, top_population(psi, 0))
        top_mirror = max(top_mirror, top_population(psi, 2))
        norm_drift = max(norm_drift, abs(psi.norm - 1))
        energy_drift = max(energy_drift, abs(expectation(H, psi) - E0) / max(1.0, abs(E0)))
    diag.update(top_population_field=top_field, top_population_mirror=top_mirror,
                norm_drift=norm_drift, energy_drift=energy_drift)
    if isinstance(basis.factors[1], FockMode):
        diag["top_population_atom"] = top_population(psi, 1)
    label = f"J={params.J:g}"
    run = MirrorRun(params.J, TimeSeries(times, occ, label), TimeSeries(times, ent, label), diag)
    worst = max(v for k, v in diag.items() if k.startswith("top_population"))
    if worst > cutoff_tol:
        raise CutoffError(
            f"top Fock level population {worst:.3g} exceeds {cutoff_tol:g} at J={params.J:g}; "
            "raise the cutoffs",
            report=diag,
        )
    return run


def _run_one(args):
    params, times, kw = args
    return simulate_mirror(params, times, **kw)


def run_many(params, J_list, times, jobs=1, **kw):
    """simulate_mirror for each J; ``jobs > 1`` fans out over processes."""
    tasks = [(params.with_(J=J), np.asarray(times), kw) for J in J_list]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(t) for t in tasks]
    return {run.J: run for run in runs}


def limit_series(params, times):
    """Thermodynamic-limit mirror occupation from vacuum on ``times``.

    Driven-oscillator law above the transition; the free mirror stays in
    vacuum below it.
    """
    if params.lam > params.lambda_c:
        return TimeSeries(times, analytic_occupation(times, params), "TL")
    return TimeSeries(times, np.zeros(len(times)), "TL")


def occupation_trajectory(params, J_list, times, **kw):
    """Finite-J mirror occupation per J plus the thermodynamic-limit curve."""
    runs = run_many(params, J_list, times, **kw)
    return {J: r.occupation for J, r in runs.items()}, limit_series(params, times)


def entropy_trajectory(params, J_list, times, **kw):
    runs = run_many(params, J_list, times, **kw)
    return {J: r.entropy for J, r in runs.items()}


def effective_initial_state(params, phase, seed=DEFAULT_SEED):
    """Ground state of the effective two-mode block times mirror vacuum."""
    block = effective_dicke_block(params, phase)
    gs = ground_state(block, seed=seed)
    mirror_vac = fock_state(FockMode(params.cutoff_mirror, "mirror"), 0)
    psi0 = product_state(gs.state, mirror_vac)
    return PureState(psi0.amplitudes, hp_basis(params)), gs
