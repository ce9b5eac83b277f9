"""Coherent-state classical analogue of the atom-field-mirror model.

Phase-space coordinates are (q1, p1) for the collective spin, (q2, p2) for
the field and (q3, p3) for the mirror.  Only the frequencies and couplings
of a :class:`~dickemirror.model.ModelParams` are used; the scale ``J`` is
carried by each :class:`ClassicalState`.
"""

import csv
from dataclasses import dataclass, field
from math import sqrt
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, EnergyDriftError

DOMAIN_EPS = 1e-9
COORDS = ("q1", "p1", "q2", "p2", "q3", "p3")


@dataclass(frozen=True)
class ClassicalState:
    q1: float = 0.0
    p1: float = 0.0
    q2: float = 0.0
    p2: float = 0.0
    q3: float = 0.0
    p3: float = 0.0
    J: float = 1.0

    def as_array(self):
        return np.array([self.q1, self.p1, self.q2, self.p2, self.q3, self.p3])

    @classmethod
    def from_array(cls, x, J):
        return cls(*(float(v) for v in x), J=J)

    @property
    def spin_energy(self):
        return (self.q1**2 + self.p1**2) / 2

    def in_domain(self, eps=DOMAIN_EPS):
        return 2 * self.J - self.spin_energy > eps


def _spin_root(x, J, eps=DOMAIN_EPS):
    h1 = (x[0] ** 2 + x[1] ** 2) / 2
    arg = 2 * J - h1
    if arg <= eps:
        raise DomainError(f"spin coordinates outside domain: 2J - H1 = {arg:.3g}")
    return sqrt(arg)


def classical_energy(s, params):
    x = s.as_array() if isinstance(s, ClassicalState) else np.asarray(s, float)
    J = s.J if isinstance(s, ClassicalState) else params.J
    return _energy(x, J, params)


def _energy(x, J, p):
    q1, p1, q2, p2, q3, p3 = x
    root = _spin_root(x, J)
    return (
        p.omega0 / 2 * (q1**2 + p1**2)
        - J * p.omega
        + p.omega / 2 * (q2**2 + p2**2)
        + p.omega_m / 2 * (q3**2 + p3**2)
        + 2 * p.lam / sqrt(2 * J) * root * q1 * q2
        - p.g0 * sqrt(2) / (4 * J) * (q2**2 + p2**2) * q3
    )


def eom_rhs(s, params):
    """Time derivatives (dq1, dp1, dq2, dp2, dq3, dp3)."""
    if isinstance(s, ClassicalState):
        return _rhs(s.as_array(), s.J, params)
    return _rhs(np.asarray(s, float), params.J, params)


def _rhs(x, J, p):
    q1, p1, q2, p2, q3, p3 = x
    root = _spin_root(x, J)
    c = p.lam / sqrt(2 * J)
    k = p.g0 * sqrt(2) / (2 * J)
    return np.array([
        p.omega0 * p1 - c * p1 * q1 * q2 / root,
        -p.omega0 * q1 - 2 * c * root * q2 + c * q1**2 * q2 / root,
        p.omega * p2 - k * p2 * q3,
        -p.omega * q2 - 2 * c * root * q1 + k * q2 * q3,
        p.omega_m * p3,
        -p.omega_m * q3 + k / 2 * (q2**2 + p2**2),
    ])


def coherent_coordinates(z_a, w, z_c, J):
    """Phase-space point of the product coherent state |z_a, w, z_c>."""
    w, z_a, z_c = complex(w), complex(z_a), complex(z_c)
    pref = sqrt(J / (1 + abs(w) ** 2))
    # (w + conj w) = 2 Re w and (w - conj w)/i = 2 Im w
    return ClassicalState(
        q1=2 * pref * w.real,
        p1=2 * pref * w.imag,
        q2=sqrt(2) * z_a.real,
        p2=sqrt(2) * z_a.imag,
        q3=sqrt(2) * z_c.real,
        p3=sqrt(2) * z_c.imag,
        J=J,
    )


# ---------------------------------------------------------------------------
# fixed points and the forced-oscillator limit


def mirror_equilibrium(params):
    """Static mirror displacement sourced by the super-radiant field."""
    if params.lam < params.lambda_c:
        return 0.0
    mu = params.mu
    return sqrt(2) * params.g0 * params.lam**2 * (1 - mu**2) / (params.omega**2 * params.omega_m)


def fixed_points(params, J=None):
    """Lowest-energy fixed points, Dicke block taken at zero mirror coupling.

    One point (the origin) below the transition, two mirror-image branches
    at and above it; the branch with positive q2 comes first.
    """
    J = params.J if J is None else J
    if params.lam < params.lambda_c:
        return [ClassicalState(J=J)]
    mu = params.mu
    q1 = sqrt(2 * J * (1 - mu))
    q2 = sqrt(4 * J * params.lam**2 / params.omega**2 * (1 - mu**2))
    q3 = mirror_equilibrium(params)
    return [
        ClassicalState(q1=-q1, q2=q2, q3=q3, J=J),
        ClassicalState(q1=q1, q2=-q2, q3=q3, J=J),
    ]


def fixed_point(params, J=None):
    return fixed_points(params, J)[0]


def dissipative_lambda_c(params, kappa):
    return 0.5 * sqrt(params.omega * params.omega0 * (1 + kappa**2 / params.omega**2))


class Drive(NamedTuple):
    value: float
    normal_phase: bool
    lambda_c: float


def forced_oscillator_drive(params, kappa=0.0):
    """Constant force on the mirror coordinate in the large-J limit.

    Zero (flagged as normal phase) at or below the possibly loss-shifted
    critical coupling; losses reduce it by ``1 - kappa^2/omega^2``.
    """
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    lc = dissipative_lambda_c(params, kappa)
    if params.lam <= lc:
        return Drive(0.0, True, lc)
    F = sqrt(2) * params.omega_m * params.g0 * params.lam**2 / params.omega**2 * (1 - params.mu**2)
    return Drive(F * (1 - kappa**2 / params.omega**2), False, lc)


def forced_response(t, F, omega_m):
    """Mirror coordinate of the forced oscillator released at rest from the origin."""
    return F / omega_m**2 * (1 - np.cos(omega_m * np.asarray(t, float)))


def residual_norm(params, J):
    """Norm of the full equations of motion at the large-J fixed point."""
    return float(np.linalg.norm(eom_rhs(fixed_point(params, J), params)))


def residual_slope(params, J_values):
    """Slope of log residual against log J."""
    J_values = np.asarray(J_values, float)
    res = [residual_norm(params, J) for J in J_values]
    return float(np.polyfit(np.log(J_values), np.log(res), 1)[0])


# ---------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    times: np.ndarray
    coords: np.ndarray  # shape (n, 6)
    energies: np.ndarray
    J: float
    truncated: bool = False
    truncation_time: float = None
    meta: dict = field(default_factory=dict)

    @property
    def states(self):
        return [ClassicalState.from_array(x, self.J) for x in self.coords]

    def __getitem__(self, name):
        return self.coords[:, COORDS.index(name)]

    @property
    def max_relative_drift(self):
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / abs(e0))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", *COORDS, "energy"])
            for t, x, e in zip(self.times, self.coords, self.energies):
                w.writerow([repr(float(t)), *(repr(float(v)) for v in x), repr(float(e))])


def integrate(s0, params, t_end, dt, drift_bound=None):
    """Classical RK4 with fixed step ``dt``.

    A step that leaves the spin domain ends the trajectory early with
    ``truncated`` set.  With ``drift_bound`` the relative energy drift is
    asserted and EnergyDriftError raised when exceeded.
    """
    if not s0.in_domain():
        raise DomainError("initial state outside the spin domain")
    J = s0.J
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end must be at least one step")
    xs = np.empty((n_steps + 1, 6))
    es = np.empty(n_steps + 1)
    x = s0.as_array()
    xs[0], es[0] = x, _energy(x, J, params)
    f = lambda y: _rhs(y, J, params)  # noqa: E731
    done = n_steps
    truncated = False
    for i in range(n_steps):
        try:
            k1 = f(x)
            k2 = f(x + dt / 2 * k1)
            k3 = f(x + dt / 2 * k2)
            k4 = f(x + dt * k3)
            x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            es[i + 1] = _energy(x, J, params)
        except DomainError:
            done, truncated = i, True
            break
        xs[i + 1] = x
    times = dt * np.arange(done + 1)
    traj = Trajectory(times, xs[: done + 1], es[: done + 1], J, truncated,
                      times[-1] if truncated else None)
    if drift_bound is not None and traj.max_relative_drift > drift_bound:
        raise EnergyDriftError(
            f"relative energy drift {traj.max_relative_drift:.3g} exceeds {drift_bound:g} at dt={dt:g}"
        )
    return traj


def integrate_checked(s0, params, t_end, dt, drift_bound, max_halvings=4):
    """integrate(), halving ``dt`` until the energy drift bound holds."""
    for _ in range(max_halvings + 1):
        try:
            return integrate(s0, params, t_end, dt, drift_bound)
        except EnergyDriftError:
            dt /= 2
    return integrate(s0, params, t_end, dt, drift_bound)
