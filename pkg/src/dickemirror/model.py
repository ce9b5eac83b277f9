"""Model parameters and Hamiltonian builders.

Energies are in units of the cavity frequency throughout, so the figure
parameters read omega = omega0 = 1, omega_m = 0.1, lambda = 0.6.
Constant energy offsets that drop out of the dynamics are omitted.
"""

from dataclasses import dataclass, fields, replace
from math import cos, nan, pi, sin, sqrt
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .exceptions import BasisError, DimensionError, PhaseError
from .hilbert import (
    CompositeBasis,
    FockMode,
    Operator,
    SpinSector,
    embed,
    fock_annihilation,
    fock_number,
    spin_operators,
)

MAX_DIM = 4_000_000
DEFAULT_CUTOFF = 40


# ---------------------------------------------------------------------------
# physical cavity


@dataclass(frozen=True)
class PhysicalCavityParams:
    mode_index: int
    light_speed: float
    cavity_length: float
    atom_position: float
    dipole_moment: float
    vacuum_permittivity: float
    mirror_mass: float
    mirror_frequency: float
    atom_number: int

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")
        if not self.atom_position < self.cavity_length:
            raise ValueError("atom_position must lie inside the cavity (0 < x0 < L)")


class Couplings(NamedTuple):
    omega: float
    k: float
    field_amplitude: float
    lam: float
    delta: float
    g: float
    eta: float
    g0: float

    @property
    def eta_over_g(self):
        return self.eta / self.g


def derive_couplings(p):
    """Cavity frequency and all coupling constants from physical inputs.

    The three-body strength ``eta`` vanishes when ``k*x0`` sits at the root
    returned by :func:`eta_zero_position`.
    """
    L = p.cavity_length
    omega = p.mode_index * pi * p.light_speed / L
    k = p.mode_index * pi / L
    amp = sqrt(omega / (p.vacuum_permittivity * L))
    kx = k * p.atom_position
    lam = p.dipole_moment * amp * sin(kx)
    delta = (sin(kx) + kx * cos(kx)) / L
    zpf = sqrt(2 * p.mirror_mass * p.mirror_frequency)
    g = omega / (L * zpf)
    eta = p.dipole_moment * amp * delta / zpf
    return Couplings(omega, k, amp, lam, delta, g, eta, g * p.atom_number)


def eta_zero_position():
    """Root of ``sin x + x cos x`` in (pi/2, pi)."""
    return brentq(lambda x: sin(x) + x * cos(x), pi / 2, pi, xtol=1e-15)


# ---------------------------------------------------------------------------
# working parameters


@dataclass(frozen=True)
class ModelParams:
    omega: float = 1.0
    omega0: float = 1.0
    omega_m: float = 0.1
    lam: float = 0.6
    g0: float = 0.2
    J: float = 15
    cutoff_field: int = DEFAULT_CUTOFF
    cutoff_mirror: int = DEFAULT_CUTOFF
    cutoff_atom: Optional[int] = None

    def __post_init__(self):
        if min(self.omega, self.omega0, self.omega_m) <= 0:
            raise ValueError("frequencies must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        two_J = 2 * self.J
        if self.J < 0.5 or abs(two_J - round(two_J)) > 1e-12:
            raise ValueError(f"J must be a positive half-integer, got {self.J}")
        for name in ("cutoff_field", "cutoff_mirror"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")

    def with_(self, **changes):
        return replace(self, **changes)

    @property
    def N(self):
        return int(round(2 * self.J))

    @property
    def two_J(self):
        return self.N

    @property
    def atom_cutoff(self):
        if self.cutoff_atom is None:
            return min(self.N, DEFAULT_CUTOFF)
        return int(self.cutoff_atom)

    @property
    def lambda_c(self):
        return sqrt(self.omega * self.omega0) / 2

    @property
    def mu(self):
        denom = 4 * self.lam**2
        if denom == 0:
            return float("inf")
        return self.omega * self.omega0 / denom

    @property
    def superradiant(self):
        return self.lam >= self.lambda_c

    @property
    def Omega(self):
        """Classical drive on the mirror; NaN in the normal phase."""
        if not self.superradiant:
            return nan
        return -(self.g0 * self.lam**2 / self.omega**2) * (1 - self.mu**2)

    @property
    def alpha(self):
        if not self.superradiant:
            return nan
        return (self.lam**2 / self.omega**2) * self.N * (1 - self.mu**2)

    @property
    def beta(self):
        if not self.superradiant:
            return nan
        return (self.N / 2) * (1 - self.mu)

    def derived(self):
        return {
            "N": self.N,
            "lambda_c": self.lambda_c,
            "mu": self.mu,
            "Omega": self.Omega,
            "alpha": self.alpha,
            "beta": self.beta,
        }

    def require_superradiant(self, strict=False):
        ok = self.lam > self.lambda_c if strict else self.lam >= self.lambda_c
        if not ok:
            op = ">" if strict else ">="
            raise PhaseError(
                f"lambda={self.lam:g} is in the normal phase; need lambda {op} lambda_c",
                self.lambda_c,
                self.mu,
            )


PARAM_KEYS = {
    "omega": ("omega", float),
    "omega0": ("omega0", float),
    "omega_m": ("omega_m", float),
    "lambda": ("lam", float),
    "g0": ("g0", float),
    "J": ("J", float),
    "cutoff_field": ("cutoff_field", int),
    "cutoff_mirror": ("cutoff_mirror", int),
    "cutoff_atom": ("cutoff_atom", int),
}


def parse_params_text(text):
    """Parse ``key=value`` lines into ModelParams keyword arguments."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ValueError(f"line {lineno}: unknown parameter {key!r}")
        attr, conv = PARAM_KEYS[key]
        out[attr] = conv(value)
    return out


def read_params(path, **overrides):
    with open(path) as fh:
        kwargs = parse_params_text(fh.read())
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ModelParams(**kwargs)


def format_params(params):
    lines = []
    for key, (attr, _) in PARAM_KEYS.items():
        value = getattr(params, attr)
        if value is not None:
            lines.append(f"{key}={value!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bases


def field_mode(params):
    return FockMode(params.cutoff_field, "field")


def mirror_mode(params):
    return FockMode(params.cutoff_mirror, "mirror")


def dicke_basis(params):
    return CompositeBasis((field_mode(params), SpinSector(params.two_J, "spin")))


def full_basis(params):
    return CompositeBasis(
        (field_mode(params), SpinSector(params.two_J, "spin"), mirror_mode(params))
    )


def hp_basis(params):
    return CompositeBasis(
        (field_mode(params), FockMode(params.atom_cutoff, "atom"), mirror_mode(params))
    )


def mirror_basis(params):
    return CompositeBasis((mirror_mode(params),))


def _check_size(basis, max_dim):
    if basis.total_dim > max_dim:
        raise DimensionError(f"Hilbert dimension {basis.total_dim} exceeds budget {max_dim}")


def _expect_kinds(basis, kinds):
    if tuple(type(f) for f in basis.factors) != kinds:
        names = ", ".join(k.__name__ for k in kinds)
        raise BasisError(f"expected factors ({names}), got {basis.factors}")


def _boson(basis, slot):
    a = embed(fock_annihilation(basis.factors[slot]), slot, basis)
    return a, a.dag()


def _number(basis, slot):
    return embed(fock_number(basis.factors[slot]), slot, basis)


def _quadrature(basis, slot):
    a, ad = _boson(basis, slot)
    return a + ad


def _hermitian(mat):
    mat = sp.csr_matrix(mat)
    # symmetrize to remove rounding asymmetry from products
    return (mat + mat.conj().T) / 2


# ---------------------------------------------------------------------------
# finite-J Hamiltonians


def build_dicke(params, basis=None, max_dim=MAX_DIM):
    """Dicke Hamiltonian on (field, spin)."""
    basis = basis or dicke_basis(params)
    _expect_kinds(basis, (FockMode, SpinSector))
    _check_size(basis, max_dim)
    if basis.factors[1].two_J != params.two_J:
        raise BasisError("spin factor does not match params.J")
    jp, jm, jz = (embed(o, 1, basis) for o in spin_operators(basis.factors[1]))
    H = (
        params.omega * _number(basis, 0).matrix
        + params.omega0 * jz.matrix
        + (params.lam / sqrt(params.N)) * (_quadrature(basis, 0).matrix @ (jp + jm).matrix)
    )
    return Operator(basis, _hermitian(H), True)


def build_full(params, basis=None, eta=None, max_dim=MAX_DIM):
    """Dicke system plus radiation-pressure-coupled mirror on (field, spin, mirror).

    ``eta`` switches on the three-body term; it is omitted by default.
    """
    basis = basis or full_basis(params)
    _expect_kinds(basis, (FockMode, SpinSector, FockMode))
    _check_size(basis, max_dim)
    if basis.factors[1].two_J != params.two_J:
        raise BasisError("spin factor does not match params.J")
    jp, jm, jz = (embed(o, 1, basis) for o in spin_operators(basis.factors[1]))
    xa = _quadrature(basis, 0).matrix
    xc = _quadrature(basis, 2).matrix
    sx = (jp + jm).matrix
    na = _number(basis, 0).matrix
    N = params.N
    H = (
        params.omega * na
        + params.omega0 * jz.matrix
        + (params.lam / sqrt(N)) * (xa @ sx)
        + params.omega_m * _number(basis, 2).matrix
        - (params.g0 / N) * (na @ xc)
    )
    if eta is not None:
        H = H - (eta / sqrt(N)) * (xc @ xa @ sx)
    return Operator(basis, _hermitian(H), True)


def build_hp(params, basis=None, max_dim=MAX_DIM):
    """Holstein-Primakoff form on (field, atom boson, mirror), constants dropped."""
    basis = basis or hp_basis(params)
    _expect_kinds(basis, (FockMode, FockMode, FockMode))
    _check_size(basis, max_dim)
    N = params.N
    atom = basis.factors[1]
    if atom.cutoff > N:
        raise ValueError(f"atom boson cutoff {atom.cutoff} exceeds N={N}")
    b = fock_annihilation(atom).matrix
    f = sp.diags(np.sqrt(1 - np.arange(atom.dim) / N), 0)
    lowering = Operator(atom, f @ b)
    bf = embed(lowering, 1, basis)
    na = _number(basis, 0).matrix
    H = (
        params.omega * na
        + params.omega0 * _number(basis, 1).matrix
        + params.omega_m * _number(basis, 2).matrix
        - (params.g0 / N) * (na @ _quadrature(basis, 2).matrix)
        + params.lam * (_quadrature(basis, 0).matrix @ (bf.dag() + bf).matrix)
    )
    return Operator(basis, _hermitian(H), True)


# ---------------------------------------------------------------------------
# thermodynamic-limit effective Hamiltonians


def normal_phase_coefficients(params):
    return {
        "field": params.omega,
        "atom": params.omega0,
        "atom_squeeze": 0.0,
        "coupling": params.lam,
        "mirror": params.omega_m,
        "drive": 0.0,
    }


def superradiant_coefficients(params):
    params.require_superradiant()
    mu = params.mu
    w0 = params.omega0
    return {
        "field": params.omega,
        "atom": w0 * (1 + mu) / (2 * mu),
        "atom_squeeze": w0 * (1 - mu) * (3 + mu) / (8 * mu * (1 + mu)),
        "coupling": params.lam * mu * sqrt(2 / (1 + mu)),
        "mirror": params.omega_m,
        "drive": params.Omega,
    }


def _quadratic_model(coef, basis):
    """Quadratic two-mode block, plus the mirror when a third factor is present."""
    kinds = (FockMode,) * len(basis)
    if len(basis) not in (2, 3):
        raise BasisError("expected (field, atom) or (field, atom, mirror)")
    _expect_kinds(basis, kinds)
    xa = _quadrature(basis, 0).matrix
    xb = _quadrature(basis, 1).matrix
    H = (
        coef["field"] * _number(basis, 0).matrix
        + coef["atom"] * _number(basis, 1).matrix
        + coef["atom_squeeze"] * (xb @ xb)
        + coef["coupling"] * (xa @ xb)
    )
    if len(basis) == 3:
        H = H + coef["mirror"] * _number(basis, 2).matrix + coef["drive"] * _quadrature(basis, 2).matrix
    return Operator(basis, _hermitian(H), True)


def effective_dicke_block(params, phase, basis=None):
    """Two-mode part of the normal-phase or super-radiant effective model."""
    basis = basis or CompositeBasis(hp_basis(params).factors[:2])
    coef = normal_phase_coefficients(params) if phase == "normal" else superradiant_coefficients(params)
    return _quadratic_model(coef, basis)


def build_normal_phase(params, basis=None, max_dim=MAX_DIM):
    basis = basis or hp_basis(params)
    _check_size(basis, max_dim)
    return _quadratic_model(normal_phase_coefficients(params), basis)


def build_superradiant(params, basis=None, max_dim=MAX_DIM):
    basis = basis or hp_basis(params)
    _check_size(basis, max_dim)
    return _quadratic_model(superradiant_coefficients(params), basis)


def build_mirror_driven(params, basis=None):
    """Free mirror plus the classical drive ``Omega (c + c^dagger)``."""
    params.require_superradiant()
    basis = basis or mirror_basis(params)
    _expect_kinds(basis, (FockMode,))
    H = params.omega_m * _number(basis, 0).matrix + params.Omega * _quadrature(basis, 0).matrix
    return Operator(basis, _hermitian(H), True)


def dicke_parity(basis):
    """Diagonal of exp(i pi (a^dag a + J_z + J)) on a (field, spin, ...) basis.

    Every Hamiltonian built here conserves it; extra factors are spectators.
    """
    if len(basis) < 2:
        raise BasisError("parity needs field and spin factors")
    _expect_kinds(CompositeBasis(basis.factors[:2]), (FockMode, SpinSector))
    n = np.arange(basis.dims[0])[:, None]
    k = np.arange(basis.dims[1])[None, :]
    par = np.where((n + k) % 2 == 0, 1, -1)
    rest = int(np.prod(basis.dims[2:]))
    return np.repeat(par.reshape(-1), rest)
