"""State vectors and density matrices on a :class:`CompositeBasis`."""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import BasisError, StateError
from .hilbert import CompositeBasis, single

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    basis: CompositeBasis

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.basis.total_dim:
            raise BasisError(f"{amp.size} amplitudes for basis of dimension {self.basis.total_dim}")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self, tol=NORM_TOL):
        if abs(self.norm - 1) > tol:
            raise StateError(f"state norm {self.norm!r} deviates from 1 by more than {tol}")
        return self

    def normalized(self):
        return PureState(self.amplitudes / self.norm, self.basis)

    def tensor(self):
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.basis.dims)

    def overlap(self, other):
        if other.basis != self.basis:
            raise BasisError("states live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def basis_state(basis, levels):
    vec = np.zeros(basis.total_dim, dtype=complex)
    vec[basis.index(*levels)] = 1.0
    return PureState(vec, basis)


def product_state(*states):
    """Tensor product of states in factor order."""
    factors = sum((s.basis.factors for s in states), ())
    amp = reduce(np.kron, [s.amplitudes for s in states])
    return PureState(amp, CompositeBasis(factors))


def fock_state(mode, n):
    return basis_state(single(mode), (n,))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    basis: CompositeBasis

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        n = self.basis.total_dim
        if mat.shape != (n, n):
            raise BasisError(f"density matrix shape {mat.shape} does not match dimension {n}")
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self):
        return complex(np.trace(self.matrix))

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)

    def validate(self, herm_tol=1e-12, trace_tol=1e-10, neg_tol=1e-10):
        mat = self.matrix
        herm = np.abs(mat - mat.conj().T).max()
        if herm > herm_tol:
            raise StateError(f"density matrix not hermitian (max deviation {herm:.3g})")
        if abs(self.trace - 1) > trace_tol:
            raise StateError(f"density matrix trace {self.trace:.12g} != 1")
        lo = self.eigenvalues().min()
        if lo < -neg_tol:
            raise StateError(f"density matrix has negative eigenvalue {lo:.3g}")
        return self

    @classmethod
    def from_pure(cls, state):
        v = state.amplitudes
        return cls(np.outer(v, v.conj()), state.basis)

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))
