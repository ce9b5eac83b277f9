"""Truncated boson and collective-spin Hilbert spaces.

Every matrix in the package is an :class:`Operator`: a sparse CSR matrix
tagged with the :class:`CompositeBasis` it acts on.  Composite indices are
row-major over the factor order, so for factors ``(field, spin, mirror)``
the flat index is ``(n_field * dim_spin + k_spin) * dim_mirror + n_mirror``.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .exceptions import BasisError, DimensionError

DENSE_THRESHOLD = 2048
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class FockMode:
    """Bosonic mode truncated at occupation ``cutoff``."""

    cutoff: int
    label: str = "mode"

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"Fock cutoff must be an integer >= 1, got {self.cutoff}")

    @property
    def dim(self):
        return self.cutoff + 1


@dataclass(frozen=True)
class SpinSector:
    """Spin-J multiplet, basis |J,m> ordered m = -J .. +J."""

    two_J: int
    label: str = "spin"

    def __post_init__(self):
        if int(self.two_J) != self.two_J or self.two_J < 1:
            raise ValueError(f"two_J must be an integer >= 1, got {self.two_J}")

    @property
    def J(self):
        return self.two_J / 2

    @property
    def dim(self):
        return self.two_J + 1

    @property
    def m_values(self):
        return np.arange(self.dim) - self.J


@dataclass(frozen=True)
class CompositeBasis:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a basis needs at least one factor")

    @property
    def dims(self):
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self):
        return int(np.prod(self.dims))

    @property
    def labels(self):
        return tuple(f.label for f in self.factors)

    def slot(self, label):
        """Position of the factor called ``label``."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise BasisError(f"no factor labelled {label!r} in {self.labels}") from None

    def index(self, *levels):
        """Flat index of a product basis state."""
        if len(levels) != len(self.factors):
            raise BasisError("one level per factor required")
        return int(np.ravel_multi_index(levels, self.dims))

    def __len__(self):
        return len(self.factors)


def single(space):
    """One-factor basis wrapping ``space``."""
    return CompositeBasis((space,))


class Operator:
    """Square matrix on a :class:`CompositeBasis`.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("basis", "matrix", "hermitian_hint")

    def __init__(self, basis, matrix, hermitian_hint=False):
        if not isinstance(basis, CompositeBasis):
            basis = single(basis)
        matrix = sp.csr_matrix(matrix, dtype=complex)
        n = basis.total_dim
        if matrix.shape != (n, n):
            raise BasisError(f"matrix shape {matrix.shape} does not match basis dimension {n}")
        self.basis = basis
        self.matrix = matrix
        self.hermitian_hint = bool(hermitian_hint)

    @property
    def dim(self):
        return self.basis.total_dim

    @property
    def shape(self):
        return self.matrix.shape

    def dag(self):
        return Operator(self.basis, self.matrix.conj().T, self.hermitian_hint)

    def hermiticity_error(self):
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def is_hermitian(self, tol=HERMITIAN_TOL):
        return self.hermiticity_error() < tol

    def toarray(self, threshold=DENSE_THRESHOLD):
        if threshold is not None and self.dim > threshold:
            raise DimensionError(
                f"refusing to densify dimension {self.dim} (threshold {threshold})"
            )
        return self.matrix.toarray()

    def _check(self, other):
        if other.basis != self.basis:
            raise BasisError("operators live on different bases")

    def __add__(self, other):
        self._check(other)
        herm = self.hermitian_hint and other.hermitian_hint
        return Operator(self.basis, self.matrix + other.matrix, herm)

    def __sub__(self, other):
        self._check(other)
        herm = self.hermitian_hint and other.hermitian_hint
        return Operator(self.basis, self.matrix - other.matrix, herm)

    def __neg__(self):
        return Operator(self.basis, -self.matrix, self.hermitian_hint)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        herm = self.hermitian_hint and np.imag(scalar) == 0
        return Operator(self.basis, self.matrix * scalar, herm)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.basis, self.matrix @ other.matrix)
        return self.matrix @ other

    def __repr__(self):
        return f"Operator(dims={self.basis.dims}, nnz={self.matrix.nnz}, hermitian_hint={self.hermitian_hint})"


def commutator(A, B):
    return A @ B - B @ A


def identity(space):
    basis = space if isinstance(space, CompositeBasis) else single(space)
    return Operator(basis, sp.identity(basis.total_dim, dtype=complex, format="csr"), True)


def fock_annihilation(mode):
    """Truncated annihilation operator with <n-1|a|n> = sqrt(n)."""
    n = np.arange(1, mode.dim)
    mat = sp.diags(np.sqrt(n), offsets=1, shape=(mode.dim, mode.dim), dtype=complex)
    return Operator(mode, mat)


def fock_number(mode):
    mat = sp.diags(np.arange(mode.dim, dtype=float), 0, dtype=complex)
    return Operator(mode, mat, True)


def spin_operators(sector):
    """Return ``(J_plus, J_minus, J_z)`` for a spin multiplet."""
    J = sector.J
    m = sector.m_values
    up = np.sqrt(J * (J + 1) - m[:-1] * (m[:-1] + 1))
    # column m, row m+1
    jp = sp.diags(up, offsets=-1, shape=(sector.dim, sector.dim), dtype=complex)
    jz = sp.diags(m, 0, dtype=complex)
    J_plus = Operator(sector, jp)
    return J_plus, J_plus.dag(), Operator(sector, jz, True)


def _same_space(a, b):
    return type(a) is type(b) and a.dim == b.dim


def embed(op, slot, basis):
    """Lift a single-factor operator into ``basis`` at position ``slot``."""
    if not 0 <= slot < len(basis.factors):
        raise BasisError(f"slot {slot} out of range for {len(basis.factors)} factors")
    if len(op.basis.factors) != 1:
        raise BasisError("embed expects a single-factor operator")
    if not _same_space(op.basis.factors[0], basis.factors[slot]):
        raise BasisError(
            f"operator space {op.basis.factors[0]} does not match factor {basis.factors[slot]}"
        )
    dims = basis.dims
    left = int(np.prod(dims[:slot]))
    right = int(np.prod(dims[slot + 1:]))
    parts = [sp.identity(left, format="csr"), op.matrix, sp.identity(right, format="csr")]
    mat = reduce(lambda x, y: sp.kron(x, y, format="csr"), parts)
    return Operator(basis, mat, op.hermitian_hint)


def tensor(*ops):
    """Kronecker product of operators in the given factor order."""
    factors = sum((o.basis.factors for o in ops), ())
    mat = reduce(lambda x, y: sp.kron(x, y, format="csr"), [o.matrix for o in ops])
    return Operator(CompositeBasis(factors), mat, all(o.hermitian_hint for o in ops))
