"""Ground states and low-lying spectra.

Small problems go through dense ``eigh``; large sparse ones through a
Lanczos iteration with full reorthogonalization and explicit restarts.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import ConvergenceError, DimensionError
from .hilbert import DENSE_THRESHOLD, HERMITIAN_TOL
from .states import PureState

DEFAULT_SEED = 1234
DEGENERACY_GAP = 1e-8


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]  # columns
    residuals: np.ndarray
    iterations: int = 0

    @property
    def gap(self):
        if len(self.eigenvalues) < 2:
            return np.inf
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def degenerate(self):
        return self.gap < DEGENERACY_GAP

    def states(self, basis):
        if self.eigenvectors is None:
            return []
        return [PureState(v, basis) for v in self.eigenvectors.T]


class GroundState(NamedTuple):
    energy: float
    state: PureState
    residual: float
    gap: float
    degenerate: bool
    sector: Optional[int]


def _require_hermitian(H):
    if not H.hermitian_hint:
        raise ValueError("solver requires an operator flagged hermitian")
    err = H.hermiticity_error()
    if err >= HERMITIAN_TOL:
        raise ValueError(f"operator is not hermitian (max|H - H^dag| = {err:.3g})")


def dense_spectrum(H, threshold=DENSE_THRESHOLD, vectors=True):
    """Full spectrum by dense diagonalization."""
    _require_hermitian(H)
    if H.dim > threshold:
        raise DimensionError(f"dimension {H.dim} above dense threshold {threshold}")
    mat = H.toarray(threshold=None)
    evals, evecs = np.linalg.eigh(mat)
    res = np.linalg.norm(mat @ evecs - evecs * evals, axis=0)
    scale = max(np.abs(evals).max(), 1.0)
    if res.max() >= 1e-10 * scale:
        raise ConvergenceError(f"dense eigensolver residual {res.max():.3g} too large")
    return EigenResult(evals, evecs if vectors else None, res)


def start_vector(dim, seed=DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def lanczos(H, k=1, tol=1e-9, v0=None, seed=DEFAULT_SEED, max_basis=200, max_restarts=100,
            mask=None):
    """Lowest ``k`` eigenpairs of a hermitian operator.

    Every new Lanczos vector is reorthogonalized against the full basis.
    When the basis reaches ``max_basis`` without convergence the iteration
    restarts from the sum of the current lowest Ritz vectors.  Raises
    ConvergenceError rather than returning unconverged pairs.  ``mask``
    (boolean diagonal) confines the iteration to an invariant subspace.
    """
    _require_hermitian(H)
    A = H.matrix
    n = H.dim
    v = start_vector(n, seed) if v0 is None else np.asarray(v0, dtype=complex).copy()
    if mask is not None:
        v = v * mask
    v /= np.linalg.norm(v)
    m_cap = min(max_basis, n)
    total_its = 0
    for _ in range(max_restarts + 1):
        Q = np.zeros((n, m_cap), dtype=complex)
        alphas, betas = [], []
        Q[:, 0] = v
        w = A @ v
        converged = False
        for j in range(m_cap):
            total_its += 1
            alpha = np.vdot(Q[:, j], w).real
            alphas.append(alpha)
            w = w - alpha * Q[:, j]
            if j > 0:
                w = w - betas[-1] * Q[:, j - 1]
            # full reorthogonalization, applied twice for stability
            for _ in range(2):
                w -= Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
            if mask is not None:
                w = w * mask
            beta = np.linalg.norm(w)
            m = j + 1
            kk = min(k, m)
            check = beta < 1e-13 * max(1.0, abs(alpha)) or m == m_cap or m % 5 == 0
            if check:
                theta, S = _tridiag_eig(alphas, betas, kk)
                ritz_res = beta * np.abs(S[-1, :])
                if beta < 1e-13 * max(1.0, abs(alpha)):
                    converged = True  # invariant subspace
                elif m >= k and ritz_res.max() < tol:
                    converged = True
                if converged or m == m_cap:
                    break
            betas.append(beta)
            Q[:, j + 1] = w / beta
            w = A @ Q[:, j + 1]
        X = Q[:, :m] @ S
        X /= np.linalg.norm(X, axis=0)
        res = np.linalg.norm(A @ X - X * theta, axis=0)
        if converged and len(theta) == k and res.max() < tol:
            return EigenResult(theta, X, res, total_its)
        if converged and len(theta) < k:
            raise ConvergenceError(
                f"start vector spans an invariant subspace of dimension {m} < k={k}"
            )
        v = X.sum(axis=1)
        v /= np.linalg.norm(v)
    raise ConvergenceError(
        f"Lanczos did not converge to tol={tol:g} after {total_its} iterations "
        f"(best residual {res.max():.3g})"
    )


def _tridiag_eig(alphas, betas, k):
    d = np.asarray(alphas)
    e = np.asarray(betas[: len(alphas) - 1])
    if len(d) == 1:
        return d.copy(), np.ones((1, 1))
    return eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))


def ground_state(H, tol=1e-9, seed=DEFAULT_SEED, parity=None, sector=1, **lanczos_kw):
    """Lowest eigenpair by Lanczos.

    ``parity`` is an optional diagonal of +-1 eigenvalues of a conserved
    parity.  When given, the search is confined to ``sector`` and the gap
    is measured against the lowest level of the opposite sector as well,
    which is how the near-degenerate super-radiant doublet gets flagged
    (a single Krylov sequence cannot resolve it).
    """
    if parity is None:
        res = lanczos(H, k=min(2, H.dim), tol=tol, seed=seed, **lanczos_kw)
        E, vec, r = res.eigenvalues[0], res.eigenvectors[:, 0], res.residuals[0]
        gap = res.gap
    else:
        parity = np.asarray(parity)
        mask = parity == sector
        if not np.any(mask):
            raise ValueError(f"parity sector {sector} is empty")
        res = lanczos(H, k=min(2, int(mask.sum())), tol=tol, seed=seed, mask=mask, **lanczos_kw)
        E, vec, r = res.eigenvalues[0], res.eigenvectors[:, 0], res.residuals[0]
        levels = list(res.eigenvalues)
        other = ~mask
        if np.any(other):
            levels.append(lanczos(H, k=1, tol=tol, seed=seed, mask=other, **lanczos_kw).eigenvalues[0])
        gap = min(abs(x - E) for x in levels[1:]) if len(levels) > 1 else np.inf
    vec = _fix_phase(vec)
    return GroundState(
        float(E), PureState(vec, H.basis), float(r), float(gap), gap < DEGENERACY_GAP,
        None if parity is None else sector,
    )


def _fix_phase(vec):
    i = np.argmax(np.abs(vec))
    return vec * (abs(vec[i]) / vec[i])
