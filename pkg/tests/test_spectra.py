import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from dickemirror.exceptions import ConvergenceError, DimensionError
from dickemirror.hilbert import FockMode, Operator, single
from dickemirror.model import ModelParams, build_dicke, dicke_parity
from dickemirror.spectra import dense_spectrum, ground_state, lanczos


def random_hermitian(dim, seed, density=0.05):
    rng = np.random.default_rng(seed)
    A = sp.random(dim, dim, density=density, random_state=rng, dtype=complex,
                  data_rvs=lambda n: rng.standard_normal(n) + 1j * rng.standard_normal(n))
    A = A + A.conj().T + sp.diags(rng.standard_normal(dim))
    return Operator(single(FockMode(dim - 1)), A, True)


@settings(max_examples=20, deadline=None)
@given(st.integers(20, 300), st.integers(0, 2**31))
def test_lanczos_matches_dense(dim, seed):
    H = random_hermitian(dim, seed, density=min(1.0, 8 / dim))
    ref = dense_spectrum(H, vectors=False).eigenvalues
    res = lanczos(H, k=3, seed=seed)
    np.testing.assert_allclose(res.eigenvalues, ref[:3], atol=1e-9)
    assert res.residuals.max() < 1e-9


def test_lanczos_eigenvectors_orthonormal():
    H = random_hermitian(400, 3)
    X = lanczos(H, k=4).eigenvectors
    np.testing.assert_allclose(X.conj().T @ X, np.eye(4), atol=1e-8)


def test_lanczos_seed_reproducible():
    H = random_hermitian(200, 9)
    a = lanczos(H, k=1, seed=5).eigenvectors[:, 0]
    b = lanczos(H, k=1, seed=5).eigenvectors[:, 0]
    np.testing.assert_array_equal(a, b)


def test_lanczos_raises_instead_of_returning_unconverged():
    H = random_hermitian(600, 1)
    with pytest.raises(ConvergenceError):
        lanczos(H, k=2, max_basis=6, max_restarts=1, tol=1e-14)


def test_invariant_subspace_smaller_than_k():
    H = Operator(single(FockMode(9)), sp.diags(np.arange(10.0)), True)
    v0 = np.zeros(10)
    v0[3] = 1
    with pytest.raises(ConvergenceError, match="invariant subspace"):
        lanczos(H, k=2, v0=v0)


def test_dense_rejects_large_and_nonhermitian():
    H = random_hermitian(60, 2)
    with pytest.raises(DimensionError):
        dense_spectrum(H, threshold=50)
    bad = Operator(H.basis, H.matrix + sp.eye(60, k=1), True)
    with pytest.raises(ValueError, match="not hermitian"):
        dense_spectrum(bad)


def test_parity_sector_ground_state_matches_dense_sector():
    p = ModelParams(J=3, lam=0.7, cutoff_field=30)
    H = build_dicke(p)
    par = dicke_parity(H.basis)
    dense = H.toarray()
    for sector in (1, -1):
        idx = np.flatnonzero(par == sector)
        ref = np.linalg.eigvalsh(dense[np.ix_(idx, idx)])[0]
        gs = ground_state(H, parity=par, sector=sector)
        assert gs.energy == pytest.approx(ref, abs=1e-9)
        amp = gs.state.amplitudes
        assert np.abs(amp[par != sector]).max() == 0


def test_superradiant_doublet_flagged():
    p = ModelParams(J=10, lam=1.0, cutoff_field=60)
    H = build_dicke(p)
    gs = ground_state(H, parity=dicke_parity(H.basis))
    assert gs.degenerate
    assert gs.gap < 1e-8
    normal = ground_state(build_dicke(p.with_(lam=0.3, cutoff_field=20)))
    assert not normal.degenerate


def test_ground_state_phase_fixed():
    H = random_hermitian(100, 4)
    amp = ground_state(H).state.amplitudes
    i = np.argmax(np.abs(amp))
    assert amp[i].imag == pytest.approx(0, abs=1e-14) and amp[i].real > 0
