import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from squeeze_transfer import basis, hamiltonian as H
from squeeze_transfer.errors import ArgumentError


def dense_tc(n_ions, n_cut, delta, lam):
    """Full Dicke (x) Fock Hamiltonian, index = k * (n_cut + 1) + n with m = -S + k."""
    s = n_ions / 2
    m = np.arange(-s, s + 1)
    splus = np.diag(np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] + 1)), -1)
    a = np.diag(np.sqrt(np.arange(1, n_cut + 1)), 1)
    eye_s, eye_b = np.eye(len(m)), np.eye(n_cut + 1)
    coup = np.kron(splus, a)
    return (delta * np.kron(np.diag(m), eye_b) + lam / math.sqrt(n_ions) * (coup + coup.T),
            np.kron(m + s, np.ones(n_cut + 1)) + np.kron(np.ones(len(m)), np.arange(n_cut + 1)))


def test_two_ion_single_excitation_block():
    sec = basis.enumerate_sector(2, 1)
    h = H.build_tc_sector(2, sec, H.CouplingSpec(1.0, 2.0))
    # <0,0|lam/sqrt2 S+ a|-1,1> = lam/sqrt2 * sqrt2 * 1
    assert np.allclose(h, [[-1.0, 2.0], [2.0, 0.0]])


@given(st.integers(1, 6), st.integers(0, 12), st.floats(-5, 5))
def test_decoupled_limit_is_diagonal(n_ions, M, delta):
    sec = basis.enumerate_sector(n_ions, M)
    h = H.build_tc_sector(n_ions, sec, H.CouplingSpec(delta, 0.0))
    assert np.allclose(h, np.diag(delta * sec.m_values))


def test_sector_mismatch():
    with pytest.raises(ArgumentError):
        H.build_tc_sector(3, basis.enumerate_sector(2, 1), H.CouplingSpec(1.0, 1.0))


def test_sector_blocks_match_dense_space():
    n_ions, n_cut, delta, lam = 3, 6, 0.7, 1.3
    full, exc = dense_tc(n_ions, n_cut, delta, lam)
    # commutes with the excitation number, i.e. block diagonal after sorting by sector
    assert np.allclose(full * (exc[:, None] != exc[None, :]), 0)
    s = n_ions / 2
    for M in range(n_cut + 1):
        sec = basis.enumerate_sector(n_ions, M)
        idx = [int(mem.m + s) * (n_cut + 1) + mem.n_phonon for mem in sec.members]
        block = H.build_tc_sector(n_ions, sec, H.CouplingSpec(delta, lam))
        assert np.allclose(full[np.ix_(idx, idx)], block)


def test_breathing_two_ion_example():
    prof = H.ModeProfile((-1 / math.sqrt(2), 1 / math.sqrt(2)))
    lam = 0.9
    h = H.build_breathing_sector(2, 1, H.CouplingSpec(0.0, lam, "breathing", prof)).toarray()
    # basis order: (01,0), (10,0), (00,1)
    assert h[2, 1] == pytest.approx(-lam / math.sqrt(2))
    assert h[2, 0] == pytest.approx(lam / math.sqrt(2))
    assert np.allclose(h, h.T)
    assert h[0, 1] == 0


@pytest.mark.parametrize("M", [0, 1, 2, 5])
def test_uniform_profile_reproduces_collective_spectrum(M):
    n_ions, delta, lam = 3, 0.4, 1.1
    hb = H.build_breathing_sector(n_ions, M, H.CouplingSpec(delta, lam, "breathing",
                                                            H.uniform_profile(n_ions))).toarray()
    hc = H.build_tc_sector(n_ions, basis.enumerate_sector(n_ions, M), H.CouplingSpec(delta, lam))
    eb = np.linalg.eigvalsh(hb)
    for e in np.linalg.eigvalsh(hc):
        assert np.min(np.abs(eb - e)) < 1e-12


def test_three_ion_breathing_profile():
    prof = H.breathing_mode_profile(3)
    assert np.allclose(prof.array, [-1 / math.sqrt(2), 0, 1 / math.sqrt(2)], atol=1e-12)


@pytest.mark.parametrize("n_ions", [2, 4, 7, 10, 14])
def test_breathing_profile_properties(n_ions):
    u = H.equilibrium_positions(n_ions)
    prof = H.breathing_mode_profile(n_ions).array
    assert np.allclose(prof, -prof[::-1])
    assert float(prof @ prof) == pytest.approx(1.0, abs=1e-12)
    # eigenvector of the axial mode matrix with eigenvalue 3 (breathing frequency sqrt(3))
    a = H.axial_hessian(u)
    assert np.allclose(a @ prof, 3 * prof, atol=1e-8)


def test_profile_validation():
    with pytest.raises(ArgumentError):
        H.ModeProfile((1.0, 1.0))
    with pytest.raises(ArgumentError):
        H.CouplingSpec(1.0, 1.0, "breathing")
    with pytest.raises(ArgumentError):
        H.CouplingSpec(1.0, 1.0, "com", H.uniform_profile(2))
    with pytest.raises(ArgumentError):
        H.CouplingSpec(float("nan"), 1.0)
