import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeeze_transfer import metrology as Mt
from squeeze_transfer.basis import enumerate_sector
from squeeze_transfer.dynamics import BlockDensityMatrix
from squeeze_transfer.errors import MeanSpinDirectionError
from squeeze_transfer.states import PureState, SqueezeSpec, boson_amplitudes


def dense_spin_ops(n_ions):
    s = n_ions / 2
    m = np.arange(-s, s + 1)
    sp = np.diag(np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] + 1)), -1).astype(complex)
    sx = 0.5 * (sp + sp.conj().T)
    sy = -0.5j * (sp - sp.conj().T)
    return sx, sy, np.diag(m).astype(complex)


def to_dense(state: PureState, n_cut):
    """Wavefunction on the Dicke (x) Fock grid, rows indexed by m + S."""
    out = np.zeros((state.n_ions + 1, n_cut + 1), dtype=complex)
    for M, v in state.amplitudes.items():
        sec = enumerate_sector(state.n_ions, M)
        for k, amp in enumerate(v):
            out[int(sec.m_values[k] + state.n_ions / 2), M - k] = amp
    return out


def random_state(rng, n_ions, max_sector):
    amps = {}
    for M in range(max_sector + 1):
        d = len(enumerate_sector(n_ions, M).m_values)
        amps[M] = rng.normal(size=d) + 1j * rng.normal(size=d)
    norm = math.sqrt(sum(np.vdot(v, v).real for v in amps.values()))
    return PureState(n_ions, {M: v / norm for M, v in amps.items()})


def oracle_moments(state, n_cut):
    psi = to_dense(state, n_cut)
    ops = dense_spin_ops(state.n_ions)

    def ev(a):  # spin operator acting on the first tensor factor
        return np.vdot(psi, a @ psi).real

    first = [ev(o) for o in ops]
    second = [[ev(0.5 * (a @ b + b @ a)) for b in ops] for a in ops]
    return first, second


@pytest.mark.parametrize("n_ions", [1, 2, 3, 5])
@pytest.mark.parametrize("seed", range(4))
def test_moments_match_dense_oracle(n_ions, seed):
    state = random_state(np.random.default_rng(seed), n_ions, 5)
    first, second = oracle_moments(state, 5)
    mom = Mt.spin_moments(state)
    assert [mom.sx, mom.sy, mom.sz] == pytest.approx(first, abs=1e-12)
    got = [[mom.sxx, mom.sxy, mom.sxz], [mom.sxy, mom.syy, mom.syz], [mom.sxz, mom.syz, mom.szz]]
    assert np.allclose(got, second, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_density_matrix_moments_match_pure(seed):
    state = random_state(np.random.default_rng(seed), 3, 4)
    a, b = Mt.spin_moments(state), Mt.spin_moments(BlockDensityMatrix.from_pure(state))
    for name in ("sx", "sy", "sz", "sxx", "syy", "szz", "sxy", "sxz", "syz"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-12)


def test_coherent_spin_state_values():
    n = 6
    css = PureState(n, {0: np.array([1.0 + 0j])})
    mom = Mt.spin_moments(css)
    assert mom.sz == -3 and mom.var_x == pytest.approx(1.5) and mom.var_y == pytest.approx(1.5)
    xi, _ = Mt.squeezing_parameter(mom)
    assert xi == pytest.approx(1.0)
    rep = Mt.report(css)
    assert rep.qfi == 0 and "qfi_zero" in rep.flags and math.isinf(rep.chi_ss_sq)
    assert rep.gain_db == pytest.approx(0.0, abs=1e-12)


def test_equal_superposition_of_extremes():
    # (|S,-S> + |S,S>)/sqrt 2 carries F = N^2
    n = 4
    amps = {0: np.array([1 / math.sqrt(2) + 0j]), 4: np.zeros(5, complex)}
    amps[4][-1] = 1 / math.sqrt(2)  # m = +2 with n = 0 is the last member of sector 4
    state = PureState(n, amps)
    assert Mt.qfi_pure(state) == pytest.approx(n * n)


@given(seed=st.integers(0, 2**32 - 1), n_ions=st.integers(1, 4))
@settings(max_examples=100)
def test_mixed_qfi_reduces_to_pure(seed, n_ions):
    state = random_state(np.random.default_rng(seed), n_ions, 3)
    rho = BlockDensityMatrix.from_pure(state)
    assert Mt.qfi_mixed(rho) == pytest.approx(Mt.qfi_pure(state), rel=1e-8, abs=1e-9)


def test_mixed_qfi_of_diagonal_state_is_zero():
    blocks = {(0, 0): np.array([[0.5]], complex), (1, 1): np.diag([0.3, 0.2]).astype(complex)}
    assert Mt.qfi_mixed(BlockDensityMatrix(2, blocks)) == pytest.approx(0.0, abs=1e-15)


def test_mixed_qfi_below_variance_bound():
    state = random_state(np.random.default_rng(7), 2, 3)
    rho = BlockDensityMatrix.from_pure(state)
    mixed = BlockDensityMatrix(2, {k: 0.7 * v if k[0] != k[1] else v for k, v in rho.blocks.items()})
    rep = Mt.report(mixed)
    assert rep.qfi < rep.qfi_var_bound


def _moments_from_tuple(vx, vy, c, sz=-3.0):
    return Mt.SpinMoments(6, 0.0, 0.0, sz, vx, vy, sz * sz, c, 0.0, 0.0)


@given(vx=st.floats(0.01, 10), vy=st.floats(0.01, 10), frac=st.floats(-0.99, 0.99))
@settings(max_examples=1000)
def test_closed_form_minimum_beats_angle_scan(vx, vy, frac):
    c = frac * math.sqrt(vx * vy)
    xi, alpha = Mt.squeezing_parameter(_moments_from_tuple(vx, vy, c))
    a = np.linspace(0, math.pi, 360, endpoint=False)
    scan = vx * np.cos(a) ** 2 + vy * np.sin(a) ** 2 + 2 * c * np.sin(a) * np.cos(a)
    vmin = xi * 9.0 / 6
    assert vmin <= scan.min() + 1e-12
    assert vmin >= scan.min() - (vx + vy) * (math.pi / 360) ** 2
    at = vx * math.cos(alpha) ** 2 + vy * math.sin(alpha) ** 2 + 2 * c * math.sin(alpha) * math.cos(alpha)
    assert at == pytest.approx(vmin, rel=1e-9, abs=1e-12)
    assert 0 <= alpha < math.pi


def test_tilted_mean_spin_raises_and_flags():
    mom = Mt.SpinMoments(4, 0.5, 0.0, -1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    with pytest.raises(MeanSpinDirectionError):
        Mt.squeezing_parameter(mom)
    state = PureState(2, {0: np.array([1.0 + 0j]), 1: np.array([0j, 1.0 + 0j])})  # |-1,0> + |0,0>
    rep = Mt.report(PureState(2, {M: v / math.sqrt(2) for M, v in state.amplitudes.items()}))
    assert "msd_not_z" in rep.flags and math.isnan(rep.xi_sq) and rep.tilt > 0


def test_report_identities():
    # ideal transfer: phonon amplitude of |2j> moved onto |m = -S + 2j, n = 0>
    b = boson_amplitudes(SqueezeSpec(1.0))
    amps = {}
    for M in (0, 2, 4):
        amps[M] = np.zeros(M + 1, complex)
        amps[M][M] = b[M]
    state = PureState(4, amps)
    rep = Mt.report(state)
    assert "msd_not_z" not in rep.flags and rep.xi_sq < 1
    assert rep.chi_sh_sq == pytest.approx(rep.n_ions * rep.chi_ss_sq)
    assert rep.xi_sh_sq == pytest.approx(rep.n_ions * rep.xi_sq)
    assert rep.delta_phi_bound == pytest.approx(1 / math.sqrt(rep.qfi))
    assert rep.qfi == pytest.approx(rep.qfi_var_bound)


@pytest.mark.parametrize("as_rho", [False, True])
def test_rotation_about_z(as_rho):
    state = random_state(np.random.default_rng(3), 3, 4)
    obj = BlockDensityMatrix.from_pure(state) if as_rho else state
    rot = Mt.apply_rotation_z(obj, 0.37)
    a, b = Mt.spin_moments(obj), Mt.spin_moments(rot)
    assert b.sz == pytest.approx(a.sz) and b.var_z == pytest.approx(a.var_z)
    assert math.hypot(b.sx, b.sy) == pytest.approx(math.hypot(a.sx, a.sy))
    # the transverse spin turns by phi
    assert math.atan2(b.sy, b.sx) - math.atan2(a.sy, a.sx) == pytest.approx(0.37)
    full = Mt.spin_moments(Mt.apply_rotation_z(obj, 2 * math.pi))
    # a 2 pi turn is -1 for half-integer S, so every moment returns
    for name in ("sx", "sy", "sxy", "sxz"):
        assert getattr(full, name) == pytest.approx(getattr(a, name), abs=1e-12)
