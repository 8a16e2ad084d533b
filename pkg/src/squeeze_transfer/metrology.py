"""Spin moments, quantum Fisher information and spin-squeezing figures of merit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import basis
from .dynamics import BlockDensityMatrix
from .errors import ArgumentError, MeanSpinDirectionError, NumericalError
from .states import PureState

#: Eigenvalue pairs with ``p_i + p_j`` below this are outside the support.
QFI_SUPPORT_TOL = 1e-12
#: Mean spin counts as z-aligned when ``|<S_x>|, |<S_y>| <= MSD_TOL * N``.
MSD_TOL = 1e-6


@dataclass(frozen=True)
class SpinMoments:
    """First moments and symmetrized second moments ``<(S_i S_j + S_j S_i)/2>``."""

    n_ions: int
    sx: float
    sy: float
    sz: float
    sxx: float
    syy: float
    szz: float
    sxy: float
    sxz: float
    syz: float

    @property
    def var_x(self) -> float:
        return self.sxx - self.sx ** 2

    @property
    def var_y(self) -> float:
        return self.syy - self.sy ** 2

    @property
    def var_z(self) -> float:
        return max(self.szz - self.sz ** 2, 0.0)

    @property
    def cov_xy(self) -> float:
        return self.sxy - self.sx * self.sy

    @property
    def mean_spin_length(self) -> float:
        return math.sqrt(self.sx ** 2 + self.sy ** 2 + self.sz ** 2)

    @property
    def tilt(self) -> float:
        """Angle between the mean spin and the z axis (radians)."""
        return math.atan2(math.hypot(self.sx, self.sy), abs(self.sz))


def _raising_coeffs(n_ions: int, M: int) -> np.ndarray:
    """``<m+1|S+|m>`` for every member of homogeneous sector ``M``."""
    s = n_ions / 2
    m = basis.enumerate_sector(n_ions, M).m_values
    return np.sqrt(np.maximum(s * (s + 1) - m * (m + 1), 0.0))


@lru_cache(maxsize=256)
def _raising_breathing(n_ions: int, M: int) -> sp.csr_matrix:
    """``S+ = sum_k sigma+_k`` from inhomogeneous sector ``M`` to ``M + 1``."""
    bits, phon = basis.inhomogeneous_sector_arrays(n_ions, M)
    bits2, phon2 = basis.inhomogeneous_sector_arrays(n_ions, M + 1)
    lookup = {(int(b), int(n)): i for i, (b, n) in enumerate(zip(bits2, phon2))}
    rows, cols = [], []
    for j, (b, n) in enumerate(zip(bits, phon)):
        for k in range(n_ions):
            mask = 1 << k
            if not b & mask:
                rows.append(lookup[(int(b | mask), int(n))])
                cols.append(j)
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(bits2), len(bits)))


def _raise(state: PureState, M: int, v: np.ndarray) -> np.ndarray:
    if state.mode == "breathing":
        return _raising_breathing(state.n_ions, M) @ v
    c = _raising_coeffs(state.n_ions, M)
    out = np.zeros(basis.sector_dim(state.n_ions, M + 1), dtype=complex)
    out[1:] = (c * v)[:out.size - 1]
    return out


def _pure_moments(state: PureState) -> SpinMoments:
    amps = state.amplitudes
    norm = state.norm_sq()
    if norm <= 0:
        raise ArgumentError("state has zero norm")
    sz = szz = 0.0
    sp1 = sp2 = tz = 0j
    sminus_splus = 0.0
    for M, v in amps.items():
        m = state.m_values(M)
        pv = np.abs(v) ** 2
        sz += float(pv @ m)
        szz += float(pv @ (m * m))
        up = _raise(state, M, v)
        sminus_splus += float(np.vdot(up, up).real)
        if M + 1 in amps:
            sp1 += np.vdot(amps[M + 1], up)
            tz += np.vdot(amps[M + 1], _raise(state, M, (2 * m + 1) * v))
        if M + 2 in amps:
            sp2 += np.vdot(amps[M + 2], _raise(state, M + 1, up))
    return _assemble(state.n_ions, norm, sz, szz, sp1, sp2, tz, sminus_splus)


def _rho_moments(rho: BlockDensityMatrix) -> SpinMoments:
    n = rho.n_ions
    s = n / 2
    tr = rho.trace()
    if tr <= 0:
        raise ArgumentError("density matrix has non-positive trace")
    sz = szz = 0.0
    sp1 = sp2 = tz = 0j
    for M in rho.sectors:
        m = rho.m_values(M)
        diag = np.real(np.diag(rho.blocks[(M, M)]))
        sz += float(diag @ m)
        szz += float(diag @ (m * m))
        c = _raising_coeffs(n, M)
        b1 = rho.block(M, M + 1)
        if b1 is not None:
            j = np.arange(min(c.size, b1.shape[1] - 1))
            # Tr(S+ rho) picks rho[(M, j), (M+1, j+1)]
            sp1 += np.sum(c[j] * b1[j, j + 1])
            tz += np.sum(c[j] * (2 * m[j] + 1) * b1[j, j + 1])
        b2 = rho.block(M, M + 2)
        if b2 is not None:
            c1 = _raising_coeffs(n, M + 1)
            j = np.arange(min(c.size, b2.shape[1] - 2))
            sp2 += np.sum(c[j] * c1[j + 1] * b2[j, j + 2])
    # collective spin: S- S+ = S(S+1) - S_z^2 - S_z
    sminus_splus = s * (s + 1) * tr - szz - sz
    return _assemble(n, tr, sz, szz, sp1, sp2, tz, sminus_splus)


def _assemble(n_ions, norm, sz, szz, sp1, sp2, tz, sminus_splus) -> SpinMoments:
    sz, szz, sp1, sp2, tz, smsp = (x / norm for x in (sz, szz, sp1, sp2, tz, sminus_splus))
    spsm = smsp + 2 * sz  # [S+, S-] = 2 S_z
    sym = 0.25 * (spsm + smsp)
    return SpinMoments(
        n_ions=n_ions,
        sx=float(sp1.real), sy=float(sp1.imag), sz=float(sz),
        sxx=float(0.5 * sp2.real + sym), syy=float(-0.5 * sp2.real + sym), szz=float(szz),
        sxy=float(0.5 * sp2.imag), sxz=float(0.5 * tz.real), syz=float(0.5 * tz.imag),
    )


def spin_moments(state) -> SpinMoments:
    """Collective spin moments of a :class:`PureState` or :class:`BlockDensityMatrix`.

    Unnormalized inputs (from truncation) are divided by their norm.
    """
    if isinstance(state, BlockDensityMatrix):
        return _rho_moments(state)
    if isinstance(state, PureState):
        return _pure_moments(state)
    raise ArgumentError(f"unsupported state type {type(state).__name__}")


def qfi_pure(state: PureState) -> float:
    """``4 Var(S_z)`` of a pure state."""
    return 4.0 * spin_moments(state).var_z


def qfi_mixed(rho: BlockDensityMatrix, tau: float = QFI_SUPPORT_TOL) -> float:
    """``F = 2 sum_{p_i + p_j > tau} (p_i - p_j)^2 / (p_i + p_j) |<i|S_z|j>|^2``."""
    dense, m, _ = rho.to_dense()
    dense = dense / np.trace(dense).real
    try:
        p, v = np.linalg.eigh(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    gen = np.conj(v.T) @ (m[:, None] * v)
    psum = p[:, None] + p[None, :]
    pdiff = p[:, None] - p[None, :]
    keep = psum > tau
    terms = np.zeros_like(psum)
    terms[keep] = pdiff[keep] ** 2 / psum[keep] * np.abs(gen[keep]) ** 2
    return float(2.0 * terms.sum())


def squeezing_parameter(moments: SpinMoments, n_ions: int | None = None,
                        msd_tol: float = MSD_TOL) -> tuple[float, float]:
    """Wineland parameter ``xi^2 = N V_min / <S_z>^2`` and the minimizing angle.

    ``V_min`` is the smallest variance of ``cos(a) S_x + sin(a) S_y``, found in
    closed form. The mean spin must point along z: ``|<S_x>|, |<S_y>|`` above
    ``msd_tol * N`` raise :class:`MeanSpinDirectionError`.
    """
    n = moments.n_ions if n_ions is None else n_ions
    if abs(moments.sx) > msd_tol * n or abs(moments.sy) > msd_tol * n:
        raise MeanSpinDirectionError(
            f"mean spin not along z: <S_x>={moments.sx:.3g}, <S_y>={moments.sy:.3g} "
            f"(tilt {moments.tilt:.3g} rad)")
    if moments.sz == 0:
        raise MeanSpinDirectionError("mean spin vanishes")
    vx, vy, c = moments.var_x, moments.var_y, moments.cov_xy
    half = 0.5 * (vx - vy)
    vmin = 0.5 * (vx + vy) - math.hypot(half, c)
    alpha = (0.5 * (math.atan2(c, half) + math.pi)) % math.pi
    return n * vmin / moments.sz ** 2, alpha


@dataclass(frozen=True)
class MetrologyReport:
    n_ions: int
    qfi: float
    chi_ss_sq: float
    chi_sh_sq: float
    xi_sq: float
    xi_sh_sq: float
    gain_db: float
    var_sz: float
    alpha_min: float
    delta_phi_bound: float
    qfi_var_bound: float
    tilt: float
    flags: tuple[str, ...] = ()
    notes: dict = field(default_factory=dict)


def report(state, n_ions: int | None = None) -> MetrologyReport:
    """All figures of merit for a pure state or density matrix.

    ``qfi`` is the pure-state value for a :class:`PureState` and the spectral
    mixed-state value for a :class:`BlockDensityMatrix`; ``qfi_var_bound`` is
    always ``4 Var(S_z)``. A vanishing QFI gives infinite ratios with the
    ``qfi_zero`` flag; a tilted mean spin gives NaN squeezing with ``msd_not_z``.
    """
    mom = spin_moments(state)
    n = mom.n_ions if n_ions is None else n_ions
    var = mom.var_z
    f = qfi_mixed(state) if isinstance(state, BlockDensityMatrix) else 4.0 * var
    flags, notes = [], {}
    if f > 0:
        chi_ss, chi_sh, bound = n / f, n * n / f, 1.0 / math.sqrt(f)
    else:
        flags.append("qfi_zero")
        chi_ss = chi_sh = bound = math.inf
    try:
        xi, alpha = squeezing_parameter(mom, n)
        gain = -10.0 * math.log10(xi) if xi > 0 else math.inf
    except MeanSpinDirectionError as exc:
        flags.append("msd_not_z")
        notes["msd"] = str(exc)
        xi = alpha = gain = math.nan
    return MetrologyReport(
        n_ions=n, qfi=f, chi_ss_sq=chi_ss, chi_sh_sq=chi_sh, xi_sq=xi, xi_sh_sq=n * xi,
        gain_db=gain, var_sz=var, alpha_min=alpha, delta_phi_bound=bound,
        qfi_var_bound=4.0 * var, tilt=mom.tilt, flags=tuple(flags), notes=notes)


def apply_rotation_z(state, phi: float):
    """``exp(-i phi S_z)`` applied to a pure state or density matrix."""
    if isinstance(state, PureState):
        amps = {M: v * np.exp(-1j * phi * state.m_values(M)) for M, v in state.amplitudes.items()}
        return PureState(state.n_ions, amps, state.mode, state.dropped_mass, dict(state.meta))
    if isinstance(state, BlockDensityMatrix):
        blocks = {}
        for (M, M2), b in state.blocks.items():
            left = np.exp(-1j * phi * state.m_values(M))
            right = np.exp(1j * phi * state.m_values(M2))
            blocks[(M, M2)] = left[:, None] * b * right[None, :]
        return BlockDensityMatrix(state.n_ions, blocks, state.dropped_mass, dict(state.meta))
    raise ArgumentError(f"unsupported state type {type(state).__name__}")
