"""Time evolution under the ramped Tavis-Cummings Hamiltonian.

Both ``H(t)`` and the collective dephasing operator ``S_z`` preserve the
excitation number, so a pure state is integrated sector by sector and a
density matrix block by block over sector pairs ``(M, M')``. All sectors (or
blocks) are padded to a common size and advanced together as one batched
array; padded entries never couple to physical ones.

Two integrators are available:

``dop853`` / ``rk45``
    Adaptive embedded Runge-Kutta from :func:`scipy.integrate.solve_ivp`.
``bdf``
    Implicit backward differentiation with the exact sparse Liouvillian as
    Jacobian; Lindblad equation only, for strong dephasing.
``magnus4``
    Fixed-step fourth-order Magnus propagator with exact exponentials of the
    sector blocks. For the Lindblad equation the dephasing is applied as an
    exact half-step on either side (Strang splitting), so every step is
    completely positive and trace preserving.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from . import basis
from .errors import ArgumentError, IntegratorError, UnsupportedInputError
from .hamiltonian import ModeProfile, breathing_mode_profile, breathing_sector_terms, tc_sector_terms
from .states import PureState, adiabatic_target_populations

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_GAUSS = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class PulseSchedule:
    """``delta(t) = delta0 sin(gamma t / 2)``, ``lam(t) = lambda0 cos(gamma t / 2)**2``.

    Rates in rad/s. The window defaults to ``t_f = pi / gamma``, ``t_i = -t_f``.
    """

    delta0: float
    lambda0: float
    gamma_ramp: float
    t_i: float | None = None
    t_f: float | None = None

    def __post_init__(self):
        if not self.gamma_ramp > 0:
            raise ArgumentError("ramp rate must be positive")
        if not (self.delta0 >= 0 and self.lambda0 >= 0):
            raise ArgumentError("pulse amplitudes must be non-negative")
        if self.t_f is None:
            object.__setattr__(self, "t_f", math.pi / self.gamma_ramp)
        if self.t_i is None:
            object.__setattr__(self, "t_i", -self.t_f)
        if not self.t_i < self.t_f:
            raise ArgumentError("t_i must precede t_f")

    @classmethod
    def from_hz(cls, delta0_hz: float, lambda0_hz: float, gamma_hz: float) -> "PulseSchedule":
        """Build from ordinary frequencies ``x / 2pi`` in Hz."""
        return cls(TWO_PI * delta0_hz, TWO_PI * lambda0_hz, TWO_PI * gamma_hz)

    @property
    def duration(self) -> float:
        return self.t_f - self.t_i

    def delta(self, t):
        return self.delta0 * np.sin(self.gamma_ramp * np.asarray(t) / 2)

    def lam(self, t):
        return self.lambda0 * np.cos(self.gamma_ramp * np.asarray(t) / 2) ** 2


FIG2_PULSES = PulseSchedule.from_hz(45e3, 20e3, 1e3)
FIG4_PULSES = PulseSchedule.from_hz(2.5e3, 1.5e3, 5.5e3)


def schedule_values(p: PulseSchedule, t: float) -> tuple[float, float]:
    slack = 1e-12 * p.duration
    if not p.t_i - slack <= t <= p.t_f + slack:
        raise ArgumentError(f"t={t} outside the pulse window [{p.t_i}, {p.t_f}]")
    return float(p.delta(t)), float(p.lam(t))


@dataclass(frozen=True)
class DephasingSpec:
    gamma_deph: float = 0.0

    def __post_init__(self):
        if not self.gamma_deph >= 0:
            raise ArgumentError("dephasing rate must be non-negative")


@dataclass(frozen=True)
class IntegratorSettings:
    method: str = "dop853"
    rtol: float = 1e-11
    atol: float = 1e-13
    max_step: float = np.inf
    fixed_steps: int = 2000
    conservation_tol: float = 1e-8

    def __post_init__(self):
        if self.method not in ("dop853", "rk45", "magnus4", "bdf"):
            raise ArgumentError(f"unknown integrator {self.method!r}")
        if self.rtol <= 0 or self.atol <= 0 or self.fixed_steps < 1:
            raise ArgumentError("integrator tolerances and step count must be positive")


LINDBLAD_DEFAULT = IntegratorSettings(method="magnus4", fixed_steps=1000)


# -- homogeneous packing ---------------------------------------------------------

class _ComPack:
    """Sectors padded to a common width ``D``; ``z`` holds m (0 on padding)."""

    def __init__(self, n_ions: int, sectors):
        self.n_ions = n_ions
        self.sectors = list(sectors)
        self.dims = np.array([basis.sector_dim(n_ions, M) for M in self.sectors])
        k, d = len(self.sectors), int(self.dims.max())
        self.width = d
        self.z = np.zeros((k, d))
        self.off = np.zeros((k, max(d - 1, 0)))
        for i, M in enumerate(self.sectors):
            m, off = tc_sector_terms(n_ions, basis.enumerate_sector(n_ions, M))
            self.z[i, :m.size] = m
            self.off[i, :off.size] = off

    def pack(self, vectors: dict[int, np.ndarray]) -> np.ndarray:
        out = np.zeros((len(self.sectors), self.width), dtype=complex)
        for i, M in enumerate(self.sectors):
            out[i, :self.dims[i]] = vectors[M]
        return out

    def unpack(self, arr: np.ndarray) -> dict[int, np.ndarray]:
        return {M: arr[i, :self.dims[i]].copy() for i, M in enumerate(self.sectors)}

    def apply_h(self, psi: np.ndarray, delta: float, lam: float) -> np.ndarray:
        h = delta * self.z * psi
        if self.width > 1:
            h[:, :-1] += lam * self.off * psi[:, 1:]
            h[:, 1:] += lam * self.off * psi[:, :-1]
        return h

    def dense_terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Batched ``Z``, ``C`` and the commutator ``[Z, C]`` as (K, D, D) arrays."""
        k, d = self.z.shape
        zz = np.zeros((k, d, d))
        cc = np.zeros((k, d, d))
        comm = np.zeros((k, d, d))
        idx = np.arange(d)
        zz[:, idx, idx] = self.z
        if d > 1:
            j = idx[:-1]
            cc[:, j, j + 1] = self.off
            cc[:, j + 1, j] = self.off
            dz = self.z[:, :-1] - self.z[:, 1:]
            comm[:, j, j + 1] = dz * self.off
            comm[:, j + 1, j] = -dz * self.off
        return zz, cc, comm


def _magnus_generators(p: PulseSchedule, t0: float, dt: float):
    t1 = t0 + (0.5 - _GAUSS) * dt
    t2 = t0 + (0.5 + _GAUSS) * dt
    d1, l1 = float(p.delta(t1)), float(p.lam(t1))
    d2, l2 = float(p.delta(t2)), float(p.lam(t2))
    # Omega = -i H_eff,  H_eff = dt/2 (H1 + H2) - i sqrt(3)/12 dt^2 [H2, H1]
    return 0.5 * dt * (d1 + d2), 0.5 * dt * (l1 + l2), math.sqrt(3) / 12 * dt * dt * (d2 * l1 - d1 * l2)


def _batched_unitaries(zz, cc, comm, a, b, c):
    heff = a * zz + b * cc - 1j * c * comm
    w, v = np.linalg.eigh(heff)
    return (v * np.exp(-1j * w)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


# -- Schroedinger ----------------------------------------------------------------

def _solve(rhs, y0, p, s, jac=None):
    method = {"dop853": "DOP853", "rk45": "RK45", "bdf": "BDF"}[s.method]
    extra = {"jac": jac} if method == "BDF" else {}
    sol = solve_ivp(rhs, (p.t_i, p.t_f), y0, method=method, rtol=s.rtol, atol=s.atol,
                    max_step=s.max_step, t_eval=[p.t_f], **extra)
    if not sol.success:
        raise IntegratorError(f"integration failed: {sol.message}")
    return sol.y[:, -1], sol.nfev


def _evolve_com(state: PureState, p: PulseSchedule, s: IntegratorSettings):
    pack = _ComPack(state.n_ions, state.sectors)
    psi0 = pack.pack(state.amplitudes)
    shape = psi0.shape
    if s.method == "magnus4":
        zz, cc, comm = pack.dense_terms()
        psi = psi0
        dt = p.duration / s.fixed_steps
        for k in range(s.fixed_steps):
            u = _batched_unitaries(zz, cc, comm, *_magnus_generators(p, p.t_i + k * dt, dt))
            psi = np.einsum("kij,kj->ki", u, psi)
        return pack.unpack(psi), {"n_steps": s.fixed_steps}

    def rhs(t, y):
        return -1j * pack.apply_h(y.reshape(shape), float(p.delta(t)), float(p.lam(t))).ravel()

    y, nfev = _solve(rhs, psi0.ravel(), p, s)
    return pack.unpack(y.reshape(shape)), {"nfev": nfev}


def _breathing_operators(n_ions: int, sectors, profile: ModeProfile):
    zs, cs, sizes = [], [], []
    for M in sectors:
        m, c = breathing_sector_terms(n_ions, M, profile)
        zs.append(m)
        cs.append(c)
        sizes.append(m.size)
    return np.concatenate(zs), sp.block_diag(cs, format="csr"), np.cumsum([0, *sizes])


def _evolve_breathing(state: PureState, p: PulseSchedule, s: IntegratorSettings,
                      profile: ModeProfile | None):
    profile = profile or breathing_mode_profile(state.n_ions)
    if len(profile) != state.n_ions:
        raise ArgumentError("mode profile length does not match the number of ions")
    sectors = state.sectors
    z, c, offsets = _breathing_operators(state.n_ions, sectors, profile)
    psi0 = np.concatenate([state.amplitudes[M] for M in sectors]).astype(complex)
    if s.method == "magnus4":
        zc = (sp.diags(z) @ c - c @ sp.diags(z)).tocsr()
        zdiag = sp.diags(z, format="csr")
        psi = psi0
        dt = p.duration / s.fixed_steps
        for k in range(s.fixed_steps):
            a, b, g = _magnus_generators(p, p.t_i + k * dt, dt)
            gen = (-1j * (a * zdiag + b * c) - g * zc).tocsc()
            psi = expm_multiply(gen, psi)
        y, info = psi, {"n_steps": s.fixed_steps}
    else:
        def rhs(t, y):
            return -1j * (float(p.delta(t)) * z * y + float(p.lam(t)) * (c @ y))

        y, nfev = _solve(rhs, psi0, p, s)
        info = {"nfev": nfev}
    amps = {M: y[offsets[i]:offsets[i + 1]].copy() for i, M in enumerate(sectors)}
    return amps, info


def evolve_schrodinger(state: PureState, p: PulseSchedule, s: IntegratorSettings | None = None,
                       profile: ModeProfile | None = None) -> PureState:
    """Integrate every stored sector from ``t_i`` to ``t_f``.

    ``profile`` overrides the breathing-mode amplitudes (breathing mode only).
    Raises :class:`IntegratorError` if any sector norm drifts by more than
    ``s.conservation_tol``.
    """
    s = s or IntegratorSettings()
    if s.method == "bdf":
        raise ArgumentError("bdf damps the norm; it is offered for the Lindblad equation only")
    if state.mode == "com":
        if profile is not None:
            raise ArgumentError("mode profile given for a centre-of-mass state")
        amps, info = _evolve_com(state, p, s)
    else:
        amps, info = _evolve_breathing(state, p, s, profile)
    drift = {M: abs(float(np.vdot(v, v).real) - float(np.vdot(state.amplitudes[M], state.amplitudes[M]).real))
             for M, v in amps.items()}
    worst = max(drift, key=drift.get) if drift else None
    if worst is not None and drift[worst] > s.conservation_tol:
        raise IntegratorError(f"norm drift {drift[worst]:.3g} in sector M={worst} "
                              f"exceeds {s.conservation_tol:g}")
    meta = dict(state.meta)
    meta.update(info)
    meta["max_norm_drift"] = drift[worst] if worst is not None else 0.0
    meta["method"] = s.method
    return PureState(state.n_ions, amps, state.mode, state.dropped_mass, meta)


# -- density matrices ------------------------------------------------------------

@dataclass
class BlockDensityMatrix:
    """Density operator stored as blocks over sector pairs ``M <= M'``.

    ``blocks[(M, M2)]`` has rows in sector ``M`` and columns in sector ``M2``;
    the lower blocks are the Hermitian conjugates and are never stored.
    """

    n_ions: int
    blocks: dict[tuple[int, int], np.ndarray]
    dropped_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    mode = "com"

    @property
    def spin(self) -> float:
        return self.n_ions / 2

    @property
    def sectors(self) -> list[int]:
        return sorted({M for M, M2 in self.blocks if M == M2})

    def block(self, M: int, M2: int) -> np.ndarray | None:
        if M <= M2:
            return self.blocks.get((M, M2))
        b = self.blocks.get((M2, M))
        return None if b is None else b.conj().T

    def trace(self) -> float:
        return math.fsum(float(np.trace(self.blocks[(M, M)]).real) for M in self.sectors)

    def m_values(self, M: int) -> np.ndarray:
        return basis.enumerate_sector(self.n_ions, M).m_values

    def n_values(self, M: int) -> np.ndarray:
        return basis.enumerate_sector(self.n_ions, M).n_values

    def populations(self) -> dict[tuple[float, int], float]:
        out = {}
        for M in self.sectors:
            diag = np.real(np.diag(self.blocks[(M, M)]))
            for m, n, pk in zip(self.m_values(M), self.n_values(M), diag):
                out[(float(m), int(n))] = float(pk)
        return out

    def to_dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(rho, m, n)`` on the concatenation of stored sectors."""
        secs = self.sectors
        dims = [basis.sector_dim(self.n_ions, M) for M in secs]
        offs = np.cumsum([0, *dims])
        rho = np.zeros((offs[-1], offs[-1]), dtype=complex)
        for i, M in enumerate(secs):
            for j, M2 in enumerate(secs[i:], start=i):
                b = self.blocks.get((M, M2))
                if b is None:
                    continue
                rho[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = b
                if j != i:
                    rho[offs[j]:offs[j + 1], offs[i]:offs[i + 1]] = b.conj().T
        m = np.concatenate([self.m_values(M) for M in secs])
        n = np.concatenate([self.n_values(M) for M in secs])
        return rho, m, n

    @classmethod
    def from_pure(cls, state: PureState, block_eps: float = 0.0) -> "BlockDensityMatrix":
        """Projector onto ``state``; pair blocks with ``sqrt(p_M p_M') <= block_eps`` are dropped."""
        if state.mode != "com":
            raise UnsupportedInputError("density matrices are implemented for the centre-of-mass mode")
        secs = state.sectors
        pops = state.sector_populations()
        blocks = {}
        skipped = 0
        for i, M in enumerate(secs):
            for M2 in secs[i:]:
                if M != M2 and math.sqrt(pops[M] * pops[M2]) <= block_eps:
                    skipped += 1
                    continue
                blocks[(M, M2)] = np.outer(state.amplitudes[M], state.amplitudes[M2].conj())
        if skipped:
            log.info("dropped %d coherence blocks below joint mass %g", skipped, block_eps)
        return cls(state.n_ions, blocks, state.dropped_mass,
                   {"dropped_blocks": skipped, **state.meta})


def _liouvillian_parts(pack: _ComPack, iu, ju, dm2):
    """Sparse ``(A_Z, A_C, A_D)`` with ``d vec(rho)/dt = (delta A_Z + lam A_C + Gamma A_D) vec(rho)``.

    ``vec`` is the row-major flattening of the padded (B, D, D) block stack;
    ``vec(H X - X H') = (H (x) 1 - 1 (x) H'^T) vec(X)``.
    """
    w = pack.width
    eye = sp.identity(w, format="csr")
    zz, cc, _ = pack.dense_terms()
    parts_z, parts_c = [], []
    for a, b in zip(iu, ju):
        parts_z.append(-1j * (sp.kron(sp.csr_matrix(zz[a]), eye) - sp.kron(eye, sp.csr_matrix(zz[b].T))))
        parts_c.append(-1j * (sp.kron(sp.csr_matrix(cc[a]), eye) - sp.kron(eye, sp.csr_matrix(cc[b].T))))
    a_z = sp.block_diag(parts_z, format="csr")
    a_c = sp.block_diag(parts_c, format="csr")
    a_d = sp.diags(-dm2.ravel().astype(complex), format="csr")
    return a_z, a_c, a_d


def evolve_lindblad(rho: BlockDensityMatrix, p: PulseSchedule, d: DephasingSpec,
                    s: IntegratorSettings | None = None) -> BlockDensityMatrix:
    """Integrate ``d rho/dt = -i[H, rho] + Gamma (2 S_z rho S_z - {S_z^2, rho})``.

    Each stored block evolves independently. Raises :class:`IntegratorError`
    when the trace drifts by more than ``s.conservation_tol``.
    """
    s = s or LINDBLAD_DEFAULT
    secs = rho.sectors
    pack = _ComPack(rho.n_ions, secs)
    where = {M: i for i, M in enumerate(secs)}
    keys = sorted(rho.blocks)
    iu = np.array([where[a] for a, _ in keys])
    ju = np.array([where[b] for _, b in keys])
    w = pack.width
    r = np.zeros((len(keys), w, w), dtype=complex)
    for k, (a, b) in enumerate(keys):
        blk = rho.blocks[(a, b)]
        r[k, :blk.shape[0], :blk.shape[1]] = blk
    dm2 = (pack.z[iu][:, :, None] - pack.z[ju][:, None, :]) ** 2
    gamma = d.gamma_deph
    tr0 = rho.trace()

    if s.method == "magnus4":
        zz, cc, comm = pack.dense_terms()
        dt = p.duration / s.fixed_steps
        half = np.exp(-gamma * dt / 2 * dm2) if gamma > 0 else None
        for k in range(s.fixed_steps):
            u = _batched_unitaries(zz, cc, comm, *_magnus_generators(p, p.t_i + k * dt, dt))
            if half is not None:
                r *= half
            r = u[iu] @ r @ np.conj(np.swapaxes(u[ju], 1, 2))
            if half is not None:
                r *= half
        info = {"n_steps": s.fixed_steps}
    else:
        shape = r.shape
        a_z, a_c, a_d = _liouvillian_parts(pack, iu, ju, dm2)
        a_d = gamma * a_d

        def jac(t, y):
            return float(p.delta(t)) * a_z + float(p.lam(t)) * a_c + a_d

        def rhs(t, y):
            return float(p.delta(t)) * (a_z @ y) + float(p.lam(t)) * (a_c @ y) + a_d @ y

        y, nfev = _solve(rhs, r.ravel(), p, s, jac=jac)
        r = y.reshape(shape)
        info = {"nfev": nfev}

    blocks = {}
    for k, (a, b) in enumerate(keys):
        blocks[(a, b)] = r[k, :pack.dims[where[a]], :pack.dims[where[b]]].copy()
    for M in secs:  # restore exact Hermiticity of diagonal blocks
        blk = blocks[(M, M)]
        blocks[(M, M)] = 0.5 * (blk + blk.conj().T)
    out = BlockDensityMatrix(rho.n_ions, blocks, rho.dropped_mass, {**rho.meta, **info})
    drift = abs(out.trace() - tr0)
    if drift > s.conservation_tol:
        raise IntegratorError(f"trace drift {drift:.3g} exceeds {s.conservation_tol:g}")
    out.meta["trace_drift"] = drift
    out.meta["method"] = s.method
    return out


# -- diagnostics -----------------------------------------------------------------

@dataclass(frozen=True)
class FidelityReport:
    overlap: float
    tv_distance: float


def target_fidelity(final, n_ions: int, fock_amplitudes) -> FidelityReport:
    """Compare final populations with the perfectly adiabatic target.

    ``overlap = sum_k min(P_final, P_target)``; ``tv_distance = 1/2 sum_k |P_final - P_target|``.
    """
    if n_ions % 2:
        raise UnsupportedInputError("target state is defined for even N only")
    target = adiabatic_target_populations(n_ions, fock_amplitudes)
    got = {(int(round(m)), n): pk for (m, n), pk in final.populations().items()}
    keys = set(target) | set(got)
    diff = [abs(got.get(k, 0.0) - target.get(k, 0.0)) for k in keys]
    common = [min(got.get(k, 0.0), target.get(k, 0.0)) for k in keys]
    return FidelityReport(math.fsum(common), 0.5 * math.fsum(diff))
