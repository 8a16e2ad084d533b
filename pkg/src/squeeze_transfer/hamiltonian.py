"""Sector-restricted Tavis-Cummings Hamiltonians (collective and breathing-mode)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import optimize

from . import basis
from .errors import ArgumentError, NumericalError

PROFILE_NORM_TOL = 1e-12


@dataclass(frozen=True)
class ModeProfile:
    amplitudes: tuple[float, ...]

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        if not np.all(np.isfinite(a)):
            raise ArgumentError("mode amplitudes must be finite")
        if abs(float(a @ a) - 1.0) > PROFILE_NORM_TOL:
            raise ArgumentError(f"mode profile not normalized (sum M_k^2 = {float(a @ a)!r})")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=float)

    def __len__(self):
        return len(self.amplitudes)


@dataclass(frozen=True)
class CouplingSpec:
    delta: float
    lam: float
    mode: str = "com"
    profile: ModeProfile | None = None

    def __post_init__(self):
        if not (np.isfinite(self.delta) and np.isfinite(self.lam)):
            raise ArgumentError("detuning and coupling must be finite")
        if self.mode == "com" and self.profile is not None:
            raise ArgumentError("a mode profile is only meaningful for the breathing mode")
        if self.mode == "breathing" and self.profile is None:
            raise ArgumentError("breathing-mode coupling needs a mode profile")
        if self.mode not in ("com", "breathing"):
            raise ArgumentError(f"unknown mode {self.mode!r}")


def tc_sector_terms(n_ions: int, sector: basis.Sector) -> tuple[np.ndarray, np.ndarray]:
    """``(m, off)`` with ``H = delta * diag(m) + lam * tridiag(off)`` on the sector.

    ``off[j] = sqrt(S(S+1) - m_j(m_j+1)) sqrt(n_j) / sqrt(N)`` couples member
    ``j`` to ``j+1`` (one phonon converted to one spin excitation).
    """
    if sector.n_ions != n_ions:
        raise ArgumentError(f"sector built for N={sector.n_ions}, Hamiltonian for N={n_ions}")
    s = n_ions / 2
    m = sector.m_values
    n = sector.n_values
    off = np.sqrt(np.maximum(s * (s + 1) - m[:-1] * (m[:-1] + 1), 0.0)) * np.sqrt(n[:-1])
    return m, off / math.sqrt(n_ions)


def build_tc_sector(n_ions: int, sector: basis.Sector, c: CouplingSpec) -> np.ndarray:
    """Dense Hermitian block of ``delta S_z + lam/sqrt(N) (S+ a + S- a_dag)``."""
    if c.mode != "com":
        raise ArgumentError("build_tc_sector handles the centre-of-mass mode only")
    m, off = tc_sector_terms(n_ions, sector)
    h = np.diag(c.delta * m).astype(float)
    idx = np.arange(len(off))
    h[idx, idx + 1] = c.lam * off
    h[idx + 1, idx] = c.lam * off
    return h


def breathing_sector_terms(n_ions: int, total_excitations: int, profile: ModeProfile
                           ) -> tuple[np.ndarray, sp.csr_matrix]:
    """``(m, C)`` with ``H = delta * diag(m) + lam * C`` on an inhomogeneous sector.

    ``C`` links ``(bits, n)`` to ``(bits with ion k raised, n-1)`` with weight
    ``M_k sqrt(n)``.
    """
    if len(profile) != n_ions:
        raise ArgumentError(f"profile has {len(profile)} entries for N={n_ions}")
    bits, phon = basis.inhomogeneous_sector_arrays(n_ions, total_excitations)
    m = basis.popcount(bits) - n_ions / 2
    lookup = {int(b): i for i, b in enumerate(bits)}
    amp = profile.array
    rows, cols, vals = [], [], []
    for j, (b, n) in enumerate(zip(bits, phon)):
        if n == 0:
            continue
        for k in range(n_ions):
            mask = 1 << (n_ions - 1 - k)
            if b & mask:
                continue
            i = lookup[int(b | mask)]
            w = amp[k] * math.sqrt(n)
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
    dim = len(bits)
    coupling = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    return m.astype(float), coupling


def build_breathing_sector(n_ions: int, total_excitations: int, c: CouplingSpec) -> sp.csr_matrix:
    """Sparse block of ``delta/2 sum_k sigma^z_k + sum_k lam M_k (sigma+_k b + h.c.)``."""
    if c.mode != "breathing":
        raise ArgumentError("build_breathing_sector needs a breathing-mode coupling spec")
    m, coupling = breathing_sector_terms(n_ions, total_excitations, c.profile)
    return (sp.diags(c.delta * m) + c.lam * coupling).tocsr()


def equilibrium_positions(n_ions: int, tol: float = 1e-13) -> np.ndarray:
    """Dimensionless equilibrium positions of ``N`` ions in a harmonic trap.

    Solves ``u_i - sum_{j<i} 1/(u_i-u_j)^2 + sum_{j>i} 1/(u_i-u_j)^2 = 0``.
    """
    if n_ions < 1:
        raise ArgumentError("need at least one ion")
    if n_ions == 1:
        return np.zeros(1)

    def force(u):
        d = u[:, None] - u[None, :]
        np.fill_diagonal(d, np.inf)
        return u - np.sum(np.sign(d) / d ** 2, axis=1)

    def jac(u):
        d = u[:, None] - u[None, :]
        np.fill_diagonal(d, np.inf)
        k = 2.0 / np.abs(d) ** 3
        j = -k
        np.fill_diagonal(j, 1.0 + k.sum(axis=1))
        return j

    # crude but well-ordered starting guess
    guess = np.linspace(-1, 1, n_ions) * (1.0 + 0.6 * n_ions ** 0.56)
    sol = optimize.root(force, guess, jac=jac, method="hybr", tol=tol)
    resid = np.max(np.abs(force(sol.x)))
    if not sol.success or resid > 1e-9:
        raise NumericalError(f"ion equilibrium did not converge for N={n_ions}: {sol.message} "
                             f"(max residual force {resid:.3g})")
    return np.sort(sol.x)


def axial_hessian(positions: np.ndarray) -> np.ndarray:
    """Axial normal-mode matrix (units of the trap frequency squared)."""
    d = positions[:, None] - positions[None, :]
    np.fill_diagonal(d, np.inf)
    k = 2.0 / np.abs(d) ** 3
    a = -k
    np.fill_diagonal(a, 1.0 + k.sum(axis=1))
    return a


def breathing_mode_profile(n_ions: int) -> ModeProfile:
    """Normalized breathing-mode eigenvector (proportional to the equilibrium positions)."""
    if n_ions < 2:
        raise ArgumentError("breathing mode needs at least two ions")
    u = equilibrium_positions(n_ions)
    u = 0.5 * (u - u[::-1])  # enforce exact mirror symmetry
    v = u / np.linalg.norm(u)
    return ModeProfile(tuple(float(x) for x in v))


def uniform_profile(n_ions: int) -> ModeProfile:
    return ModeProfile(tuple([1.0 / math.sqrt(n_ions)] * n_ions))
