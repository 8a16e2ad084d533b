"""Initial spin-boson product states and the adiabatic target populations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import basis
from .errors import ArgumentError, CapacityError, UnsupportedInputError

#: Default largest phonon number any boson expansion may reach.
DEFAULT_FOCK_CAP = 200_000
#: Below this squeezing the displaced-squeezed state is expanded as a coherent state.
COHERENT_BRANCH_R = 1e-6

MODES = ("com", "breathing")


@dataclass(frozen=True)
class SqueezeSpec:
    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r < 0:
            raise ArgumentError(f"squeezing amplitude must be >= 0, got {self.r}")

    @property
    def z(self) -> float:
        return math.tanh(self.r) ** 2


@dataclass(frozen=True)
class DisplacementSpec:
    alpha: complex = 0j

    def __post_init__(self):
        if not np.isfinite(complex(self.alpha)):
            raise ArgumentError("displacement must be finite")


@dataclass
class PureState:
    """Sector-decomposed wavefunction.

    ``amplitudes[M]`` is the vector over sector ``M``: the homogeneous Dicke
    Fock basis for ``mode='com'``, the ``(bits, n)`` basis of
    :func:`basis.inhomogeneous_sector_arrays` for ``mode='breathing'``.
    ``dropped_mass`` is the probability discarded by truncation.
    """

    n_ions: int
    amplitudes: dict[int, np.ndarray]
    mode: str = "com"
    dropped_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def spin(self) -> float:
        return self.n_ions / 2

    @property
    def sectors(self) -> list[int]:
        return sorted(self.amplitudes)

    def norm_sq(self) -> float:
        return math.fsum(float(np.vdot(v, v).real) for v in self.amplitudes.values())

    def sector_populations(self) -> dict[int, float]:
        return {M: float(np.vdot(v, v).real) for M, v in sorted(self.amplitudes.items())}

    def m_values(self, M: int) -> np.ndarray:
        """Spin projection of every basis member of sector ``M``."""
        if self.mode == "com":
            return basis.enumerate_sector(self.n_ions, M).m_values
        bits, _ = basis.inhomogeneous_sector_arrays(self.n_ions, M)
        return basis.popcount(bits) - self.spin

    def n_values(self, M: int) -> np.ndarray:
        if self.mode == "com":
            return basis.enumerate_sector(self.n_ions, M).n_values
        return basis.inhomogeneous_sector_arrays(self.n_ions, M)[1].astype(float)

    def populations(self) -> dict[tuple[float, int], float]:
        """Probability of every ``(m, n)``; breathing-mode configurations are summed by m."""
        out: dict[tuple[float, int], float] = {}
        for M, v in sorted(self.amplitudes.items()):
            p = np.abs(v) ** 2
            for m, n, pk in zip(self.m_values(M), self.n_values(M), p):
                key = (float(m), int(n))
                out[key] = out.get(key, 0.0) + float(pk)
        return out

    def copy(self) -> "PureState":
        return PureState(self.n_ions, {M: v.copy() for M, v in self.amplitudes.items()},
                         self.mode, self.dropped_mass, dict(self.meta))


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ArgumentError(f"tail tolerance must lie in (0, 1), got {eps}")


def _required_cutoff(log_p_fn, eps: float, hard_limit: int = 10**8, chunk: int = 4096) -> int:
    """Smallest index whose cumulative probability reaches ``1 - eps``."""
    start, acc = 0, 0.0
    comp = 0.0
    while start < hard_limit:
        p = np.exp(log_p_fn(np.arange(start, start + chunk, dtype=float)))
        for k, pk in enumerate(p):
            # Kahan summation keeps 1 - acc meaningful down to ~1e-16
            y = pk - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
            if 1.0 - acc <= eps:
                return start + k
        start += chunk
    raise CapacityError("tail tolerance not reached below the hard Fock limit")


def squeezed_amplitudes(spec: SqueezeSpec, eps: float = 1e-12,
                        fock_cap: int = DEFAULT_FOCK_CAP) -> np.ndarray:
    """Even-rung amplitudes ``a_2n`` of the squeezed vacuum ``S(zeta)|0>``, n = 0..n_max.

    ``|a_2n|**2 = C(2n, n) (z/4)**n / cosh r`` is evaluated in log space and the
    list ends at the first ``n_max`` with residual probability ``<= eps``. The
    phase is ``(-exp(i phi))**n``, the expansion of
    ``exp((zeta* a**2 - zeta a_dag**2) / 2)|0>``.
    """
    _check_eps(eps)
    if spec.r == 0:
        return np.ones(1, dtype=complex)
    log_t = 2 * math.log(math.tanh(spec.r))
    log_ch = math.log(math.cosh(spec.r))

    def log_p(n):
        return gammaln(2 * n + 1) - 2 * gammaln(n + 1) - n * math.log(4.0) + n * log_t - log_ch

    n_max = _required_cutoff(log_p, eps)
    if 2 * n_max > fock_cap:
        raise CapacityError(f"r={spec.r} with eps={eps} needs Fock cutoff {2 * n_max} "
                            f"(cap {fock_cap})")
    n = np.arange(n_max + 1, dtype=float)
    mag = np.exp(0.5 * log_p(n))
    phase = np.exp(1j * n * (spec.phi + math.pi))
    return mag * phase


def even_to_fock(even_amplitudes: np.ndarray) -> np.ndarray:
    """Spread ``a_2n`` onto a full Fock vector with zeros on odd rungs."""
    out = np.zeros(2 * len(even_amplitudes) - 1, dtype=complex)
    out[::2] = even_amplitudes
    return out


def displaced_squeezed_amplitudes(d: DisplacementSpec, s: SqueezeSpec, eps: float = 1e-12,
                                  fock_cap: int = DEFAULT_FOCK_CAP) -> np.ndarray:
    """Fock amplitudes ``b_n`` of ``D(alpha) S(zeta)|0>`` for all n up to the tail tolerance.

    Uses ``b_n = exp(-|alpha|^2/2 - alpha*^2 e^{i phi} tanh(r)/2) / sqrt(cosh r)
    * (e^{i phi} tanh r / 2)^{n/2} / sqrt(n!) * H_n(gamma / sqrt(e^{i phi} sinh 2r))``
    with ``gamma = alpha cosh r + alpha* e^{i phi} sinh r``. The Hermite
    factor is carried through the rescaled recurrence

        g_{n+1} = (gamma / cosh r * g_n - sqrt(n) e^{i phi} tanh r * g_{n-1}) / sqrt(n+1)

    which has no singularity at r = 0. Below ``COHERENT_BRANCH_R`` the plain
    coherent-state expansion is used.
    """
    _check_eps(eps)
    alpha = complex(d.alpha)
    r, phi = s.r, s.phi
    if alpha == 0:
        return even_to_fock(squeezed_amplitudes(s, eps, fock_cap))
    if r < COHERENT_BRANCH_R:
        return _coherent_amplitudes(alpha, eps, fock_cap)
    t = np.exp(1j * phi) * math.tanh(r)
    gam = alpha * math.cosh(r) + np.conj(alpha) * np.exp(1j * phi) * math.sinh(r)
    pref = np.exp(-abs(alpha) ** 2 / 2 - np.conj(alpha) ** 2 * t / 2) / math.sqrt(math.cosh(r))
    x = gam / math.cosh(r)
    amps = [pref, pref * x]
    total = abs(amps[0]) ** 2 + abs(amps[1]) ** 2
    n = 1
    # the expansion is normalized analytically, so stop once the tail is below eps
    while 1.0 - total > eps:
        if n + 1 > fock_cap:
            raise CapacityError(f"displaced squeezed state needs more than {fock_cap} Fock states "
                                f"(residual {1.0 - total:.3g} at the cap)")
        nxt = (x * amps[n] - math.sqrt(n) * t * amps[n - 1]) / math.sqrt(n + 1)
        amps.append(nxt)
        total += abs(nxt) ** 2
        n += 1
    return np.asarray(amps, dtype=complex)


def _coherent_amplitudes(alpha: complex, eps: float, fock_cap: int) -> np.ndarray:
    amps = [np.exp(-abs(alpha) ** 2 / 2) + 0j]
    total = abs(amps[0]) ** 2
    n = 0
    while 1.0 - total > eps:
        if n + 1 > fock_cap:
            raise CapacityError(f"coherent state needs more than {fock_cap} Fock states")
        amps.append(amps[-1] * alpha / math.sqrt(n + 1))
        total += abs(amps[-1]) ** 2
        n += 1
    return np.asarray(amps, dtype=complex)


def boson_amplitudes(squeeze: SqueezeSpec, displacement: DisplacementSpec | None = None,
                     eps: float = 1e-12, fock_cap: int = DEFAULT_FOCK_CAP) -> np.ndarray:
    """Full Fock vector of the (displaced) squeezed vacuum."""
    if displacement is None or complex(displacement.alpha) == 0:
        return even_to_fock(squeezed_amplitudes(squeeze, eps, fock_cap))
    return displaced_squeezed_amplitudes(displacement, squeeze, eps, fock_cap)


def initial_product_state(n_ions: int, fock_amplitudes, mode: str = "com",
                          sector_eps: float = 1e-10, normalization_eps: float = 1e-6) -> PureState:
    """``|all spins down> (x) sum_k b_k |k>`` with Fock ``k`` placed in sector ``M = k``.

    Sectors whose probability is at most ``sector_eps`` are not stored; their
    weight is added to ``dropped_mass`` together with the expansion tail.
    """
    if mode not in MODES:
        raise ArgumentError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "breathing":
        basis.inhomogeneous_sector_arrays(n_ions, 0)  # capacity check
    b = np.asarray(fock_amplitudes, dtype=complex)
    total = float(np.vdot(b, b).real)
    if abs(1.0 - total) > normalization_eps:
        raise ArgumentError(f"boson amplitudes not normalized (norm^2 = {total})")
    amps: dict[int, np.ndarray] = {}
    dropped = max(0.0, 1.0 - total)
    for k, bk in enumerate(b):
        pk = abs(bk) ** 2
        if pk == 0:
            continue
        if pk <= sector_eps:
            dropped += pk
            continue
        if mode == "com":
            dim = basis.sector_dim(n_ions, k)
        else:
            dim = len(basis.inhomogeneous_sector_arrays(n_ions, k)[0])
        v = np.zeros(dim, dtype=complex)
        # all-down member: index 0 in the com ordering, last in the breathing ordering
        v[0 if mode == "com" else -1] = bk
        amps[k] = v
    return PureState(n_ions, amps, mode, dropped)


def adiabatic_target_populations(n_ions: int, fock_amplitudes) -> dict[tuple[int, int], float]:
    """Populations of the perfectly adiabatic final state.

    Fock ``k <= N`` maps to ``|S, -S+k>|0>``; ``k > N`` to ``|S, S>|k-N>``.
    Keys are ``(m, n_phonon)``. Adiabatic phases are path dependent and are
    not modelled here.
    """
    if int(n_ions) != n_ions or n_ions < 2 or n_ions % 2:
        raise UnsupportedInputError(f"target state is defined for even N only, got N={n_ions}")
    s = n_ions // 2
    b = np.asarray(fock_amplitudes, dtype=complex)
    out: dict[tuple[int, int], float] = {}
    for k, bk in enumerate(b):
        pk = float(abs(bk) ** 2)
        if pk == 0:
            continue
        key = (-s + k, 0) if k <= n_ions else (s, k - n_ions)
        out[key] = out.get(key, 0.0) + pk
    return out


def population_variance_sz(populations: dict) -> float:
    """S_z variance of a population table keyed by ``(m, n)``."""
    m = np.array([k[0] for k in populations], dtype=float)
    p = np.array(list(populations.values()), dtype=float)
    tot = math.fsum(p)
    mean = math.fsum(p * m) / tot
    return max(math.fsum(p * m * m) / tot - mean * mean, 0.0)
