"""Closed-form, asymptotic and direct-sum QFI of the adiabatically transferred state.

For even ``N`` and an initial squeezed vacuum the transferred state carries
populations ``p_n = C(2n, n) (z/4)**n / cosh r`` (``z = tanh(r)**2``) on the
spin levels ``m = -S + 2n`` for ``n <= S`` and the remaining weight on
``m = S``. Its S_z variance is a finite sum plus a tail, evaluated exactly by
:func:`qfi_direct_sum`. That routine is the reference for every other method
here.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import ArgumentError, NumericalError, UnsupportedInputError
from .special import hyp2f1_regularized

METHODS = ("direct_sum", "closed_form", "asymptotic", "max_leading", "saturation")


@dataclass(frozen=True)
class QfiBreakdown:
    value: float
    method: str
    terms: dict = field(default_factory=dict)
    n_ions: int | None = None
    r: float | None = None


@dataclass(frozen=True)
class HypergeomParams:
    a: float
    b: float
    c: float
    z: float

    @classmethod
    def for_chain(cls, n_ions: int, r: float) -> "HypergeomParams":
        _check_even(n_ions)
        s = n_ions / 2
        return cls(2.0, 1.5 + s, 2.0 + s, math.tanh(r) ** 2)


def _check_even(n_ions) -> None:
    if int(n_ions) != n_ions or n_ions < 2 or n_ions % 2:
        raise UnsupportedInputError(f"formula assumes an even number of ions >= 2, got N={n_ions}")


def _check_r(r) -> None:
    if not np.isfinite(r) or r < 0:
        raise ArgumentError(f"squeezing amplitude must be finite and >= 0, got r={r}")


def squeezed_log_populations(r: float, n_max: int) -> np.ndarray:
    """``log |a_2n|**2`` for ``n = 0..n_max`` evaluated in log space."""
    n = np.arange(n_max + 1, dtype=float)
    log_c = gammaln(2 * n + 1) - 2 * gammaln(n + 1) - n * math.log(4.0)
    if r == 0:
        out = np.full(n.shape, -np.inf)
        out[0] = 0.0
        return out
    return log_c + n * (2 * math.log(math.tanh(r))) - math.log(math.cosh(r))


def qfi_direct_sum(n_ions: int, r: float) -> QfiBreakdown:
    """Four times the S_z variance of the transferred state, summed directly.

    The tail beyond ``n = S`` enters only through its total probability,
    ``1 - sum_{n<=S} p_n``, which is accumulated with compensated summation.
    """
    _check_even(n_ions)
    _check_r(r)
    s = n_ions // 2
    p = np.exp(squeezed_log_populations(r, s))
    m = -s + 2 * np.arange(s + 1, dtype=float)
    tail = math.fsum([1.0, *(-p)])
    tail = max(tail, 0.0)
    mean = math.fsum([*(p * m), s * tail])
    second = math.fsum([*(p * m * m), s * s * tail])
    variance = max(second - mean * mean, 0.0)
    terms = {"tail_mass": tail, "mean_sz": mean, "second_moment_sz": second,
             "variance_sz": variance}
    return QfiBreakdown(4.0 * variance, "direct_sum", terms, n_ions, r)


def _closed_form_terms(n_ions: int, r, dps: int):
    with mp.workdps(dps):
        s = mp.mpf(n_ions) / 2
        z = mp.tanh(mp.mpf(r)) ** 2
        a, b, c = mp.mpf(2), mp.mpf(3) / 2 + s, 2 + s
        half = mp.mpf(1) / 2
        if z == 0:
            zero = mp.mpf(0)
            return {"t1": zero, "t2": zero, "t3": zero, "t4": zero}
        f_abc = hyp2f1_regularized(a, b, c, z, dps=dps)
        f_quarter = hyp2f1_regularized(a / 4, b - half, c, z, dps=dps)
        gb = mp.gamma(b)
        pre3 = z ** (b - half) * gb / mp.sqrt(mp.pi * (1 - z))
        terms = {
            "t1": z / (1 - z) ** 2,
            "t2": -2 * z ** (2 * b - 1) * (1 - z) / mp.pi * gb ** 2 * f_abc ** 2,
            "t3": -pre3 * 2 * s * (1 - z) ** (-half) * f_quarter,
            "t4": -pre3 * (2 + 2 * s * (1 - z) - z) * f_abc,
        }
        return {k: +v for k, v in terms.items()}


def qfi_closed_form(n_ions: int, r: float, *, tol: float = 1e-10, dps: int = 30,
                    max_dps: int = 480) -> QfiBreakdown:
    """Hypergeometric closed form of the QFI.

    ``F = 8 [t1 + t2 + t3 + t4]`` with the four printed terms kept separate in
    ``terms``. The leading terms cancel strongly as ``z -> 1``; precision is
    doubled from ``dps`` until two consecutive results agree to ``tol``.
    """
    _check_even(n_ions)
    _check_r(r)
    prev = None
    work = dps
    while work <= max_dps:
        terms = _closed_form_terms(n_ions, r, work)
        with mp.workdps(work):
            val = 8 * mp.fsum(terms.values())
        if prev is not None:
            scale = max(abs(val), abs(prev))
            if abs(val - prev) <= tol * scale or scale == 0:
                out = {k: float(8 * v) for k, v in terms.items()}
                out["dps"] = work
                return QfiBreakdown(float(val), "closed_form", out, n_ions, r)
        prev = val
        work *= 2
    raise NumericalError(f"closed form not stable to {tol} within {max_dps} digits "
                         f"(last two values {mp.nstr(prev, 12)})")


def qfi_asymptotic(n_ions: int, r: float) -> QfiBreakdown:
    """Strong-squeezing expansion of the QFI (four terms in powers of ``N/2``).

    Valid as ``z -> 1``; a warning is emitted for ``z <= 0.9``. At ``r = 0``
    the state is an S_z eigenstate and the exact value 0 is returned.
    """
    _check_r(r)
    if r == 0:
        return QfiBreakdown(0.0, "asymptotic", {"exact_vacuum_limit": True}, n_ions, r)
    z = math.tanh(r) ** 2
    if z <= 0.9:
        warnings.warn(f"asymptotic QFI used outside its regime (z={z:.3f} <= 0.9)", stacklevel=2)
    h = n_ions / 2
    w = 1.0 - z
    sp = math.sqrt(math.pi)
    t = {
        "n52": 336 * math.sqrt(w) / sp * h ** 2.5,
        "n3": -560 * w / math.pi * h ** 3,
        "n72": -48 * w ** 1.5 / sp * h ** 3.5,
        "n4": 224 * w ** 2 / math.pi * h ** 4,
    }
    terms = {k: 16 / 315 * v for k, v in t.items()}
    return QfiBreakdown(math.fsum(terms.values()), "asymptotic", terms, n_ions, r)


def qfi_max_leading(n_ions: int, r: float) -> QfiBreakdown:
    """Leading ``N**(5/2)`` term of the strong-squeezing expansion."""
    _check_r(r)
    if r == 0:
        return QfiBreakdown(0.0, "max_leading", {"exact_vacuum_limit": True}, n_ions, r)
    w = 1.0 / math.cosh(r) ** 2  # 1 - tanh^2, without cancellation
    val = 256 * math.sqrt(w) / (15 * math.sqrt(math.pi)) * (n_ions / 2) ** 2.5
    return QfiBreakdown(val, "max_leading", {"one_minus_z": w}, n_ions, r)


def qfi_saturation(r: float) -> float:
    """Large-N plateau ``2 sinh(2r)**2``."""
    _check_r(r)
    return 2.0 * math.sinh(2.0 * r) ** 2


def phase_sensitivity_prefactor(r: float) -> float:
    """``g`` in ``1/sqrt(F_max) = g * N**(-5/4)``, i.e. ``~0.766 (1-z)**(-1/4)``."""
    w = 1.0 / math.cosh(r) ** 2
    return 2 ** 1.25 * math.sqrt(15 * math.sqrt(math.pi) / (256 * math.sqrt(w)))


def qfi(n_ions: int, r: float, method: str = "direct_sum") -> QfiBreakdown:
    if method == "direct_sum":
        return qfi_direct_sum(n_ions, r)
    if method == "closed_form":
        return qfi_closed_form(n_ions, r)
    if method == "asymptotic":
        return qfi_asymptotic(n_ions, r)
    if method == "max_leading":
        return qfi_max_leading(n_ions, r)
    if method == "saturation":
        _check_r(r)
        return QfiBreakdown(qfi_saturation(r), "saturation", {}, n_ions, r)
    raise ArgumentError(f"unknown QFI method {method!r}; expected one of {METHODS}")


# scaling-law analysis ---------------------------------------------------------

@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_prefactor: float
    stderr: float
    n_points: int


def fit_power_law(x, y) -> PowerLawFit:
    """Ordinary least squares of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ArgumentError("need at least two points for a power-law fit")
    if x.size == 2:
        slope = (math.log(y[1]) - math.log(y[0])) / (math.log(x[1]) - math.log(x[0]))
        return PowerLawFit(slope, math.log(y[0]) - slope * math.log(x[0]), float("nan"), 2)
    res = stats.linregress(np.log(x), np.log(y))
    return PowerLawFit(float(res.slope), float(res.intercept), float(res.stderr), int(x.size))


def decreasing_window(values) -> slice:
    """Leading run of strictly decreasing values, as a slice (includes the turning point)."""
    v = np.asarray(values, dtype=float)
    end = 1
    while end < v.size and v[end] < v[end - 1]:
        end += 1
    return slice(0, end)


@dataclass(frozen=True)
class ScalingRegions:
    """Index ranges of the three scaling regions of ``chi_SH**2 = N**2 / F``.

    I: chi_SH strictly decreasing (local QFI exponent above 2).
    II: local exponent within ``band`` below 2 (nearly Heisenberg).
    III: the remainder.
    """

    region_one: slice
    region_two: slice
    region_three: slice
    local_exponents: np.ndarray


def scaling_regions(n_values, qfi_values, band: float = 0.25) -> ScalingRegions:
    n = np.asarray(n_values, dtype=float)
    f = np.asarray(qfi_values, dtype=float)
    chi = n ** 2 / f
    one = decreasing_window(chi)
    local = np.diff(np.log(f)) / np.diff(np.log(n))
    end_two = one.stop
    while end_two < n.size and local[end_two - 1] >= 2.0 - band:
        end_two += 1
    return ScalingRegions(one, slice(one.stop, end_two), slice(end_two, n.size), local)
