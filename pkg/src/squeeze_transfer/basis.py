"""Hilbert-space bookkeeping for the collective spin + single boson mode.

The Tavis-Cummings Hamiltonian conserves ``a^dag a + S_z + S``, so every
state is stored sector by sector. A homogeneous sector ``M`` holds the Dicke
Fock states ``|S, m>|n>`` with ``n + m + S = M`` ordered by increasing ``m``.
The inhomogeneous (breathing mode) variant needs the full ``2**N`` spin space;
its sector ``M`` holds all ``(bitstring, n)`` with ``popcount + n = M``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import ArgumentError, CapacityError

#: Largest chain handled by the full-spin-space path (2**N spin configurations).
MAX_INHOMOGENEOUS_IONS = 14


def _check_ions(n_ions: int) -> None:
    if int(n_ions) != n_ions or n_ions < 1:
        raise ArgumentError(f"number of ions must be a positive integer, got {n_ions!r}")


@dataclass(frozen=True)
class DickeFockIndex:
    n_ions: int
    m: float
    n_phonon: int

    def __post_init__(self):
        _check_ions(self.n_ions)
        s = self.n_ions / 2
        if not -s <= self.m <= s or (self.m + s) != int(self.m + s):
            raise ArgumentError(f"m={self.m} is not a spin projection for S={s}")
        if self.n_phonon < 0:
            raise ArgumentError("phonon number must be non-negative")

    @property
    def excitation(self) -> int:
        return int(self.n_phonon + self.m + self.n_ions / 2)


@dataclass(frozen=True)
class Sector:
    """Homogeneous excitation sector; ``members`` ordered by increasing m."""

    n_ions: int
    total_excitations: int
    members: tuple[DickeFockIndex, ...]

    @property
    def dim(self) -> int:
        return len(self.members)

    @property
    def spin(self) -> float:
        return self.n_ions / 2

    @property
    def m_values(self) -> np.ndarray:
        return np.array([mem.m for mem in self.members], dtype=float)

    @property
    def n_values(self) -> np.ndarray:
        return np.array([mem.n_phonon for mem in self.members], dtype=float)

    @property
    def m_min(self) -> float:
        """Smallest spin projection present in the sector."""
        return -self.spin


def sector_dim(n_ions: int, total_excitations: int) -> int:
    return min(total_excitations, n_ions) + 1


@lru_cache(maxsize=4096)
def enumerate_sector(n_ions: int, total_excitations: int) -> Sector:
    """Return the ordered basis of excitation sector ``M`` for ``N`` ions.

    Examples
    --------
    >>> [(s.m, s.n_phonon) for s in enumerate_sector(2, 1).members]
    [(-1.0, 1), (0.0, 0)]
    """
    _check_ions(n_ions)
    if total_excitations < 0:
        raise ArgumentError("excitation number must be non-negative")
    s = n_ions / 2
    # k spin excitations, M - k phonons
    members = tuple(
        DickeFockIndex(n_ions, -s + k, total_excitations - k)
        for k in range(min(total_excitations, n_ions) + 1)
    )
    return Sector(n_ions, total_excitations, members)


@dataclass(frozen=True)
class SpinConfigIndex:
    """Spin configuration of an ion chain; ion ``k`` (1-based) is bit ``N - k``.

    ``str()`` gives the bitstring with ion 1 first, so ``"01"`` means only the
    second ion is excited.
    """

    n_ions: int
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.n_ions):
            raise ArgumentError(f"bits {self.bits} out of range for {self.n_ions} ions")

    @property
    def excitations(self) -> int:
        return bin(self.bits).count("1")

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n_ions}b")

    @classmethod
    def from_string(cls, text: str) -> "SpinConfigIndex":
        return cls(len(text), int(text, 2))


@lru_cache(maxsize=4096)
def _inhomogeneous_arrays(n_ions: int, total_excitations: int) -> tuple[np.ndarray, np.ndarray]:
    bits, phonons = [], []
    for k in range(min(total_excitations, n_ions), -1, -1):
        group = sorted(sum(1 << (n_ions - 1 - i) for i in ions)
                       for ions in combinations(range(n_ions), k))
        bits.extend(group)
        phonons.extend([total_excitations - k] * len(group))
    b = np.array(bits, dtype=np.int64)
    n = np.array(phonons, dtype=np.int64)
    b.setflags(write=False)
    n.setflags(write=False)
    return b, n


def inhomogeneous_sector_arrays(n_ions: int, total_excitations: int,
                                max_ions: int = MAX_INHOMOGENEOUS_IONS):
    """Vectorised form of :func:`enumerate_sector_inhomogeneous`: ``(bits, phonons)``."""
    _check_ions(n_ions)
    if n_ions > max_ions:
        raise CapacityError(f"inhomogeneous basis limited to N <= {max_ions} (2**N spin space), got N={n_ions}")
    if total_excitations < 0:
        raise ArgumentError("excitation number must be non-negative")
    return _inhomogeneous_arrays(n_ions, total_excitations)


def enumerate_sector_inhomogeneous(n_ions: int, total_excitations: int,
                                   max_ions: int = MAX_INHOMOGENEOUS_IONS
                                   ) -> list[tuple[SpinConfigIndex, int]]:
    """All ``(spin configuration, phonon number)`` pairs with ``popcount + n = M``.

    Ordered by decreasing spin excitation, then by bit pattern.
    """
    bits, phonons = inhomogeneous_sector_arrays(n_ions, total_excitations, max_ions)
    return [(SpinConfigIndex(n_ions, int(b)), int(n)) for b, n in zip(bits, phonons)]


def popcount(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    count = np.zeros(bits.shape, dtype=np.int64)
    work = bits.copy()
    while np.any(work):
        count += work & 1
        work >>= 1
    return count
