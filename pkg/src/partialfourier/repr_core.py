"""Representation bookkeeping for T^1 x SU(2).

Half-integers are stored doubled so that ``ell`` and ``m`` labels are exact.
The Kronecker index maps use the 1-based convention ``i = d_eta*(m-1) + r``;
array access elsewhere in the package is 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np


@dataclass(frozen=True, order=True)
class HalfInt:
    """A non-negative half-integer ``ell``, stored as ``twice = 2*ell``."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise TypeError(f"twice must be an integer, got {self.twice!r}")
        if self.twice < 0:
            raise ValueError(f"half-integer label must be >= 0, got twice={self.twice}")
        object.__setattr__(self, "twice", int(self.twice))

    @property
    def dim(self) -> int:
        return self.twice + 1

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def m_values(self) -> Iterator["MIndex"]:
        """Row/column labels ``-ell, -ell+1, ..., ell`` in ascending order."""
        for tm in range(-self.twice, self.twice + 1, 2):
            yield MIndex(tm, self.twice)

    def __float__(self) -> float:
        return self.twice / 2

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"


@dataclass(frozen=True)
class MIndex:
    """A row/column label ``m`` of a (2*ell+1)-dimensional block, stored doubled."""

    twice_m: int
    twice_ell: int

    def __post_init__(self):
        if abs(self.twice_m) > self.twice_ell or (self.twice_ell - self.twice_m) % 2:
            raise ValueError(
                f"invalid m label: 2m={self.twice_m} for 2*ell={self.twice_ell}"
            )

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_m, 2)

    @property
    def position(self) -> int:
        """0-based row index of this label inside its block."""
        return (self.twice_m + self.twice_ell) // 2


def as_halfint(ell) -> HalfInt:
    """Coerce ``ell`` (HalfInt, int, Fraction, float multiple of 1/2) to HalfInt."""
    if isinstance(ell, HalfInt):
        return ell
    if isinstance(ell, bool):
        raise TypeError("bool is not a valid representation label")
    if isinstance(ell, (int, np.integer)):
        return HalfInt(2 * int(ell))
    if isinstance(ell, Fraction):
        tw = 2 * ell
        if tw.denominator != 1:
            raise ValueError(f"{ell} is not a half-integer")
        return HalfInt(int(tw))
    if isinstance(ell, (float, np.floating)):
        tw = 2.0 * float(ell)
        if not float(tw).is_integer():
            raise ValueError(f"{ell} is not a half-integer")
        return HalfInt(int(tw))
    raise TypeError(f"cannot interpret {ell!r} as a half-integer")


def m_labels(twice_ell: int) -> np.ndarray:
    """Values of m (as floats) for the rows of a block with ``2*ell = twice_ell``."""
    return np.arange(-twice_ell, twice_ell + 1, 2) / 2.0


def weight_su2(twice_ell) -> float:
    """<ell> = 1 + ell."""
    if twice_ell < 0:
        raise ValueError("twice_ell must be >= 0")
    return 1.0 + twice_ell / 2.0


def weight_torus(tau) -> float:
    """<tau> = (1 + tau^2)^(1/2)."""
    return math.sqrt(1.0 + float(tau) ** 2)


def log_weight_sum(tau: int, twice_ell: int) -> float:
    """log(<tau> + <ell>), safe for the astronomically large labels of the
    Liouville construction."""
    if abs(tau) < 10**150 and twice_ell < 10**150:
        return math.log(weight_torus(tau) + weight_su2(twice_ell))
    import mpmath

    with mpmath.workdps(30):
        w = mpmath.sqrt(1 + mpmath.mpf(tau) ** 2) + 1 + mpmath.mpf(twice_ell) / 2
        return float(mpmath.log(w))


def dimension(twice_ell: int) -> int:
    return twice_ell + 1


def flatten_index(m: int, n: int, r: int, s: int, d_eta: int, d_xi: int | None = None):
    """Map block indices ``(m, n)`` of the first factor and ``(r, s)`` of the
    second factor to the entry ``(i, j)`` of the Kronecker product (1-based).
    """
    if d_eta < 1:
        raise ValueError("d_eta must be >= 1")
    for name, v in (("r", r), ("s", s)):
        if not 1 <= v <= d_eta:
            raise ValueError(f"{name}={v} out of range 1..{d_eta}")
    for name, v in (("m", m), ("n", n)):
        if v < 1 or (d_xi is not None and v > d_xi):
            raise ValueError(f"{name}={v} out of range 1..{d_xi}")
    return d_eta * (m - 1) + r, d_eta * (n - 1) + s


def unflatten_index(i: int, j: int, d_eta: int, d_xi: int | None = None):
    """Inverse of :func:`flatten_index` via the floor formulas."""
    limit = None if d_xi is None else d_xi * d_eta
    for name, v in (("i", i), ("j", j)):
        if v < 1 or (limit is not None and v > limit):
            raise ValueError(f"{name}={v} out of range")
    m = (i - 1) // d_eta + 1
    n = (j - 1) // d_eta + 1
    r = i - ((i - 1) // d_eta) * d_eta
    s = j - ((j - 1) // d_eta) * d_eta
    return m, n, r, s


def kron_flatten(block4: np.ndarray) -> np.ndarray:
    """Turn ``B[m, n, r, s]`` into the d_xi*d_eta square matrix with entries
    placed by :func:`flatten_index`."""
    b = np.asarray(block4)
    if b.ndim != 4 or b.shape[0] != b.shape[1] or b.shape[2] != b.shape[3]:
        raise ValueError(f"expected shape (d_xi, d_xi, d_eta, d_eta), got {b.shape}")
    d_xi, d_eta = b.shape[0], b.shape[2]
    return b.transpose(0, 2, 1, 3).reshape(d_xi * d_eta, d_xi * d_eta)


def kron_unflatten(flat: np.ndarray, d_eta: int) -> np.ndarray:
    f = np.asarray(flat)
    d = f.shape[0]
    if f.ndim != 2 or f.shape[1] != d or d % d_eta:
        raise ValueError(f"cannot split {f.shape} into blocks of size {d_eta}")
    d_xi = d // d_eta
    return f.reshape(d_xi, d_eta, d_xi, d_eta).transpose(0, 2, 1, 3)


def product_weight_bounds(w1: float, w2: float) -> tuple[float, float]:
    """Bounds ``(lo, hi)`` on the weight of an external tensor product in terms
    of the factor weights: ``(w1 + w2)/2 <= <xi (x) eta> <= w1 + w2``."""
    if w1 < 1 or w2 < 1:
        raise ValueError("weights are >= 1")
    return 0.5 * (w1 + w2), w1 + w2


def hs_norm(block) -> float:
    """Hilbert-Schmidt norm: sqrt of the sum of squared moduli of all entries.

    Works for any array shape, so the 4-index and the flattened Kronecker
    storage of the same coefficients give the same value.
    """
    b = np.asarray(block)
    if b.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(b) ** 2)))


def dimension_bound_holds(twice_ell_max: int = 200, C: float = 2.0) -> bool:
    """Check ``2*ell + 1 <= C <ell>^(3/2)`` for every ell up to the cap."""
    tw = np.arange(twice_ell_max + 1)
    return bool(np.all(tw + 1 <= C * (1 + tw / 2.0) ** 1.5))
