"""Partial and double Fourier analysis/synthesis on T^1 x SU(2).

Fields are sampled on ``TimeGrid x HaarQuadrature`` nodes, shape
``(n_t, n_nodes)``.  A :class:`PartialCoeffField` keeps the torus variable:
``u^(t_k, ell)`` for each grid time.  A :class:`FullCoeff` holds the double
coefficients ``u^^(tau, ell)``, keyed by ``(tau, twice_ell)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _trig
from .repr_core import HalfInt, as_halfint, hs_norm, weight_su2, weight_torus
from .su2 import HaarQuadrature, QuadratureError, fourier_su2, synthesize_su2


class AliasingError(ValueError):
    """Requested torus frequencies are not resolved by the time grid."""


@dataclass(frozen=True)
class TimeGrid:
    n_t: int

    def __post_init__(self):
        if int(self.n_t) < 1:
            raise ValueError("n_t must be >= 1")

    @classmethod
    def for_tau_max(cls, tau_max: int) -> "TimeGrid":
        return cls(2 * int(tau_max) + 1)

    @property
    def points(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_t) / self.n_t

    @property
    def max_freq(self) -> int:
        """Largest torus frequency represented without aliasing."""
        return (self.n_t - 1) // 2

    def check_resolves(self, tau_max: int):
        if self.n_t < 2 * tau_max + 1:
            raise AliasingError(
                f"grid with n_t={self.n_t} cannot resolve |tau| <= {tau_max}"
            )


@dataclass
class PartialCoeffField:
    """Time-sampled partial coefficients: ``blocks[twice_ell]`` has shape
    ``(n_t, 2ell+1, 2ell+1)``."""

    grid: TimeGrid
    blocks: dict
    ell_max: HalfInt = None

    def __post_init__(self):
        self.blocks = {int(k): np.asarray(v, dtype=complex) for k, v in self.blocks.items()}
        top = max(self.blocks, default=0)
        self.ell_max = HalfInt(top) if self.ell_max is None else as_halfint(self.ell_max)
        for tw, b in self.blocks.items():
            if tw > self.ell_max.twice:
                raise ValueError(f"block 2ell={tw} above ell_max={self.ell_max}")
            if b.shape != (self.grid.n_t, tw + 1, tw + 1):
                raise ValueError(
                    f"block 2ell={tw} has shape {b.shape}, expected "
                    f"{(self.grid.n_t, tw + 1, tw + 1)}"
                )

    def __getitem__(self, ell) -> np.ndarray:
        return self.blocks[as_halfint(ell).twice]

    def __iter__(self):
        return iter(sorted(self.blocks))

    def items(self):
        return sorted(self.blocks.items())

    def map(self, fn) -> "PartialCoeffField":
        """New field with ``fn(twice_ell, block)`` applied per block."""
        return PartialCoeffField(
            self.grid, {tw: fn(tw, b) for tw, b in self.blocks.items()}, self.ell_max
        )

    def _combine(self, other, op):
        if not isinstance(other, PartialCoeffField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValueError("fields live on different time grids")
        keys = set(self.blocks) | set(other.blocks)
        out = {}
        for tw in keys:
            a = self.blocks.get(tw)
            b = other.blocks.get(tw)
            if a is None:
                a = np.zeros_like(b)
            if b is None:
                b = np.zeros_like(a)
            out[tw] = op(a, b)
        return PartialCoeffField(self.grid, out, max(self.ell_max, other.ell_max))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        return self.map(lambda tw, b: c * b)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return max((float(np.abs(b).max()) for b in self.blocks.values() if b.size), default=0.0)

    def resample(self, n_t: int) -> "PartialCoeffField":
        """Band-limited resampling of every block to a new grid."""
        grid = TimeGrid(n_t)
        return PartialCoeffField(
            grid, {tw: _trig.resample(b, n_t) for tw, b in self.blocks.items()}, self.ell_max
        )

    def zeros_like(self) -> "PartialCoeffField":
        return self.map(lambda tw, b: np.zeros_like(b))


@dataclass
class SparseBlock:
    """A (2ell+1)x(2ell+1) block stored entry-wise, for labels too large to
    allocate densely.  ``entries`` maps ``(twice_m, twice_n)`` to a number
    (complex, or mpmath for values below double range)."""

    twice_ell: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for tm, tn in self.entries:
            for v in (tm, tn):
                if abs(v) > self.twice_ell or (self.twice_ell - v) % 2:
                    raise ValueError(f"label 2m={v} invalid for 2ell={self.twice_ell}")

    def entry(self, twice_m: int, twice_n: int):
        return self.entries.get((twice_m, twice_n), 0)

    def abs_values(self) -> list:
        return [abs(v) for v in self.entries.values()]

    def log_hs_norm(self) -> float:
        vals = self.abs_values()
        if not vals or all(v == 0 for v in vals):
            return -math.inf
        import mpmath

        with mpmath.workdps(30):
            return float(mpmath.log(mpmath.sqrt(mpmath.fsum(mpmath.mpf(v) ** 2 for v in vals))))

    def log_max_entry(self) -> float:
        vals = self.abs_values()
        if not vals or all(v == 0 for v in vals):
            return -math.inf
        import mpmath

        with mpmath.workdps(30):
            return float(mpmath.log(max(mpmath.mpf(v) for v in vals)))

    def to_dense(self, max_dim: int = 4096) -> np.ndarray:
        d = self.twice_ell + 1
        if d > max_dim:
            raise MemoryError(f"refusing to densify a block of dimension {d}")
        out = np.zeros((d, d), dtype=complex)
        for (tm, tn), v in self.entries.items():
            out[(tm + self.twice_ell) // 2, (tn + self.twice_ell) // 2] = complex(v)
        return out


def _log_norm(block, norm: str) -> float:
    if isinstance(block, SparseBlock):
        return block.log_hs_norm() if norm == "hs" else block.log_max_entry()
    b = np.asarray(block)
    v = hs_norm(b) if norm == "hs" else (float(np.abs(b).max()) if b.size else 0.0)
    return math.log(v) if v > 0 else -math.inf


@dataclass
class FullCoeff:
    """Sparse double coefficients ``(tau, twice_ell) -> block``."""

    entries: dict = field(default_factory=dict)
    tau_max: int | None = None
    ell_max: HalfInt | None = None

    def __post_init__(self):
        clean = {}
        for (tau, tw), blk in self.entries.items():
            tau, tw = int(tau), int(tw)
            if tw < 0:
                raise ValueError("twice_ell must be >= 0")
            if isinstance(blk, SparseBlock):
                if blk.twice_ell != tw:
                    raise ValueError("sparse block label mismatch")
            else:
                blk = np.asarray(blk, dtype=complex)
                if blk.shape != (tw + 1, tw + 1):
                    raise ValueError(
                        f"block at (tau={tau}, 2ell={tw}) has shape {blk.shape}"
                    )
            clean[(tau, tw)] = blk
        self.entries = clean

    def __getitem__(self, key):
        tau, ell = key
        return self.entries[(int(tau), as_halfint(ell).twice)]

    def __len__(self):
        return len(self.entries)

    def keys(self):
        return sorted(self.entries)

    def items(self):
        return [(k, self.entries[k]) for k in self.keys()]

    def is_dense(self) -> bool:
        return not any(isinstance(b, SparseBlock) for b in self.entries.values())

    def hs_norms(self) -> list[tuple[int, int, float]]:
        """``(tau, twice_ell, ||block||_HS)`` triples in key order (dense only)."""
        return [(tau, tw, hs_norm(b)) for (tau, tw), b in self.items()]

    def log_norms(self, norm: str = "max") -> list[tuple[int, int, float]]:
        """``(tau, twice_ell, log ||block||)``; ``norm`` is ``"max"`` (largest
        entry modulus) or ``"hs"``.  Safe for sparse huge-label blocks."""
        return [(tau, tw, _log_norm(b, norm)) for (tau, tw), b in self.items()]

    def total_mass(self) -> float:
        """``sum (2ell+1) ||u^^(tau, ell)||_HS^2`` (the squared L^2 norm)."""
        return float(sum((tw + 1) * hs_norm(b) ** 2 for (tau, tw), b in self.items()))

    def pruned(self, rtol: float = 1e-12) -> "FullCoeff":
        """Drop dense blocks whose HS norm is below ``rtol`` times the largest."""
        norms = {k: hs_norm(b) for k, b in self.entries.items() if not isinstance(b, SparseBlock)}
        top = max(norms.values(), default=0.0)
        keep = {
            k: b
            for k, b in self.entries.items()
            if isinstance(b, SparseBlock) or norms[k] > rtol * top
        }
        return FullCoeff(keep, self.tau_max, self.ell_max)

    def to_partial(self, grid: TimeGrid, ell_max=None) -> PartialCoeffField:
        """``u^(t, ell) = sum_tau u^^(tau, ell) exp(i tau t)`` on ``grid``."""
        if not self.is_dense():
            raise ValueError("sparse huge-label coefficients cannot be sampled")
        taus = [tau for tau, _ in self.entries]
        if taus:
            grid.check_resolves(max(abs(t) for t in taus))
        t = grid.points
        blocks: dict = {}
        for (tau, tw), b in self.items():
            phase = np.exp(1j * tau * t)[:, None, None]
            blocks[tw] = blocks.get(tw, 0) + phase * b[None]
        if ell_max is not None:
            top = as_halfint(ell_max).twice
            for tw in range(top + 1):
                blocks.setdefault(tw, np.zeros((grid.n_t, tw + 1, tw + 1), complex))
        return PartialCoeffField(grid, blocks, ell_max)


def analyze_partial(samples, grid: TimeGrid, quad: HaarQuadrature, ell_max) -> PartialCoeffField:
    """``u^(t_k, ell) = int_{S^3} f(t_k, x) t^ell(x)^* dx`` for every ``ell <= ell_max``.

    The field is assumed band-limited to ``ell_max`` in the SU(2) variable.
    """
    ell_max = as_halfint(ell_max)
    f = np.asarray(samples)
    if f.shape != (grid.n_t, quad.n_nodes):
        raise ValueError(f"samples shape {f.shape} != {(grid.n_t, quad.n_nodes)}")
    if 2 * ell_max.twice > quad.max_exact_ell.twice:
        raise QuadratureError(
            f"quadrature exact to ell={quad.max_exact_ell} is too coarse for "
            f"band-limit {ell_max}"
        )
    blocks = {
        tw: fourier_su2(f, HalfInt(tw), quad, band_limit=ell_max)
        for tw in range(ell_max.twice + 1)
    }
    return PartialCoeffField(grid, blocks, ell_max)


def analyze_full(pc: PartialCoeffField, tau_max: int) -> FullCoeff:
    """``u^^(tau, ell) = (1/2pi) int u^(t, ell) exp(-i tau t) dt`` by the
    trapezoid rule, for ``|tau| <= tau_max``."""
    tau_max = int(tau_max)
    pc.grid.check_resolves(tau_max)
    n = pc.grid.n_t
    out = {}
    for tw, b in pc.items():
        c = np.fft.fft(b, axis=0) / n
        for tau in range(-tau_max, tau_max + 1):
            out[(tau, tw)] = c[tau % n]
    return FullCoeff(out, tau_max, pc.ell_max)


def analyze_x_first(samples, grid: TimeGrid, quad: HaarQuadrature, ell_max, tau_max: int) -> FullCoeff:
    """Double coefficients computed in the other order: the torus transform
    at every SU(2) node first, then the SU(2) transform of each frequency."""
    ell_max = as_halfint(ell_max)
    grid.check_resolves(tau_max)
    f = np.asarray(samples)
    c = np.fft.fft(f, axis=0) / grid.n_t  # (n_t, n_nodes)
    out = {}
    for tau in range(-tau_max, tau_max + 1):
        row = c[tau % grid.n_t]
        for tw in range(ell_max.twice + 1):
            out[(tau, tw)] = fourier_su2(row, HalfInt(tw), quad, band_limit=ell_max)
    return FullCoeff(out, tau_max, ell_max)


def synthesize(coeffs, quad_or_nodes, grid: TimeGrid | None = None) -> np.ndarray:
    """Pointwise reconstruction on ``grid x nodes`` from a PartialCoeffField or
    a FullCoeff (the latter needs ``grid``).  Returns shape ``(n_t, n_nodes)``."""
    if isinstance(coeffs, FullCoeff):
        if grid is None:
            raise ValueError("synthesizing double coefficients needs a TimeGrid")
        coeffs = coeffs.to_partial(grid)
    elif not isinstance(coeffs, PartialCoeffField):
        raise TypeError("expected PartialCoeffField or FullCoeff")
    return synthesize_su2(dict(coeffs.items()), quad_or_nodes)


def sobolev_multiplier(fc: FullCoeff, order: float) -> FullCoeff:
    """Scale block ``(tau, ell)`` by ``(<tau> <ell>)^order``."""
    out = {}
    for (tau, tw), b in fc.items():
        if isinstance(b, SparseBlock):
            raise ValueError("multiplier not defined on sparse huge-label blocks")
        out[(tau, tw)] = b * (weight_torus(tau) * weight_su2(tw)) ** order
    return FullCoeff(out, fc.tau_max, fc.ell_max)


def l2_norm_squared(samples, grid: TimeGrid, quad: HaarQuadrature) -> float:
    """Normalized ``||f||^2`` on T^1 x S^3 (trapezoid in t, Haar rule in x)."""
    f = np.asarray(samples)
    return float(np.mean(quad.integrate(np.abs(f) ** 2)))


def random_full_coeff(rng: np.random.Generator, ell_max, tau_max: int, decay: float = 0.0) -> FullCoeff:
    """Random band-limited double coefficients; ``decay`` > 0 damps blocks by
    ``exp(-decay (|tau| + ell))``."""
    ell_max = as_halfint(ell_max)
    out = {}
    for tau in range(-tau_max, tau_max + 1):
        for tw in range(ell_max.twice + 1):
            d = tw + 1
            blk = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            out[(tau, tw)] = blk * math.exp(-decay * (abs(tau) + tw / 2))
    return FullCoeff(out, tau_max, ell_max)
