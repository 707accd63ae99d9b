"""Gauge transform to the constant-coefficient normal form.

``Psi_a`` multiplies the partial coefficient ``u^(t, ell)_mn`` by the
unimodular phase ``exp(i m A(t))``.  It conjugates ``L = d/dt + a(t) X`` to
``L_a0 = d/dt + a0 X``, and ``Psi_{-a}`` is its inverse.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import _trig
from .repr_core import m_labels
from .solver import CoefficientA, apply_L
from .transform import PartialCoeffField


@dataclass(frozen=True)
class GaugePhase:
    """Sampled phases ``exp(i sign m A(t))`` for one ``twice_ell``; shape ``(n_t, 2ell+1)``."""

    twice_ell: int
    values: np.ndarray

    @classmethod
    def build(cls, a: CoefficientA, twice_ell: int, t, sign: int = 1) -> "GaugePhase":
        m = m_labels(twice_ell)
        A = a.primitive(np.asarray(t, dtype=float))
        return cls(twice_ell, np.exp(1j * sign * A[:, None] * m[None, :]))


def psi(a: CoefficientA, u: PartialCoeffField, sign: int = 1) -> PartialCoeffField:
    """``u^(t, ell)_mn -> exp(sign i m A(t)) u^(t, ell)_mn``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    t = u.grid.points

    def op(tw, b):
        return GaugePhase.build(a, tw, t, sign).values[:, :, None] * b

    return u.map(op)


def normal_form(a: CoefficientA) -> CoefficientA:
    """The constant coefficient ``a0`` of the conjugated operator."""
    return CoefficientA.constant(a.a0)


def intertwine_sides(a: CoefficientA, u: PartialCoeffField, upsample: int = 4):
    """``(Psi_a L u, L_a0 Psi_a u)`` on a grid refined enough to resolve the
    phase, so both spectral derivatives are accurate."""
    m_max = u.ell_max.twice / 2
    extra = int(np.ceil(m_max * a.primitive_bound())) * max(a.degree, 1) + a.degree + 16
    n = max(upsample * u.grid.n_t, 2 * (u.grid.max_freq + extra) + 1)
    n += 1 - n % 2
    fine = u.resample(n)
    lhs = psi(a, apply_L(a, fine), 1)
    rhs = apply_L(normal_form(a), psi(a, fine, 1))
    return lhs, rhs


def verify_intertwine(a: CoefficientA, u: PartialCoeffField, upsample: int = 4, relative: bool = True) -> float:
    """``max |Psi_a(L u) - L_a0(Psi_a u)|`` over retained modes, divided by
    ``max(1, max |L u|)`` when ``relative``."""
    lhs, rhs = intertwine_sides(a, u, upsample)
    err = (lhs - rhs).sup_norm()
    return err / max(1.0, lhs.sup_norm()) if relative else err


def phase_derivatives(x_derivs: np.ndarray, alpha_max: int) -> np.ndarray:
    """Derivatives of ``exp(phi)`` divided by ``exp(phi)``.

    ``x_derivs[j]`` holds ``phi^(j+1)`` (shape ``(alpha_max, ...)``).  Uses the
    complete-Bell recursion ``y_{n+1} = sum_k C(n,k) y_{n-k} phi^(k+1)``.
    """
    y = [np.ones_like(x_derivs[0])]
    for n in range(alpha_max):
        y.append(sum(comb(n, k) * y[n - k] * x_derivs[k] for k in range(n + 1)))
    return np.array(y)


@dataclass
class GrowthFit:
    alpha: int
    exponent: float
    constant: float
    sup_values: np.ndarray


def gauge_growth_check(a: CoefficientA, alpha_max: int = 3, m_range=None, n_t: int = 2048,
                       which: str = "A") -> list[GrowthFit]:
    """Least-squares exponent of ``sup_t |d^alpha/dt^alpha exp(i m P(t))|``
    against ``|m|`` for ``alpha <= alpha_max``.

    ``which="A"`` uses ``P = A`` (the gauge phase), ``which="H"`` uses
    ``P(t) = H(t, t)``.  Derivatives are exact (closed-form ``a``
    derivatives fed to the Bell recursion), sampled on ``n_t`` points.
    """
    if m_range is None:
        m_range = np.arange(1, 65)
    m = np.asarray(m_range, dtype=float)
    m = m[m != 0]
    t = 2 * np.pi * np.arange(n_t) / n_t
    # P' = a - a0 (for A) or a (for H); P^(k+1) = a^(k)
    dP = []
    for k in range(max(alpha_max, 1)):
        d = a.derivative(t, k)
        if k == 0 and which == "A":
            d = d - a.a0_float
        dP.append(d)
    dP = np.array(dP)
    x = 1j * m[None, :, None] * dP[:, None, :]  # (alpha, m, t)
    y = phase_derivatives(x, alpha_max)
    fits = []
    for alpha in range(alpha_max + 1):
        sup = np.abs(y[alpha]).max(axis=-1)
        if alpha == 0 or np.all(sup == sup[0]):
            fits.append(GrowthFit(alpha, 0.0, float(sup[0]), sup))
            continue
        lm, ls = np.log(np.abs(m)), np.log(sup)
        slope, icpt = np.polyfit(lm, ls, 1)
        fits.append(GrowthFit(alpha, float(slope), float(np.exp(icpt)), sup))
    return fits


def spectral_phase_derivative(a: CoefficientA, m: float, alpha: int, n_t: int = 4096,
                              which: str = "A") -> np.ndarray:
    """Independent check: ``d^alpha exp(i m P)`` by FFT on ``n_t`` points
    (``P = A`` is periodic; ``P = H(t,t)`` is periodic only when ``m a0`` is
    an integer)."""
    t = 2 * np.pi * np.arange(n_t) / n_t
    P = a.primitive(t) if which == "A" else a.H_diag(t)
    return _trig.derivative(np.exp(1j * m * P), alpha, axis=0)
