"""Mode-by-mode solution of ``L u = f`` with ``L = d/dt + a(t) X``.

In partial coefficients the equation decouples into scalar periodic ODEs

    d/dt u^(t, ell)_mn + i a(t) m u^(t, ell)_mn = f^(t, ell)_mn.

Modes with ``m a0`` not an integer have a unique periodic solution given by a
convolution-type integral over one period; resonant modes are solvable only
under an integral compatibility condition, and then the solution built with
lower limit 0 is returned.

All integrals are evaluated with Gauss-Legendre rules: the integrands are
smooth but not periodic in the integration variable, so the trapezoid rule
would only be second-order accurate.  The band-limited right-hand side is
evaluated off-grid through its trigonometric interpolant, and the phases
``exp(i m H)`` are evaluated in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _trig
from .diophantine import A0Class, is_resonant, parse_a0
from .repr_core import as_halfint, m_labels
from .transform import FullCoeff, PartialCoeffField, TimeGrid


class ResonanceError(ValueError):
    """Nonresonant formula requested for a resonant mode (or vice versa)."""


class NoSolutionError(ValueError):
    """The right-hand side fails the compatibility condition."""

    def __init__(self, message, modes=None):
        super().__init__(message)
        self.modes = modes or []


@dataclass(frozen=True)
class CoefficientA:
    """Real trigonometric polynomial
    ``a(t) = a0 + sum_k (cos_k cos(kt) + sin_k sin(kt))``.

    The constant term is the exact mean ``a0`` (an :class:`A0Class`).
    """

    a0: A0Class
    cos: tuple = ()
    sin: tuple = ()

    def __init__(self, a0, cos=(), sin=()):
        object.__setattr__(self, "a0", parse_a0(a0))
        c = tuple(float(v) for v in cos)
        s = tuple(float(v) for v in sin)
        deg = max(len(c), len(s))
        c = c + (0.0,) * (deg - len(c))
        s = s + (0.0,) * (deg - len(s))
        if not all(math.isfinite(v) for v in c + s):
            raise ValueError("coefficients must be finite reals")
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @classmethod
    def constant(cls, a0) -> "CoefficientA":
        return cls(a0)

    @property
    def degree(self) -> int:
        return len(self.cos)

    @property
    def a0_float(self) -> float:
        return float(self.a0)

    def _k(self):
        return np.arange(1, self.degree + 1, dtype=float)

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def derivative(self, t, order: int = 0) -> np.ndarray:
        """``d^order a / dt^order`` in closed form."""
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.a0_float if order == 0 else 0.0)
        if self.degree:
            k = self._k()
            ph = t[..., None] * k + order * np.pi / 2
            out = out + (k**order * (np.array(self.cos) * np.cos(ph) + np.array(self.sin) * np.sin(ph))).sum(-1)
        return out

    def primitive(self, t) -> np.ndarray:
        """``A(t) = int_0^t a(s) ds - a0 t`` (2pi-periodic, ``A(0) = 0``)."""
        t = np.asarray(t, dtype=float)
        if not self.degree:
            return np.zeros(t.shape)
        k = self._k()
        kt = t[..., None] * k
        c, s = np.array(self.cos), np.array(self.sin)
        return (c * np.sin(kt) / k + s * (1.0 - np.cos(kt)) / k).sum(-1)

    def H(self, t, s) -> np.ndarray:
        """``H(t, s) = int_{t-s}^t a``."""
        t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
        return self.primitive(t) - self.primitive(t - s) + self.a0_float * s

    def H_diag(self, t) -> np.ndarray:
        """``H(t, t) = int_0^t a = A(t) + a0 t``."""
        t = np.asarray(t, dtype=float)
        return self.primitive(t) + self.a0_float * t

    def oscillation(self) -> float:
        """Upper bound on ``max |a - a0|``."""
        return float(sum(abs(c) + abs(s) for c, s in zip(self.cos, self.sin)))

    def primitive_bound(self) -> float:
        """Upper bound on ``max |A|``."""
        return float(sum((abs(c) + 2 * abs(s)) / k for k, (c, s) in enumerate(zip(self.cos, self.sin), 1)))

    def fourier(self) -> dict:
        """Exponential Fourier coefficients ``{k: a^(k)}`` of ``a``."""
        out = {0: complex(self.a0_float)}
        for k, (c, s) in enumerate(zip(self.cos, self.sin), 1):
            out[k] = complex(c, -s) / 2
            out[-k] = complex(c, s) / 2
        return out

    def to_dict(self) -> dict:
        a0 = self.a0
        if a0.is_rational:
            spec = {"kind": "rational", "value": f"{a0.p}/{a0.q}"}
        elif a0.kind == "liouville":
            spec = {"kind": "liouville", "base": a0.series.base}
        else:
            spec = {"kind": "non-liouville", "value": a0.approx, "tag": a0.tag}
        return {"a0": spec, "cos": list(self.cos), "sin": list(self.sin)}

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientA":
        return cls(parse_a0(d.get("a0", 0)), d.get("cos", ()), d.get("sin", ()))


def _as_twice_m(m) -> int:
    if isinstance(m, (int, np.integer)) and not isinstance(m, bool):
        return 2 * int(m)
    fr = Fraction(m) if not isinstance(m, float) else Fraction(m)
    tw = 2 * fr
    if tw.denominator != 1:
        raise ValueError(f"m={m} is not a half-integer")
    return int(tw)


def resonant(a: CoefficientA, m) -> bool:
    """Exact ``m a0 in Z``."""
    return is_resonant(a.a0, _as_twice_m(m))


def default_gl_points(a: CoefficientA, m: float, bandwidth: int) -> int:
    """Gauss-Legendre size for integrands ``exp(i m H) * trig poly`` over [0, 2pi]."""
    omega = bandwidth + abs(m) * (abs(a.a0_float) + a.oscillation()) + a.degree * (abs(m) * a.primitive_bound() + 1)
    return int(2 * math.ceil(omega) + 48)


def _coeffs_and_freqs(f_mode):
    """Grid coefficients (Nyquist split) and frequencies for samples along axis 0."""
    f = np.asarray(f_mode, dtype=complex)
    c, k = _trig._split_nyquist(_trig.coeffs(f, axis=0), 0)
    return c, k


def _out_points(n_in: int, out_n: int | None) -> np.ndarray:
    n = n_in if out_n is None else int(out_n)
    return 2 * np.pi * np.arange(n) / n


def _nonresonant_operator(a: CoefficientA, m: float, freqs, t_out, n_gl: int, form: str) -> np.ndarray:
    """Matrix Q with ``u(t_out) = Q @ c`` for the unique periodic solution."""
    x, w = np.polynomial.legendre.leggauss(n_gl)
    s = np.pi * (x + 1.0)
    w = np.pi * w
    lam = 1j * m * a.a0_float
    t = t_out[:, None]
    if form == "minus":
        pref = 1.0 / (1.0 - np.exp(-2 * np.pi * lam))
        # exp(-i m H(t, s)) f(t - s)
        kern = np.exp(-1j * m * a.H(t, s[None, :])) * w
        arg = t[:, :, None] - s[None, :, None]
    elif form == "plus":
        pref = 1.0 / (np.exp(2 * np.pi * lam) - 1.0)
        # exp(i m H(t + r, r)) f(t + r)
        kern = np.exp(1j * m * a.H(t + s[None, :], s[None, :])) * w
        arg = t[:, :, None] + s[None, :, None]
    else:
        raise ValueError(f"unknown form {form!r}")
    E = np.exp(1j * arg * freqs)  # (n_out, n_gl, n_freq)
    return pref * np.einsum("kj,kjf->kf", kern, E)


def _resonant_operator(a: CoefficientA, m: float, freqs, t_out, n_gl: int) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(n_gl)
    half = t_out[:, None] / 2.0
    s = half * (x[None, :] + 1.0)  # nodes on [0, t]
    ws = half * w[None, :]
    kern = np.exp(1j * m * a.H_diag(s)) * ws
    E = np.exp(1j * s[..., None] * freqs)
    inner = np.einsum("kj,kjf->kf", kern, E)
    return np.exp(-1j * m * a.H_diag(t_out))[:, None] * inner


def _compat_functional(a: CoefficientA, m: float, freqs, n_gl: int) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(n_gl)
    s = np.pi * (x + 1.0)
    w = np.pi * w
    return (np.exp(1j * m * a.H_diag(s)) * w) @ np.exp(1j * s[:, None] * freqs)


def solve_mode_nonresonant(a: CoefficientA, ell, m, n, f_mode, out_n=None, form="minus", n_gl=None):
    """Unique periodic solution of one nonresonant mode.

    ``f_mode`` holds samples of a band-limited right-hand side on a uniform
    grid; the solution is returned on a uniform grid of ``out_n`` points
    (default: the input grid).
    """
    ell = as_halfint(ell)
    tm = _as_twice_m(m)
    if abs(tm) > ell.twice or abs(_as_twice_m(n)) > ell.twice:
        raise ValueError("m, n must lie in -ell..ell")
    if is_resonant(a.a0, tm):
        raise ResonanceError(f"m={tm / 2} resonates with a0={a.a0.describe()}")
    c, k = _coeffs_and_freqs(f_mode)
    mv = tm / 2
    n_gl = n_gl or default_gl_points(a, mv, int(np.abs(k).max()))
    Q = _nonresonant_operator(a, mv, k, _out_points(len(c), out_n), n_gl, form)
    return Q @ c


def compatibility(a: CoefficientA, ell, m, n, f_mode, tol_rel=1e-9, n_gl=None):
    """``int_0^{2pi} exp(i m H(t,t)) f(t) dt``; ok iff it is within
    ``tol_rel * (1 + max|f|)`` of zero."""
    tm = _as_twice_m(m)
    if not is_resonant(a.a0, tm):
        raise ResonanceError("compatibility applies to resonant modes only")
    c, k = _coeffs_and_freqs(f_mode)
    mv = tm / 2
    n_gl = n_gl or default_gl_points(a, mv, int(np.abs(k).max()))
    val = complex(_compat_functional(a, mv, k, n_gl) @ c)
    scale = 1.0 + float(np.abs(np.asarray(f_mode)).max(initial=0.0))
    return abs(val) <= tol_rel * scale, val


def solve_mode_resonant(a: CoefficientA, ell, m, n, f_mode, out_n=None, n_gl=None, tol_rel=1e-9):
    """Solution ``exp(-i m H(t,t)) int_0^t exp(i m H(s,s)) f(s) ds`` of a
    resonant mode.  Raises :class:`NoSolutionError` if the compatibility
    integral does not vanish."""
    ell = as_halfint(ell)
    tm = _as_twice_m(m)
    if not is_resonant(a.a0, tm):
        raise ResonanceError(f"m={tm / 2} does not resonate with a0={a.a0.describe()}")
    ok, val = compatibility(a, ell, m, n, f_mode, tol_rel=tol_rel, n_gl=n_gl)
    if not ok:
        raise NoSolutionError(
            f"compatibility fails for (ell={ell}, m={tm / 2}, n={_as_twice_m(n) / 2}): integral={val}",
            [((ell.twice, tm, _as_twice_m(n)), val)],
        )
    c, k = _coeffs_and_freqs(f_mode)
    mv = tm / 2
    n_gl = n_gl or default_gl_points(a, mv, int(np.abs(k).max()))
    Q = _resonant_operator(a, mv, k, _out_points(len(c), out_n), n_gl)
    return Q @ c


def solve_constant(lam: complex, f_samples, t, form: str = "minus", n_gl: int = 96):
    """Periodic solution of ``u' + lam u = f`` for trigonometric-polynomial
    ``f`` (given by grid samples), evaluated at points ``t``.

    ``form`` is ``"minus"``/``"plus"`` (the two equivalent expressions for
    ``lam`` not in iZ) or ``"zero"`` (lower limit 0, for ``lam`` in iZ).
    """
    c, k = _coeffs_and_freqs(f_samples)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x, w = np.polynomial.legendre.leggauss(n_gl)
    if form in ("minus", "plus"):
        s = np.pi * (x + 1.0)
        ws = np.pi * w
        if form == "minus":
            pref = 1.0 / (1.0 - np.exp(-2 * np.pi * lam))
            vals = np.exp(-lam * s) * ws
            E = np.exp(1j * (t[:, None, None] - s[None, :, None]) * k)
        else:
            pref = 1.0 / (np.exp(2 * np.pi * lam) - 1.0)
            vals = np.exp(lam * s) * ws
            E = np.exp(1j * (t[:, None, None] + s[None, :, None]) * k)
        return pref * np.einsum("j,kjf,f->k", vals, E, c)
    if form == "zero":
        half = t[:, None] / 2.0
        s = half * (x[None, :] + 1.0)
        ws = half * w[None, :]
        E = np.exp(1j * s[..., None] * k)
        inner = np.einsum("kj,kjf,f->k", np.exp(lam * s) * ws, E, c)
        return np.exp(-lam * t) * inner
    raise ValueError(f"unknown form {form!r}")


def apply_L(a: CoefficientA, u: PartialCoeffField) -> PartialCoeffField:
    """Partial coefficients of ``L u``: ``d/dt u^ + i a(t) m u^`` (row label m),
    with the time derivative taken spectrally on ``u``'s grid."""
    at = a(u.grid.points)[:, None, None]

    def op(tw, b):
        m = m_labels(tw)[None, :, None]
        return _trig.derivative(b, 1, axis=0) + 1j * at * m * b

    return u.map(op)


def apply_L_full(a: CoefficientA, fc: FullCoeff) -> FullCoeff:
    """Double coefficients of ``L u`` computed entirely in coefficient space:
    ``i tau u^^(tau) + i m sum_k a^(k) u^^(tau - k)``.  No grid is involved,
    so exact zeros stay exact."""
    if not fc.is_dense():
        raise ValueError("apply_L_full needs dense blocks")
    ahat = a.fourier()
    out: dict = {}
    for (tau, tw), b in fc.items():
        m = 1j * m_labels(tw)[:, None]
        out.setdefault((tau, tw), np.zeros_like(b))
        out[(tau, tw)] = out[(tau, tw)] + 1j * tau * b
        for k, ak in ahat.items():
            key = (tau + k, tw)
            out[key] = out.get(key, np.zeros_like(b)) + ak * m * b
    tau_max = None if fc.tau_max is None else fc.tau_max + a.degree
    return FullCoeff(out, tau_max, fc.ell_max)


def mode_residual(a: CoefficientA, m, u_samples, f_samples) -> float:
    """``max |u' + i a m u - f|`` on the samples' grid (spectral derivative)."""
    u = np.asarray(u_samples, dtype=complex)
    t = 2 * np.pi * np.arange(u.shape[0]) / u.shape[0]
    mv = _as_twice_m(m) / 2
    r = _trig.derivative(u, 1, axis=0) + 1j * a(t).reshape((-1,) + (1,) * (u.ndim - 1)) * mv * u - f_samples
    return float(np.abs(r).max(initial=0.0))


@dataclass
class SolverConfig:
    upsample: int = 4
    tol_compat: float = 1e-9
    n_gl: int | None = None
    residual_tol: float = 1e-8


@dataclass
class SolveOutcome:
    """Result of :func:`solve`.

    ``solution`` lives on a refined time grid (see :func:`solution_grid`).
    Keys of the per-mode dicts are ``(twice_ell, twice_m, twice_n)``;
    ``resonance_map`` is keyed by ``(twice_ell, twice_m)``.
    """

    solution: PartialCoeffField
    skipped_modes: list = field(default_factory=list)
    resonance_map: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    compat_values: dict = field(default_factory=dict)
    rhs_scale: dict = field(default_factory=dict)

    @property
    def in_range(self) -> bool:
        """True iff the right-hand side satisfies every compatibility condition."""
        return not self.skipped_modes

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def raise_if_incompatible(self):
        if self.skipped_modes:
            raise NoSolutionError(
                f"{len(self.skipped_modes)} resonant modes fail compatibility",
                [(k, self.compat_values[k]) for k in self.skipped_modes],
            )


def solution_grid(a: CoefficientA, f: PartialCoeffField, upsample: int = 4) -> TimeGrid:
    """Odd-sized grid fine enough to resolve ``exp(-i m A) * f`` for every m."""
    bw = f.grid.max_freq
    m_max = f.ell_max.twice / 2
    phase_bw = a.degree * (math.ceil(m_max * a.primitive_bound()) + 1) + 16
    n = max(upsample * f.grid.n_t, 2 * (bw + phase_bw) + 1)
    return TimeGrid(n if n % 2 else n + 1)


def solve(a: CoefficientA, f: PartialCoeffField, config: SolverConfig | None = None,
          on_incompatible: str = "record") -> SolveOutcome:
    """Solve ``L u = f`` mode by mode.

    Nonresonant modes use the one-period integral formula, resonant modes the
    lower-limit-0 formula after the compatibility check.  Modes failing the
    check are zero in the solution and listed in ``skipped_modes``; with
    ``on_incompatible="raise"`` a :class:`NoSolutionError` is raised instead.
    """
    cfg = config or SolverConfig()
    fine = solution_grid(a, f, cfg.upsample)
    t_out = fine.points
    out_blocks = {}
    outcome = SolveOutcome(solution=None)
    cache: dict = {}
    for tw, blk in f.items():
        d = tw + 1
        sol = np.zeros((fine.n_t, d, d), dtype=complex)
        f_fine = _trig.resample(blk, fine.n_t, axis=0)
        for row, tm in enumerate(range(-tw, tw + 1, 2)):
            mv = tm / 2
            res = is_resonant(a.a0, tm)
            outcome.resonance_map[(tw, tm)] = "resonant" if res else "nonresonant"
            F = blk[:, row, :]  # (n_t, d) all n for this m
            c, k = _coeffs_and_freqs(F)
            key = (tm, c.shape[0])
            if key not in cache:
                n_gl = cfg.n_gl or default_gl_points(a, mv, int(np.abs(k).max()))
                if res:
                    cache[key] = (
                        _resonant_operator(a, mv, k, t_out, n_gl),
                        _compat_functional(a, mv, k, n_gl),
                    )
                else:
                    cache[key] = (_nonresonant_operator(a, mv, k, t_out, n_gl, "minus"), None)
            Q, R = cache[key]
            U = Q @ c
            if res:
                vals = R @ c
                scale = 1.0 + np.abs(F).max(axis=0)
                for col, tn in enumerate(range(-tw, tw + 1, 2)):
                    mode = (tw, tm, tn)
                    outcome.compat_values[mode] = complex(vals[col])
                    if abs(vals[col]) > cfg.tol_compat * scale[col]:
                        outcome.skipped_modes.append(mode)
                        U[:, col] = 0.0
            sol[:, row, :] = U
            resid = _trig.derivative(U, 1, axis=0) + 1j * a(t_out)[:, None] * mv * U - f_fine[:, row, :]
            for col, tn in enumerate(range(-tw, tw + 1, 2)):
                mode = (tw, tm, tn)
                outcome.rhs_scale[mode] = float(np.abs(F[:, col]).max(initial=0.0))
                if mode not in outcome.skipped_modes:
                    outcome.residuals[mode] = float(np.abs(resid[:, col]).max())
        out_blocks[tw] = sol
    outcome.solution = PartialCoeffField(fine, out_blocks, f.ell_max)
    if on_incompatible == "raise":
        outcome.raise_if_incompatible()
    return outcome


def project_to_K(a: CoefficientA, f: PartialCoeffField, oversample: int = 8) -> PartialCoeffField:
    """Remove from every resonant mode the component that violates
    compatibility, staying band-limited on ``f``'s grid.

    With ``h = exp(-i m H(t,t))`` (periodic for resonant m) and ``P`` the
    projection onto frequencies the grid resolves, ``f - c P h`` with
    ``c = I / (2 pi sum |h_k|^2)`` has vanishing compatibility integral.
    Test-data helper.
    """
    grid = f.grid
    t = grid.points
    nf = oversample * grid.n_t + 1
    tf = 2 * np.pi * np.arange(nf) / nf
    kmax = grid.max_freq
    out = {}
    phcache = {}
    for tw, blk in f.items():
        b = blk.copy()
        for row, tm in enumerate(range(-tw, tw + 1, 2)):
            if not is_resonant(a.a0, tm):
                continue
            mv = tm / 2
            if tm not in phcache:
                h = np.exp(-1j * mv * a.H_diag(tf))
                hc = np.fft.fft(h) / nf
                ks = _trig.freqs(nf)
                keep = np.abs(ks) <= kmax
                Ph = (hc[keep][None, :] * np.exp(1j * t[:, None] * ks[keep][None, :])).sum(-1)
                energy = 2 * np.pi * float(np.sum(np.abs(hc[keep]) ** 2))
                phcache[tm] = (Ph, energy)
            Ph, energy = phcache[tm]
            F = b[:, row, :]
            c, k = _coeffs_and_freqs(F)
            n_gl = default_gl_points(a, mv, int(np.abs(k).max()))
            vals = _compat_functional(a, mv, k, n_gl) @ c
            b[:, row, :] = F - Ph[:, None] * (vals / energy)[None, :]
        out[tw] = b
    return PartialCoeffField(grid, out, f.ell_max)


def homogeneous_witness(grid: TimeGrid, ell_max) -> PartialCoeffField:
    """The field with ``u^(t, ell)_00 = 1`` for integer ``ell`` and all other
    coefficients zero.  ``L u = 0`` for every ``a`` although the coefficients
    do not decay, so ``L`` is not globally hypoelliptic."""
    ell_max = as_halfint(ell_max)
    blocks = {}
    for tw in range(ell_max.twice + 1):
        b = np.zeros((grid.n_t, tw + 1, tw + 1), dtype=complex)
        if tw % 2 == 0:
            b[:, tw // 2, tw // 2] = 1.0
        blocks[tw] = b
    return PartialCoeffField(grid, blocks, ell_max)


def homogeneous_witness_coeffs(ell_max, tau_max: int = 0) -> FullCoeff:
    """Double coefficients of :func:`homogeneous_witness` on the box
    ``|tau| <= tau_max, ell <= ell_max``, with exact zeros off ``tau = 0``."""
    ell_max = as_halfint(ell_max)
    out = {}
    for tau in range(-tau_max, tau_max + 1):
        for tw in range(ell_max.twice + 1):
            b = np.zeros((tw + 1, tw + 1), dtype=complex)
            if tau == 0 and tw % 2 == 0:
                b[tw // 2, tw // 2] = 1.0
            out[(tau, tw)] = b
    return FullCoeff(out, tau_max, ell_max)
