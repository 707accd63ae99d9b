"""SU(2) ~ S^3: group elements, Wigner D-matrices, Haar quadrature, symbol of X.

Conventions
-----------
An element is a unit quaternion ``q = (w, x, y, z)``.  Its defining 2x2 matrix,
with rows/columns ordered ``m = -1/2, +1/2``, is::

    [[w + i z,  y - i x],
     [-y - i x, w - i z]]

``t^ell(g)_{mn} = exp(-i m alpha) d^ell_{mn}(beta) exp(-i n gamma)`` with ZYZ
Euler angles, ``alpha in [0, 2pi)``, ``beta in [0, pi]``, ``gamma in [0, 4pi)``.
Rows and columns of every block run over ``m = -ell, ..., ell`` ascending.

The left-invariant field X generates ``s -> (cos(s/2), 0, 0, -sin(s/2))``, so
that ``t^ell(exp(sX)) = diag(exp(i m s))`` and the symbol is ``diag(i m)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .repr_core import HalfInt, as_halfint, m_labels

ELL_STABLE = 25.0


class PrecisionError(ValueError):
    """Requested representation is past the double-precision stability cap."""


class QuadratureError(ValueError):
    """Quadrature is not exact for the requested band-limit."""


def quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


@dataclass(frozen=True)
class SU2Element:
    q: tuple

    def __init__(self, q):
        arr = np.asarray(q, dtype=float).reshape(4)
        nrm = float(np.linalg.norm(arr))
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ValueError(f"cannot normalize quaternion {q!r}")
        object.__setattr__(self, "q", tuple(float(v) for v in arr / nrm))

    @classmethod
    def identity(cls) -> "SU2Element":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def from_euler(cls, alpha: float, beta: float, gamma: float) -> "SU2Element":
        return cls(euler_to_quat(alpha, beta, gamma))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SU2Element":
        # normalized Gaussian 4-vector is Haar-distributed on S^3
        return cls(rng.standard_normal(4))

    def __mul__(self, other: "SU2Element") -> "SU2Element":
        return SU2Element(quat_mul(np.array(self.q), np.array(other.q)))

    def inverse(self) -> "SU2Element":
        w, x, y, z = self.q
        return SU2Element((w, -x, -y, -z))

    def matrix(self) -> np.ndarray:
        return quat_to_matrix(np.array(self.q))

    def euler(self) -> tuple[float, float, float]:
        a, b, g = quat_to_euler(np.array(self.q)[None, :])
        return float(a[0]), float(b[0]), float(g[0])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = w + 1j * z
    out[..., 0, 1] = y - 1j * x
    out[..., 1, 0] = -y - 1j * x
    out[..., 1, 1] = w - 1j * z
    return out


def euler_to_quat(alpha, beta, gamma) -> np.ndarray:
    """Quaternion of ``Rz(alpha) Ry(beta) Rz(gamma)`` (broadcasts)."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(beta, float), np.asarray(gamma, float)
    )
    cb, sb = np.cos(beta / 2), np.sin(beta / 2)
    sp, dm = (alpha + gamma) / 2, (alpha - gamma) / 2
    return np.stack(
        [cb * np.cos(sp), -sb * np.sin(dm), sb * np.cos(dm), cb * np.sin(sp)], axis=-1
    )


def quat_to_euler(q: np.ndarray):
    """ZYZ Euler angles of unit quaternions ``q`` with shape (..., 4).

    At ``beta in {0, pi}`` only one combination of alpha and gamma is defined;
    gamma is set to 0 and the whole phase is folded into alpha.
    """
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    a = w - 1j * z  # = exp(-i(alpha+gamma)/2) cos(beta/2)
    mb = y + 1j * x  # = -b = exp(-i(alpha-gamma)/2) sin(beta/2)
    ra, rb = np.abs(a), np.abs(mb)
    beta = 2.0 * np.arctan2(rb, ra)
    pa = np.angle(a)
    pb = np.angle(mb)
    half_sum = -pa
    half_diff = -pb
    # degenerate branches: fold gamma into alpha
    only_a = rb == 0.0
    only_b = ra == 0.0
    half_diff = np.where(only_a, half_sum, half_diff)
    half_sum = np.where(only_b, half_diff, half_sum)
    alpha = half_sum + half_diff
    gamma = half_sum - half_diff
    shift = np.mod(alpha, 2 * np.pi) - alpha
    alpha = alpha + shift
    gamma = np.mod(gamma - shift, 4 * np.pi)
    return alpha, beta, gamma


@lru_cache(maxsize=None)
def _small_d_terms(twice_ell: int):
    """Sum terms of Wigner's formula, as (row, col, log|coef|, sign, cos_pow, sin_pow)."""
    L = twice_ell
    terms = []
    lg = math.lgamma
    for ia, a in enumerate(range(-L, L + 1, 2)):  # row label m' (doubled)
        for ib, b in enumerate(range(-L, L + 1, 2)):  # column label m (doubled)
            lp_r, lm_r = (L + a) // 2, (L - a) // 2
            lp_c, lm_c = (L + b) // 2, (L - b) // 2
            pref = 0.5 * (lg(lp_r + 1) + lg(lm_r + 1) + lg(lp_c + 1) + lg(lm_c + 1))
            kmin = max(0, (b - a) // 2)
            kmax = min(lp_c, lm_r)
            for k in range(kmin, kmax + 1):
                j = k + (a - b) // 2
                logc = pref - (
                    lg(lp_c - k + 1) + lg(k + 1) + lg(lm_r - k + 1) + lg(j + 1)
                )
                sign = -1.0 if j % 2 else 1.0
                cpow = L - 2 * k + (b - a) // 2
                spow = 2 * k + (a - b) // 2
                terms.append((ia, ib, logc, sign, cpow, spow))
    rows = np.array([t[0] for t in terms], dtype=int)
    cols = np.array([t[1] for t in terms], dtype=int)
    coef = np.array([t[3] * math.exp(t[2]) for t in terms])
    cpow = np.array([t[4] for t in terms], dtype=int)
    spow = np.array([t[5] for t in terms], dtype=int)
    return rows, cols, coef, cpow, spow


def _check_stable(ell: HalfInt, cap: float):
    if float(ell) > cap:
        raise PrecisionError(
            f"ell={ell} exceeds the double-precision stability cap {cap}"
        )


def wigner_small_d(ell, beta, cap: float = ELL_STABLE) -> np.ndarray:
    """``d^ell(beta)`` for an array of angles, shape ``beta.shape + (d, d)``."""
    ell = as_halfint(ell)
    _check_stable(ell, cap)
    beta = np.asarray(beta, dtype=float)
    d = ell.dim
    rows, cols, coef, cpow, spow = _small_d_terms(ell.twice)
    c = np.cos(beta / 2)[..., None]
    s = np.sin(beta / 2)[..., None]
    # integer powers; 0**0 == 1 as required
    vals = coef * c**cpow * s**spow
    out = np.zeros(beta.shape + (d * d,))
    flat = rows * d + cols
    for idx in range(d * d):
        sel = flat == idx
        if np.any(sel):
            out[..., idx] = vals[..., sel].sum(axis=-1)
    return out.reshape(beta.shape + (d, d))


def wigner_euler(ell, alpha, beta, gamma, cap: float = ELL_STABLE) -> np.ndarray:
    ell = as_halfint(ell)
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(beta, float), np.asarray(gamma, float)
    )
    m = m_labels(ell.twice)
    dm = wigner_small_d(ell, beta, cap=cap)
    left = np.exp(-1j * alpha[..., None] * m)
    right = np.exp(-1j * gamma[..., None] * m)
    return left[..., :, None] * dm * right[..., None, :]


def wigner(ell, g, cap: float = ELL_STABLE) -> np.ndarray:
    """The representation matrix ``t^ell(g)``.

    ``g`` is an :class:`SU2Element` (returns (d, d)) or an array of unit
    quaternions of shape (n, 4) (returns (n, d, d)).
    """
    ell = as_halfint(ell)
    _check_stable(ell, cap)
    if isinstance(g, SU2Element):
        if ell.twice == 0:
            return np.ones((1, 1), dtype=complex)
        if g.q == (1.0, 0.0, 0.0, 0.0):
            return np.eye(ell.dim, dtype=complex)
        q = np.array(g.q)[None, :]
        return wigner_euler(ell, *quat_to_euler(q), cap=cap)[0]
    q = np.asarray(g, dtype=float)
    if q.ndim != 2 or q.shape[1] != 4:
        raise ValueError(f"expected quaternion array of shape (n, 4), got {q.shape}")
    return wigner_euler(ell, *quat_to_euler(q), cap=cap)


def flow_X(s: float) -> SU2Element:
    """``exp(s X)`` for the fixed left-invariant field X."""
    return SU2Element((math.cos(s / 2), 0.0, 0.0, -math.sin(s / 2)))


def symbol_X(ell) -> np.ndarray:
    """``sigma_X(ell)_{mn} = i m delta_{mn}``."""
    ell = as_halfint(ell)
    return np.diag(1j * m_labels(ell.twice))


@dataclass
class HaarQuadrature:
    """Product rule on Euler angles, exact for every matrix element with
    ``ell <= max_exact_ell``.

    Products ``t^a_{ij} conj(t^b_{kl})`` decompose into elements of degree
    ``<= a + b``, so a rule with ``max_exact_ell = 2 * L`` integrates the
    Fourier coefficients of any field band-limited to ``L`` exactly.
    """

    max_exact_ell: HalfInt
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    weights: np.ndarray
    cap: float = ELL_STABLE
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.weights.size

    @property
    def nodes(self) -> np.ndarray:
        """Nodes as unit quaternions, shape (n_nodes, 4)."""
        if "q" not in self._cache:
            self._cache["q"] = euler_to_quat(self.alpha, self.beta, self.gamma)
        return self._cache["q"]

    def elements(self) -> list[SU2Element]:
        return [SU2Element(q) for q in self.nodes]

    def band_limit(self) -> HalfInt:
        """Largest ell whose Fourier coefficients of ell-band-limited fields are exact."""
        return HalfInt(self.max_exact_ell.twice // 2)

    def matrices(self, ell) -> np.ndarray:
        """``t^ell`` at every node, shape (n_nodes, d, d); cached."""
        ell = as_halfint(ell)
        if ell.twice not in self._cache:
            self._cache[ell.twice] = wigner_euler(
                ell, self.alpha, self.beta, self.gamma, cap=self.cap
            )
        return self._cache[ell.twice]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate samples over the last axis against normalized Haar measure."""
        return np.asarray(values) @ self.weights


def haar_quadrature(max_exact_ell, cap: float = ELL_STABLE) -> HaarQuadrature:
    """Build the Euler-angle product rule exact up to ``max_exact_ell``.

    Uniform grids of ``2L+1`` points in alpha over 2pi and in gamma over 4pi,
    Gauss-Legendre with ``floor(L)+1`` points in ``cos(beta)``.
    """
    L = as_halfint(max_exact_ell)
    if float(L) > 2 * cap:
        raise PrecisionError(f"max_exact_ell={L} exceeds twice the stability cap")
    n_ag = L.twice + 1
    n_b = L.twice // 2 + 1
    a = 2 * np.pi * np.arange(n_ag) / n_ag
    g = 4 * np.pi * np.arange(n_ag) / n_ag
    u, wu = np.polynomial.legendre.leggauss(n_b)
    b = np.arccos(u)
    A, B, G = np.meshgrid(a, b, g, indexing="ij")
    W = np.broadcast_to((wu / 2.0)[None, :, None], A.shape) / (n_ag * n_ag)
    return HaarQuadrature(L, A.ravel(), B.ravel(), G.ravel(), W.ravel().copy(), cap=cap)


def quadrature_for_bandlimit(ell_max, cap: float = ELL_STABLE) -> HaarQuadrature:
    """Rule exact for Fourier analysis of fields band-limited to ``ell_max``."""
    return haar_quadrature(HalfInt(2 * as_halfint(ell_max).twice), cap=cap)


def _require_exact(quad: HaarQuadrature, ell: HalfInt, band_limit: HalfInt | None):
    bl = ell if band_limit is None else band_limit
    if ell.twice + bl.twice > quad.max_exact_ell.twice:
        raise QuadratureError(
            f"quadrature exact to ell={quad.max_exact_ell} cannot resolve "
            f"ell={ell} against band-limit {bl}"
        )


def fourier_su2(samples, ell, quad: HaarQuadrature, band_limit=None) -> np.ndarray:
    """``f^(ell) = int f(x) t^ell(x)^* dx`` from samples on the quadrature nodes.

    ``samples`` has shape (..., n_nodes); returns (..., d, d).  ``band_limit``
    defaults to ``ell`` itself.
    """
    ell = as_halfint(ell)
    bl = None if band_limit is None else as_halfint(band_limit)
    _require_exact(quad, ell, bl)
    f = np.asarray(samples)
    if f.shape[-1] != quad.n_nodes:
        raise ValueError(f"samples have {f.shape[-1]} nodes, quadrature has {quad.n_nodes}")
    T = quad.matrices(ell)
    wf = f * quad.weights
    # (t^*)_{ij} = conj(t_{ji})
    return np.einsum("...k,kji->...ij", wf, np.conj(T))


def synthesize_su2(coeffs: dict, quad_or_nodes) -> np.ndarray:
    """``f(x) = sum_ell (2 ell + 1) Tr(t^ell(x) f^(ell))`` at the given nodes.

    ``coeffs`` maps ``twice_ell`` to arrays of shape (..., d, d).
    """
    if isinstance(quad_or_nodes, HaarQuadrature):
        get = quad_or_nodes.matrices
    else:
        q = np.asarray(quad_or_nodes, dtype=float)
        get = lambda ell: wigner(ell, q)  # noqa: E731
    out = None
    for tw, blk in coeffs.items():
        T = get(HalfInt(tw))
        term = (tw + 1) * np.einsum("kij,...ji->...k", T, np.asarray(blk))
        out = term if out is None else out + term
    if out is None:
        raise ValueError("no coefficients to synthesize")
    return out
