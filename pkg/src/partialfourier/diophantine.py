"""Exact arithmetic on the mean a0: resonance tests, small-divisor floors,
Liouville witnesses and the non-solvable right-hand side.

Certificates use :class:`fractions.Fraction` only.  High-precision values
that are reported (not certified) use mpmath.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd
import mpmath

from .repr_core import as_halfint
from .transform import FullCoeff, SparseBlock

M_CAP = 6


class CertificationError(ArithmeticError):
    """An enclosure is too loose to certify a witness."""


@dataclass(frozen=True)
class LiouvilleSeries:
    """``a0 = sum_{k>=1} base^(-k!)``.

    The tail after K terms satisfies
    ``base^(-(K+1)!) <= a0 - p_K/q_K <= 2 base^(-(K+1)!)``.
    """

    base: int = 10

    def q(self, K: int) -> int:
        return self.base ** factorial(K)

    def truncation(self, K: int) -> Fraction:
        return sum((Fraction(1, self.base ** factorial(k)) for k in range(1, K + 1)), Fraction(0))

    def tail_enclosure(self, K: int) -> tuple[Fraction, Fraction]:
        first = Fraction(1, self.base ** factorial(K + 1))
        return first, 2 * first

    def value(self, dps: int = 50):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            k = 1
            while factorial(k) <= dps + 10:
                total += mpmath.mpf(self.base) ** (-factorial(k))
                k += 1
            return +total

    def tail_value(self, K: int, dps: int = 30):
        """``a0 - p_K/q_K`` to ``dps`` significant digits."""
        with mpmath.workdps(dps):
            lead = factorial(K + 1)
            total = mpmath.mpf(0)
            k = K + 1
            while factorial(k) - lead <= dps + 10:
                total += mpmath.mpf(self.base) ** (-factorial(k))
                k += 1
            return +total


@dataclass(frozen=True)
class A0Class:
    """Arithmetic nature of ``a0``.

    kind is ``"rational"`` (``p/q`` lowest terms), ``"non-liouville"`` (tagged
    irrational with a float value and optional irrationality-measure bound) or
    ``"liouville"`` (a :class:`LiouvilleSeries`).
    """

    kind: str
    p: int = 0
    q: int = 1
    approx: float | None = None
    measure: float | None = None
    series: LiouvilleSeries | None = None
    tag: str = ""

    def __post_init__(self):
        if self.kind == "rational":
            if self.q < 1:
                raise ValueError("denominator must be >= 1")
            g = gcd(self.p, self.q)
            if g != 1:
                raise ValueError(f"{self.p}/{self.q} is not in lowest terms")
        elif self.kind == "liouville":
            if self.series is None:
                object.__setattr__(self, "series", LiouvilleSeries())
        elif self.kind == "non-liouville":
            if self.approx is None:
                raise ValueError("tagged irrational needs a numerical value")
        else:
            raise ValueError(f"unknown a0 kind {self.kind!r}")

    @classmethod
    def rational(cls, value) -> "A0Class":
        fr = Fraction(value)
        return cls("rational", fr.numerator, fr.denominator)

    @classmethod
    def liouville(cls, base: int = 10) -> "A0Class":
        return cls("liouville", series=LiouvilleSeries(base), tag=f"sum {base}^-k!")

    @classmethod
    def non_liouville(cls, value: float, tag: str = "", measure: float | None = None) -> "A0Class":
        return cls("non-liouville", approx=float(value), measure=measure, tag=tag)

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("a0 is irrational")
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        if self.kind == "rational":
            return self.p / self.q
        if self.kind == "liouville":
            return float(self.series.value(30))
        return float(self.approx)

    def describe(self) -> str:
        if self.kind == "rational":
            return f"rational {self.p}/{self.q}"
        return f"{self.kind} {self.tag}".strip()


def is_resonant(a0: A0Class, twice_m: int) -> bool:
    """Exact test of ``m * a0 in Z`` for ``m = twice_m / 2``."""
    if twice_m == 0:
        return True
    if not a0.is_rational:
        return False
    return (twice_m * a0.p) % (2 * a0.q) == 0


def divisor_value(a0: A0Class, twice_m: int) -> float:
    """``|1 - exp(-2 pi i m a0)|`` computed from the exact residue of m*a0 mod 1."""
    if a0.is_rational:
        r = Fraction(twice_m * a0.p, 2 * a0.q) % 1
        return 2.0 * abs(math.sin(math.pi * float(r)))
    with mpmath.workdps(60):
        value = a0.series.value(60) if a0.kind == "liouville" else mpmath.mpf(a0.approx)
        return float(2 * abs(mpmath.sin(mpmath.pi * twice_m * value / 2)))


def divisor_floor(a0: A0Class, m_range) -> tuple[float, list[tuple[int, Fraction, float]]]:
    """Minimum of ``|1 - exp(-2 pi i m a0)|`` over nonresonant m in ``m_range``.

    ``m_range`` is an iterable of labels m (integers or half-integers).
    Returns ``(C, table)`` where each table row is ``(twice_m, residue of m*a0
    mod 1, value)``.  The value depends only on the residue ``k/(2q)``, so
    ``C`` is ``2 sin(pi k / (2q))`` minimized over the residues that occur.
    """
    if not a0.is_rational:
        raise ValueError("divisor_floor needs a rational a0; use divisor_scan for irrationals")
    table = []
    for m in m_range:
        tm = as_halfint(abs(m)).twice * (1 if m >= 0 else -1)
        if is_resonant(a0, tm):
            continue
        r = Fraction(tm * a0.p, 2 * a0.q) % 1
        table.append((int(tm), r, 2.0 * abs(math.sin(math.pi * float(r)))))
    if not table:
        return math.inf, table
    # exact minimizer over residues, then one float evaluation
    best = min(table, key=lambda row: min(row[1], 1 - row[1]))
    return best[2], table


def divisor_scan(a0: A0Class, twice_m_max: int, M: float = 0.0):
    """Empirical check of ``|1 - exp(-2pi i m a0)| >= C |m|^(-M)`` over a
    finite range: returns the best constant ``C`` the data supports."""
    best = math.inf
    for tm in range(1, twice_m_max + 1):
        if is_resonant(a0, tm):
            continue
        v = divisor_value(a0, tm)
        best = min(best, v * (tm / 2) ** M)
    return best


@dataclass(frozen=True)
class LiouvilleWitness:
    """``0 < |tau + a0 ell| <= (|tau| + |ell|)^(-M)``, certified exactly.

    ``gap_lo``/``gap_hi`` bound ``|tau + a0 ell|`` from below/above in exact
    rationals; ``truncation`` is the number of series terms used.
    """

    M: int
    tau: int
    ell: int
    truncation: int
    gap_lo: Fraction
    gap_hi: Fraction

    @property
    def bound(self) -> Fraction:
        return Fraction(1, (abs(self.tau) + abs(self.ell)) ** self.M)

    def certified(self) -> bool:
        return self.gap_lo > 0 and self.gap_hi * (abs(self.tau) + abs(self.ell)) ** self.M <= 1


@dataclass
class WitnessSearch:
    witnesses: list = field(default_factory=list)
    rejected: list = field(default_factory=list)  # (M, K, reason)


def _candidate(series: LiouvilleSeries, M: int, K: int) -> LiouvilleWitness:
    q = series.q(K)
    p = series.truncation(K) * q
    assert p.denominator == 1
    lo, hi = series.tail_enclosure(K)
    # tau + a0 ell with ell = q, tau = -p  ==>  q * (a0 - p/q)
    return LiouvilleWitness(M, -int(p), q, K, q * lo, q * hi)


def witnesses(a0: A0Class, M_max: int = 4, cap: int = M_CAP) -> WitnessSearch:
    """Certified witnesses for ``M = 1..M_max``.

    Candidates come from series truncations ``ell = q_K``, ``tau = -p_K``.
    For each M the truncation index starts just after the previous witness's
    and increases until the exact certificate passes; every failed candidate
    is recorded in ``rejected``.
    """
    if a0.kind != "liouville":
        return WitnessSearch()
    if M_max > cap:
        raise CertificationError(f"M_max={M_max} exceeds cap {cap} (bignum growth)")
    series = a0.series
    out = WitnessSearch()
    K = 1
    for M in range(1, M_max + 1):
        while True:
            if K > cap + 2:
                raise CertificationError(f"no certified witness for M={M} up to K={K - 1}")
            w = _candidate(series, M, K)
            if w.certified():
                out.witnesses.append(w)
                K += 1
                break
            out.rejected.append((M, K, "gap above (|tau|+|ell|)^-M"))
            K += 1
    return out


def witness_gap_value(a0: A0Class, w: LiouvilleWitness, dps: int = 30):
    """High-precision ``tau + a0 ell`` for a witness (positive)."""
    with mpmath.workdps(dps):
        return w.ell * a0.series.tail_value(w.truncation, dps)


def nonsolvable_rhs(a0: A0Class, wits) -> FullCoeff:
    """Double coefficients equal to ``tau_M + a0 ell_M`` at row ``m = ell_M``,
    column ``n = ell_M`` of block ``(tau_M, ell_M)``, zero elsewhere."""
    entries = {}
    for w in wits:
        tw = 2 * w.ell
        val = witness_gap_value(a0, w)
        entries[(w.tau, tw)] = SparseBlock(tw, {(tw, tw): val})
    return FullCoeff(entries)


def forced_solution(a0: A0Class, rhs: FullCoeff, dps: int = 30) -> FullCoeff:
    """The only candidate solution of the constant-coefficient mode equation
    ``i (tau + a0 m) u^^ = f^^`` at the support of a sparse ``rhs``."""
    entries = {}
    with mpmath.workdps(dps):
        for (tau, tw), blk in rhs.items():
            if not isinstance(blk, SparseBlock):
                raise TypeError("expected sparse witness blocks")
            sol = {}
            for (tm, tn), v in blk.entries.items():
                if tm % 2:
                    raise ValueError("witness rows use integer m")
                # tau + a0 m evaluated through the same tail expansion
                m = tm // 2
                divisor = _divisor_hp(a0, tau, m, dps)
                sol[(tm, tn)] = mpmath.mpc(v) / (1j * divisor)
            entries[(tau, tw)] = SparseBlock(tw, sol)
    return FullCoeff(entries)


def _divisor_hp(a0: A0Class, tau: int, m: int, dps: int):
    """``tau + a0 m`` without catastrophic cancellation when ``m = q_K`` and
    ``tau = -p_K`` for some truncation K."""
    series = a0.series
    K = 1
    while series.q(K) < m:
        K += 1
    if series.q(K) == m and -tau == series.truncation(K) * m:
        return m * series.tail_value(K, dps)
    with mpmath.workdps(dps + len(str(m)) + 10):
        return tau + series.value(dps + 2 * len(str(m)) + 20) * m


@dataclass
class DemoRow:
    M: int
    tau: int
    ell: int
    rhs_mag: object
    bound: Fraction
    sol_mag: object
    identity_residual: object


def demo_nonsolvable(a0: A0Class, M_max: int = 4, dps: int = 30) -> tuple[list[DemoRow], WitnessSearch]:
    """Pair, for each certified witness, the right-hand side size with the
    forced solution size (which is exactly 1)."""
    search = witnesses(a0, M_max)
    if not search.witnesses:
        return [], search
    rhs = nonsolvable_rhs(a0, search.witnesses)
    sol = forced_solution(a0, rhs, dps)
    rows = []
    with mpmath.workdps(dps):
        for w in search.witnesses:
            tw = 2 * w.ell
            f = rhs.entries[(w.tau, tw)].entry(tw, tw)
            u = sol.entries[(w.tau, tw)].entry(tw, tw)
            div = _divisor_hp(a0, w.tau, w.ell, dps)
            resid = abs(1j * div * u - f) / abs(f)
            rows.append(DemoRow(w.M, w.tau, w.ell, abs(f), w.bound, abs(u), resid))
    return rows, search


def witness_table(search: WitnessSearch) -> dict:
    """JSON-ready witness table; big integers as decimal strings."""
    return {
        "witnesses": [
            {
                "M": w.M,
                "tau": str(w.tau),
                "ell": str(w.ell),
                "truncation": w.truncation,
                "gap_lo": f"{w.gap_lo.numerator}/{w.gap_lo.denominator}",
                "gap_hi": f"{w.gap_hi.numerator}/{w.gap_hi.denominator}",
                "certified": w.certified(),
            }
            for w in search.witnesses
        ],
        "rejected": [{"M": M, "truncation": K, "reason": r} for M, K, r in search.rejected],
    }


def parse_a0(spec) -> A0Class:
    """``"1/3"``, ``2``, ``Fraction``, ``"liouville"``, ``{"kind": ...}`` or an A0Class."""
    if isinstance(spec, A0Class):
        return spec
    if isinstance(spec, dict):
        kind = spec.get("kind", "rational")
        if kind == "rational":
            return A0Class.rational(Fraction(str(spec["value"])))
        if kind == "liouville":
            return A0Class.liouville(int(spec.get("base", 10)))
        if kind == "non-liouville":
            return A0Class.non_liouville(float(spec["value"]), spec.get("tag", ""), spec.get("measure"))
        raise ValueError(f"unknown a0 kind {kind!r}")
    if isinstance(spec, str) and spec.strip().lower() == "liouville":
        return A0Class.liouville()
    if isinstance(spec, float):
        # the float is itself an exact binary rational
        return A0Class.rational(Fraction(spec))
    return A0Class.rational(Fraction(spec))

