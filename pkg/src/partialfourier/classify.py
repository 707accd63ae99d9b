"""Finite-truncation evidence for smoothness versus distributional growth.

A sequence ``c`` indexed by weights ``w >= 1`` decays rapidly when
``c w^N`` stays bounded for every N, and is a distribution's coefficient
sequence when ``c w^-N`` stays bounded for some N.  On finitely many modes
every sequence is bounded, so boundedness is judged by *where the supremum
sits*: with a reference weight ``w_ref`` splitting the data into a head
(``w <= w_ref``) and a tail, order N passes when

    max_tail c w^(N - slack) <= max_head c w^(N - slack).

By default ``w_ref`` is the geometric mean of the smallest weight and the
smallest weight on the outer faces of the truncation box.

``slack`` (default 1/2) lets bounded-but-increasing sequences such as
``(l / (1 + l))^K`` pass while exact polynomial growth of order one still
fails.  The inequality is evaluated exactly in log space, so the huge labels
of the Liouville construction are handled.  For a fixed ``w_ref`` the rule is
monotone: adding data above ``w_ref`` can only turn passes into failures.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _trig
from .repr_core import log_weight_sum, weight_su2
from .transform import FullCoeff, PartialCoeffField

RAPID = "rapid-decay"
POLY = "poly-bounded"
NEITHER = "neither-at-this-truncation"
DEFAULT_ORDERS = (1, 2, 3, 4)


@dataclass
class DecayReport:
    verdict: str
    fitted_exponent: float
    fitted_constant: float
    samples_used: int
    weight_kind: str
    poly_order: int | None = None
    constants: dict = field(default_factory=dict)
    failed_orders: list = field(default_factory=list)
    norm: str = "max"
    reference_weight: float = 1.0
    slack: float = 0.5
    truncation: dict = field(default_factory=dict)
    criterion: str = ""

    @property
    def rapid(self) -> bool:
        return self.verdict == RAPID

    def to_dict(self) -> dict:
        d = asdict(self)
        d["constants"] = {str(k): v for k, v in self.constants.items()}
        return d


def _passes(log_w, log_c, order: float, log_ref: float, slack: float) -> bool:
    h = log_c + (order - slack) * log_w
    head = log_w <= log_ref
    if not head.any() or head.all():
        return True
    return float(h[~head].max()) <= float(h[head].max())


def _log_constant(log_w, log_c, order: float) -> float:
    h = log_c + order * log_w
    return float(h.max())


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _fit(log_w, log_c):
    """LS line through the per-weight envelope of finite log-norms."""
    finite = np.isfinite(log_c)
    if finite.sum() < 2:
        return 0.0, _safe_exp(float(log_c[finite].max())) if finite.any() else 0.0
    lw, lc = log_w[finite], log_c[finite]
    keys = np.round(lw, 12)
    uw = np.unique(keys)
    env = np.array([lc[keys == k].max() for k in uw])
    if uw.size < 2:
        return 0.0, _safe_exp(float(env.max()))
    slope, icpt = np.polyfit(uw, env, 1)
    return float(slope), _safe_exp(float(icpt))


def classify_sequence(log_w, log_c, test_orders=DEFAULT_ORDERS, reference_weight=None,
                      slack: float = 0.5, poly_cap: int = 16, weight_kind: str = "product-sum",
                      norm: str = "max", truncation=None, criterion: str = "",
                      log_edge: float | None = None) -> DecayReport:
    """Verdict for a sequence given by ``log w`` and ``log ||c||`` arrays.

    The default reference weight is the geometric mean of the smallest weight
    and ``exp(log_edge)`` (default: the largest weight).
    """
    log_w = np.asarray(log_w, dtype=float).ravel()
    log_c = np.asarray(log_c, dtype=float).ravel()
    if log_w.size == 0:
        raise ValueError("cannot classify an empty sequence")
    if log_w.shape != log_c.shape:
        raise ValueError("weights and norms differ in length")
    if np.any(log_w < 0):
        raise ValueError("weights must be >= 1")
    if reference_weight is None:
        edge = float(log_w.max()) if log_edge is None else log_edge
        log_ref = 0.5 * (float(log_w.min()) + edge)
    else:
        log_ref = math.log(reference_weight)
    orders = sorted(set(test_orders))
    failed = [N for N in orders if not _passes(log_w, log_c, N, log_ref, slack)]
    constants = {N: _safe_exp(_log_constant(log_w, log_c, N)) for N in orders}
    poly = None
    if failed:
        verdict = NEITHER
        for N in range(poly_cap + 1):
            if _passes(log_w, log_c, -N, log_ref, slack):
                poly, verdict = N, POLY
                constants[-N] = _safe_exp(_log_constant(log_w, log_c, -N))
                break
    else:
        verdict = RAPID
    slope, const = _fit(log_w, log_c)
    return DecayReport(
        verdict=verdict,
        fitted_exponent=slope,
        fitted_constant=const,
        samples_used=int(log_w.size),
        weight_kind=weight_kind,
        poly_order=poly,
        constants=constants,
        failed_orders=failed,
        norm=norm,
        reference_weight=_safe_exp(log_ref),
        slack=slack,
        truncation=dict(truncation or {}),
        criterion=criterion,
    )


def _log_edge(tau_max: int, tw_max: int) -> float | None:
    """log of the smallest weight on the outer faces of the truncation box
    ``|tau| <= tau_max, ell <= ell_max``, ignoring a degenerate axis; so a
    long axis cannot hide lack of decay along the short one."""
    faces = []
    if tau_max > 0:
        faces.append(log_weight_sum(tau_max, 0))
    if tw_max > 0:
        faces.append(log_weight_sum(0, tw_max))
    return min(faces) if faces else None


def classify_full(fc: FullCoeff, test_orders=DEFAULT_ORDERS, norm: str = "max",
                  reference_weight=None, slack: float = 0.5, poly_cap: int = 16) -> DecayReport:
    """Classify double coefficients against the weight ``<tau> + <ell>``.

    ``norm`` is ``"max"`` (largest entry modulus, default) or ``"hs"``.
    """
    if len(fc) == 0:
        raise ValueError("cannot classify an empty coefficient set")
    rows = fc.log_norms(norm)
    log_w = np.array([log_weight_sum(tau, tw) for tau, tw, _ in rows])
    log_c = np.array([v for _, _, v in rows])
    tau_max = max(abs(t) for t, _, _ in rows)
    tw_max = max(tw for _, tw, _ in rows)
    trunc = {"tau_max": str(tau_max), "twice_ell_max": str(tw_max), "modes": len(rows)}
    return classify_sequence(
        log_w, log_c, test_orders, reference_weight, slack, poly_cap,
        weight_kind="product-sum", norm=norm, truncation=trunc, log_edge=_log_edge(tau_max, tw_max),
        criterion="||u(tau,ell)|| vs (<tau> + <ell>)^N over all retained (tau, ell)",
    )


def partial_derivative_norms(pc: PartialCoeffField, beta_max: int) -> dict:
    """``{beta: {twice_ell: sup_t max_mn |d^beta/dt^beta u(t, ell)_mn|}}``."""
    out = {}
    for beta in range(beta_max + 1):
        out[beta] = {
            tw: float(np.abs(_trig.derivative(b, beta, axis=0)).max()) if b.size else 0.0
            for tw, b in pc.items()
        }
    return out


def classify_partial_smooth(pc: PartialCoeffField, beta_max: int = 2, test_orders=DEFAULT_ORDERS,
                            reference_weight=None, slack: float = 0.5, poly_cap: int = 16) -> DecayReport:
    """Classify partial coefficients against ``<ell> = 1 + ell``.

    Each time derivative order ``beta <= beta_max`` (spectral, exact for
    band-limited data) is tested separately with the sup over grid times;
    order N passes only if it passes for every beta.  The poly order reported
    is the largest needed over beta.
    """
    norms = partial_derivative_norms(pc, beta_max)
    if not pc.blocks:
        raise ValueError("cannot classify an empty field")
    tws = sorted(pc.blocks)
    log_w = np.log([weight_su2(tw) for tw in tws])
    reports = []
    for beta in range(beta_max + 1):
        vals = np.array([norms[beta][tw] for tw in tws])
        with np.errstate(divide="ignore"):
            log_c = np.log(vals)
        reports.append(classify_sequence(log_w, log_c, test_orders, reference_weight, slack, poly_cap,
                                         weight_kind="single-factor"))
    failed = sorted({N for r in reports for N in r.failed_orders})
    if not failed:
        verdict, poly = RAPID, None
    elif any(r.verdict == NEITHER for r in reports):
        verdict, poly = NEITHER, None
    else:
        verdict, poly = POLY, max(r.poly_order for r in reports if r.poly_order is not None)
    constants = {}
    for r in reports:
        for N, C in r.constants.items():
            constants[N] = max(constants.get(N, 0.0), C)
    base = reports[0]
    return DecayReport(
        verdict=verdict,
        fitted_exponent=base.fitted_exponent,
        fitted_constant=base.fitted_constant,
        samples_used=base.samples_used * (beta_max + 1),
        weight_kind="single-factor",
        poly_order=poly,
        constants=constants,
        failed_orders=failed,
        norm="max",
        reference_weight=base.reference_weight,
        slack=slack,
        truncation={"n_t": pc.grid.n_t, "twice_ell_max": max(tws), "beta_max": beta_max},
        criterion="sup_t |d^beta u(t,ell)| vs (1 + ell)^-N for every beta <= beta_max",
    )


@dataclass(frozen=True)
class TestBattery:
    """Trigonometric monomials ``exp(i j t)``, ``|j| <= degree``, with
    ``p_K(exp(ijt)) = sum_{beta <= K} |j|^beta``."""

    degree: int = 8

    __test__ = False  # not a pytest class

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.degree, self.degree + 1)

    def evaluate(self, t) -> np.ndarray:
        """Battery samples, shape ``(n_phi, len(t))``."""
        return np.exp(1j * np.outer(self.frequencies, np.asarray(t, dtype=float)))

    def seminorm(self, K: int) -> np.ndarray:
        j = np.abs(self.frequencies).astype(float)
        return sum(j**beta if beta else np.ones_like(j) for beta in range(K + 1))


def pair_with_battery(pc: PartialCoeffField, battery: TestBattery) -> dict:
    """``{twice_ell: max_mn |<u(., ell)_mn, phi_j>|}`` for the battery, using
    ``<v, phi> = int v phi dt`` on the grid (exact for band-limited data)."""
    t = pc.grid.points
    phi = battery.evaluate(t)  # (n_phi, n_t)
    h = 2 * np.pi / pc.grid.n_t
    out = {}
    for tw, b in pc.items():
        vals = h * np.tensordot(phi, b, axes=([1], [0]))  # (n_phi, d, d)
        out[tw] = np.abs(vals).reshape(vals.shape[0], -1).max(axis=1)
    return out


def seminorm_bound_check(functionals: dict, K: int, battery: TestBattery | None = None,
                         reference_weight=None, slack: float = 0.5) -> bool:
    """True iff one constant ``C`` supports ``|<u(., ell), phi>| <= C p_K(phi) <ell>^K``
    across the battery and the retained ``ell``.

    ``functionals`` maps ``twice_ell`` to the absolute values of the
    functional on each battery element (a scalar is broadcast).  Boundedness
    is judged with the head/tail rule in ``<ell>``.
    """
    battery = battery or TestBattery()
    pK = battery.seminorm(K)
    tws = sorted(functionals)
    if not tws:
        raise ValueError("no functionals given")
    vals = []
    for tw in tws:
        v = np.broadcast_to(np.abs(np.asarray(functionals[tw], dtype=float)), pK.shape)
        vals.append(float((v / pK).max()))
    log_w = np.log([weight_su2(tw) for tw in tws])
    with np.errstate(divide="ignore"):
        log_c = np.log(np.array(vals))
    if reference_weight is None:
        log_ref = 0.5 * (float(log_w.min()) + float(log_w.max()))
    else:
        log_ref = math.log(reference_weight)
    return _passes(log_w, log_c, -K, log_ref, slack)


def decay_table(fc: FullCoeff, norm: str = "hs") -> list[tuple[int, int, float, float]]:
    """``(tau, twice_ell, weight, norm)`` rows for plotting (dense data)."""
    return [(tau, tw, _safe_exp(log_weight_sum(tau, tw)), _safe_exp(lv))
            for tau, tw, lv in fc.log_norms(norm)]
