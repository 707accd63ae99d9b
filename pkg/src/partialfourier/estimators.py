"""scikit-learn style wrappers around the functional core.

The transformer classes follow the ``fit``/``transform``/``inverse_transform``
protocol and support ``get_params``/``set_params`` and ``clone``.  Inputs
that are not flat feature matrices (coefficient fields) are accepted as
lists of objects.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .classify import DEFAULT_ORDERS, classify_full, classify_partial_smooth
from .conjugation import psi
from .repr_core import as_halfint
from .solver import SolverConfig, apply_L, solve
from .su2 import quadrature_for_bandlimit
from .transform import (FullCoeff, PartialCoeffField, analyze_full, analyze_partial,
                        synthesize)
from .validation import (check_coefficient_a, check_field_list, check_grid, check_orders,
                         check_samples_2d)


class PartialFourierTransformer(TransformerMixin, BaseEstimator):
    """Double Fourier transform of sampled fields on ``T^1 x SU(2)``.

    Each row of ``X`` holds one field sampled on ``nodes_`` (the product of
    the time grid and the Haar quadrature), flattened time-major.
    ``transform`` returns the complex double coefficients in the order of
    ``keys_``, each block flattened row-major.
    """

    def __init__(self, ell_max=2, tau_max=4, n_t=None):
        self.ell_max = ell_max
        self.tau_max = tau_max
        self.n_t = n_t

    def fit(self, X=None, y=None):
        ell = as_halfint(self.ell_max)
        n_t = 2 * int(self.tau_max) + 1 if self.n_t is None else self.n_t
        self.grid_ = check_grid(n_t, self.tau_max)
        self.quadrature_ = quadrature_for_bandlimit(ell)
        self.ell_max_ = ell
        self.n_features_in_ = self.grid_.n_t * self.quadrature_.n_nodes
        self.keys_ = [(tau, tw) for tau in range(-int(self.tau_max), int(self.tau_max) + 1)
                      for tw in range(ell.twice + 1)]
        self.n_coefficients_ = sum((tw + 1) ** 2 for _, tw in self.keys_)
        if X is not None:
            check_samples_2d(X, self.n_features_in_)
        return self

    @property
    def nodes_(self):
        """``(times, quaternions)`` at which fields must be sampled."""
        check_is_fitted(self, "grid_")
        return self.grid_.points, self.quadrature_.nodes

    def to_coeffs(self, X) -> list[FullCoeff]:
        check_is_fitted(self, "grid_")
        X = check_samples_2d(X, self.n_features_in_)
        out = []
        for row in X:
            f = row.reshape(self.grid_.n_t, self.quadrature_.n_nodes)
            pc = analyze_partial(f, self.grid_, self.quadrature_, self.ell_max_)
            out.append(analyze_full(pc, int(self.tau_max)))
        return out

    def transform(self, X):
        return np.array([np.concatenate([fc.entries[k].ravel() for k in self.keys_])
                         for fc in self.to_coeffs(X)])

    def coeffs_from_vector(self, v) -> FullCoeff:
        check_is_fitted(self, "grid_")
        v = np.asarray(v)
        if v.shape != (self.n_coefficients_,):
            raise ValueError(f"expected {self.n_coefficients_} coefficients, got shape {v.shape}")
        entries, pos = {}, 0
        for tau, tw in self.keys_:
            d = tw + 1
            entries[(tau, tw)] = v[pos:pos + d * d].reshape(d, d)
            pos += d * d
        return FullCoeff(entries, int(self.tau_max), self.ell_max_)

    def inverse_transform(self, C):
        check_is_fitted(self, "grid_")
        C = np.atleast_2d(np.asarray(C))
        return np.array([
            synthesize(self.coeffs_from_vector(c), self.quadrature_, self.grid_).ravel() for c in C
        ])


class DecayClassifier(BaseEstimator):
    """Predicts ``rapid-decay`` / ``poly-bounded`` / ``neither-at-this-truncation``
    for coefficient sets (FullCoeff or PartialCoeffField)."""

    def __init__(self, test_orders=DEFAULT_ORDERS, norm="max", slack=0.5,
                 reference_weight=None, beta_max=2):
        self.test_orders = test_orders
        self.norm = norm
        self.slack = slack
        self.reference_weight = reference_weight
        self.beta_max = beta_max

    def fit(self, X=None, y=None):
        self.test_orders_ = check_orders(self.test_orders)
        if self.norm not in ("max", "hs"):
            raise ValueError("norm must be 'max' or 'hs'")
        self.classes_ = np.array(["neither-at-this-truncation", "poly-bounded", "rapid-decay"])
        return self

    def report(self, x):
        check_is_fitted(self, "test_orders_")
        if isinstance(x, FullCoeff):
            return classify_full(x, self.test_orders_, self.norm, self.reference_weight, self.slack)
        if isinstance(x, PartialCoeffField):
            return classify_partial_smooth(x, self.beta_max, self.test_orders_,
                                           self.reference_weight, self.slack)
        raise TypeError(f"cannot classify {type(x).__name__}")

    def predict(self, X):
        X = check_field_list(X, check=lambda x: x)
        return np.array([self.report(x).verdict for x in X])


class GaugeTransformer(TransformerMixin, BaseEstimator):
    """Applies ``Psi_a`` to partial coefficient fields; the inverse applies ``Psi_{-a}``."""

    def __init__(self, a=None):
        self.a = a

    def fit(self, X=None, y=None):
        self.a_ = check_coefficient_a(self.a)
        return self

    def transform(self, X):
        check_is_fitted(self, "a_")
        return [psi(self.a_, u, 1) for u in check_field_list(X)]

    def inverse_transform(self, X):
        check_is_fitted(self, "a_")
        return [psi(self.a_, u, -1) for u in check_field_list(X)]


class EvolutionSolver(TransformerMixin, BaseEstimator):
    """``transform`` maps right-hand sides ``f`` to solutions of ``L u = f``;
    ``inverse_transform`` applies ``L``.  Outcomes of the last call are kept
    in ``outcomes_``."""

    def __init__(self, a=None, upsample=4, tol_compat=1e-9, on_incompatible="record"):
        self.a = a
        self.upsample = upsample
        self.tol_compat = tol_compat
        self.on_incompatible = on_incompatible

    def fit(self, X=None, y=None):
        self.a_ = check_coefficient_a(self.a)
        if self.on_incompatible not in ("record", "raise"):
            raise ValueError("on_incompatible must be 'record' or 'raise'")
        if int(self.upsample) < 1:
            raise ValueError("upsample must be >= 1")
        self.config_ = SolverConfig(upsample=int(self.upsample), tol_compat=float(self.tol_compat))
        return self

    def transform(self, X):
        check_is_fitted(self, "a_")
        self.outcomes_ = [solve(self.a_, f, self.config_, self.on_incompatible) for f in check_field_list(X)]
        return [o.solution for o in self.outcomes_]

    def inverse_transform(self, X):
        check_is_fitted(self, "a_")
        return [apply_L(self.a_, u) for u in check_field_list(X)]
