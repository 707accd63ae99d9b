"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import numpy as np

from .solver import CoefficientA
from .transform import FullCoeff, PartialCoeffField, TimeGrid


def check_grid(n_t, tau_max=None) -> TimeGrid:
    if isinstance(n_t, TimeGrid):
        grid = n_t
    else:
        if int(n_t) != n_t or int(n_t) < 1:
            raise ValueError(f"n_t must be a positive integer, got {n_t!r}")
        grid = TimeGrid(int(n_t))
    if tau_max is not None:
        grid.check_resolves(int(tau_max))
    return grid


def check_coefficient_a(a) -> CoefficientA:
    if isinstance(a, CoefficientA):
        return a
    if isinstance(a, dict):
        return CoefficientA.from_dict(a)
    if a is None:
        raise ValueError("a coefficient a(t) is required")
    return CoefficientA(a)


def check_partial(u) -> PartialCoeffField:
    if not isinstance(u, PartialCoeffField):
        raise TypeError(f"expected PartialCoeffField, got {type(u).__name__}")
    for tw, b in u.items():
        if not np.all(np.isfinite(b)):
            raise ValueError(f"non-finite coefficients in block 2ell={tw}")
    return u


def check_full(fc) -> FullCoeff:
    if not isinstance(fc, FullCoeff):
        raise TypeError(f"expected FullCoeff, got {type(fc).__name__}")
    if len(fc) == 0:
        raise ValueError("empty coefficient set")
    return fc


def check_field_list(X, check=check_partial) -> list:
    if isinstance(X, (PartialCoeffField, FullCoeff)):
        X = [X]
    X = list(X)
    if not X:
        raise ValueError("empty input")
    return [check(x) for x in X]


def check_orders(orders) -> tuple:
    out = tuple(sorted({int(N) for N in orders}))
    if not out or out[0] < 0:
        raise ValueError("test orders must be a nonempty set of integers >= 0")
    return out


def check_samples_2d(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains NaN or infinity")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, expected {n_features}")
    return X
