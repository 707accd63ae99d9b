"""Run configuration for the command line (a JSON file plus flag overrides)."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from .repr_core import HalfInt, as_halfint
from .solver import CoefficientA
from .su2 import ELL_STABLE


def _default_a():
    return {"a0": "1", "cos": [1.0], "sin": []}


def _default_tol():
    return {"compat": 1e-9, "residual": 1e-6, "roundtrip": 1e-8, "prune": 1e-10}


@dataclass
class RunConfig:
    ell_max: str = "2"
    n_t: int | None = None
    tau_max: int = 4
    upsample: int = 4
    tolerances: dict = field(default_factory=_default_tol)
    a: dict = field(default_factory=_default_a)
    seed: int = 0
    test_orders: list = field(default_factory=lambda: [1, 2, 3, 4])
    beta_max: int = 2
    M_max: int = 4
    dps: int = 30
    m_max: int = 64

    def __post_init__(self):
        self.ell_max = str(Fraction(str(self.ell_max)))
        if self.n_t is None:
            self.n_t = 2 * int(self.tau_max) + 1
        tol = _default_tol()
        tol.update(self.tolerances or {})
        self.tolerances = tol
        self.validate()

    @property
    def ell(self) -> HalfInt:
        return as_halfint(Fraction(self.ell_max))

    @property
    def coefficient(self) -> CoefficientA:
        return CoefficientA.from_dict(self.a)

    def validate(self):
        ell = self.ell
        if int(self.tau_max) < 0:
            raise ValueError("tau_max must be >= 0")
        if int(self.n_t) < 2 * int(self.tau_max) + 1:
            raise ValueError(f"n_t={self.n_t} must be >= 2*tau_max+1={2 * self.tau_max + 1}")
        if 2 * float(ell) > 2 * ELL_STABLE:
            raise ValueError(f"ell_max={ell} needs a quadrature beyond the stable range")
        if int(self.upsample) < 1:
            raise ValueError("upsample must be >= 1")
        self.coefficient  # parse check

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        data = json.loads(Path(path).read_text()) if path else {}
        return cls.from_dict(data, **overrides)

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(data)
        a = dict(merged.get("a") or _default_a())
        for k in ("a0", "cos", "sin"):
            v = overrides.pop(f"a_{k}", None)
            if v is not None:
                a[k] = v
        merged["a"] = a
        tol = dict(merged.get("tolerances") or {})
        for k, v in list(overrides.items()):
            if k.startswith("tol_"):
                overrides.pop(k)
                if v is not None:
                    tol[k[4:]] = v
        merged["tolerances"] = tol
        for k, v in overrides.items():
            if k not in known:
                raise ValueError(f"unknown override {k}")
            if v is not None:
                merged[k] = v
        if "tau_max" in overrides and overrides["tau_max"] is not None and "n_t" not in data \
                and overrides.get("n_t") is None:
            merged["n_t"] = None
        return cls(**merged)

    def to_dict(self) -> dict:
        return asdict(self)
