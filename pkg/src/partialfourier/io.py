"""File formats.

Coefficient files are JSON documents::

    {"format": "partialfourier/coefficients", "version": 1, "kind": "full",
     "tau_max": 8, "twice_ell_max": 8,
     "entries": [{"tau": "0", "two_ell": "2", "re": [[...]], "im": [[...]]}, ...]}

Sparse blocks (huge labels) replace ``re``/``im`` by
``"sparse": [[two_m, two_n, re, im], ...]``; every integer label is written as
a decimal string and every value with ``repr`` so nothing is rounded.
Partial fields (``kind: "partial"``) carry ``n_t`` and one entry per
``two_ell`` with ``(n_t, d, d)`` arrays.  Reports are JSON with sorted keys;
tables are CSV.
"""
from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import mpmath
import numpy as np

from .repr_core import HalfInt, as_halfint
from .transform import FullCoeff, PartialCoeffField, SparseBlock, TimeGrid

FORMAT = "partialfourier/coefficients"


class FileFormatError(ValueError):
    """Malformed input file."""


def _num(v):
    if isinstance(v, (mpmath.mpf, mpmath.mpc)):
        v = mpmath.mpc(v)
        return [mpmath.nstr(v.real, 30), mpmath.nstr(v.imag, 30)]
    v = complex(v)
    return [repr(v.real), repr(v.imag)]


def full_to_dict(fc: FullCoeff) -> dict:
    entries = []
    for (tau, tw), blk in fc.items():
        rec = {"tau": str(tau), "two_ell": str(tw)}
        if isinstance(blk, SparseBlock):
            rec["sparse"] = [[str(tm), str(tn), *_num(v)] for (tm, tn), v in sorted(blk.entries.items())]
        else:
            rec["re"] = blk.real.tolist()
            rec["im"] = blk.imag.tolist()
        entries.append(rec)
    return {
        "format": FORMAT,
        "version": 1,
        "kind": "full",
        "tau_max": None if fc.tau_max is None else int(fc.tau_max),
        "twice_ell_max": None if fc.ell_max is None else as_halfint(fc.ell_max).twice,
        "entries": entries,
    }


def partial_to_dict(pc: PartialCoeffField) -> dict:
    return {
        "format": FORMAT,
        "version": 1,
        "kind": "partial",
        "n_t": pc.grid.n_t,
        "twice_ell_max": pc.ell_max.twice,
        "entries": [{"two_ell": str(tw), "re": b.real.tolist(), "im": b.imag.tolist()} for tw, b in pc.items()],
    }


def _parse_value(re, im):
    if isinstance(re, str) or isinstance(im, str):
        r, i = mpmath.mpf(re), mpmath.mpf(im)
        if abs(r) < 1e-300 and r != 0 or abs(i) < 1e-300 and i != 0:
            return mpmath.mpc(r, i)
        return complex(float(r), float(i))
    return complex(re, im)


def _array(rec, shape):
    try:
        a = np.asarray(rec["re"], dtype=float) + 1j * np.asarray(rec["im"], dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise FileFormatError(f"bad re/im arrays: {exc}") from exc
    if a.shape != shape:
        raise FileFormatError(f"array shape {a.shape} != expected {shape}")
    return a


def coeffs_from_dict(d: dict):
    """Inverse of :func:`full_to_dict` / :func:`partial_to_dict`."""
    if not isinstance(d, dict) or d.get("format") != FORMAT:
        raise FileFormatError("not a coefficient file")
    kind = d.get("kind")
    entries = d.get("entries")
    if not isinstance(entries, list):
        raise FileFormatError("missing entries list")
    try:
        if kind == "full":
            out = {}
            for rec in entries:
                tau, tw = int(rec["tau"]), int(rec["two_ell"])
                if tw < 0:
                    raise FileFormatError("negative two_ell")
                if "sparse" in rec:
                    out[(tau, tw)] = SparseBlock(
                        tw, {(int(tm), int(tn)): _parse_value(re, im) for tm, tn, re, im in rec["sparse"]}
                    )
                else:
                    out[(tau, tw)] = _array(rec, (tw + 1, tw + 1))
            tm_ = d.get("tau_max")
            em = d.get("twice_ell_max")
            return FullCoeff(out, None if tm_ is None else int(tm_), None if em is None else HalfInt(int(em)))
        if kind == "partial":
            n_t = int(d["n_t"])
            blocks = {}
            for rec in entries:
                tw = int(rec["two_ell"])
                blocks[tw] = _array(rec, (n_t, tw + 1, tw + 1))
            em = d.get("twice_ell_max")
            ell = None if em is None else HalfInt(int(em))
            return PartialCoeffField(TimeGrid(n_t), blocks, ell)
    except FileFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"malformed coefficient entry: {exc}") from exc
    raise FileFormatError(f"unknown coefficient kind {kind!r}")


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=1, default=_default) + "\n"


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.complexfloating, complex)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(o, 20)
    return str(o)


def save_coeffs(obj, path):
    d = full_to_dict(obj) if isinstance(obj, FullCoeff) else partial_to_dict(obj)
    Path(path).write_text(dumps(d))


def load_coeffs(path):
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc
    return coeffs_from_dict(d)


def save_json(obj, path):
    Path(path).write_text(dumps(obj))


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def save_csv(header, rows, path):
    Path(path).write_text(csv_text(header, rows))
