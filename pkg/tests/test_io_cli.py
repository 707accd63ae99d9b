import csv
import json
import math

import mpmath
import numpy as np
import pytest

from partialfourier import io
from partialfourier.cli import main
from partialfourier.config import RunConfig
from partialfourier.repr_core import HalfInt
from partialfourier.transform import FullCoeff, SparseBlock, TimeGrid, random_full_coeff


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    return code


def test_full_roundtrip_bit_exact(tmp_path, rng):
    fc = random_full_coeff(rng, HalfInt(3), 2)
    io.save_coeffs(fc, tmp_path / "c.json")
    back = io.load_coeffs(tmp_path / "c.json")
    assert back.keys() == fc.keys() and back.tau_max == 2 and back.ell_max == HalfInt(3)
    for k in fc.keys():
        assert np.array_equal(back.entries[k], fc.entries[k])


def test_partial_roundtrip(tmp_path, rng):
    pc = random_full_coeff(rng, HalfInt(2), 2).to_partial(TimeGrid(7))
    io.save_coeffs(pc, tmp_path / "p.json")
    back = io.load_coeffs(tmp_path / "p.json")
    assert back.grid == pc.grid and (back - pc).sup_norm() == 0


def test_sparse_roundtrip_keeps_tiny_values(tmp_path):
    tiny = mpmath.mpf(10) ** -400
    fc = FullCoeff({(-11, 10**6): SparseBlock(10**6, {(10**6, 10**6): tiny, (0, 2): 0.5 + 1j})})
    io.save_coeffs(fc, tmp_path / "s.json")
    text = (tmp_path / "s.json").read_text()
    assert '"1000000"' in text
    blk = io.load_coeffs(tmp_path / "s.json").entries[(-11, 10**6)]
    v = mpmath.mpc(blk.entry(10**6, 10**6))
    assert mpmath.almosteq(v.real, tiny, rel_eps=mpmath.mpf(10) ** -25)
    assert blk.entry(0, 2) == 0.5 + 1j


@pytest.mark.parametrize("doc", [
    [],
    {"format": "other"},
    {"format": io.FORMAT, "kind": "full"},
    {"format": io.FORMAT, "kind": "full", "entries": [{"tau": "0", "two_ell": "1", "re": [[1]], "im": [[0]]}]},
    {"format": io.FORMAT, "kind": "full", "entries": [{"tau": "0", "two_ell": "-1", "re": [], "im": []}]},
    {"format": io.FORMAT, "kind": "full", "entries": [{"two_ell": "0", "re": [[1]], "im": [[0]]}]},
    {"format": io.FORMAT, "kind": "partial", "n_t": 3, "entries": [{"two_ell": "0", "re": [[[1]]], "im": [[[0]]]}]},
    {"format": io.FORMAT, "kind": "mystery", "entries": []},
])
def test_malformed_documents(doc):
    with pytest.raises(io.FileFormatError):
        io.coeffs_from_dict(doc)


def test_csv_text_exact_floats():
    text = io.csv_text(["a", "b"], [(1, 0.1), (2, 1 / 3)])
    rows = list(csv.reader(text.splitlines()))
    assert rows[0] == ["a", "b"] and float(rows[2][1]) == 1 / 3


# configuration

def test_config_defaults_and_overrides(tmp_path):
    cfg = RunConfig()
    assert cfg.n_t == 9 and cfg.ell == HalfInt(4)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"ell_max": "3/2", "tau_max": 2, "tolerances": {"compat": 1e-6}}))
    cfg = RunConfig.from_file(p, tau_max=5, a_a0="1/3", tol_residual=1e-3)
    assert cfg.n_t == 11 and cfg.ell == HalfInt(3)
    assert cfg.tolerances["compat"] == 1e-6 and cfg.tolerances["residual"] == 1e-3
    assert cfg.coefficient.a0.fraction.denominator == 3


@pytest.mark.parametrize("bad", [
    {"n_t": 3, "tau_max": 4}, {"ell_max": "1/3"}, {"ell_max": "500"}, {"upsample": 0},
    {"bogus": 1}, {"a": {"a0": "x"}},
])
def test_config_rejects(bad):
    with pytest.raises((ValueError, TypeError)):
        RunConfig.from_dict(bad)


# command line

def test_transform_roundtrip_and_csv(tmp_path):
    rep, out, tab = tmp_path / "r.json", tmp_path / "c.json", tmp_path / "t.csv"
    assert run(["transform", "--ell-max", "3/2", "--tau-max", "3", "--seed", "5",
                "--report", rep, "--out", out, "--csv", tab]) == 0
    r = json.loads(rep.read_text())
    assert r["ok"] and r["synthesize_analyze_error"] <= 1e-8 and r["analyze_synthesize_error"] <= 1e-8
    rows = list(csv.reader(tab.read_text().splitlines()))
    assert len(rows) - 1 == r["retained_entries"] == len(io.load_coeffs(out)) == 7 * 4


def test_transform_constant_field_single_entry(tmp_path):
    spec = tmp_path / "in.json"
    spec.write_text(json.dumps({"kind": "constant", "value": 2.5}))
    out, rep, tab = tmp_path / "c.json", tmp_path / "r.json", tmp_path / "t.csv"
    assert run(["transform", "--input", spec, "--out", out, "--report", rep, "--csv", tab]) == 0
    fc = io.load_coeffs(out)
    assert fc.keys() == [(0, 0)] and fc.entries[(0, 0)][0, 0] == pytest.approx(2.5, abs=1e-12)
    assert len(tab.read_text().splitlines()) == 2


def test_transform_from_samples_and_coefficients(tmp_path, rng):
    from partialfourier.su2 import quadrature_for_bandlimit
    from partialfourier.transform import synthesize
    fc = random_full_coeff(rng, HalfInt(2), 2)
    io.save_coeffs(fc, tmp_path / "c.json")
    samples = synthesize(fc, quadrature_for_bandlimit(HalfInt(2)), TimeGrid(5))
    np.save(tmp_path / "s.npy", samples)
    for spec in ({"kind": "coefficients", "path": str(tmp_path / "c.json")},
                 {"kind": "samples", "path": str(tmp_path / "s.npy")}):
        (tmp_path / "in.json").write_text(json.dumps(spec))
        assert run(["transform", "--ell-max", "1", "--tau-max", "2", "--input", tmp_path / "in.json",
                    "--report", tmp_path / "r.json"]) == 0
        assert json.loads((tmp_path / "r.json").read_text())["ok"]


def test_deterministic_bytes(tmp_path):
    for k in range(2):
        assert run(["transform", "--seed", "3", "--out", tmp_path / f"c{k}.json",
                    "--report", tmp_path / f"r{k}.json"]) == 0
    assert (tmp_path / "c0.json").read_bytes() == (tmp_path / "c1.json").read_bytes()
    assert (tmp_path / "r0.json").read_bytes() == (tmp_path / "r1.json").read_bytes()
    for k in range(2):
        assert run(["demo-nonsolvable", "--csv", tmp_path / f"d{k}.csv",
                    "--witnesses", tmp_path / f"w{k}.json"]) == 0
    assert (tmp_path / "d0.csv").read_bytes() == (tmp_path / "d1.csv").read_bytes()
    assert (tmp_path / "w0.json").read_bytes() == (tmp_path / "w1.json").read_bytes()


@pytest.fixture
def f_file(tmp_path, rng):
    pc = random_full_coeff(rng, HalfInt(2), 3).to_partial(TimeGrid(7))
    path = tmp_path / "f.json"
    io.save_coeffs(pc, path)
    return path


def test_solve_exit_codes(tmp_path, f_file):
    rep = tmp_path / "r.json"
    assert run(["solve", "--input", f_file, "--report", rep]) == 2
    r = json.loads(rep.read_text())
    assert not r["in_K"] and r["skipped_modes"]
    out = tmp_path / "u.json"
    assert run(["solve", "--input", f_file, "--project", "--report", rep, "--out", out]) == 0
    r = json.loads(rep.read_text())
    assert r["in_K"] and r["residual_ok"] and r["max_relative_residual"] <= 1e-6
    assert io.load_coeffs(out).grid.n_t == r["solution_n_t"]


def test_solve_skips_only_resonant_m(tmp_path, f_file):
    rep = tmp_path / "r.json"
    # a0 = 2/7 resonates at m in (7/2)Z, so only m = 0 for ell <= 1
    assert run(["solve", "--input", f_file, "--a0", "2/7", "--report", rep]) == 2
    skipped = [s["mode"].split(",") for s in json.loads(rep.read_text())["skipped_modes"]]
    assert skipped and all(m == "0" for _, m, _ in skipped)
    assert run(["solve", "--input", f_file, "--a0", "1", "--report", rep]) == 2
    skipped = [s["mode"].split(",") for s in json.loads(rep.read_text())["skipped_modes"]]
    assert {m for _, m, _ in skipped} == {"-1", "0", "1"}  # integer m, ell <= 1


def test_conjugate_report(tmp_path, f_file):
    rep, out = tmp_path / "r.json", tmp_path / "v.json"
    assert run(["conjugate", "--input", f_file, "--a-sin", "0.5", "--report", rep, "--out", out]) == 0
    r = json.loads(rep.read_text())
    assert r["intertwine_residual"] <= 1e-7 and r["roundtrip_error"] <= 1e-12
    assert run(["conjugate", "--input", out, "--sign", "-1", "--a-sin", "0.5", "--out", tmp_path / "u.json"]) == 0
    back = io.load_coeffs(tmp_path / "u.json")
    assert (back - io.load_coeffs(f_file)).sup_norm() <= 1e-12


def test_classify_cli(tmp_path):
    taus, tws = range(-6, 7), range(0, 13)
    fc = FullCoeff({(t, w): np.exp(-(abs(t) + w / 2)) * np.eye(w + 1) for t in taus for w in tws})
    io.save_coeffs(fc, tmp_path / "c.json")
    rep, tab = tmp_path / "r.json", tmp_path / "t.csv"
    assert run(["classify", "--input", tmp_path / "c.json", "--report", rep, "--csv", tab]) == 0
    assert json.loads(rep.read_text())["report"]["verdict"] == "rapid-decay"
    assert len(tab.read_text().splitlines()) == 1 + len(fc)


def test_diophantine_cli(tmp_path):
    out = tmp_path / "d.json"
    assert run(["diophantine", "--value", "1/3", "--integer-m", "--out", out]) == 0
    assert abs(json.loads(out.read_text())["divisor_floor"] - math.sqrt(3)) <= 1e-12
    assert run(["diophantine", "--value", "liouville", "--out", out]) == 0
    assert json.loads(out.read_text())["witnesses"][0]["ell"] == "100"
    assert run(["diophantine", "--value", "2", "--out", out]) == 0
    assert json.loads(out.read_text())["divisor_floor"] in ("inf", math.inf, "Infinity") or \
        math.isinf(json.loads(out.read_text())["divisor_floor"])


def test_demo_csv(tmp_path):
    tab = tmp_path / "d.csv"
    assert run(["demo-nonsolvable", "--csv", tab]) == 0
    rows = list(csv.DictReader(tab.read_text().splitlines()))
    assert [r["M"] for r in rows] == ["1", "2", "3", "4"]
    assert all(r["rhs_le_bound"] == "True" and mpmath.mpf(r["sol_mag"]) == 1 for r in rows)


def test_exit_code_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["classify", "--input", bad]) == 1
    assert run(["solve", "--input", tmp_path / "missing.json"]) == 1
    assert run(["transform", "--n-t", "3", "--tau-max", "4"]) == 1
    spec = tmp_path / "in.json"
    spec.write_text(json.dumps({"kind": "nope"}))
    assert run(["transform", "--input", spec]) == 1


def test_exit_code_certification(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"M_max": 9}))
    assert run(["demo-nonsolvable", "--config", cfg, "--csv", tmp_path / "d.csv"]) == 3
    assert run(["diophantine", "--config", cfg, "--value", "liouville", "--out", tmp_path / "d.json"]) == 3
