"""JSON formats and the mmc command line."""
import json

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import random_tree, small_spaces
from mmconc import io as mio
from mmconc.cli import main
from mmconc.observables import Report


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    return json.loads(out)


# -------------------------------------------------------------- round trips

@settings(max_examples=20)
@given(small_spaces(max_n=9))
def test_space_json_round_trip(space):
    d = mio.space_to_dict(space)
    assert "dist_condensed" in d and "dist" not in d
    back = mio.space_from_dict(json.loads(json.dumps(d)))
    np.testing.assert_array_equal(back.dist, space.dist)
    np.testing.assert_array_equal(back.weights, space.weights)


def test_space_loader_accepts_square_matrix(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"labels": ["a", "b", "c"], "dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]], "weights": [1, 1, 2]}))
    sp = mio.load_space(p)
    assert sp.n == 3 and sp.mass == 4
    mio.save_space(sp, tmp_path / "t.json")
    again = mio.load_space(tmp_path / "t.json")
    np.testing.assert_array_equal(again.dist, sp.dist)
    assert list(again.labels) == ["a", "b", "c"]


def test_single_point_condensed_round_trip():
    sp = mio.space_from_dict({"labels": ["x"], "dist_condensed": [], "weights": [1.0]})
    assert sp.n == 1
    assert mio.space_from_dict(mio.space_to_dict(sp)).n == 1


def test_bad_condensed_length():
    with pytest.raises(Exception):
        mio.space_from_dict({"dist_condensed": [1.0, 2.0], "weights": [1, 1]})


def test_tree_round_trip(tmp_path):
    T = random_tree(3, 7)
    mio.save_tree(T, tmp_path / "t.json")
    T2 = mio.load_tree(tmp_path / "t.json")
    assert T2.to_json() == T.to_json()


def test_report_round_trip():
    rep = Report("observable_diameter", 0.25, "lower_estimate", {"kappa": 0.1}, "mixed", 4)
    back = mio.load_report(json.dumps(rep.to_dict()))
    assert back.to_dict() == rep.to_dict()


# ---------------------------------------------------------------- analyze

def test_analyze_two_point_alpha(capsys):
    code, out, _ = run(capsys, "analyze", "--space", "two_point", "--functional", "alpha", "--r", "0.5")
    assert code == 0 and report(out)["value"] == 0.5


def test_analyze_two_point_sep(capsys):
    code, out, _ = run(capsys, "analyze", "--space", "two_point", "--functional", "sep", "--kappa", "0.5", "0.5")
    assert code == 0 and report(out)["value"] == 1.0


@pytest.mark.parametrize("fn", ["alpha", "sep", "levy_mean", "levy_radius", "pd", "obs_diameter", "lp",
                                "obs_lp", "crad", "obs_crad", "barycenter", "tmean", "iset", "variance"])
def test_analyze_single_point_is_zero(capsys, tmp_path, fn):
    p = tmp_path / "one.json"
    p.write_text(json.dumps({"labels": ["x"], "dist": [[0]], "weights": [1]}))
    code, out, err = run(capsys, "analyze", "--space", str(p), "--functional", fn)
    assert code == 0, err
    rep = report(out)
    assert rep["value"] == 0.0
    assert set(rep) == {"name", "value", "mode", "params", "family", "seed"}


def test_analyze_pre_levy_mean_on_tree(capsys, tmp_path):
    T = random_tree(1, 6)
    mio.save_tree(T, tmp_path / "t.json")
    code, out, err = run(capsys, "analyze", "--space", "cloud:n=12,seed=2", "--screen", f"tree:{tmp_path / 't.json'}",
                         "--functional", "pre_levy_mean")
    assert code == 0, err
    assert report(out)["value"] >= 1 / 3 - 1e-12


def test_analyze_writes_out_file(capsys, tmp_path):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "analyze", "--space", "two_point", "--functional", "alpha", "--out", str(dest))
    assert code == 0 and out == ""
    assert mio.load_report(dest).value == 0.5


def test_identical_flags_give_identical_output(capsys):
    argv = ["analyze", "--space", "sphere:n=4,N=80", "--functional", "obs_diameter", "--screen", "euclid:2", "--seed", "3"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_seed_from_environment(capsys, monkeypatch):
    argv = ["analyze", "--space", "sphere:n=4,N=60", "--functional", "obs_diameter", "--count", "4"]
    monkeypatch.setenv("MMC_SEED", "5")
    _, env5, _ = run(capsys, *argv)
    _, flag5, _ = run(capsys, *argv, "--seed", "5")
    monkeypatch.setenv("MMC_SEED", "9")
    _, flag5_env9, _ = run(capsys, *argv, "--seed", "5")
    assert report(env5)["seed"] == 5
    assert env5 == flag5 == flag5_env9


# ----------------------------------------------------------------- verify

def test_verify_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--space", "two_point")
    assert code == 0 and json.loads(out)["passed"] is True
    code, _, _ = run(capsys, "verify", "--space", "cloud:n=10,seed=1")
    assert code == 0

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "weights": [1, 1, 1]}))
    code, _, err = run(capsys, "verify", "--space", str(bad))
    assert code == 2 and "TriangleViolation" in err


def test_verify_reports_failure_with_exit_one(capsys, monkeypatch):
    import mmconc.cli as cli
    from mmconc.checks import CheckRecord, VerifySuiteResult

    def fake(space, **kw):
        return VerifySuiteResult([CheckRecord("fake", "anchor", 2.0, 1.0, -1.0, False)])

    monkeypatch.setattr(cli, "verify_space", fake)
    code, out, err = run(capsys, "verify", "--space", "two_point")
    assert code == 1 and "FAIL fake" in err
    assert json.loads(out)["passed"] is False


@pytest.mark.parametrize("argv", [
    ["analyze", "--space", "nosuch:n=3", "--functional", "alpha"],
    ["analyze", "--space", "/no/such/file.json", "--functional", "alpha"],
    ["analyze", "--space", "two_point", "--functional", "tmean", "--screen", "hyperbolic:2:1"],
    ["analyze", "--space", "two_point", "--functional", "pre_levy_mean"],
    ["sweep", "--n", "0", "--N", "10", "--no-iset"],
])
def test_input_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("mmc: error:")


# ------------------------------------------------------------------ sweep

def test_sweep_single_n_gives_one_row(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "3", "--N", "60", "--screen", "euclid:1", "--no-iset", "--count", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2 and lines[0].startswith("n,screen")
