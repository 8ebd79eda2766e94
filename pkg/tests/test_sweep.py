"""Small sphere sweeps: table structure, determinism and trends."""
import numpy as np
import pytest

from mmconc.sweep import COLUMNS, SweepConfig, SweepTable, run_sweep, trend_ok

SCREENS = ("euclid:1", "euclid:2", "hyperbolic:2:-1")


@pytest.fixture(scope="module")
def table():
    cfg = SweepConfig(ns=(12, 3, 6, 24), screens=SCREENS, N=300, count=8, iset_atoms=150, iset_grid=5, iset_maps=2)
    return run_sweep(cfg)


def test_rows_sorted_by_n(table):
    ns = [r["n"] for r in table.rows]
    assert ns == sorted(ns)
    assert len(table.rows) == 4 * len(SCREENS)


def test_csv_round_trip(table):
    text = table.to_csv()
    assert text.splitlines()[0] == ",".join(COLUMNS)
    back = SweepTable.from_csv(text)
    assert back.to_csv() == text
    for s in SCREENS:
        np.testing.assert_array_equal(back.column(s, "obs_diameter"), table.column(s, "obs_diameter"))


@pytest.mark.parametrize("screen", SCREENS)
def test_observable_diameter_decreases(table, screen):
    col = table.column(screen, "obs_diameter")
    assert trend_ok(col), col


def test_hyperbolic_column_below_euclidean(table):
    h = table.column("hyperbolic:2:-1", "obs_diameter")
    e = table.column("euclid:2", "obs_diameter")
    assert np.all(h <= e + 1e-9)


def test_iset_column_is_small_and_finite(table):
    for s in SCREENS:
        col = table.column(s, "iset_diameter")
        assert np.all(np.isfinite(col)) and np.all(col >= 0)
        assert np.all(col < table.column(s, "obs_diameter"))


def test_same_seed_same_table():
    cfg = SweepConfig(ns=(3, 5), screens=("euclid:1", "hyperbolic:2:-1"), N=120, count=4, iset=False, seed=7)
    a, b = run_sweep(cfg), run_sweep(cfg)
    strip = lambda t: [{k: v for k, v in r.items() if k != "runtime_s"} for r in t.rows]
    assert repr(strip(a)) == repr(strip(b))


def test_single_n_one_row():
    t = run_sweep(SweepConfig(ns=(4,), screens=("euclid:1",), N=50, count=3, iset=False))
    assert len(t.rows) == 1 and np.isnan(t.rows[0]["iset_diameter"])


def test_trend_ok():
    assert trend_ok([4, 3, 1.9])
    assert not trend_ok([4, 3, 2.1])
    assert trend_ok([4, 3, 2.1], None)
    assert not trend_ok([4, 4, 1], None)


@pytest.mark.parametrize("kw", [{"ns": ()}, {"ns": (0, 3)}, {"N": 0}, {"kappa": 0.0}, {"iset_range": (1.0, 0.5)}])
def test_bad_config(kw):
    with pytest.raises(ValueError):
        SweepConfig(**kw)
