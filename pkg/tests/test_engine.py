import csv

import numpy as np
import pytest

from qmimo.config import ScenarioSpec, default_config
from qmimo.simulate import empirical_mse, ergodic_rate_mc
from qmimo.streams import Tag, run_trials, substream, summarize
from qmimo.sweep import EmptySweep, SweepSpec, UnknownAxis, run_sweep


def test_substream_reproducible():
    a = substream(7, 3, Tag.CHANNEL).standard_normal(5)
    b = substream(7, 3, Tag.CHANNEL).standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_substream_order_free():
    # drawing trial 5 first must not change trial 2
    late = substream(1, 5, Tag.QUANT).random(3)
    early = substream(1, 2, Tag.QUANT).random(3)
    np.testing.assert_array_equal(early, substream(1, 2, Tag.QUANT).random(3))
    assert not np.array_equal(late, early)


@pytest.mark.parametrize("other", [(7, 3, Tag.THERMAL), (7, 4, Tag.CHANNEL), (8, 3, Tag.CHANNEL)])
def test_substreams_uncorrelated(other):
    n = 1_000_000
    a = substream(7, 3, Tag.CHANNEL).standard_normal(n)
    b = substream(*other).standard_normal(n)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_run_trials_ordered():
    assert run_trials(lambda i: i * i, 50, threads=4) == [i * i for i in range(50)]


def test_summarize_known_values():
    est = summarize([1.0, 3.0])
    assert est.mean == 2.0
    assert est.ci95 == pytest.approx(1.959963984540054 * np.sqrt(2.0) / np.sqrt(2.0), rel=1e-15)
    with pytest.raises(ValueError):
        summarize([1.0])


def test_threads_bit_identical():
    cfg = default_config(num_antennas=16, large_scale=[1.0, 0.5, 0.2, 0.1, 0.05] * 2)
    a = empirical_mse(cfg, 64, seed=3, threads=1)
    b = empirical_mse(cfg, 64, seed=3, threads=4)
    assert a == b
    r1 = ergodic_rate_mc(cfg, 64, seed=3, threads=1)
    r4 = ergodic_rate_mc(cfg, 64, seed=3, threads=3)
    np.testing.assert_array_equal(r1.per_user_mc, r4.per_user_mc)
    assert r1.sum_ci95 == r4.sum_ci95


def test_scenario_mode_redraws_beta():
    cfg = default_config(num_antennas=16)
    fixed = ergodic_rate_mc(cfg, 20, seed=4)
    drop = ergodic_rate_mc(cfg, 20, seed=4, scenario=ScenarioSpec())
    assert fixed.sum_approx != drop.sum_approx
    again = ergodic_rate_mc(cfg, 20, seed=4, scenario=ScenarioSpec(), threads=2)
    assert drop.sum_mc == again.sum_mc


def test_sweep_empty():
    with pytest.raises(EmptySweep):
        run_sweep(SweepSpec(default_config(), "pilot_power_db", [], 4, 1))


def test_sweep_unknown_axis():
    with pytest.raises(UnknownAxis):
        run_sweep(SweepSpec(default_config(), "bandwidth", [1.0], 4, 1))


def test_sweep_unordered_values():
    with pytest.raises(ValueError):
        run_sweep(SweepSpec(default_config(), "num_antennas", [16, 8, 32], 4, 1))


def test_sweep_error_row_continues():
    spec = SweepSpec(default_config(num_antennas=8), "pilot_length", [5, 10, 20], 4, 1,
                     metrics=("mse_floor",))
    result = run_sweep(spec)
    first = result.rows[0]
    assert first.metric == "error" and "PilotTooShort" in first.error
    floors = result.select("mse_floor")
    assert [r.axis_value for r in floors] == [10, 20]
    assert floors[1].error  # floor undefined when tau != K


def test_sweep_mse_monotone():
    spec = SweepSpec(default_config(num_antennas=8), "pilot_power_db", [-10.0, 0.0, 10.0, 20.0], 200, 5,
                     metrics=("mse",))
    rows = run_sweep(spec).select("mse")
    analytic = [r.analytic for r in rows]
    assert all(a > b for a, b in zip(analytic, analytic[1:]))
    for r in rows:
        assert r.mc == pytest.approx(r.analytic, rel=0.1)


def test_sweep_csv_format(tmp_path):
    spec = SweepSpec(default_config(num_antennas=8, rf_scale_magnitude=1.0), "adc_bits", [1, 3, "inf"], 4, 9,
                     metrics=("mse_floor", "sum_rate_simplified"))
    path = tmp_path / "s.csv"
    run_sweep(spec).write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["adc_bits", "metric", "analytic", "mc", "ci95", "trials", "seed", "error"]
    assert len(rows) == 7
    assert rows[1][:2] == ["1", "mse_floor"]
    assert float(rows[1][2]) == pytest.approx(0.3634, rel=1e-15)
    assert float(rows[1][2]) == float(f"{float(rows[1][2]):.17g}")
    assert rows[5][0] == "inf" and float(rows[5][2]) == 0.0
