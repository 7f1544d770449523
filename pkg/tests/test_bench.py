import json

import numpy as np
import pytest

from xlris import bench
from xlris.bench import ExperimentSpec, TrialRunner, angle_mse, gain_vs_distance, run_experiment, trial_seeds
from xlris.estimators import DictionaryPair, PathLabel, SupportEstimate

from conftest import small_config


def test_trial_seeds_pure_and_distinct():
    assert trial_seeds(7, 3) == trial_seeds(7, 3)
    assert len({trial_seeds(7, t) for t in range(50)}) == 50
    assert trial_seeds(7, 3) != trial_seeds(8, 3)


def test_csv_byte_identical_across_runs(tmp_path):
    cfg = small_config(trials=2)
    spec = ExperimentSpec("nmse_vs_Q", values=[16], methods=["2D-OLS", "CC-MMPSR", "IN-MMPSR", "2D-LS", "LB"])
    run_experiment(spec, cfg, tmp_path / "a")
    run_experiment(spec, cfg, tmp_path / "b")
    a = (tmp_path / "a" / "nmse_vs_Q.csv").read_bytes()
    assert a == (tmp_path / "b" / "nmse_vs_Q.csv").read_bytes()
    man = json.loads((tmp_path / "a" / "nmse_vs_Q.json").read_text())
    assert man["schema"] == "xlris.run/1" and man["config_hash"] == cfg.config_hash()
    assert man["seed"] == cfg.seed and man["csv"] == "nmse_vs_Q.csv"


def test_swept_values_share_channel_draws():
    cfg = small_config()
    r1, r2 = TrialRunner(cfg, need_dicts=False), TrialRunner(cfg.replace(Q=24), need_dicts=False)
    ch1, _, _ = r1.draw(1)
    ch2, _, _ = r2.draw(1)
    np.testing.assert_array_equal(ch1.H_U, ch2.H_U)


def test_noiseless_2dls_exact():
    cfg = small_config(sigma_n2_dbm=-400.0, trials=2)
    rows = run_experiment(ExperimentSpec("nmse_vs_Q", values=[16], methods=["2D-LS"]), cfg)
    assert rows[0]["median_nmse"] < 1e-10


def test_lb_vs_ols_flag():
    cfg = small_config(trials=3)
    rows = run_experiment(ExperimentSpec("lb_vs_ols", values=[30.0]), cfg)
    assert rows[-1]["lb_below_ols"] == 3


def test_gain_limits_and_ordering():
    # one path so the far-field limit is |b^H b| = 1 rather than a Gram determinant
    cfg = small_config(P=1)
    pts = gain_vs_distance(cfg, [16, 64], [1.0, 5.0, 50.0, 1e6], draws=200)
    g = {(p.ris_ny, p.distance): p.gain for p in pts}
    for n in (16, 64):
        assert g[(n, 1e6)] == pytest.approx(1.0, abs=1e-4)
        assert g[(n, 1.0)] < g[(n, 50.0)] < g[(n, 1e6)] + 1e-12
    # a larger aperture is further in the near field at the same distance
    assert g[(64, 5.0)] < g[(16, 5.0)]


def _support(vals):
    labs = [PathLabel(*v) for v in vals]
    return SupportEstimate(np.zeros(len(vals), int), np.zeros(len(vals), int), labs, labs)


def test_angle_mse_zero_on_truth_and_one_bin():
    cfg = small_config(P=2)
    runner = TrialRunner(cfg, need_dicts=False)
    ch, _, _ = runner.draw(0)
    truth = [(p.ris_point.theta_t, p.ris_point.phi_t, 0.0, p.user_theta_t, p.user_phi_t) for p in ch.paths]
    # reversed order checks the assignment step
    assert all(v == 0 for v in angle_mse(ch.paths, _support(truth[::-1])).values())
    G = 16
    off = [(a + 2 / G, b, c, d, e) for a, b, c, d, e in truth]
    err = angle_mse([ch.paths], [_support(off)])
    assert err["theta_t"] == pytest.approx((2 / G) ** 2)
    assert err["phi_t"] == 0 and err["u_phi_t"] == 0
    with pytest.raises(ValueError):
        angle_mse(ch.paths, _support(truth[:1]))


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("nmse_vs_everything")
    with pytest.raises(ValueError):
        ExperimentSpec("nmse_vs_Q", methods=["MUSIC"])
    with pytest.raises(ValueError):
        ExperimentSpec("nmse_vs_Q", values=[])
    with pytest.raises(ValueError):
        ExperimentSpec("nmse_vs_power", values=[float("nan")])
    with pytest.raises(ValueError):
        run_experiment(ExperimentSpec("nmse_vs_Q", param="no_such_field", values=[1]), small_config())


def test_komp_over_cap_records_nan(monkeypatch):
    monkeypatch.setattr("xlris.estimators.komp.DEFAULT_MEMORY_CAP", 1)
    monkeypatch.setattr(bench, "estimate_komp",
                        lambda m, d, P: __import__("xlris").estimators.estimate_komp(m, d, P, memory_cap=1))
    rows = run_experiment(ExperimentSpec("nmse_vs_Q", values=[16], methods=["K-OMP"]), small_config(trials=1))
    assert np.isnan(rows[0]["median_nmse"])


def test_trajectory_and_complexity_rows():
    cfg = small_config(trials=1)
    rows = run_experiment(ExperimentSpec("trajectory_map"), cfg)
    assert len(rows) == cfg.K and rows[0]["value"] == "45.0/45.0/20.0"
    rows = run_experiment(ExperimentSpec("complexity_scan", values=[4, 8]), cfg)
    assert rows[0]["G_R"] < rows[1]["G_R"] and all(r["match_time"] > 0 for r in rows)
    rows = run_experiment(ExperimentSpec("gain_vs_distance", values=[16], distances=[10.0]), cfg)
    assert rows[0]["distance"] == 10.0 and 0 < rows[0]["gain"] <= 1 + 1e-9
