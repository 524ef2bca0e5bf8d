import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recnum.experiments import (
    ExperimentConfig, InsufficientPointsError, RESULT_COLUMNS, ols, population, read_rows,
    run_exp2, run_exp3,
)


def test_ols_identities():
    fit = ols([0, 1, 2], [0, 1, 2])
    assert fit.slope == pytest.approx(1) and fit.intercept == pytest.approx(0)
    assert ols([0, 1, 2, 3], [5, 5, 5, 5]).slope == 0


def test_ols_refuses_small_input():
    with pytest.raises(InsufficientPointsError):
        ols([1.0, 2.0], [3.0, 4.0])
    with pytest.raises(InsufficientPointsError):
        ols([1.0, 1.0, 1.0], [3.0, 4.0, 5.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=20))
def test_ols_matches_normal_equations(points):
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    if np.ptp(x) < 1e-3:
        return
    fit = ols(x, y)
    A = np.column_stack([np.ones_like(x), x])
    intercept, slope = np.linalg.solve(A.T @ A, A.T @ y)
    assert fit.slope == pytest.approx(slope, rel=1e-9, abs=1e-9)
    assert fit.intercept == pytest.approx(intercept, rel=1e-9, abs=1e-7)
    resid = y - fit.intercept - fit.slope * x
    assert abs(np.dot(resid, x - x.mean())) <= 1e-9 * max(1.0, np.abs(x).max() * np.abs(y).max() * len(x))


def test_profiles():
    desk = ExperimentConfig()
    assert (desk.epochs, desk.repetitions, desk.eval_interval) == (3000, 5, 100)
    paper = ExperimentConfig(profile="paper")
    assert (paper.epochs, paper.repetitions, paper.eval_interval, paper.n_random) == (30000, 20, 300, 300)
    assert ExperimentConfig(epochs=7).train_config().epochs == 7
    with pytest.raises(ValueError):
        ExperimentConfig(profile="huge")


def test_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"epochs": 50, "repetitions": 2, "training": {"step_size": 0.01}}))
    cfg = ExperimentConfig.from_json(path, repetitions=3)
    assert cfg.epochs == 50 and cfg.repetitions == 3
    assert cfg.train_config().step_size == 0.01
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(path)


def test_population_groups(tmp_path):
    from recnum.numerals import builtin_system, format_system
    (tmp_path / "basque.txt").write_text(format_system(builtin_system("basque_like")))
    (tmp_path / "broken.txt").write_text("1\t1\n")
    cfg = ExperimentConfig(n_random=2, systems_dir=str(tmp_path))
    groups = [m.group for m in population(cfg)]
    assert groups == ["regular"] * 3 + ["random"] * 2 + ["ingested"]


def test_exp2_outputs(tmp_path):
    cfg = ExperimentConfig(out=str(tmp_path), n_random=2, epochs=20, repetitions=2, eval_interval=10)
    outcome = run_exp2(cfg)
    rows = read_rows(tmp_path / "exp2" / "results.csv")
    assert tuple(rows[0]) == RESULT_COLUMNS
    assert len(rows) == 5
    fits = json.loads((tmp_path / "exp2" / "fits.json").read_text())["fits"]
    assert fits["global"]["n_points"] == 5
    assert fits["regular"]["n_points"] == 3
    assert fits["random"] is None  # two points only
    assert (tmp_path / "exp2" / "traces" / "mandarin_rep00.csv").exists()
    assert outcome.aborted == 0


def test_exp3_structure(tmp_path):
    cfg = ExperimentConfig(out=str(tmp_path), epochs=10, repetitions=1, eval_interval=5,
                           neighbourhood_bases=("mandarin", "basque_like"), neighbourhood_variants=1)
    summary = run_exp3(cfg)
    status = {h.base: h.status for h in summary.neighbourhoods}
    assert status == {"mandarin": "no_variation", "basque_like": "fitted"}
    fitted = summary.fitted[0]
    assert len(fitted.rows) == 4 and fitted.fit.n_points == 4
    data = json.loads((tmp_path / "exp3" / "summary.json").read_text())
    assert data["summary"]["fitted"] == 1
