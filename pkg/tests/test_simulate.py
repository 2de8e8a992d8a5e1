import numpy as np
import pytest

from graphseg.baselines import linear_fit, pava_l2
from graphseg.simulate import (METHODS, NOISES, SCENARIOS, SimulationRow,
                               run_simulation, simulation_csv, worker_count)

N_SMALL = 60
REPS = 3


def test_catalogue_constants():
    assert METHODS == ("linear_fit", "pava", "gfpop1", "gfpop2", "gfpop3",
                       "gfpop4")
    assert SCENARIOS == ("linear", "step")
    assert NOISES == ("gauss", "student", "corrupted")


# -- worker_count ------------------------------------------------------------


def test_worker_count_env_override(monkeypatch):
    monkeypatch.setenv("GRAPHSEG_THREADS", "3")
    assert worker_count(10) == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("GRAPHSEG_THREADS", "0")
    assert worker_count(10) == 1


def test_worker_count_defaults_and_validation(monkeypatch):
    monkeypatch.delenv("GRAPHSEG_THREADS", raising=False)
    assert 1 <= worker_count(10) <= 8
    assert worker_count(1) == 1
    monkeypatch.setenv("GRAPHSEG_THREADS", "two")
    with pytest.raises(ValueError, match="must be an integer"):
        worker_count(10)


# -- run_simulation ----------------------------------------------------------


def test_rows_follow_method_order():
    rows = run_simulation("step", "gauss", n=N_SMALL, reps=REPS, seed=1,
                          methods=("pava", "linear_fit"))
    assert [r.method for r in rows] == ["pava", "linear_fit"]
    for row in rows:
        assert isinstance(row, SimulationRow)
        assert row.noise == "gauss"
        assert row.mse_mean > 0.0
        assert row.mse_sd >= 0.0
        assert row.dhat_mean >= 1.0


def test_results_independent_of_worker_count(monkeypatch):
    monkeypatch.setenv("GRAPHSEG_THREADS", "1")
    serial = run_simulation("step", "corrupted", n=N_SMALL, reps=REPS,
                            seed=7, methods=("pava", "gfpop4"), sigma=2.0)
    monkeypatch.setenv("GRAPHSEG_THREADS", "4")
    threaded = run_simulation("step", "corrupted", n=N_SMALL, reps=REPS,
                              seed=7, methods=("pava", "gfpop4"), sigma=2.0)
    assert serial == threaded


def test_different_seeds_differ():
    a = run_simulation("linear", "gauss", n=N_SMALL, reps=2, seed=0,
                       methods=("pava",))
    b = run_simulation("linear", "gauss", n=N_SMALL, reps=2, seed=1,
                       methods=("pava",))
    assert a != b


def test_single_rep_reproduces_direct_fits():
    rows = run_simulation("step", "gauss", n=N_SMALL, reps=1, seed=5,
                          methods=("linear_fit", "pava"), sigma=0.5)
    from graphseg.datagen import step_signal
    signal = step_signal(N_SMALL)
    child = np.random.SeedSequence(5).spawn(1)[0]
    data = signal + 0.5 * np.random.default_rng(child).standard_normal(
        N_SMALL)
    for row, fitted in zip(rows, (linear_fit(data), pava_l2(data))):
        assert row.mse_mean == pytest.approx(
            float(np.mean((fitted - signal) ** 2)), rel=1e-12)
        assert row.mse_sd == 0.0


def test_student_noise_variance_is_rescaled():
    rows = run_simulation("linear", "student", n=4000, reps=2, seed=9,
                          sigma=3.0, df=30, methods=("linear_fit",),
                          alpha=0.0)
    # linear fit of a flat signal leaves ~sigma^2 * 2/n residual MSE
    assert rows[0].mse_mean < 0.05


def test_penalised_variants_report_fewer_segments():
    rows = run_simulation("step", "gauss", n=300, reps=2, seed=3,
                          methods=("gfpop1", "gfpop3"))
    unpenalised, penalised = rows
    assert penalised.dhat_mean < unpenalised.dhat_mean


@pytest.mark.parametrize("kwargs,message", [
    (dict(scenario="cubic", noise="gauss"), "unknown scenario"),
    (dict(scenario="step", noise="pink"), "unknown noise"),
    (dict(scenario="step", noise="gauss", methods=("ols",)),
     "unknown method"),
    (dict(scenario="step", noise="gauss", reps=0), "reps must be positive"),
])
def test_run_simulation_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        run_simulation(n=N_SMALL, **kwargs)


# -- CSV rendering -----------------------------------------------------------


def test_simulation_csv_layout():
    rows = [SimulationRow("gauss", "pava", 0.125, 0.0625, 10.0),
            SimulationRow("student", "gfpop4", 1.0 / 3.0, 0.1, 9.5)]
    text = simulation_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "noise,method,mse_mean,mse_sd,dhat_mean"
    assert lines[1] == "gauss,pava,0.125,0.0625,10"
    assert lines[2] == "student,gfpop4,0.333333333333,0.1,9.5"
    assert text.endswith("\n")
