import math

import numpy as np
import pytest

from htica.errors import EmptyTableError, InvalidParameterError
from htica.harness import (
    CSV_HEADER,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    config_from_mapping,
    emit_csv,
    emit_plot_data,
    instance_for_trial,
    load_config,
    median_errors,
    parse_config_text,
    parse_csv,
    parse_float_list,
    parse_pipeline,
    plot_series,
    quartiles,
    run_experiment,
)
from htica.ica import PipelineConfig
from htica.io import write_matrix


def small_config(**kw):
    base = dict(n=2, eta=(6.0, 6.0), N_grid=(100,), seed=3, trials=1,
                pipelines=(PipelineConfig("oracle", damping=False),))
    base.update(kw)
    return ExperimentConfig(**base)


def test_smoke_single_row():
    table = run_experiment(small_config())
    assert len(table) == 1
    row = table.rows[0]
    assert row.N == 100 and row.method == "oracle" and math.isfinite(row.frob)
    assert row.sigma_min == pytest.approx(1.0) and math.isnan(row.R)


def test_same_seed_same_table():
    cfg = small_config(N_grid=(80, 160), trials=2,
                       pipelines=(PipelineConfig("centroid"), PipelineConfig("covariance", contrast="tanh")))
    assert run_experiment(cfg) == run_experiment(cfg)
    assert run_experiment(cfg) != run_experiment(small_config(N_grid=(80, 160), trials=2, seed=4,
                                                              pipelines=cfg.pipelines))


def test_row_order_and_shared_data():
    cfg = small_config(N_grid=(60, 90), trials=2,
                       pipelines=(PipelineConfig("oracle", False), PipelineConfig("identity", False)))
    table = run_experiment(cfg)
    keys = [(r.N, r.trial, r.method) for r in table]
    assert keys == [(N, t, m) for N in (60, 90) for t in (0, 1) for m in ("oracle", "identity")]
    # fresh mixing matrix per trial
    assert not np.allclose(instance_for_trial(cfg, 60, 0).A, instance_for_trial(cfg, 60, 1).A)


def test_failures_become_na_rows():
    # one FastICA sweep with an impossible tolerance never converges
    bad = PipelineConfig("covariance", False, max_restarts=1, max_iter=1, convergence_tol=1e-300)
    table = run_experiment(small_config(pipelines=(bad, PipelineConfig("oracle", False))))
    assert table.rows[0].failed and math.isfinite(table.rows[0].sigma_min)
    assert not table.rows[1].failed
    assert median_errors(table)[("covariance", "pow3", False)] == math.inf


def test_from_file_mixing(tmp_path):
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    write_matrix(tmp_path / "A.txt", A)
    cfg = small_config(mixing="from-file", mixing_file=str(tmp_path / "A.txt"))
    assert np.array_equal(instance_for_trial(cfg, 100, 0, A).A, A)
    assert len(run_experiment(cfg)) == 1


def test_orthogonal_mixing():
    A = instance_for_trial(small_config(mixing="orthogonal", n=3, eta=(3.0,)), 10, 0).A
    np.testing.assert_allclose(A.T @ A, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("kw", [dict(N_grid=(100, 100)), dict(N_grid=(200, 100)), dict(trials=0),
                                dict(eta=(3.0, 3.0, 3.0)), dict(mixing="weird"), dict(mixing="from-file"),
                                dict(pipelines=())])
def test_config_validation(kw):
    with pytest.raises(InvalidParameterError):
        small_config(**kw)


def test_defaults_fill_pipeline_sizes():
    cfg = small_config(pipelines=(PipelineConfig("centroid", body_size=50),))
    assert cfg.pipelines[0].body_size == 50 and cfg.pipelines[0].orth_size == 10000
    assert small_config(eta=6.0).eta == (6.0, 6.0)


def test_config_file(tmp_path):
    text = """
    # an experiment
    n = 10
    eta = 6*8, 2.1*2
    mixing = orthogonal
    N_grid = 1e3, 1e4
    trials = 3
    seed = 17
    pipelines = centroid/pow3/damped, covariance/tanh/raw
    body_size = none
    target_rejection = 0.3
    output = out.csv
    """
    (tmp_path / "exp.cfg").write_text(text)
    cfg = load_config(tmp_path / "exp.cfg")
    assert cfg.eta == (6.0,) * 8 + (2.1,) * 2 and cfg.N_grid == (1000, 10000)
    assert cfg.mixing == "orthogonal" and cfg.trials == 3 and cfg.seed == 17
    assert [p.label for p in cfg.pipelines] == ["centroid/pow3/damped", "covariance/tanh/raw"]
    assert cfg.pipelines[0].damping_params.target_rejection == 0.3
    assert cfg.body_size is None and cfg.output_path == "out.csv"


def test_config_errors():
    with pytest.raises(InvalidParameterError):
        parse_config_text("novalue")
    with pytest.raises(InvalidParameterError):
        config_from_mapping({"eta": "3", "N_grid": "10", "seed": "1", "colour": "red"})
    with pytest.raises(InvalidParameterError):
        config_from_mapping({"eta": "3", "N_grid": "10"})
    with pytest.raises(InvalidParameterError):
        parse_pipeline("centroid/pow3/maybe")


def test_parse_float_list():
    assert parse_float_list("1, 2*2,3") == [1.0, 2.0, 2.0, 3.0]


def test_quartile_convention():
    assert quartiles([1, 2, 3, 4]) == (2.5, 1.75, 3.25)
    assert quartiles([5.0]) == (5.0, 5.0, 5.0)


def row(**kw):
    base = dict(N=100, trial=0, method="centroid", contrast="pow3", damping=True)
    base.update(kw)
    return ResultRow(**base)


def test_csv_round_trip(tmp_path):
    t = ResultTable([row(frob=0.1, amari=1 / 3, sigma_min=0.99, cond=1.5, R=2.0, accept_rate=0.75, runtime_ms=12.5)])
    emit_csv(t, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "N,trial,method,contrast,damping,frob,amari,sigma_min,cond,R,accept_rate,runtime_ms"
    assert tuple(lines[0].split(",")) == CSV_HEADER
    assert parse_csv(tmp_path / "r.csv") == t


def test_csv_na(tmp_path):
    t = ResultTable([row(damping=False)])
    emit_csv(t, tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[1] == "100,0,centroid,pow3,off," + ",".join(["NA"] * 7)
    assert parse_csv(tmp_path / "r.csv") == t


def test_empty_table_refused(tmp_path):
    with pytest.raises(EmptyTableError):
        emit_csv(ResultTable(), tmp_path / "r.csv")
    with pytest.raises(EmptyTableError):
        emit_plot_data(ResultTable(), tmp_path)


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_csv(ResultTable([row(frob=1.0)]), tmp_path / "missing" / "r.csv")


def test_plot_data(tmp_path):
    rows = [row(trial=i, frob=float(v)) for i, v in enumerate([1, 2, 3, 4])]
    rows += [row(N=200, trial=0), row(N=100, method="identity", frob=7.0)]
    t = ResultTable(rows)
    series = plot_series(t)
    assert series[("centroid", "pow3", True)][0] == (100, 2.5, 1.75, 3.25)
    assert all(math.isnan(x) for x in series[("centroid", "pow3", True)][1][1:])
    paths = emit_plot_data(t, tmp_path / "plots")
    assert sorted(p.name for p in paths) == ["centroid_pow3_damped.dat", "identity_pow3_damped.dat"]
    text = (tmp_path / "plots" / "centroid_pow3_damped.dat").read_text().splitlines()
    assert text == ["# N median q25 q75", "100 2.5 1.75 3.25", "200 NA NA NA"]
