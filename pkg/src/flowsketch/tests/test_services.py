import pandas as pd
import pytest

from flowsketch.bench.services import (
    ExperimentService,
    GridService,
    ReportService,
    countmin_are,
    run_experiment,
    run_grid,
)
from flowsketch.csvio import RESULT_COLUMNS, write_results, write_trace
from flowsketch.exceptions import TraceInputError, UsageError
from flowsketch.tasks import TaskStatus
from flowsketch.traffic import SyntheticSpec, generate_trace


ALGORITHMS = ["hashflow", "hashpipe", "elastic", "flowradar"]


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_generous_memory_is_exact(experiment_config_factory, algorithm):
    report = run_experiment(experiment_config_factory(algorithm=algorithm, n_flows=100))
    assert report.fsc == 1.0
    assert report.are_all_flows <= 0.01
    if algorithm == "hashpipe":
        # fragments are separate records
        assert report.records_reported >= 100
        assert report.cardinality_re == pytest.approx((report.records_reported - 100) / 100)
    else:
        assert report.cardinality_re <= 0.05
    assert report.costs.packets == sum(1 for _ in ExperimentService.load_trace(report.config)[0])


def test_hashflow_generous_memory_has_no_error(experiment_config_factory):
    report = run_experiment(experiment_config_factory(n_flows=100))
    assert report.are_all_flows == 0.0
    assert report.fully_decoded is None
    assert all(hh.f1 == 1.0 for hh in report.heavy_hitters)
    assert all(hh.heavy_hitter_are == 0.0 for hh in report.heavy_hitters if hh.real)


@pytest.mark.parametrize(
    "algorithm, max_hash_ops, max_accesses",
    [("hashflow", 4, 6), ("hashpipe", 4, 8), ("elastic", 4, 8), ("flowradar", 7, 14)],
)
def test_per_packet_cost_bounds(experiment_config_factory, algorithm, max_hash_ops, max_accesses):
    report = run_experiment(experiment_config_factory(algorithm=algorithm, budget_bytes=2048, n_flows=400))
    assert 1 <= report.costs.hash_ops_max <= max_hash_ops
    assert report.costs.memory_accesses_max <= max_accesses
    assert report.costs.hash_ops_mean <= report.costs.hash_ops_max


def test_flowradar_reports_decoding(experiment_config_factory):
    assert run_experiment(experiment_config_factory(algorithm="flowradar", n_flows=100)).fully_decoded is True


def test_fsc_is_bounded_by_table_capacity(experiment_config_factory):
    report = run_experiment(experiment_config_factory(budget_bytes=2048, n_flows=1000, max_flow_size=50))
    buckets = 2048 * 8 // 152
    assert report.records_reported <= buckets
    assert report.fsc <= buckets / 1000


def test_experiment_is_deterministic(experiment_config_factory):
    config = experiment_config_factory(algorithm="elastic", budget_bytes=4096, n_flows=300)
    assert run_experiment(config).to_rows() == run_experiment(config).to_rows()


def test_trace_file_experiment(tmp_path, experiment_config_factory):
    events, _ = generate_trace(SyntheticSpec(flow_count=120, max_flow_size=80, seed=3))
    path = tmp_path / "small.csv"
    write_trace(events, path)

    report = run_experiment(experiment_config_factory(trace_path=path, n_flows=100))
    assert report.config.trace_label == "small.csv"
    assert report.fsc == 1.0

    with pytest.raises(TraceInputError, match="120 distinct flows"):
        run_experiment(experiment_config_factory(trace_path=path, n_flows=121))


def test_report_rows(experiment_config_factory):
    report = run_experiment(experiment_config_factory(n_flows=50, thresholds=[10, 50]))
    rows = report.to_rows()
    assert all(tuple(row) == RESULT_COLUMNS for row in rows)
    metrics = [row["metric"] for row in rows]
    assert metrics[:7] == [
        "fsc", "are", "re", "hash_ops_mean", "hash_ops_max", "mem_accesses_mean", "mem_accesses_max",
    ]
    assert metrics.count("f1") == 2
    assert {row["threshold"] for row in rows if row["metric"] == "f1"} == {10, 50}
    assert {row["trace"] for row in rows} == {"zipf-1.1-cap500"}


def test_empty_grid():
    result = run_grid([])
    assert result.tasks == []
    assert result.rows == []


def test_identical_configs_give_identical_rows(experiment_config_factory):
    config = experiment_config_factory(n_flows=80, budget_bytes=4096)
    result = run_grid([config, config], parallelism=1)
    assert [task.status for task in result.tasks] == [TaskStatus.SUCCESS] * 2
    first, second = (report.to_rows() for report in result.reports)
    assert first == second


def test_parallel_grid_matches_serial(experiment_config_factory):
    configs = [experiment_config_factory(algorithm=a, n_flows=60, budget_bytes=4096) for a in ALGORITHMS]
    assert run_grid(configs, parallelism=2).rows == run_grid(configs, parallelism=1).rows


def test_failure_becomes_an_error_row(mocker, experiment_config_factory):
    real = ExperimentService.run_experiment

    def flaky(config):
        if config.algorithm == "hashpipe":
            raise RuntimeError("switch out of memory")
        return real(config)

    mocker.patch.object(ExperimentService, "run_experiment", side_effect=flaky)
    configs = [experiment_config_factory(algorithm=a, n_flows=60) for a in ("hashflow", "hashpipe")]
    result = GridService.run_grid(configs, parallelism=1)

    assert [task.status for task in result.tasks] == [TaskStatus.SUCCESS, TaskStatus.FAILURE]
    assert result.tasks[1].error == "RuntimeError: switch out of memory"
    errors = [row for row in result.rows if row["metric"] == "error"]
    assert errors == [dict(
        algorithm="hashpipe", trace="zipf-1.1-cap500", n_flows=60, budget_bytes=65536,
        metric="error", threshold=None, value="RuntimeError: switch out of memory", seed=7,
    )]
    assert len(result.reports) == 1


def test_fsc_does_not_grow_with_more_flows(experiment_config_factory):
    configs = [
        experiment_config_factory(budget_bytes=4096, n_flows=n, max_flow_size=100) for n in (100, 200, 400, 800)
    ]
    fsc = [report.fsc for report in run_grid(configs, parallelism=1).reports]
    assert all(a >= b for a, b in zip(fsc, fsc[1:]))
    assert fsc[-1] < 0.5


@pytest.fixture
def results(tmp_path, experiment_config_factory):
    configs = [
        experiment_config_factory(algorithm=a, seed=s, n_flows=80, budget_bytes=4096, thresholds=[10])
        for a in ("hashflow", "hashpipe")
        for s in (1, 2, 3)
    ]
    grid = run_grid(configs, parallelism=1)
    path = tmp_path / "results.csv"
    write_results(grid.rows, path)
    return path, grid


def test_report_fsc_figure_averages_seeds(results):
    path, grid = results
    table = ReportService.figure(path, "fsc")
    assert list(table.columns) == [
        "algorithm", "trace", "n_flows", "budget_bytes", "metric", "threshold", "mean", "std", "runs",
    ]
    assert table["algorithm"].tolist() == ["hashflow", "hashpipe"]
    assert table["runs"].tolist() == [3, 3]
    hashflow = [r.fsc for r in grid.reports if r.config.algorithm == "hashflow"]
    assert table.loc[0, "mean"] == pytest.approx(sum(hashflow) / 3)
    assert table.loc[0, "std"] == pytest.approx(pd.Series(hashflow).std())


def test_report_f1_figure_keeps_thresholds(results):
    table = ReportService.figure(results[0], "f1")
    assert set(table["metric"]) == {"precision", "recall", "f1"}
    assert set(table["threshold"]) == {10}
    assert len(table) == 6


def test_report_error_rows_are_ignored(tmp_path):
    path = tmp_path / "errors.csv"
    write_results([dict(
        algorithm="hashflow", trace="t", n_flows=10, budget_bytes=64, metric="error",
        threshold=None, value="boom", seed=1,
    )], path)
    assert ReportService.figure(path, "fsc").empty


def test_report_unknown_figure(results):
    with pytest.raises(UsageError, match="unknown figure"):
        ReportService.figure(results[0], "latency")


def test_report_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("algorithm,value\nhashflow,1\n")
    with pytest.raises(TraceInputError, match="missing columns"):
        ReportService.figure(path, "fsc")


def test_report_write_figure(results, tmp_path):
    out = tmp_path / "fsc.csv"
    ReportService.write_figure(ReportService.figure(results[0], "fsc"), out)
    assert out.read_text().splitlines()[0] == "algorithm,trace,n_flows,budget_bytes,metric,threshold,mean,std,runs"


def test_count_min_error_grows_with_flow_count():
    # 4 rows of 2K counters, as a switch would budget a plain count-min sketch
    are = [countmin_are(n, width=2000, depth=4, seed=5) for n in (1000, 4000, 10_000)]
    assert are[0] < are[1] < are[2]
    assert are[0] < 0.5
    assert are[2] > 1.0
