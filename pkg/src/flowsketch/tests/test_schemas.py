from pathlib import Path

import pytest

from flowsketch.bench.schemas import (
    CostCounters,
    ExperimentConfig,
    expand_grid,
    load_experiment,
    load_grid,
)
from flowsketch.core import OpCounter
from flowsketch.exceptions import ConfigurationError
from flowsketch.hashflow import Layout


def write_config(tmp_path, text: str) -> Path:
    path = tmp_path / "experiment.conf"
    path.write_text(text)
    return path


def test_defaults_come_from_settings(monkeypatch):
    config = ExperimentConfig(algorithm="hashflow", budget_bytes=1024, n_flows=10)
    assert config.layout is Layout.PIPELINED
    assert config.depth == 3
    assert config.thresholds == [50, 100, 200, 400, 800]
    assert config.trace_path is None

    monkeypatch.setenv("FLOWSKETCH_LAYOUT", "multihash")
    monkeypatch.setenv("FLOWSKETCH_SEED", "9")
    config = ExperimentConfig(algorithm="hashflow", budget_bytes=1024, n_flows=10)
    assert config.layout is Layout.MULTIHASH
    assert config.seed == 9


def test_from_flat_applies_aliases_and_coercion():
    config = ExperimentConfig.from_flat(
        dict(algorithm="elastic", budget="4096", n_flows="100", threshold=["100", "50", "100"], zipf="1.2", cap="900")
    )
    assert config.budget_bytes == 4096
    assert config.thresholds == [50, 100]
    assert config.zipf_exponent == 1.2
    assert config.trace_label == "zipf-1.2-cap900"
    assert ExperimentConfig.from_flat(dict(algorithm="hashflow", budget=64, n_flows=1, threshold="20")).thresholds == [20]


@pytest.mark.parametrize(
    "values, message",
    [
        (dict(algorithm="countsketch", budget=64, n_flows=1), "unknown algorithm"),
        (dict(algorithm="hashflow", budget=0, n_flows=1), "budget_bytes"),
        (dict(algorithm="hashflow", budget=64, n_flows=1, threshold="0"), "at least 1"),
        (dict(algorithm="hashflow", budget=64, n_flows=1, preset="lab"), "unknown preset"),
        (dict(algorithm="hashflow", budget=64, n_flows=1, colour="red"), "colour"),
        (dict(algorithm="hashflow", budget=64, budget_bytes=64, n_flows=1), "given twice"),
    ],
)
def test_invalid_configs(values, message):
    with pytest.raises(ConfigurationError, match=message):
        ExperimentConfig.from_flat(values)


def test_trace_labels(experiment_config_factory):
    assert experiment_config_factory(trace_path="synthetic").trace_path is None
    assert experiment_config_factory(trace_path="/data/caida.csv").trace_label == "caida.csv"
    assert experiment_config_factory(preset="campus", max_flow_size=None).trace_label == "campus"
    assert experiment_config_factory(max_flow_size=None).trace_label == "zipf-1.1-cap100000"


def test_synthetic_spec(experiment_config_factory):
    spec = experiment_config_factory(preset="isp-sampled", max_flow_size=None, trace_flows=900).synthetic_spec()
    assert (spec.zipf_exponent, spec.max_flow_size, spec.flow_count, spec.seed) == (0.4, 5, 900, 7)


def test_algorithm_labels(experiment_config_factory):
    assert experiment_config_factory().algorithm_label == "hashflow"
    assert experiment_config_factory(layout="multihash", alpha=0.5).algorithm_label == "hashflow-multihash"
    assert experiment_config_factory(depth=4, alpha=0.5).algorithm_label == "hashflow-d4-a0.5"
    assert experiment_config_factory(algorithm="elastic", depth=4).algorithm_label == "elastic"


def test_expand_grid_is_a_cartesian_product():
    configs = expand_grid(dict(
        algorithm=["hashflow", "hashpipe"], budget="4096", n_flows=["100", "200", "400"], seed=["1", "2"],
        threshold=["10", "20"],
    ))
    assert len(configs) == 12
    assert {(c.algorithm, c.n_flows, c.seed) for c in configs} == {
        (a, n, s) for a in ("hashflow", "hashpipe") for n in (100, 200, 400) for s in (1, 2)
    }
    assert all(c.thresholds == [10, 20] for c in configs)


def test_grid_rejects_sweeping_other_keys():
    with pytest.raises(ConfigurationError, match="cannot be swept"):
        expand_grid(dict(algorithm="hashflow", budget="4096", n_flows="10", interleaving=["sorted", "shuffled"]))


def test_env_seed_replaces_the_seed_sweep(monkeypatch, tmp_path):
    path = write_config(tmp_path, "algorithm = hashflow\nbudget = 4096\nn_flows = 10\nseed = 1, 2, 3\n")
    assert len(load_grid(path)) == 3
    monkeypatch.setenv("FLOWSKETCH_SEED", "17")
    assert [c.seed for c in load_grid(path)] == [17]


def test_load_experiment(tmp_path, monkeypatch):
    path = write_config(tmp_path, "algorithm = flowradar\nbudget_bytes = 8192\nn_flows = 50\nthresholds = 5, 10\n")
    config = load_experiment(path)
    assert (config.algorithm, config.budget_bytes, config.thresholds, config.seed) == ("flowradar", 8192, [5, 10], 1)

    monkeypatch.setenv("FLOWSKETCH_SEED", "3")
    assert load_experiment(path).seed == 3


def test_load_experiment_rejects_sweeps(tmp_path):
    path = write_config(tmp_path, "algorithm = hashflow, hashpipe\nbudget = 4096\nn_flows = 10\n")
    with pytest.raises(ConfigurationError, match="grid"):
        load_experiment(path)


def test_cost_counters_from_counter():
    counter = OpCounter()
    counter.record(4, 5)
    counter.record(1, 2)
    costs = CostCounters.from_counter(counter)
    assert (costs.packets, costs.hash_ops_max, costs.memory_accesses_total) == (2, 4, 7)
    assert costs.hash_ops_mean == 2.5
