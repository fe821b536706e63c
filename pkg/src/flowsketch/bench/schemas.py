"""
Experiment configuration and result schemas.
"""
import itertools
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from flowsketch.core import OpCounter
from flowsketch.exceptions import ConfigurationError
from flowsketch.hashflow import Layout
from flowsketch.registry import available_algorithms
from flowsketch.settings import env_seed, get_settings, load_config
from flowsketch.traffic import PRESETS, SyntheticSpec


def _setting(name: str):
    return lambda: get_settings()[name]


# config file keys that are spelled differently from the schema fields
CONFIG_ALIASES = {
    "trace": "trace_path",
    "zipf": "zipf_exponent",
    "cap": "max_flow_size",
    "budget": "budget_bytes",
    "threshold": "thresholds",
}

# keys a grid config may give as a list; the grid is their cartesian product
GRID_KEYS = ("algorithm", "budget_bytes", "n_flows", "seed", "layout", "alpha", "depth", "preset", "zipf_exponent")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", validate_default=True)

    algorithm: str = Field(..., description="hashflow, hashpipe, elastic or flowradar")
    budget_bytes: int = Field(..., ge=1, description="Memory budget shared by every structure")
    n_flows: int = Field(..., ge=1, description="Number of flows fed to the algorithm")
    seed: int = Field(default_factory=_setting("SEED"), description="Seeds both the sketch and the synthetic trace")
    thresholds: list[int] = Field(
        default_factory=lambda: list(get_settings()["HEAVY_HITTER_THRESHOLDS"]),
        description="Heavy-hitter thresholds T; flows with more than T packets",
    )

    trace_path: Path | None = Field(None, description="CSV trace; synthetic when absent")
    preset: str | None = Field(None, description="Synthetic trace preset")
    zipf_exponent: float | None = Field(None, gt=0)
    max_flow_size: int | None = Field(None, ge=1)
    trace_flows: int | None = Field(None, ge=1, description="Flows in the synthetic trace, defaults to n_flows")
    interleaving: Literal["shuffled", "sorted"] = Field(
        "shuffled", description="Shuffle packets or emit them flow by flow"
    )
    random_selection: bool = Field(False, description="Pick flows at random instead of first seen")

    layout: Layout = Field(default_factory=_setting("LAYOUT"))
    alpha: float = Field(default_factory=_setting("ALPHA"), gt=0, lt=1)
    depth: int = Field(default_factory=_setting("DEPTH"), ge=1)
    digest_width: int = Field(default_factory=_setting("DIGEST_WIDTH"), ge=1, le=32)
    ancillary_counter_width: int = Field(default_factory=_setting("ANCILLARY_COUNTER_WIDTH"), ge=1, le=32)
    elastic_lambda: float = Field(default_factory=_setting("ELASTIC_LAMBDA"), gt=0)
    elastic_light_counter_width: int = Field(default_factory=_setting("ELASTIC_LIGHT_COUNTER_WIDTH"), ge=1, le=32)

    @field_validator("algorithm")
    def validate_algorithm(cls, v):
        available = available_algorithms()
        if v not in available:
            raise ValueError(f"unknown algorithm '{v}', expected one of {', '.join(available)}")
        return v

    @field_validator("preset")
    def validate_preset(cls, v):
        if v is not None and v not in PRESETS:
            raise ValueError(f"unknown preset '{v}', expected one of {', '.join(sorted(PRESETS))}")
        return v

    @field_validator("thresholds", mode="before")
    def split_thresholds(cls, v):
        if isinstance(v, (str, int)):
            return [v]
        return v

    @field_validator("thresholds")
    def validate_thresholds(cls, v):
        if any(t < 1 for t in v):
            raise ValueError("heavy-hitter thresholds must be at least 1")
        return sorted(set(v))

    @field_validator("trace_path", mode="before")
    def synthetic_means_no_path(cls, v):
        if isinstance(v, str) and v.strip().lower() in ("", "synthetic"):
            return None
        return v

    def synthetic_spec(self) -> SyntheticSpec:
        values: dict[str, Any] = dict(PRESETS[self.preset]) if self.preset else {}
        if self.zipf_exponent is not None:
            values["zipf_exponent"] = self.zipf_exponent
        if self.max_flow_size is not None:
            values["max_flow_size"] = self.max_flow_size
        try:
            return SyntheticSpec(
                flow_count=self.trace_flows or self.n_flows,
                seed=self.seed,
                interleaving=self.interleaving,
                **values,
            )
        except ValidationError as ex:
            raise ConfigurationError(f"invalid synthetic trace: {ex}") from ex

    @property
    def trace_label(self) -> str:
        if self.trace_path is not None:
            return self.trace_path.name
        if self.preset and self.zipf_exponent is None and self.max_flow_size is None:
            return self.preset
        spec = self.synthetic_spec()
        return f"zipf-{spec.zipf_exponent:g}-cap{spec.max_flow_size}"

    @property
    def algorithm_label(self) -> str:
        """The algorithm name, suffixed with HashFlow parameters that differ from the defaults."""
        if self.algorithm != "hashflow":
            return self.algorithm
        settings = get_settings()
        suffix = []
        if self.layout != settings["LAYOUT"]:
            suffix.append(str(self.layout))
        if self.depth != settings["DEPTH"]:
            suffix.append(f"d{self.depth}")
        if self.layout is Layout.PIPELINED and self.alpha != settings["ALPHA"]:
            suffix.append(f"a{self.alpha:g}")
        return "-".join([self.algorithm, *suffix])

    @classmethod
    def from_flat(cls, values: dict) -> "ExperimentConfig":
        try:
            return cls(**normalize_keys(values))
        except ValidationError as ex:
            raise ConfigurationError(f"invalid experiment config: {ex}") from ex


def normalize_keys(values: dict) -> dict:
    normalized = {}
    for key, value in values.items():
        key = CONFIG_ALIASES.get(key, key)
        if key in normalized:
            raise ConfigurationError(f"key '{key}' given twice")
        normalized[key] = value
    return normalized


def expand_grid(values: dict) -> list[ExperimentConfig]:
    values = normalize_keys(values)
    seed = env_seed()
    if seed is not None:
        values["seed"] = str(seed)

    for key, value in values.items():
        if isinstance(value, list) and key not in GRID_KEYS and key != "thresholds":
            raise ConfigurationError(f"key '{key}' cannot be swept, only {', '.join(GRID_KEYS)}")

    swept = [key for key in GRID_KEYS if isinstance(values.get(key), list)]
    fixed = {key: value for key, value in values.items() if key not in swept}
    configs = []
    for combination in itertools.product(*(values[key] for key in swept)):
        configs.append(ExperimentConfig.from_flat({**fixed, **dict(zip(swept, combination))}))
    return configs


def load_experiment(path) -> ExperimentConfig:
    values = load_config(path)
    seed = env_seed()
    if seed is not None:
        values["seed"] = str(seed)
    if any(isinstance(value, list) for key, value in values.items() if key not in ("thresholds", "threshold")):
        raise ConfigurationError(f"{path}: lists are only allowed in grid configs (except thresholds)")
    return ExperimentConfig.from_flat(values)


def load_grid(path) -> list[ExperimentConfig]:
    return expand_grid(load_config(path))


class CostCounters(BaseModel):
    packets: int = Field(0, ge=0)
    hash_ops_total: int = Field(0, ge=0)
    hash_ops_mean: float = Field(0.0, ge=0)
    hash_ops_max: int = Field(0, ge=0)
    memory_accesses_total: int = Field(0, ge=0)
    memory_accesses_mean: float = Field(0.0, ge=0)
    memory_accesses_max: int = Field(0, ge=0)

    @classmethod
    def from_counter(cls, counter: OpCounter) -> "CostCounters":
        return cls(
            packets=counter.packets,
            hash_ops_total=counter.hash_ops,
            hash_ops_mean=counter.mean_hash_ops,
            hash_ops_max=counter.max_hash_ops,
            memory_accesses_total=counter.memory_accesses,
            memory_accesses_mean=counter.mean_memory_accesses,
            memory_accesses_max=counter.max_memory_accesses,
        )


class ThresholdMetrics(BaseModel):
    threshold: int = Field(..., ge=1)
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    heavy_hitter_are: float | None = Field(None, ge=0, description="None when nothing was correctly detected")
    reported: int = Field(0, ge=0)
    real: int = Field(0, ge=0)


class MetricsReport(BaseModel):
    config: ExperimentConfig
    fsc: float = Field(..., ge=0, le=1)
    are_all_flows: float = Field(..., ge=0)
    cardinality_estimate: int = Field(..., ge=0)
    cardinality_overflow: bool = False
    cardinality_re: float = Field(..., ge=0)
    heavy_hitters: list[ThresholdMetrics] = Field(default_factory=list)
    costs: CostCounters
    records_reported: int = Field(0, ge=0)
    fully_decoded: bool | None = Field(None, description="FlowRadar only")
    wall_time: float = Field(0.0, ge=0, description="Seconds, informational")
    packets_per_second: float = Field(0.0, ge=0, description="Informational")

    def _row(self, metric: str, value, threshold: int | None = None) -> dict:
        return row_for(self.config, metric, value, threshold)

    def to_rows(self) -> list[dict]:
        rows = [
            self._row("fsc", self.fsc),
            self._row("are", self.are_all_flows),
            self._row("re", self.cardinality_re),
            self._row("hash_ops_mean", self.costs.hash_ops_mean),
            self._row("hash_ops_max", self.costs.hash_ops_max),
            self._row("mem_accesses_mean", self.costs.memory_accesses_mean),
            self._row("mem_accesses_max", self.costs.memory_accesses_max),
        ]
        for hh in self.heavy_hitters:
            rows.append(self._row("precision", hh.precision, hh.threshold))
            rows.append(self._row("recall", hh.recall, hh.threshold))
            rows.append(self._row("f1", hh.f1, hh.threshold))
            rows.append(self._row("hh_are", hh.heavy_hitter_are, hh.threshold))
        return rows


def row_for(config: ExperimentConfig, metric: str, value, threshold: int | None = None) -> dict:
    return dict(
        algorithm=config.algorithm_label,
        trace=config.trace_label,
        n_flows=config.n_flows,
        budget_bytes=config.budget_bytes,
        metric=metric,
        threshold=threshold,
        value=value,
        seed=config.seed,
    )


def error_row(config: ExperimentConfig, error: str) -> dict:
    return row_for(config, "error", error)


def row_sort_key(row: dict):
    threshold = row["threshold"]
    return (
        row["algorithm"],
        row["trace"],
        row["n_flows"],
        row["budget_bytes"],
        row["seed"],
        row["metric"],
        -1 if threshold is None else threshold,
    )
