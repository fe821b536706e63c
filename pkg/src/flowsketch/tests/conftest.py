import numpy as np
import pytest
from pytest_factoryboy import register

from flowsketch.test_factories import (
    ExperimentConfigFactory,
    FlowKeyFactory,
    SyntheticSpecFactory,
    TraceEventFactory,
)
from flowsketch.traffic import random_flow_keys

register(FlowKeyFactory)
register(TraceEventFactory)
register(SyntheticSpecFactory)
register(ExperimentConfigFactory)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("FLOWSKETCH_SEED", "FLOWSKETCH_DEPTH", "FLOWSKETCH_LAYOUT", "FLOWSKETCH_PARALLELISM"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def make_keys():
    def make(count: int, seed: int = 0):
        return random_flow_keys(count, np.random.default_rng(seed))

    return make
