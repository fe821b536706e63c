"""
Builders turning an experiment config into a sized, seeded collector.
"""
from flowsketch.baselines import ElasticSketch, FlowRadarSketch, HashPipeSketch
from flowsketch.core import FlowCollector
from flowsketch.hashflow import HashFlowSketch
from flowsketch.registry import get_builder, register_algorithm

from .sizing import Sizing, size_structures


@register_algorithm("hashflow")
def build_hashflow(config, sizing: Sizing) -> HashFlowSketch:
    return HashFlowSketch(
        sizing["main_buckets"],
        sizing["ancillary_cells"],
        depth=config.depth,
        layout=config.layout,
        alpha=config.alpha,
        seed=config.seed,
        digest_width=config.digest_width,
        counter_width=config.ancillary_counter_width,
    )


@register_algorithm("hashpipe")
def build_hashpipe(config, sizing: Sizing) -> HashPipeSketch:
    return HashPipeSketch(sizing["total_cells"], seed=config.seed)


@register_algorithm("elastic")
def build_elastic(config, sizing: Sizing) -> ElasticSketch:
    return ElasticSketch(
        sizing["heavy_cells"],
        sizing["light_cells"],
        seed=config.seed,
        lambda_=config.elastic_lambda,
        light_counter_width=config.elastic_light_counter_width,
    )


@register_algorithm("flowradar")
def build_flowradar(config, sizing: Sizing) -> FlowRadarSketch:
    return FlowRadarSketch(sizing["counting_cells"], seed=config.seed, bloom_bits=sizing["bloom_bits"])


def build_collector(config) -> FlowCollector:
    sizing = size_structures(
        config.algorithm,
        config.budget_bytes,
        depth=config.depth,
        digest_width=config.digest_width,
        ancillary_counter_width=config.ancillary_counter_width,
        light_counter_width=config.elastic_light_counter_width,
    )
    return get_builder(config.algorithm)(config, sizing)
