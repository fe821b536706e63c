"""
Memory parity: every structure gets the same number of bits.

A flow record is a 104-bit flow ID plus a 32-bit counter.
"""
import logging
import math
from dataclasses import dataclass, field

from flowsketch.core import KEY_BITS
from flowsketch.exceptions import ConfigurationError


logger = logging.getLogger(__name__)

COUNTER_BITS = 32
RECORD_BITS = KEY_BITS + COUNTER_BITS  # 136
ELASTIC_HEAVY_BITS = KEY_BITS + 2 * COUNTER_BITS + 1  # vote+, vote-, flag
FLOWRADAR_CELL_BITS = KEY_BITS + 2 * COUNTER_BITS  # flow XOR, flow count, packet count
FLOWRADAR_BLOOM_BITS_PER_CELL = 40


@dataclass(frozen=True, slots=True)
class Sizing:
    algorithm: str
    budget_bits: int
    cells: dict[str, int] = field(default_factory=dict)

    def __getitem__(self, name: str) -> int:
        return self.cells[name]

    @property
    def used_bits(self) -> int:
        return self.cells.get("used_bits", 0)


def _minimum(algorithm: str, bits_per_unit: int, units: int):
    minimum_bytes = math.ceil(bits_per_unit * units / 8)
    return ConfigurationError(
        f"{algorithm} needs a memory budget of at least {minimum_bytes} bytes"
    )


def size_structures(
    algorithm: str,
    memory_budget_bytes: int,
    depth: int = 3,
    digest_width: int = 8,
    ancillary_counter_width: int = 8,
    light_counter_width: int = 8,
) -> Sizing:
    bits = memory_budget_bytes * 8

    match algorithm:
        case "hashflow":
            per_cell = RECORD_BITS + digest_width + ancillary_counter_width
            cells = bits // per_cell
            if cells < depth:
                raise _minimum(algorithm, per_cell, depth)
            sizing = dict(main_buckets=cells, ancillary_cells=cells, used_bits=cells * per_cell)
        case "hashpipe":
            stages = 4
            stage_cells = bits // RECORD_BITS // stages
            if stage_cells < 1:
                raise _minimum(algorithm, RECORD_BITS, stages)
            sizing = dict(
                total_cells=bits // RECORD_BITS,
                stage_cells=stage_cells,
                used_bits=stage_cells * stages * RECORD_BITS,
            )
        case "elastic":
            per_pair = ELASTIC_HEAVY_BITS + light_counter_width
            pairs = bits // per_pair
            if pairs < 3:
                raise _minimum(algorithm, per_pair, 3)
            sizing = dict(
                heavy_cells=pairs,
                light_cells=pairs,
                heavy_stage_cells=pairs // 3,
                used_bits=(pairs // 3) * 3 * ELASTIC_HEAVY_BITS + pairs * light_counter_width,
            )
        case "flowradar":
            per_cell = FLOWRADAR_CELL_BITS + FLOWRADAR_BLOOM_BITS_PER_CELL
            cells = bits // per_cell
            if cells < 3:
                raise _minimum(algorithm, per_cell, 3)
            sizing = dict(
                counting_cells=cells,
                bloom_bits=FLOWRADAR_BLOOM_BITS_PER_CELL * cells,
                used_bits=cells * per_cell,
            )
        case _:
            raise ConfigurationError(f"no sizing rule for algorithm '{algorithm}'")

    logger.debug(f"{algorithm} at {memory_budget_bytes} bytes: {sizing}")
    return Sizing(algorithm, bits, sizing)
