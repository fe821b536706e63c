"""
HashFlow: a main table of exact flow records, probed with d hash functions,
backed by an ancillary table of (digest, small count) summaries.

Packets that find an empty or matching main-table bucket are recorded
exactly. Packets whose flow collides on all d probes fall through to the
ancillary table, where a mismatching digest replaces the resident summary.
A summary whose count catches up with the smallest colliding main-table
record (the sentinel) is promoted back into the main table in its place.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterator

from xxhash import xxh64_intdigest

from .baselines import linear_counting
from .core import CardinalityEstimate, FlowCollector, FlowKey, FlowRecord, HashFamily, OpCounter
from .exceptions import ConfigurationError


logger = logging.getLogger(__name__)


class Layout(enum.StrEnum):
    MULTIHASH = "multihash"
    PIPELINED = "pipelined"


class UpdateOutcome(enum.StrEnum):
    HIT_MAIN = "hit_main"
    INSERTED_MAIN = "inserted_main"
    HIT_ANCILLARY = "hit_ancillary"
    REPLACED_ANCILLARY = "replaced_ancillary"
    PROMOTED = "promoted"


@dataclass(frozen=True, slots=True)
class SentinelRef:
    position: int  # flat bucket index across all stages
    stage: int  # 0-based; always 0 for the multi-hash layout
    min_count: int


def pipeline_stage_sizes(n: int, depth: int, alpha: float) -> list[int]:
    """
    Geometric split n_k = alpha^(k-1) * (1-alpha)/(1-alpha^d) * n, floored,
    with the rounding remainder added to the first stage.
    """
    if not 0 < alpha < 1:
        raise ConfigurationError(f"pipeline weight alpha must be in (0, 1), got {alpha}")
    if n < depth:
        raise ConfigurationError(f"main table needs at least depth={depth} buckets, got {n}")
    first = (1 - alpha) / (1 - alpha ** depth) * n
    sizes = [math.floor(first * alpha ** k) for k in range(depth)]
    sizes[0] += n - sum(sizes)
    for stage, size in enumerate(sizes, start=1):
        if size < 1:
            raise ConfigurationError(
                f"pipelined stage {stage} would be empty with n={n}, d={depth}, alpha={alpha}"
            )
    return sizes


class HashFlowSketch(FlowCollector):
    name = "hashflow"

    def __init__(
        self,
        main_buckets: int,
        ancillary_cells: int,
        depth: int = 3,
        layout: Layout | str = Layout.PIPELINED,
        alpha: float = 0.7,
        seed: int = 1,
        digest_width: int = 8,
        counter_width: int = 8,
    ):
        layout = Layout(layout)
        if depth < 1:
            raise ConfigurationError(f"depth must be positive, got {depth}")
        if main_buckets < depth:
            raise ConfigurationError(
                f"main table needs at least depth={depth} buckets, got {main_buckets}"
            )
        if ancillary_cells < 1:
            raise ConfigurationError(f"ancillary table needs at least one cell, got {ancillary_cells}")
        if not 1 <= digest_width <= 32:
            raise ConfigurationError(f"digest_width must be within 1..32, got {digest_width}")
        if not 1 <= counter_width <= 32:
            raise ConfigurationError(f"counter_width must be within 1..32, got {counter_width}")

        self.layout = layout
        self.depth = depth
        self.alpha = alpha
        self.seed = seed
        self.main_buckets = main_buckets
        self.ancillary_cells = ancillary_cells
        self.digest_width = digest_width
        self.counter_width = counter_width

        if layout is Layout.PIPELINED:
            self.stage_sizes = pipeline_stage_sizes(main_buckets, depth, alpha)
            offsets = [sum(self.stage_sizes[:k]) for k in range(depth)]
            self._probes = list(zip(offsets, self.stage_sizes))
        else:
            self.stage_sizes = [main_buckets]
            self._probes = [(0, main_buckets)] * depth

        # h_1..h_d address the main table, member d+1 is g_1
        self.family = HashFamily(seed, depth + 1)
        self._seeds = self.family.seeds
        self._digest_mask = (1 << digest_width) - 1
        self._counter_max = (1 << counter_width) - 1

        self._keys: list[FlowKey | None] = [None] * main_buckets
        self._counts = [0] * main_buckets
        self._anc_digests = [0] * ancillary_cells
        self._anc_counts = [0] * ancillary_cells
        self._occupied = 0

        self.counter = OpCounter()
        self.last_sentinel: SentinelRef | None = None

        logger.debug(
            f"HashFlow {layout} d={depth} stages={self.stage_sizes} ancillary={ancillary_cells}"
        )

    @property
    def capacity(self) -> int:
        return self.main_buckets

    def _stage_of(self, position: int) -> int:
        if self.layout is Layout.MULTIHASH:
            return 0
        for stage, (offset, size) in enumerate(self._probes):
            if position < offset + size:
                return stage
        raise IndexError(position)

    def update(self, key: FlowKey) -> UpdateOutcome:
        data = key.packed
        seeds = self._seeds
        keys = self._keys
        counts = self._counts

        minimum = -1
        pos = -1
        h1 = 0
        reads = 0
        for probe, (offset, size) in enumerate(self._probes):
            h = xxh64_intdigest(data, seed=seeds[probe + 1])
            if probe == 0:
                h1 = h
            idx = offset + ((h * size) >> 64)
            reads += 1
            count = counts[idx]
            if count == 0:
                keys[idx] = key
                counts[idx] = 1
                self._occupied += 1
                self.counter.record(probe + 1, reads + 1)
                return UpdateOutcome.INSERTED_MAIN
            if keys[idx] == key:
                counts[idx] = count + 1
                self.counter.record(probe + 1, reads + 1)
                return UpdateOutcome.HIT_MAIN
            if minimum < 0 or count < minimum:
                minimum = count
                pos = idx

        self.last_sentinel = SentinelRef(pos, self._stage_of(pos), minimum)

        depth = self.depth
        cell = (xxh64_intdigest(data, seed=seeds[depth + 1]) * self.ancillary_cells) >> 64
        digest = h1 & self._digest_mask
        anc_count = self._anc_counts[cell]
        reads += 1

        if anc_count == 0 or self._anc_digests[cell] != digest:
            self._anc_digests[cell] = digest
            self._anc_counts[cell] = 1
            self.counter.record(depth + 1, reads + 1)
            return UpdateOutcome.REPLACED_ANCILLARY

        if anc_count < minimum:
            if anc_count < self._counter_max:
                self._anc_counts[cell] = anc_count + 1
            self.counter.record(depth + 1, reads + 1)
            return UpdateOutcome.HIT_ANCILLARY

        keys[pos] = key
        counts[pos] = anc_count + 1
        self._anc_counts[cell] = 0
        self.counter.record(depth + 1, reads + 2)
        return UpdateOutcome.PROMOTED

    def query(self, key: FlowKey) -> int:
        data = key.packed
        seeds = self._seeds
        h1 = 0
        for probe, (offset, size) in enumerate(self._probes):
            h = xxh64_intdigest(data, seed=seeds[probe + 1])
            if probe == 0:
                h1 = h
            idx = offset + ((h * size) >> 64)
            if self._counts[idx] and self._keys[idx] == key:
                return self._counts[idx]

        cell = (xxh64_intdigest(data, seed=seeds[self.depth + 1]) * self.ancillary_cells) >> 64
        if self._anc_counts[cell] and self._anc_digests[cell] == h1 & self._digest_mask:
            return self._anc_counts[cell]
        return 0

    def export_records(self) -> list[FlowRecord]:
        return [
            FlowRecord(key, count)
            for key, count in zip(self._keys, self._counts)
            if count
        ]

    report = export_records

    def estimate_cardinality(self) -> CardinalityEstimate:
        empty = self._anc_counts.count(0)
        ancillary = linear_counting(self.ancillary_cells, empty)
        if ancillary.overflow:
            logger.warning(
                f"ancillary table fully occupied ({self.ancillary_cells} cells), "
                f"cardinality is a lower bound"
            )
        return CardinalityEstimate(self._occupied + ancillary.value, ancillary.overflow)

    cardinality = estimate_cardinality

    def occupancy(self) -> float:
        return self._occupied / self.main_buckets

    @property
    def occupied_buckets(self) -> int:
        return self._occupied

    def buckets(self) -> Iterator[tuple[int, int, FlowRecord | None]]:
        """(stage, position, record or None) for every main-table bucket."""
        for stage, (offset, size) in enumerate(self._probes if self.layout is Layout.PIPELINED else self._probes[:1]):
            for position in range(offset, offset + size):
                count = self._counts[position]
                yield stage, position, FlowRecord(self._keys[position], count) if count else None

    def ancillary(self) -> Iterator[tuple[int, int]]:
        """(digest, count) for every ancillary cell; digest is stale when count == 0."""
        return zip(self._anc_digests, self._anc_counts)


def new_hashflow(
    main_buckets: int,
    ancillary_cells: int,
    depth: int = 3,
    layout: Layout | str = Layout.PIPELINED,
    alpha: float = 0.7,
    seed: int = 1,
    **widths,
) -> HashFlowSketch:
    return HashFlowSketch(
        main_buckets,
        ancillary_cells,
        depth=depth,
        layout=layout,
        alpha=alpha,
        seed=seed,
        **widths,
    )
