"""
Comparison algorithms (HashPipe, ElasticSketch hardware version, FlowRadar)
and the primitives they share: a single count-min row, a bloom filter and
linear counting.
"""
import logging
import math
from dataclasses import dataclass

from bitarray import bitarray
from xxhash import xxh64_intdigest

from .core import CardinalityEstimate, FlowCollector, FlowKey, FlowRecord, HashFamily, OpCounter
from .exceptions import ConfigurationError, UsageError


logger = logging.getLogger(__name__)


def linear_counting(w: int, z: int, per_item: int = 1) -> CardinalityEstimate:
    """
    w * ln(w / z) rounded, divided by the number of cells each item sets.
    With no empty cell left the estimate is undefined: w * ln(w) is returned
    flagged as overflow.
    """
    if w < 1:
        raise UsageError(f"linear counting needs at least one cell, got w={w}")
    if z < 0 or z > w:
        raise UsageError(f"empty cells z={z} must be within 0..w={w}")
    if z == 0:
        return CardinalityEstimate(round(w * math.log(w) / per_item), overflow=True)
    return CardinalityEstimate(round(w * math.log(w / z) / per_item))


class CountMinRow:
    """One row of a count-min sketch with saturating counters."""

    def __init__(
        self,
        width: int,
        seed: int = 1,
        counter_width: int = 32,
        family: HashFamily | None = None,
        member: int = 1,
    ):
        if width < 1:
            raise ConfigurationError(f"count-min row needs at least one counter, got {width}")
        self.width = width
        self.family = family or HashFamily(seed, member)
        self.member = member
        self._seed = self.family.seeds[member]
        self.max_value = (1 << counter_width) - 1
        self.counters = [0] * width

    def index(self, key: FlowKey) -> int:
        return (xxh64_intdigest(key.packed, seed=self._seed) * self.width) >> 64

    def update(self, key: FlowKey, amount: int = 1) -> int:
        idx = self.index(key)
        value = min(self.counters[idx] + amount, self.max_value)
        self.counters[idx] = value
        return value

    def query(self, key: FlowKey) -> int:
        return self.counters[self.index(key)]

    def zeros(self) -> int:
        return self.counters.count(0)


def countmin_row_update(row: CountMinRow, key: FlowKey) -> int:
    return row.update(key)


def countmin_row_query(row: CountMinRow, key: FlowKey) -> int:
    return row.query(key)


class CountMinSketch:
    """
    `depth` count-min rows of `width` counters over one hash family. A query
    is the smallest of the row counters, so it never underestimates.
    """

    def __init__(self, width: int, depth: int = 4, seed: int = 1, counter_width: int = 32):
        if depth < 1:
            raise ConfigurationError(f"count-min sketch needs at least one row, got {depth}")
        self.family = HashFamily(seed, depth)
        self.rows = [
            CountMinRow(width, counter_width=counter_width, family=self.family, member=member)
            for member in range(1, depth + 1)
        ]
        self.counter = OpCounter()

    @property
    def width(self) -> int:
        return self.rows[0].width

    @property
    def depth(self) -> int:
        return len(self.rows)

    def update(self, key: FlowKey, amount: int = 1):
        for row in self.rows:
            row.update(key, amount)
        self.counter.record(self.depth, 2 * self.depth)

    def query(self, key: FlowKey) -> int:
        return min(row.query(key) for row in self.rows)


class BloomFilter:
    def __init__(self, bits: int, family: HashFamily, members: range):
        if bits < 1:
            raise ConfigurationError(f"bloom filter needs at least one bit, got {bits}")
        self.size = bits
        self.family = family
        self._seeds = [family.seeds[m] for m in members]
        self.bits = bitarray(bits)
        self.bits.setall(False)

    def positions(self, data: bytes) -> list[int]:
        size = self.size
        return [(xxh64_intdigest(data, seed=seed) * size) >> 64 for seed in self._seeds]

    def add(self, data: bytes) -> int:
        """Set the item's bits; returns how many were previously unset (0 means 'seen')."""
        newly_set = 0
        for pos in self.positions(data):
            if not self.bits[pos]:
                self.bits[pos] = True
                newly_set += 1
        return newly_set

    def zeros(self) -> int:
        return self.bits.count(0)


class HashPipeSketch(FlowCollector):
    """
    A pipeline of equal-size tables. Stage 1 always admits the newcomer and
    evicts the resident; later stages keep the larger of resident and carried
    record. A record carried past the last stage is discarded.
    """
    name = "hashpipe"

    def __init__(self, total_cells: int, stages: int = 4, seed: int = 1):
        stage_size = total_cells // stages
        if stage_size < 1:
            raise ConfigurationError(f"HashPipe needs at least {stages} cells, got {total_cells}")
        self.stages = stages
        self.stage_size = stage_size
        self.family = HashFamily(seed, stages)
        self._seeds = self.family.seeds
        self._keys: list[FlowKey | None] = [None] * (stage_size * stages)
        self._counts = [0] * (stage_size * stages)
        self.counter = OpCounter()
        self.discarded_records = 0
        self.discarded_packets = 0

    @property
    def capacity(self) -> int:
        return self.stage_size * self.stages

    def _slot(self, stage: int, data: bytes) -> int:
        return stage * self.stage_size + (
            (xxh64_intdigest(data, seed=self._seeds[stage + 1]) * self.stage_size) >> 64
        )

    def update(self, key: FlowKey):
        keys = self._keys
        counts = self._counts

        idx = self._slot(0, key.packed)
        resident = counts[idx]
        if resident == 0:
            keys[idx] = key
            counts[idx] = 1
            self.counter.record(1, 2)
            return
        if keys[idx] == key:
            counts[idx] = resident + 1
            self.counter.record(1, 2)
            return

        carried_key, carried_count = keys[idx], resident
        keys[idx] = key
        counts[idx] = 1
        hash_ops, accesses = 1, 2

        for stage in range(1, self.stages):
            idx = self._slot(stage, carried_key.packed)
            hash_ops += 1
            accesses += 2
            resident = counts[idx]
            if resident == 0:
                keys[idx] = carried_key
                counts[idx] = carried_count
                self.counter.record(hash_ops, accesses)
                return
            if keys[idx] == carried_key:
                counts[idx] = resident + carried_count
                self.counter.record(hash_ops, accesses)
                return
            if carried_count > resident:
                keys[idx], carried_key = carried_key, keys[idx]
                counts[idx], carried_count = carried_count, resident
            else:
                accesses -= 1

        self.discarded_records += 1
        self.discarded_packets += carried_count
        self.counter.record(hash_ops, accesses)

    def query(self, key: FlowKey) -> int:
        total = 0
        for stage in range(self.stages):
            idx = self._slot(stage, key.packed)
            if self._counts[idx] and self._keys[idx] == key:
                total += self._counts[idx]
        return total

    def report(self) -> list[FlowRecord]:
        return [FlowRecord(k, c) for k, c in zip(self._keys, self._counts) if c]

    def cardinality(self) -> CardinalityEstimate:
        # every stored record, fragments included
        return CardinalityEstimate(sum(1 for c in self._counts if c))

    def total_packets(self) -> int:
        return sum(self._counts)


@dataclass(slots=True)
class HeavyCell:
    key: FlowKey
    vote_pos: int
    vote_neg: int
    flag: bool


class ElasticSketch(FlowCollector):
    """
    Hardware version: a heavy part of three sub-tables with vote+/vote-
    eviction, spilling into a single saturating count-min row.
    """
    name = "elastic"

    def __init__(
        self,
        heavy_cells: int,
        light_cells: int,
        seed: int = 1,
        lambda_: float = 8.0,
        light_counter_width: int = 8,
        heavy_stages: int = 3,
    ):
        stage_size = heavy_cells // heavy_stages
        if stage_size < 1:
            raise ConfigurationError(
                f"ElasticSketch needs at least {heavy_stages} heavy cells, got {heavy_cells}"
            )
        if lambda_ <= 0:
            raise ConfigurationError(f"eviction threshold lambda must be positive, got {lambda_}")
        self.heavy_stages = heavy_stages
        self.stage_size = stage_size
        self.lambda_ = lambda_
        self.family = HashFamily(seed, heavy_stages + 1)
        self._seeds = self.family.seeds
        slots = stage_size * heavy_stages
        self._keys: list[FlowKey | None] = [None] * slots
        self._vote_pos = [0] * slots
        self._vote_neg = [0] * slots
        self._flags = [False] * slots
        self.light = CountMinRow(
            light_cells,
            counter_width=light_counter_width,
            family=self.family,
            member=heavy_stages + 1,
        )
        self.counter = OpCounter()

    @property
    def capacity(self) -> int:
        return self.stage_size * self.heavy_stages

    def _slot(self, stage: int, data: bytes) -> int:
        return stage * self.stage_size + (
            (xxh64_intdigest(data, seed=self._seeds[stage + 1]) * self.stage_size) >> 64
        )

    def update(self, key: FlowKey):
        keys = self._keys
        vote_pos = self._vote_pos
        vote_neg = self._vote_neg
        flags = self._flags

        carried_key, carried_count, carried_flag = key, 1, False
        hash_ops = accesses = 0
        for stage in range(self.heavy_stages):
            idx = self._slot(stage, carried_key.packed)
            hash_ops += 1
            accesses += 2
            if vote_pos[idx] == 0:
                keys[idx] = carried_key
                vote_pos[idx] = carried_count
                vote_neg[idx] = 0
                flags[idx] = carried_flag
                self.counter.record(hash_ops, accesses)
                return
            if keys[idx] == carried_key:
                vote_pos[idx] += carried_count
                self.counter.record(hash_ops, accesses)
                return
            vote_neg[idx] += carried_count
            if vote_neg[idx] >= self.lambda_ * vote_pos[idx]:
                evicted = (keys[idx], vote_pos[idx], flags[idx])
                keys[idx] = carried_key
                vote_pos[idx] = carried_count
                vote_neg[idx] = 1
                flags[idx] = True
                carried_key, carried_count, carried_flag = evicted

        self.light.update(carried_key, carried_count)
        self.counter.record(hash_ops + 1, accesses + 2)

    def heavy_cell(self, stage: int, key: FlowKey) -> HeavyCell | None:
        """The cell `key` hashes to in `stage`, whoever occupies it."""
        idx = self._slot(stage, key.packed)
        if not self._vote_pos[idx]:
            return None
        return HeavyCell(self._keys[idx], self._vote_pos[idx], self._vote_neg[idx], self._flags[idx])

    def query(self, key: FlowKey) -> int:
        total = 0
        found = flagged = False
        for stage in range(self.heavy_stages):
            idx = self._slot(stage, key.packed)
            if self._vote_pos[idx] and self._keys[idx] == key:
                total += self._vote_pos[idx]
                found = True
                flagged = flagged or self._flags[idx]
        if not found:
            return self.light.query(key)
        if flagged:
            return total + self.light.query(key)
        return total

    def report(self) -> list[FlowRecord]:
        records = []
        for key, votes, flag in zip(self._keys, self._vote_pos, self._flags):
            if votes:
                records.append(FlowRecord(key, votes + (self.light.query(key) if flag else 0)))
        return records

    def cardinality(self) -> CardinalityEstimate:
        heavy = sum(1 for votes in self._vote_pos if votes)
        light = linear_counting(self.light.width, self.light.zeros())
        if light.overflow:
            logger.warning(f"ElasticSketch light part saturated ({self.light.width} counters)")
        return CardinalityEstimate(heavy + light.value, light.overflow)


@dataclass(frozen=True, slots=True)
class DecodeResult:
    records: list[FlowRecord]
    fully_decoded: bool


class FlowRadarSketch(FlowCollector):
    """
    A bloom filter flags new flows; a counting table keeps, per cell, the XOR
    of flow IDs, the number of flows and the number of packets. The counting
    table is split into three equal segments, one per hash member.
    """
    name = "flowradar"

    BLOOM_HASHES = 4
    COUNTING_HASHES = 3
    BLOOM_BITS_PER_CELL = 40

    def __init__(self, counting_cells: int, seed: int = 1, bloom_bits: int | None = None):
        if counting_cells < self.COUNTING_HASHES:
            raise ConfigurationError(
                f"FlowRadar needs at least {self.COUNTING_HASHES} counting cells, got {counting_cells}"
            )
        self.counting_cells = counting_cells
        self.family = HashFamily(seed, self.BLOOM_HASHES + self.COUNTING_HASHES)
        self.bloom = BloomFilter(
            bloom_bits or self.BLOOM_BITS_PER_CELL * counting_cells,
            self.family,
            range(1, self.BLOOM_HASHES + 1),
        )
        base, extra = divmod(counting_cells, self.COUNTING_HASHES)
        sizes = [base + (1 if i < extra else 0) for i in range(self.COUNTING_HASHES)]
        offsets = [sum(sizes[:i]) for i in range(self.COUNTING_HASHES)]
        seeds = self.family.seeds
        self._segments = [
            (seeds[self.BLOOM_HASHES + 1 + i], offsets[i], sizes[i])
            for i in range(self.COUNTING_HASHES)
        ]
        self.flow_xor = [0] * counting_cells
        self.flow_count = [0] * counting_cells
        self.packet_count = [0] * counting_cells
        self.counter = OpCounter()
        self._decoded: DecodeResult | None = None
        self._decoded_map: dict[FlowKey, int] | None = None

    @property
    def capacity(self) -> int:
        return self.counting_cells

    def cells(self, data: bytes) -> list[int]:
        return [offset + ((xxh64_intdigest(data, seed=seed) * size) >> 64)
                for seed, offset, size in self._segments]

    def update(self, key: FlowKey):
        self._decoded = None
        data = key.packed
        newly_set = self.bloom.add(data)
        cells = self.cells(data)
        if newly_set:
            value = int.from_bytes(data, "big")
            for idx in cells:
                self.flow_xor[idx] ^= value
                self.flow_count[idx] += 1
                self.packet_count[idx] += 1
        else:
            for idx in cells:
                self.packet_count[idx] += 1
        self.counter.record(
            self.BLOOM_HASHES + self.COUNTING_HASHES,
            self.BLOOM_HASHES + newly_set + 2 * self.COUNTING_HASHES,
        )

    def decode(self) -> DecodeResult:
        if self._decoded is not None:
            return self._decoded

        xors = list(self.flow_xor)
        flows = list(self.flow_count)
        packets = list(self.packet_count)
        records = []
        pure = [idx for idx, count in enumerate(flows) if count == 1]
        while pure:
            idx = pure.pop()
            if flows[idx] != 1:
                continue
            value = xors[idx]
            key = FlowKey.from_int(value)
            cells = self.cells(key.packed)
            if idx not in cells:
                # the XOR no longer names a single member flow of this cell
                continue
            size = packets[idx]
            records.append(FlowRecord(key, size))
            for cell in cells:
                xors[cell] ^= value
                flows[cell] -= 1
                packets[cell] -= size
                if flows[cell] == 1:
                    pure.append(cell)

        fully_decoded = not any(flows)
        if not fully_decoded:
            remaining = sum(1 for count in flows if count)
            logger.warning(
                f"FlowRadar partial decode: {len(records)} flows recovered, {remaining} cells left"
            )
        self._decoded = DecodeResult(records, fully_decoded)
        self._decoded_map = {record.key: record.count for record in records}
        return self._decoded

    def query(self, key: FlowKey) -> int:
        self.decode()
        return self._decoded_map.get(key, 0)

    def report(self) -> list[FlowRecord]:
        return list(self.decode().records)

    def cardinality(self) -> CardinalityEstimate:
        return linear_counting(self.bloom.size, self.bloom.zeros(), per_item=self.BLOOM_HASHES)
