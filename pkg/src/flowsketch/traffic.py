"""
Packet traces: CSV ingestion, seeded synthetic Zipf traces, flow selection
and the exact per-flow ground truth.
"""
import csv
import ipaddress
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .core import FlowKey
from .exceptions import ConfigurationError, TraceInputError


logger = logging.getLogger(__name__)

TRACE_HEADER = ("ts", "src", "dst", "sport", "dport", "proto")
PROTOCOLS = (6, 17)


@dataclass(frozen=True, slots=True)
class TraceEvent:
    timestamp: int  # microseconds, informational
    key: FlowKey


@dataclass(slots=True)
class GroundTruth:
    flows: dict[FlowKey, int]
    total_packets: int = field(init=False)

    def __post_init__(self):
        self.total_packets = sum(self.flows.values())

    @property
    def total_flows(self) -> int:
        return len(self.flows)

    def size_of(self, key: FlowKey) -> int:
        return self.flows.get(key, 0)


class SyntheticSpec(BaseModel):
    """Zipf-by-rank synthetic trace: flow i gets max(1, min(cap, floor(cap * i^-s))) packets."""
    model_config = ConfigDict(frozen=True)

    flow_count: int = Field(50_000, ge=1, description="Number of distinct flows")
    zipf_exponent: float = Field(1.1, gt=0, description="Zipf exponent s")
    max_flow_size: int = Field(100_000, ge=1, description="Size of the largest flow")
    seed: int = Field(1, description="Seed for keys, sizes and interleaving")
    interleaving: Literal["shuffled", "sorted"] = Field(
        "shuffled", description="Shuffle packets or emit them flow by flow"
    )

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "SyntheticSpec":
        try:
            preset = PRESETS[name]
        except KeyError:
            available = ", ".join(sorted(PRESETS))
            raise ConfigurationError(f"unknown trace preset '{name}'. Available: {available}.")
        return cls(**{**preset, **overrides})


PRESETS = {
    "backbone": dict(zipf_exponent=1.1, max_flow_size=100_000),
    "campus": dict(zipf_exponent=1.2, max_flow_size=289_877),
    # more than 99% of flows below 5 packets
    "isp-sampled": dict(zipf_exponent=0.4, max_flow_size=5),
}


@dataclass(frozen=True, slots=True)
class TraceSummary:
    flows: int
    packets: int
    max_flow_size: int
    mean_flow_size: float
    top10_share: float


def random_flow_keys(count: int, rng: np.random.Generator) -> list[FlowKey]:
    """`count` distinct random five-tuples, TCP or UDP."""
    keys: dict[FlowKey, None] = {}
    while len(keys) < count:
        batch = count - len(keys)
        addrs = rng.integers(0, 1 << 32, size=(batch, 2), dtype=np.uint64)
        ports = rng.integers(0, 1 << 16, size=(batch, 2), dtype=np.uint64)
        protos = rng.choice(PROTOCOLS, size=batch)
        for (src, dst), (sport, dport), proto in zip(addrs.tolist(), ports.tolist(), protos.tolist()):
            keys.setdefault(FlowKey(src, dst, sport, dport, proto))
    return list(keys)[:count]


def flow_sizes(spec: SyntheticSpec) -> np.ndarray:
    ranks = np.arange(1, spec.flow_count + 1, dtype=np.float64)
    sizes = np.floor(spec.max_flow_size * ranks ** -spec.zipf_exponent)
    return np.clip(sizes, 1, spec.max_flow_size).astype(np.int64)


def generate_trace(spec: SyntheticSpec) -> tuple[list[TraceEvent], GroundTruth]:
    rng = np.random.default_rng(spec.seed)
    keys = random_flow_keys(spec.flow_count, rng)
    sizes = flow_sizes(spec)

    order = np.repeat(np.arange(spec.flow_count), sizes)
    if spec.interleaving == "shuffled":
        rng.shuffle(order)

    events = [TraceEvent(ts, keys[i]) for ts, i in enumerate(order.tolist())]
    truth = GroundTruth(dict(zip(keys, sizes.tolist())))
    logger.info(
        f"Generated {truth.total_flows} flows / {truth.total_packets} packets "
        f"(s={spec.zipf_exponent}, cap={spec.max_flow_size}, seed={spec.seed})"
    )
    return events, truth


def _parse_int(raw: str, name: str, bits: int, path, line: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise TraceInputError(f"{raw!r} is not an integer", path=path, line=line, field=name)
    if not 0 <= value < (1 << bits):
        raise TraceInputError(f"{value} is out of range 0..{(1 << bits) - 1}", path=path, line=line, field=name)
    return value


def _parse_addr(raw: str, name: str, path, line: int) -> int:
    try:
        return int(ipaddress.IPv4Address(raw.strip()))
    except ValueError:
        raise TraceInputError(f"{raw!r} is not a dotted-quad IPv4 address", path=path, line=line, field=name)


def decoded_lines(handle, path) -> Iterator[str]:
    """UTF-8 lines of a binary handle; a bad byte raises TraceInputError on its line."""
    for lineno, raw in enumerate(handle, start=1):
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError as ex:
            raise TraceInputError(f"invalid UTF-8 byte at offset {ex.start}", path=path, line=lineno) from ex


def csv_rows(reader, path) -> Iterator[list[str]]:
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as ex:
            raise TraceInputError(f"malformed CSV: {ex}", path=path, line=reader.line_num) from ex
        yield row


def open_csv(path, missing: str):
    """A csv reader over `path` decoded line by line, and the handle to close."""
    path = Path(path)
    try:
        handle = path.open("rb")
    except FileNotFoundError:
        raise TraceInputError(missing, path=path)
    return handle, csv.reader(decoded_lines(handle, path))


def _read_events(path: Path, handle, reader) -> Iterator[TraceEvent]:
    with handle:
        for row in csv_rows(reader, path):
            line = reader.line_num
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != len(TRACE_HEADER):
                raise TraceInputError(
                    f"expected {len(TRACE_HEADER)} fields, got {len(row)}", path=path, line=line
                )
            ts, src, dst, sport, dport, proto = (cell.strip() for cell in row)
            yield TraceEvent(
                _parse_int(ts, "ts", 64, path, line),
                FlowKey(
                    _parse_addr(src, "src", path, line),
                    _parse_addr(dst, "dst", path, line),
                    _parse_int(sport, "sport", 16, path, line),
                    _parse_int(dport, "dport", 16, path, line),
                    _parse_int(proto, "proto", 8, path, line),
                ),
            )


def parse_trace(path, format: str = "csv") -> Iterator[TraceEvent]:
    """
    Stream packets of a `ts,src,dst,sport,dport,proto` CSV file.

    The file and its header are checked immediately; rows are parsed lazily
    and a malformed row raises TraceInputError naming its line and field.
    """
    if format != "csv":
        raise TraceInputError(f"unsupported trace format '{format}'", path=path)
    path = Path(path)
    handle, reader = open_csv(path, "trace file not found")
    try:
        header = next(csv_rows(reader, path), None)
    except TraceInputError:
        handle.close()
        raise
    if header is None or tuple(cell.strip() for cell in header) != TRACE_HEADER:
        handle.close()
        raise TraceInputError(
            f"bad header {header!r}, expected {','.join(TRACE_HEADER)}", path=path, line=1
        )
    return _read_events(path, handle, reader)


def ground_truth(events: Iterable[TraceEvent]) -> GroundTruth:
    return GroundTruth(dict(Counter(event.key for event in events)))


def select_flows(
    events: Iterable[TraceEvent],
    target_flow_count: int,
    random_selection: bool = False,
    seed: int = 1,
) -> tuple[list[TraceEvent], GroundTruth]:
    """
    Keep every packet of `target_flow_count` flows: the first to appear, or a
    seeded random sample when `random_selection` is set. Packet order is kept.
    """
    events = list(events)
    first_seen = list(dict.fromkeys(event.key for event in events))
    if len(first_seen) < target_flow_count:
        raise TraceInputError(
            f"trace holds only {len(first_seen)} distinct flows, {target_flow_count} requested"
        )

    if random_selection:
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(first_seen), size=target_flow_count, replace=False)
        chosen = {first_seen[i] for i in picked.tolist()}
    else:
        chosen = set(first_seen[:target_flow_count])

    if len(chosen) == len(first_seen):
        kept = events
    else:
        kept = [event for event in events if event.key in chosen]
    return kept, ground_truth(kept)


def summarize_truth(truth: GroundTruth) -> TraceSummary:
    if not truth.total_flows:
        return TraceSummary(0, 0, 0, 0.0, 0.0)
    sizes = np.sort(np.fromiter(truth.flows.values(), dtype=np.int64))[::-1]
    top = max(1, len(sizes) // 10)
    return TraceSummary(
        flows=truth.total_flows,
        packets=truth.total_packets,
        max_flow_size=int(sizes[0]),
        mean_flow_size=float(sizes.mean()),
        top10_share=float(sizes[:top].sum() / truth.total_packets),
    )
