"""
Domain types shared by every sketch, and the seeded hash family.
"""
import abc
import ipaddress
import struct
from dataclasses import dataclass, field
from typing import NewType

import xxhash

from .exceptions import UsageError


KEY_STRUCT = struct.Struct("!IIHHB")
KEY_BYTES = KEY_STRUCT.size  # 13 bytes, 104 bits
KEY_BITS = KEY_BYTES * 8
MASK64 = (1 << 64) - 1

_FIELD_BITS = (
    ("src_addr", 32),
    ("dst_addr", 32),
    ("src_port", 16),
    ("dst_port", 16),
    ("protocol", 8),
)

Digest = NewType("Digest", int)


@dataclass(frozen=True, slots=True)
class FlowKey:
    """Five-tuple flow ID, serialized big-endian in field order to 13 bytes."""
    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int
    protocol: int
    packed: bytes = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, bits in _FIELD_BITS:
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value < (1 << bits):
                raise UsageError(f"{name}={value!r} is not a {bits}-bit unsigned integer")
        object.__setattr__(
            self,
            "packed",
            KEY_STRUCT.pack(self.src_addr, self.dst_addr, self.src_port, self.dst_port, self.protocol),
        )

    def __eq__(self, other):
        if other.__class__ is FlowKey:
            return self.packed == other.packed
        return NotImplemented

    def __hash__(self):
        return hash(self.packed)

    def __lt__(self, other: "FlowKey"):
        return self.packed < other.packed

    @classmethod
    def from_bytes(cls, data: bytes) -> "FlowKey":
        if len(data) != KEY_BYTES:
            raise UsageError(f"a flow key is {KEY_BYTES} bytes, got {len(data)}")
        return cls(*KEY_STRUCT.unpack(data))

    @classmethod
    def from_int(cls, value: int) -> "FlowKey":
        if not 0 <= value < (1 << KEY_BITS):
            raise UsageError(f"{value} does not fit in {KEY_BITS} bits")
        return cls.from_bytes(value.to_bytes(KEY_BYTES, "big"))

    def to_int(self) -> int:
        return int.from_bytes(self.packed, "big")

    @classmethod
    def parse(cls, src: str, dst: str, sport, dport, proto) -> "FlowKey":
        return cls(
            int(ipaddress.IPv4Address(src.strip())),
            int(ipaddress.IPv4Address(dst.strip())),
            int(sport),
            int(dport),
            int(proto),
        )

    @property
    def src(self) -> str:
        return str(ipaddress.IPv4Address(self.src_addr))

    @property
    def dst(self) -> str:
        return str(ipaddress.IPv4Address(self.dst_addr))

    def __str__(self):
        return f"{self.src}:{self.src_port}->{self.dst}:{self.dst_port}/{self.protocol}"


@dataclass(frozen=True, slots=True)
class FlowRecord:
    key: FlowKey
    count: int


@dataclass(frozen=True, slots=True)
class CardinalityEstimate:
    value: int
    # set when every cell is occupied and linear counting has no defined answer
    overflow: bool = False


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


class HashFamily:
    """
    Members 1..member_count of a keyed 64-bit hash over the packed flow key.

    Each member is xxh64 with its own seed, derived by mixing the member index
    into the family seed. Bucket indices use multiply-shift range reduction,
    so they draw on the high bits while digests take the low bits.
    """

    __slots__ = ("seed", "member_count", "seeds")

    def __init__(self, seed: int, member_count: int):
        if member_count < 1:
            raise UsageError(f"member_count must be positive, got {member_count}")
        self.seed = seed & MASK64
        self.member_count = member_count
        # index 0 unused so members stay 1-based
        self.seeds = (0,) + tuple(
            _splitmix64(self.seed ^ _splitmix64(member)) for member in range(1, member_count + 1)
        )

    def _check_member(self, member: int):
        if not 1 <= member <= self.member_count:
            raise UsageError(f"hash member {member} outside 1..{self.member_count}")

    def raw(self, member: int, data: bytes) -> int:
        self._check_member(member)
        return xxhash.xxh64_intdigest(data, seed=self.seeds[member])

    def index(self, member: int, data: bytes, range_: int) -> int:
        if range_ < 1:
            raise UsageError(f"range must be at least 1, got {range_}")
        return (self.raw(member, data) * range_) >> 64

    def __repr__(self):
        return f"HashFamily(seed={self.seed}, member_count={self.member_count})"


def hash_at(family: HashFamily, member: int, key: FlowKey, range_: int) -> int:
    return family.index(member, key.packed, range_)


def digest_of(family: HashFamily, key: FlowKey, digest_width: int = 8) -> Digest:
    if not 1 <= digest_width <= 32:
        raise UsageError(f"digest_width must be within 1..32, got {digest_width}")
    return Digest(family.raw(1, key.packed) & ((1 << digest_width) - 1))


@dataclass(slots=True)
class OpCounter:
    """Hash computations and memory accesses, totalled and per-packet worst case."""
    packets: int = 0
    hash_ops: int = 0
    memory_accesses: int = 0
    max_hash_ops: int = 0
    max_memory_accesses: int = 0
    min_hash_ops: int | None = None

    def record(self, hash_ops: int, memory_accesses: int):
        self.packets += 1
        self.hash_ops += hash_ops
        self.memory_accesses += memory_accesses
        if hash_ops > self.max_hash_ops:
            self.max_hash_ops = hash_ops
        if memory_accesses > self.max_memory_accesses:
            self.max_memory_accesses = memory_accesses
        if self.min_hash_ops is None or hash_ops < self.min_hash_ops:
            self.min_hash_ops = hash_ops

    @property
    def mean_hash_ops(self) -> float:
        return self.hash_ops / self.packets if self.packets else 0.0

    @property
    def mean_memory_accesses(self) -> float:
        return self.memory_accesses / self.packets if self.packets else 0.0


class FlowCollector(abc.ABC):
    """Surface shared by HashFlow and every baseline."""

    name: str = ""
    counter: OpCounter

    @abc.abstractmethod
    def update(self, key: FlowKey):
        ...

    @abc.abstractmethod
    def query(self, key: FlowKey) -> int:
        ...

    @abc.abstractmethod
    def report(self) -> list[FlowRecord]:
        ...

    @abc.abstractmethod
    def cardinality(self) -> CardinalityEstimate:
        ...

    @property
    @abc.abstractmethod
    def capacity(self) -> int:
        """Number of exact flow records the structure can hold at once."""
