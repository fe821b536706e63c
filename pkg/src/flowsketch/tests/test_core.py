import numpy as np
import pytest
from scipy.stats import chisquare

from flowsketch.core import KEY_BYTES, FlowKey, HashFamily, OpCounter, digest_of, hash_at
from flowsketch.exceptions import UsageError


def test_flow_key_serializes_big_endian_in_field_order():
    key = FlowKey(1, 2, 3, 4, 5)
    assert key.packed == bytes.fromhex("00000001" "00000002" "0003" "0004" "05")
    assert len(key.packed) == KEY_BYTES == 13


def test_flow_key_round_trips_through_bytes_and_int(make_keys):
    for key in make_keys(200):
        assert FlowKey.from_bytes(key.packed) == key
        assert FlowKey.from_int(key.to_int()) == key
    top = FlowKey((1 << 32) - 1, (1 << 32) - 1, 65535, 65535, 255)
    assert FlowKey.from_int((1 << 104) - 1) == top


@pytest.mark.parametrize(
    "fields",
    [
        (1 << 32, 0, 0, 0, 6),
        (0, 0, 70000, 0, 6),
        (0, 0, 0, -1, 6),
        (0, 0, 0, 0, 256),
    ],
)
def test_flow_key_rejects_out_of_range_fields(fields):
    with pytest.raises(UsageError):
        FlowKey(*fields)


def test_flow_key_equality_is_bitwise(flow_key):
    twin = FlowKey(flow_key.src_addr, flow_key.dst_addr, flow_key.src_port, flow_key.dst_port, flow_key.protocol)
    assert twin == flow_key
    assert hash(twin) == hash(flow_key)
    other = FlowKey(flow_key.src_addr, flow_key.dst_addr, flow_key.src_port, flow_key.dst_port, 255 - flow_key.protocol)
    assert other != flow_key


def test_flow_key_parses_dotted_quads():
    key = FlowKey.parse("10.0.0.1", "192.168.1.2", "80", "443", "6")
    assert key.src_addr == 0x0A000001
    assert key.dst == "192.168.1.2"
    assert str(key) == "10.0.0.1:80->192.168.1.2:443/6"


def test_from_bytes_checks_length():
    with pytest.raises(UsageError):
        FlowKey.from_bytes(b"\x00" * 12)


def test_hash_family_is_deterministic(flow_key):
    a = HashFamily(seed=42, member_count=4)
    b = HashFamily(seed=42, member_count=4)
    for member in range(1, 5):
        assert hash_at(a, member, flow_key, 1000) == hash_at(b, member, flow_key, 1000)
    assert HashFamily(seed=43, member_count=4).raw(1, flow_key.packed) != a.raw(1, flow_key.packed)


def test_hash_at_single_bucket_is_zero(flow_key):
    assert hash_at(HashFamily(1, 1), 1, flow_key, 1) == 0


@pytest.mark.parametrize("member", [0, 5])
def test_hash_at_rejects_member_out_of_bounds(flow_key, member):
    with pytest.raises(UsageError, match="hash member"):
        hash_at(HashFamily(1, 4), member, flow_key, 10)


def test_hash_at_rejects_empty_range(flow_key):
    with pytest.raises(UsageError, match="range"):
        hash_at(HashFamily(1, 4), 1, flow_key, 0)


def test_hash_at_is_uniform(make_keys):
    family = HashFamily(seed=7, member_count=2)
    keys = make_keys(100_000, seed=1)
    buckets = np.array([hash_at(family, 1, key, 256) for key in keys])
    observed = np.bincount(buckets, minlength=256)
    assert chisquare(observed).pvalue > 0.01

    loads = np.bincount(np.array([hash_at(family, 2, key, 1024) for key in keys]), minlength=1024)
    mean = len(keys) / 1024
    assert loads.max() <= 2 * mean + 6 * np.sqrt(mean)


def test_members_behave_independently(make_keys):
    family = HashFamily(seed=3, member_count=2)
    keys = make_keys(10_000, seed=2)
    first = np.array([hash_at(family, 1, key, 64) for key in keys])
    second = np.array([hash_at(family, 2, key, 64) for key in keys])
    # pairs colliding under member 1 that also collide under member 2
    _, counts = np.unique(first * 64 + second, return_counts=True)
    both = int((counts * (counts - 1) // 2).sum())
    expected = len(keys) * (len(keys) - 1) / 2 / 64 / 64
    assert expected / 3 <= both <= 3 * expected


def test_digest_is_low_bits_of_first_member(flow_key):
    family = HashFamily(seed=9, member_count=4)
    digest = digest_of(family, flow_key, 8)
    assert 0 <= digest <= 255
    assert digest == family.raw(1, flow_key.packed) % 256
    assert digest_of(family, flow_key, 4) == digest % 16


@pytest.mark.parametrize("width", [0, 33])
def test_digest_width_bounds(flow_key, width):
    with pytest.raises(UsageError):
        digest_of(HashFamily(1, 1), flow_key, width)


def test_digest_collision_rate(make_keys):
    family = HashFamily(seed=11, member_count=1)
    keys = make_keys(20_000, seed=3)
    digests = [digest_of(family, key) for key in keys]
    collisions = sum(a == b for a, b in zip(digests[::2], digests[1::2]))
    assert 1 / 512 <= collisions / 10_000 <= 1 / 128


def test_op_counter_tracks_totals_and_worst_case():
    counter = OpCounter()
    counter.record(1, 2)
    counter.record(4, 5)
    counter.record(2, 3)
    assert counter.packets == 3
    assert counter.mean_hash_ops == pytest.approx(7 / 3)
    assert counter.max_hash_ops == 4
    assert counter.min_hash_ops == 1
    assert counter.max_memory_accesses == 5
    assert OpCounter().mean_memory_accesses == 0.0
