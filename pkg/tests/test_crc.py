import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crc16_bitwise
from pulmobell.protocol import crc16


def test_empty_input_is_init_value():
    assert crc16(b"") == 0xFFFF


def test_published_check_value():
    # the standard check string for CRC-16/CCITT-FALSE
    assert crc16(b"123456789") == 0x29B1
    assert crc16_bitwise(b"123456789") == 0x29B1


def test_single_zero_byte_matches_oracle():
    assert crc16_bitwise(b"\x00") == 0xE1F0
    assert crc16(b"\x00") == 0xE1F0


@pytest.mark.parametrize("data", [b"\xff", b"\xa5\x01", bytes(range(256)), b"pulmobell"])
def test_table_matches_bitwise_oracle(data):
    assert crc16(data) == crc16_bitwise(data)


@given(st.binary(max_size=200))
def test_property_matches_bitwise_oracle(data):
    assert crc16(data) == crc16_bitwise(data)


@given(st.binary(min_size=1, max_size=64), st.integers(min_value=0))
def test_single_bit_flip_always_changes_crc(data, position):
    # CRC-16 detects all single-bit errors
    bit = position % (len(data) * 8)
    flipped = bytearray(data)
    flipped[bit // 8] ^= 1 << (bit % 8)
    assert crc16(bytes(flipped)) != crc16(data)
