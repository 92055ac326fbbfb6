"""Frame layout and the streaming, resyncing decoder.

Frame: SOF(0xA5) | version(0x01) | msg_type | seq u16 LE | payload_len u16 LE
       | payload | crc16 u16 LE.
The CRC covers version..payload inclusive (SOF excluded).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..errors import EncodeError
from .crc import crc16
from .messages import Message, parse_payload, serialize_payload

SOF = 0xA5
VERSION = 0x01
HEADER_LEN = 7  # SOF + version + msg_type + seq(2) + payload_len(2)
MAX_PAYLOAD = 512


def token_low16(token: bytes) -> int:
    """The session-binding arg: low 16 bits of the binding token."""
    return int.from_bytes(token[-2:], "little")


def encode_frame(m: Message, seq: int) -> bytes:
    payload = serialize_payload(m)
    if len(payload) > MAX_PAYLOAD:
        raise EncodeError(f"payload {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    core = struct.pack("<BBHH", VERSION, m.msg_type, seq & 0xFFFF, len(payload)) + payload
    return bytes([SOF]) + core + struct.pack("<H", crc16(core))


@dataclass
class DecoderStats:
    bytes_skipped: int
    crc_failures: int
    unknown_types: int
    seq_gaps: int
    last_seq: int | None
    buffered: int


class Decoder:
    """Scans a byte stream for valid frames, surviving garbage and corruption.

    A candidate frame is rejected (and counted in ``crc_failures``) when its
    version byte, payload length, or CRC is wrong; scanning then resumes at
    the byte after that SOF so no interleaved valid frame is lost. Buffered
    data never exceeds one maximum frame beyond the current chunk.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self.bytes_skipped = 0
        self.crc_failures = 0
        self.unknown_types = 0
        self.seq_gaps = 0
        self.last_seq: int | None = None

    @property
    def buffered(self) -> int:
        return len(self._buf)

    def stats(self) -> DecoderStats:
        return DecoderStats(
            bytes_skipped=self.bytes_skipped,
            crc_failures=self.crc_failures,
            unknown_types=self.unknown_types,
            seq_gaps=self.seq_gaps,
            last_seq=self.last_seq,
            buffered=len(self._buf),
        )

    def feed(self, chunk: bytes) -> list[tuple[Message, int]]:
        self._buf.extend(chunk)
        frames: list[tuple[Message, int]] = []
        buf = self._buf
        pos = 0
        n = len(buf)
        while True:
            # hunt for the next SOF
            idx = buf.find(SOF, pos)
            if idx < 0:
                self.bytes_skipped += n - pos
                pos = n
                break
            self.bytes_skipped += idx - pos
            pos = idx
            if n - pos < HEADER_LEN:
                break  # partial header, wait for more bytes
            version = buf[pos + 1]
            msg_type = buf[pos + 2]
            (seq,) = struct.unpack_from("<H", buf, pos + 3)
            (plen,) = struct.unpack_from("<H", buf, pos + 5)
            if version != VERSION or plen > MAX_PAYLOAD:
                self.crc_failures += 1
                self.bytes_skipped += 1
                pos += 1
                continue
            total = HEADER_LEN + plen + 2
            if n - pos < total:
                break  # incomplete frame, wait for more bytes
            core = bytes(buf[pos + 1 : pos + HEADER_LEN + plen])
            (crc_recv,) = struct.unpack_from("<H", buf, pos + HEADER_LEN + plen)
            if crc16(core) != crc_recv:
                self.crc_failures += 1
                self.bytes_skipped += 1
                pos += 1
                continue
            try:
                msg = parse_payload(msg_type, core[6:])
            except Exception:
                # structurally valid frame we cannot interpret; skip it whole
                self.unknown_types += 1
                pos += total
                continue
            if self.last_seq is not None and seq != (self.last_seq + 1) & 0xFFFF:
                self.seq_gaps += 1
            self.last_seq = seq
            frames.append((msg, seq))
            pos += total
        del buf[:pos]
        return frames


def decoder_feed(
    state: Decoder, chunk: bytes
) -> tuple[Decoder, list[tuple[Message, int]], DecoderStats]:
    """Functional facade over :meth:`Decoder.feed`."""
    frames = state.feed(chunk)
    return state, frames, state.stats()
