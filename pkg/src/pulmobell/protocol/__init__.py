from .crc import crc16
from .messages import (
    AccelBatch,
    Ack,
    AirQuality,
    Command,
    DerivedMetrics,
    Message,
    PpgBatch,
    SessionEvent,
    Steering,
    parse_payload,
    serialize_payload,
)
from .framing import (
    HEADER_LEN,
    MAX_PAYLOAD,
    SOF,
    VERSION,
    Decoder,
    decoder_feed,
    encode_frame,
)

__all__ = [
    "crc16",
    "AccelBatch",
    "PpgBatch",
    "AirQuality",
    "DerivedMetrics",
    "SessionEvent",
    "Command",
    "Ack",
    "Steering",
    "Message",
    "serialize_payload",
    "parse_payload",
    "encode_frame",
    "Decoder",
    "decoder_feed",
    "SOF",
    "VERSION",
    "HEADER_LEN",
    "MAX_PAYLOAD",
]
