from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import DecodeError
from .bitpack import read_varint, write_varint


class Scheme(enum.IntEnum):
    Plain = 0
    RleBitpackHybrid = 1
    OrcHybrid = 2
    Dict = 3
    ByteRle = 4


@dataclass(frozen=True)
class EncodedBlock:
    scheme: Scheme
    value_count: int
    payload: bytes

    def to_bytes(self) -> bytes:
        out = bytearray([int(self.scheme)])
        write_varint(out, self.value_count)
        write_varint(out, len(self.payload))
        out += self.payload
        return bytes(out)

    @classmethod
    def from_bytes(cls, buf, pos: int = 0) -> tuple:
        """Parse one block at ``buf[pos:]``; returns (block, next position)."""
        if pos >= len(buf):
            raise DecodeError("encoded block header missing")
        scheme = Scheme(buf[pos])
        count, pos = read_varint(buf, pos + 1)
        size, pos = read_varint(buf, pos)
        if pos + size > len(buf):
            raise DecodeError("encoded block payload truncated")
        return cls(scheme, count, bytes(buf[pos:pos + size])), pos + size

    @property
    def nbytes(self) -> int:
        return len(self.payload)
