"""General-purpose block codecs layered under the encoded column bytes."""

from __future__ import annotations

import enum
from typing import Callable

import lz4.block

from .errors import DecodeError, InvalidConfig


class CodecId(enum.IntEnum):
    None_ = 0
    Lz = 1

    @classmethod
    def parse(cls, name: str) -> "CodecId":
        key = name.strip().lower()
        if key in ("none", "off", ""):
            return cls.None_
        if key in ("lz", "lz4"):
            return cls.Lz
        raise InvalidConfig(f"unknown codec {name!r}")

    @property
    def label(self) -> str:
        return "none" if self is CodecId.None_ else "lz"


def _lz_compress(data: bytes) -> bytes:
    return lz4.block.compress(data, store_size=True)


def _lz_decompress(data: bytes) -> bytes:
    try:
        return lz4.block.decompress(data)
    except lz4.block.LZ4BlockError as exc:
        raise DecodeError(f"corrupt lz block: {exc}") from exc


_REGISTRY: dict = {
    CodecId.None_: (bytes, bytes),
    CodecId.Lz: (_lz_compress, _lz_decompress),
}


def register_codec(codec: CodecId, compress: Callable[[bytes], bytes],
                   decompress: Callable[[bytes], bytes]) -> None:
    if codec is CodecId.None_:
        raise InvalidConfig("the None codec cannot be replaced")
    _REGISTRY[codec] = (compress, decompress)


def compress(codec: CodecId, data) -> bytes:
    return _REGISTRY[codec][0](bytes(data))


def decompress(codec: CodecId, data) -> bytes:
    return _REGISTRY[codec][1](bytes(data))
