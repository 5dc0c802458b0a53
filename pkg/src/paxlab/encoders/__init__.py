"""Lightweight integer, presence and column-chunk encoders."""

from .bitpack import bit_width, bitpack, bitunpack, zigzag_decode, zigzag_encode
from .block import EncodedBlock, Scheme
from .chunk import (
    Dictionary, EncodedChunk, EncodedPage, EncodingPolicy, EncodingStyle, PageKind, decode_column_chunk,
    decode_dictionary_page, decode_page, dict_decode, dict_encode, encode_column_chunk,
)
from .hybrid import describe_runs, rle_bp_hybrid_decode, rle_bp_hybrid_encode
from .orc import describe_subsequences, orc_hybrid_decode, orc_hybrid_encode
from .plain import plain_decode, plain_encode
from .presence import byte_rle_decode, byte_rle_encode, presence_decode, presence_encode

__all__ = [
    "bit_width", "bitpack", "bitunpack", "zigzag_decode", "zigzag_encode",
    "EncodedBlock", "Scheme",
    "Dictionary", "EncodedChunk", "EncodedPage", "EncodingPolicy", "EncodingStyle", "PageKind",
    "decode_column_chunk", "decode_dictionary_page", "decode_page", "dict_decode", "dict_encode",
    "encode_column_chunk",
    "describe_runs", "rle_bp_hybrid_decode", "rle_bp_hybrid_encode",
    "describe_subsequences", "orc_hybrid_decode", "orc_hybrid_encode",
    "plain_decode", "plain_encode",
    "byte_rle_decode", "byte_rle_encode", "presence_decode", "presence_encode",
]
