"""File layout configuration and the named format presets."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

from ..codecs import CodecId
from ..encoders.chunk import EncodingPolicy, EncodingStyle
from ..errors import InvalidConfig

MiB = 1 << 20
DEFAULT_GROUP_ROWS = 1_048_576
DEFAULT_GROUP_BYTES = 64 * MiB
DEFAULT_UNIT_BYTES = 256 * 1024
# a 1 MiB data page of 8-byte values
PARQUET_PAGE_ROWS = MiB // 8
ORC_PAGE_ROWS = 10_000


class RowGroupKind(enum.Enum):
    FixedRows = "rows"
    FixedBytes = "bytes"


@dataclass(frozen=True)
class RowGroupMode:
    kind: RowGroupKind = RowGroupKind.FixedRows
    value: int = DEFAULT_GROUP_ROWS

    def __post_init__(self):
        if self.value <= 0:
            raise InvalidConfig("row group size must be positive")

    @classmethod
    def fixed_rows(cls, n: int = DEFAULT_GROUP_ROWS) -> "RowGroupMode":
        return cls(RowGroupKind.FixedRows, n)

    @classmethod
    def fixed_bytes(cls, b: int = DEFAULT_GROUP_BYTES) -> "RowGroupMode":
        return cls(RowGroupKind.FixedBytes, b)


class ZoneLevel(enum.Enum):
    File = 1
    RowGroup = 2
    Page = 4


ALL_LEVELS = frozenset(ZoneLevel)


class ZonePlacement(enum.Enum):
    CentralizedFooter = 0
    PerRowGroup = 1


class BloomGranularity(enum.Enum):
    ColumnChunk = 1
    Page = 2


@dataclass(frozen=True)
class BloomConfig:
    enabled: bool = False
    fpp: float = 0.05
    granularity: BloomGranularity = BloomGranularity.ColumnChunk

    def __post_init__(self):
        if not 0 < self.fpp <= 0.5:
            raise InvalidConfig(f"Bloom fpp must lie in (0, 0.5], got {self.fpp}")


@dataclass(frozen=True)
class FileLayoutConfig:
    row_group_mode: RowGroupMode = field(default_factory=RowGroupMode)
    page_rows: int = ORC_PAGE_ROWS
    zone_map_levels: frozenset = ALL_LEVELS
    zone_map_placement: ZonePlacement = ZonePlacement.CentralizedFooter
    bloom: BloomConfig = field(default_factory=BloomConfig)
    codec: CodecId = CodecId.None_
    encoding_policy: EncodingPolicy = field(default_factory=EncodingPolicy)
    align_compression_to_page: bool = True
    compression_unit_bytes: int = DEFAULT_UNIT_BYTES

    def __post_init__(self):
        object.__setattr__(self, "zone_map_levels", frozenset(self.zone_map_levels))
        if self.page_rows <= 0:
            raise InvalidConfig("page_rows must be positive")
        mode = self.row_group_mode
        if mode.kind is RowGroupKind.FixedRows and self.page_rows > mode.value:
            raise InvalidConfig("page_rows exceeds the row group size")
        if self.compression_unit_bytes <= 0:
            raise InvalidConfig("compression unit must be positive")

    def replace(self, **changes) -> "FileLayoutConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        pol = self.encoding_policy
        return {
            "row_group_mode": {"kind": self.row_group_mode.kind.value, "value": self.row_group_mode.value},
            "page_rows": self.page_rows,
            "zone_map_levels": sorted(level.name for level in self.zone_map_levels),
            "zone_map_placement": self.zone_map_placement.name,
            "bloom": {"enabled": self.bloom.enabled, "fpp": self.bloom.fpp,
                      "granularity": self.bloom.granularity.name},
            "codec": self.codec.label,
            "encoding_policy": {"style": pol.style.value, "dict_size_limit_bytes": pol.dict_size_limit_bytes,
                                "ndv_ratio_threshold": pol.ndv_ratio_threshold, "rle_min_run": pol.rle_min_run},
            "align_compression_to_page": self.align_compression_to_page,
            "compression_unit_bytes": self.compression_unit_bytes,
        }

    def with_overrides(self, overrides: dict) -> "FileLayoutConfig":
        """Apply a (possibly partial) dict in the :meth:`to_dict` shape."""
        known = set(self.to_dict())
        unknown = set(overrides) - known
        if unknown:
            raise InvalidConfig(f"unknown layout fields: {sorted(unknown)}")
        merged = self.to_dict()
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(merged[key], dict):
                extra = set(value) - set(merged[key])
                if extra:
                    raise InvalidConfig(f"unknown {key} fields: {sorted(extra)}")
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        return FileLayoutConfig.from_dict(merged)

    @classmethod
    def from_dict(cls, d: dict) -> "FileLayoutConfig":
        try:
            rg = d["row_group_mode"]
            bloom = d["bloom"]
            pol = d["encoding_policy"]
            return cls(
                row_group_mode=RowGroupMode(RowGroupKind(rg["kind"]), int(rg["value"])),
                page_rows=int(d["page_rows"]),
                zone_map_levels=frozenset(ZoneLevel[name] for name in d["zone_map_levels"]),
                zone_map_placement=ZonePlacement[d["zone_map_placement"]],
                bloom=BloomConfig(bool(bloom["enabled"]), float(bloom["fpp"]),
                                  BloomGranularity[bloom["granularity"]]),
                codec=CodecId.parse(str(d["codec"])),
                encoding_policy=EncodingPolicy(EncodingStyle(pol["style"]), int(pol["dict_size_limit_bytes"]),
                                               float(pol["ndv_ratio_threshold"]), int(pol["rle_min_run"])),
                align_compression_to_page=bool(d["align_compression_to_page"]),
                compression_unit_bytes=int(d["compression_unit_bytes"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidConfig(f"bad layout config: {exc}") from exc


class FormatPreset(enum.Enum):
    ParquetLike = "parquet-like"
    OrcLike = "orc-like"
    Plain = "plain"

    @classmethod
    def parse(cls, name: str) -> "FormatPreset":
        try:
            return cls(name)
        except ValueError:
            raise InvalidConfig(f"unknown preset {name!r}; choose from {[p.value for p in cls]}") from None

    def config(self, codec: CodecId = CodecId.None_) -> FileLayoutConfig:
        if self is FormatPreset.ParquetLike:
            return FileLayoutConfig(
                row_group_mode=RowGroupMode.fixed_rows(),
                page_rows=PARQUET_PAGE_ROWS,
                zone_map_levels=ALL_LEVELS,
                zone_map_placement=ZonePlacement.CentralizedFooter,
                bloom=BloomConfig(True, 0.05, BloomGranularity.ColumnChunk),
                codec=codec,
                encoding_policy=EncodingPolicy.parquet_like(),
                align_compression_to_page=True,
            )
        if self is FormatPreset.OrcLike:
            return FileLayoutConfig(
                row_group_mode=RowGroupMode.fixed_bytes(),
                page_rows=ORC_PAGE_ROWS,
                zone_map_levels=ALL_LEVELS,
                zone_map_placement=ZonePlacement.PerRowGroup,
                bloom=BloomConfig(True, 0.05, BloomGranularity.Page),
                codec=codec,
                encoding_policy=EncodingPolicy.orc_like(),
                align_compression_to_page=False,
            )
        return FileLayoutConfig(
            row_group_mode=RowGroupMode.fixed_rows(),
            page_rows=ORC_PAGE_ROWS,
            zone_map_levels=ALL_LEVELS,
            zone_map_placement=ZonePlacement.CentralizedFooter,
            bloom=BloomConfig(False),
            codec=codec,
            encoding_policy=EncodingPolicy.plain_only(),
            align_compression_to_page=True,
        )
