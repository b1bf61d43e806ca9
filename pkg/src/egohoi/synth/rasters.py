"""Binary raster files.

Depth: ``EHOIDPT1`` magic, u32 LE width, u32 LE height, then width*height
float32 LE meters in row-major order (0.0 = no hit).
Mask: ``EHOIMSK1`` magic, u32 LE width, u32 LE height, then u16 LE ids.
"""

from __future__ import annotations

import struct

import numpy as np

from .render import DepthRaster, MaskRaster

DEPTH_MAGIC = b"EHOIDPT1"
MASK_MAGIC = b"EHOIMSK1"
_HEADER = struct.Struct("<8sII")


class RasterFormatError(ValueError):
    def __init__(self, rule: str, message: str) -> None:
        super().__init__(message)
        self.rule = rule


def encode_depth(raster: DepthRaster) -> bytes:
    values = np.ascontiguousarray(raster.values, dtype="<f4")
    return _HEADER.pack(DEPTH_MAGIC, raster.width, raster.height) + values.tobytes()


def encode_mask(raster: MaskRaster) -> bytes:
    values = np.ascontiguousarray(raster.values, dtype="<u2")
    return _HEADER.pack(MASK_MAGIC, raster.width, raster.height) + values.tobytes()


def _decode(data: bytes, magic: bytes, dtype: str, rule: str) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise RasterFormatError(rule, "file shorter than header")
    found, width, height = _HEADER.unpack_from(data)
    if found != magic:
        raise RasterFormatError(rule, f"bad magic {found!r}, expected {magic!r}")
    expected = _HEADER.size + width * height * np.dtype(dtype).itemsize
    if len(data) != expected:
        raise RasterFormatError(rule, f"payload size {len(data)} != {expected} for {width}x{height}")
    return np.frombuffer(data, dtype=dtype, offset=_HEADER.size).reshape(height, width)


def decode_depth(data: bytes) -> DepthRaster:
    return DepthRaster(_decode(data, DEPTH_MAGIC, "<f4", "DEPTH_FORMAT").astype(np.float32))


def decode_mask(data: bytes) -> MaskRaster:
    return MaskRaster(_decode(data, MASK_MAGIC, "<u2", "MASK_FORMAT").astype(np.uint16))


def read_depth(path) -> DepthRaster:
    with open(path, "rb") as fh:
        return decode_depth(fh.read())


def read_mask(path) -> MaskRaster:
    with open(path, "rb") as fh:
        return decode_mask(fh.read())
