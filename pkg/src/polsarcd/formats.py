"""File formats: PCMR covariance rasters, PVM p-value maps, PGM masks, and a
JSON sample format for hand-written fixtures.

PCMR v1 layout (little-endian, 24-byte header):

    bytes 0-3   magic "PCMR"
    bytes 4-5   u16 version (1)
    bytes 6-9   u32 rows
    bytes 10-13 u32 cols
    bytes 14-15 u16 p (channel dimension)
    bytes 16-23 f64 nominal looks

followed by rows*cols*p*p complex128 entries (interleaved re/im float64),
row-major pixels, row-major matrix entries.

PVM v1 layout (little-endian, 24-byte header):

    bytes 0-3   magic "PVM1"
    bytes 4-7   u32 rows
    bytes 8-11  u32 cols
    bytes 12-19 u64 reserved (zero)
    bytes 20-23 reserved padding (zero)

followed by rows*cols float64 p-values, row-major.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from . import mathcore
from .detector import ChangeMask, CovRaster, PValueMap
from .errors import BadMagic, DomainError, NonHermitianPixel, TruncatedPayload

__all__ = [
    "read_raster",
    "write_raster",
    "read_sample",
    "write_sample",
    "load_observations",
    "read_pvalue_map",
    "write_pvalue_map",
    "read_pgm",
    "write_pgm",
    "mask_to_pgm",
    "read_mask",
    "render_pvalue_png",
    "PCMR_MAGIC",
    "PVM_MAGIC",
]

PCMR_MAGIC = b"PCMR"
PCMR_VERSION = 1
_PCMR_HEADER = struct.Struct("<4sHIIHd")

PVM_MAGIC = b"PVM1"
_PVM_HEADER = struct.Struct("<4sIIQ4x")


def write_raster(raster: CovRaster, path) -> None:
    header = _PCMR_HEADER.pack(
        PCMR_MAGIC,
        PCMR_VERSION,
        raster.rows,
        raster.cols,
        raster.p,
        float(raster.nominal_looks),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(raster.pixels, dtype=np.complex128).tobytes())


def read_raster(path) -> CovRaster:
    """Read a PCMR raster, symmetrizing each pixel under the ingest tolerance.

    A pixel whose asymmetry exceeds the bound aborts with its coordinates.
    """
    with open(path, "rb") as fh:
        header = fh.read(_PCMR_HEADER.size)
        if len(header) < _PCMR_HEADER.size:
            raise TruncatedPayload(
                f"file ends inside the header: {len(header)} of {_PCMR_HEADER.size} bytes"
            )
        magic, version, rows, cols, p, looks = _PCMR_HEADER.unpack(header)
        if magic != PCMR_MAGIC or version != PCMR_VERSION:
            raise BadMagic(f"not a PCMR v1 file (magic={magic!r}, version={version})")
        expected = rows * cols * p * p * 16
        payload = fh.read(expected + 1)
        if len(payload) != expected:
            actual = len(payload) if len(payload) < expected else "more"
            raise TruncatedPayload(f"expected {expected} payload bytes, found {actual}")
    pixels = np.frombuffer(payload, dtype=np.complex128).reshape(rows, cols, p, p)

    flat = pixels.reshape(-1, p, p)
    scale = np.abs(flat).max(axis=(1, 2))
    dev = np.abs(flat - np.conj(np.swapaxes(flat, 1, 2))).max(axis=(1, 2))
    bad = dev > mathcore.HERMITIAN_INGEST_TOL * np.where(scale == 0.0, 1.0, scale)
    if bad.any():
        k = int(np.argmax(bad))
        raise NonHermitianPixel(k // cols, k % cols, float(dev[k] / max(scale[k], 1e-300)))
    sym = (flat + np.conj(np.swapaxes(flat, 1, 2))) / 2.0
    return CovRaster(sym.reshape(rows, cols, p, p), looks)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _matrix_from_json(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError("matrix JSON must be a p x p grid of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def write_sample(observations: np.ndarray, path, looks: float | None = None) -> None:
    """Write observations to the JSON sample format (.wsample.json)."""
    arr = np.asarray(observations, dtype=np.complex128)
    doc = {
        "p": int(arr.shape[-1]),
        "looks": None if looks is None else float(looks),
        "matrices": [_matrix_to_json(m) for m in arr],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_sample(path) -> tuple[np.ndarray, float | None]:
    """Read a JSON sample file; returns (observations, looks hint)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    p = int(doc["p"])
    mats = [_matrix_from_json(m) for m in doc["matrices"]]
    if not mats:
        raise DomainError("sample file contains no matrices")
    arr = np.stack(mats)
    if arr.shape[1] != p:
        raise DomainError(f"declared p={p} does not match matrices of shape {arr.shape[1:]}")
    looks = doc.get("looks")
    return arr, (None if looks is None else float(looks))


def load_observations(path) -> tuple[np.ndarray, float | None]:
    """Load observations from either a PCMR raster (flattened) or a JSON sample."""
    path = str(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == PCMR_MAGIC:
        raster = read_raster(path)
        return raster.flatten(), raster.nominal_looks
    return read_sample(path)


def write_pvalue_map(pmap: PValueMap, path) -> None:
    header = _PVM_HEADER.pack(PVM_MAGIC, pmap.rows, pmap.cols, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(pmap.values, dtype=np.float64).tobytes())


def read_pvalue_map(path) -> PValueMap:
    with open(path, "rb") as fh:
        header = fh.read(_PVM_HEADER.size)
        if len(header) < _PVM_HEADER.size:
            raise TruncatedPayload(
                f"file ends inside the header: {len(header)} of {_PVM_HEADER.size} bytes"
            )
        magic, rows, cols, _reserved = _PVM_HEADER.unpack(header)
        if magic != PVM_MAGIC:
            raise BadMagic(f"not a PVM v1 file (magic={magic!r})")
        expected = rows * cols * 8
        payload = fh.read(expected + 1)
        if len(payload) != expected:
            actual = len(payload) if len(payload) < expected else "more"
            raise TruncatedPayload(f"expected {expected} payload bytes, found {actual}")
    values = np.frombuffer(payload, dtype=np.float64).reshape(rows, cols).copy()
    return PValueMap(values, window=0, method="unknown")


def write_pgm(values: np.ndarray, path) -> None:
    """Write an 8-bit binary PGM image."""
    arr = np.asarray(values)
    if arr.dtype == bool:
        arr = np.where(arr, 255, 0)
    arr = np.clip(arr, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise BadMagic("not a binary PGM (P5) file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval > 255:
        raise DomainError("16-bit PGM files are not supported")
    payload = data[pos : pos + width * height]
    if len(payload) < width * height:
        raise TruncatedPayload(f"expected {width * height} pixels, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def mask_to_pgm(mask: ChangeMask, path) -> None:
    """Change mask as PGM: 0 = no change, 255 = change."""
    write_pgm(mask.values, path)


def read_mask(path) -> ChangeMask:
    """Reference mask from PGM: any nonzero pixel counts as change."""
    return ChangeMask(read_pgm(path) != 0)


def _ramp_colors(log_p: np.ndarray) -> np.ndarray:
    """Red (strong evidence) to dark blue (weak evidence) over log10 p."""
    lo, hi = -12.0, -4.0  # clip range of log10(p) below the display cut
    t = np.clip((log_p - lo) / (hi - lo), 0.0, 1.0)  # 0 strong .. 1 weak
    red = np.array([255, 0, 0], dtype=float)
    dark_blue = np.array([0, 0, 139], dtype=float)
    return ((1.0 - t)[..., None] * red + t[..., None] * dark_blue).astype(np.uint8)


def render_pvalue_png(pmap: PValueMap, path, cut: float = 1e-4) -> None:
    """Color rendering of a p-value map; requires Pillow.

    Values above ``cut`` are black; values below grade from red to dark blue
    with decreasing p.
    """
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise DomainError("PNG rendering requires the Pillow package") from exc
    v = np.clip(pmap.values, 1e-300, 1.0)
    img = np.zeros((pmap.rows, pmap.cols, 3), dtype=np.uint8)
    below = v <= cut
    if below.any():
        img[below] = _ramp_colors(np.log10(v[below]))
    Image.fromarray(img, mode="RGB").save(path, format="PNG")
