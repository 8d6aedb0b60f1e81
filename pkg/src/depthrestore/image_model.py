"""Raster types and binary Netpbm I/O.

Depth maps travel as 16-bit binary PGM (P5, maxval 65535, big-endian
samples), color guides as binary PPM (P6, maxval 255). The writers emit
one fixed byte layout (single-space separators, newline before the
payload, no comments) so written files are reproducible byte for byte.
Readers tolerate `#` comment lines in headers.

Depth values are held as float64 internally. A sample of 0 marks a
hole (no sensor return); arithmetic keeps full precision and rounding
to integers happens only when a map is written back to disk.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, FormatError, TruncationError, UnsupportedFormatError

DEPTH_MAXVAL = 65535
COLOR_MAXVAL = 255
HOLE = 0


@dataclass(frozen=True)
class DepthMap:
    """A height x width grid of depth samples in millimeters.

    samples is float64 with values in [0, 65535]; exactly 0 means hole.
    """

    samples: np.ndarray

    def __post_init__(self):
        a = self.samples
        if a.ndim != 2:
            raise ContractViolation(f"depth samples must be 2-D, got shape {a.shape}")
        if a.dtype != np.float64:
            object.__setattr__(self, "samples", a.astype(np.float64))
        a = self.samples
        if a.size and (a.min() < 0 or a.max() > DEPTH_MAXVAL):
            raise ContractViolation(
                f"depth samples outside [0, {DEPTH_MAXVAL}]: "
                f"min {a.min()}, max {a.max()}"
            )

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def holes(self) -> np.ndarray:
        """Boolean grid, True where the sample is the hole sentinel."""
        return self.samples == HOLE


@dataclass(frozen=True)
class ColorImage:
    """Interleaved 8-bit RGB guidance image, shape (h, w, 3), dtype uint8."""

    samples: np.ndarray

    def __post_init__(self):
        a = self.samples
        if a.ndim != 3 or a.shape[2] != 3:
            raise ContractViolation(f"color samples must be (h, w, 3), got {a.shape}")
        if a.dtype != np.uint8:
            raise ContractViolation(f"color samples must be uint8, got {a.dtype}")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class GrayImage:
    """Real-valued luminance grid in [0, 255]."""

    samples: np.ndarray

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]


def to_grayscale(img: ColorImage) -> GrayImage:
    """Rec.601 luma: 0.299 R + 0.587 G + 0.114 B, kept real-valued."""
    rgb = img.samples.astype(np.float64)
    lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return GrayImage(lum)


def quantize(samples: np.ndarray) -> np.ndarray:
    """Round float depth to integers, ties away from zero, as uint16.

    Values are already confined to [0, 65535] by the DepthMap invariant,
    so no clamping is needed beyond the round.
    """
    return np.floor(samples + 0.5).astype(np.uint16)


def _read_header(buf: bytes, magic: bytes, path: str):
    """Parse a Netpbm header, returning (width, height, maxval, offset).

    Tokens are whitespace-separated; `#` starts a comment running to end
    of line. The payload begins one byte after the maxval token's
    terminating whitespace character.
    """
    if not buf.startswith(magic):
        got = buf[:2]
        raise UnsupportedFormatError(
            f"{path}: expected magic {magic.decode()!r}, found {got!r}"
        )
    tokens = []
    i = len(magic)
    n = len(buf)
    while len(tokens) < 3:
        while i < n and buf[i : i + 1].isspace():
            i += 1
        if i < n and buf[i : i + 1] == b"#":
            while i < n and buf[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not buf[i : i + 1].isspace():
            i += 1
        if start == i:
            raise FormatError(f"{path}: header ended before width/height/maxval")
        tokens.append(buf[start:i])
    if i >= n:
        raise FormatError(f"{path}: no payload after header")
    i += 1  # single whitespace byte separates maxval from payload
    dims = []
    for tok in tokens:
        try:
            dims.append(int(tok))
        except ValueError:
            raise FormatError(f"{path}: bad header token {tok!r}") from None
    w, h, maxval = dims
    if w <= 0 or h <= 0:
        raise FormatError(f"{path}: non-positive dimensions {w}x{h}")
    return w, h, maxval, i


def load_depth_pgm(path: str) -> DepthMap:
    """Read a 16-bit binary PGM depth map.

    Only P5 with maxval 65535 is accepted; samples are big-endian
    unsigned 16-bit.
    """
    with open(path, "rb") as f:
        buf = f.read()
    w, h, maxval, off = _read_header(buf, b"P5", path)
    if maxval != DEPTH_MAXVAL:
        raise UnsupportedFormatError(
            f"{path}: depth PGM must have maxval {DEPTH_MAXVAL}, found {maxval}"
        )
    expected = w * h * 2
    payload = buf[off : off + expected]
    if len(payload) < expected:
        raise TruncationError(expected, len(payload))
    raw = np.frombuffer(payload, dtype=">u2").reshape(h, w)
    return DepthMap(raw.astype(np.float64))


def save_depth_pgm(depth: DepthMap, path: str) -> None:
    """Write a DepthMap as binary PGM P5, maxval 65535, big-endian."""
    header = f"P5\n{depth.width} {depth.height}\n{DEPTH_MAXVAL}\n".encode("ascii")
    payload = quantize(depth.samples).astype(">u2").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def load_color_ppm(path: str) -> ColorImage:
    """Read a binary PPM (P6, maxval 255) color image."""
    with open(path, "rb") as f:
        buf = f.read()
    w, h, maxval, off = _read_header(buf, b"P6", path)
    if maxval != COLOR_MAXVAL:
        raise UnsupportedFormatError(
            f"{path}: color PPM must have maxval {COLOR_MAXVAL}, found {maxval}"
        )
    expected = w * h * 3
    payload = buf[off : off + expected]
    if len(payload) < expected:
        raise TruncationError(expected, len(payload))
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3)
    return ColorImage(raw.copy())


def save_color_ppm(img: ColorImage, path: str) -> None:
    """Write a ColorImage as binary PPM P6, maxval 255."""
    header = f"P6\n{img.width} {img.height}\n{COLOR_MAXVAL}\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(img.samples.tobytes())


def save_mask_pgm(mask: np.ndarray, path: str) -> None:
    """Write a boolean grid as 8-bit PGM with values 0 and 255."""
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ContractViolation(f"mask must be 2-D boolean, got {mask.dtype} {mask.shape}")
    h, w = mask.shape
    header = f"P5\n{w} {h}\n{COLOR_MAXVAL}\n".encode("ascii")
    payload = np.where(mask, 255, 0).astype(np.uint8).tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def encode_depth_pgm(depth: DepthMap) -> bytes:
    """Return the exact bytes save_depth_pgm would write."""
    out = io.BytesIO()
    out.write(f"P5\n{depth.width} {depth.height}\n{DEPTH_MAXVAL}\n".encode("ascii"))
    out.write(quantize(depth.samples).astype(">u2").tobytes())
    return out.getvalue()
