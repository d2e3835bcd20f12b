"""Binary PPM (P6) and PGM (P5) readers/writers.

Frames persist as P6 (rgb) with an optional P5 maxval-255 sidecar carrying
the alpha plane; masks persist as P5 with maxval 1. Round trips are
bit-exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .frames import BinaryMask, FrameRGBA


def _read_header(data: bytes, magic: bytes):
    if not data.startswith(magic):
        raise ValueError(f"expected {magic.decode()} file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    return width, height, maxval, data[pos:]


def write_ppm(path, rgb: np.ndarray) -> None:
    """Write an (Y, X, 3) uint8 array as binary P6."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    w, h, maxval, raw = _read_header(Path(path).read_bytes(), b"P6")
    if maxval != 255:
        raise ValueError(f"unsupported PPM maxval {maxval}")
    return np.frombuffer(raw[: w * h * 3], dtype=np.uint8).reshape(h, w, 3).copy()


def write_pgm(path, gray: np.ndarray, maxval: int = 255) -> None:
    """Write an (Y, X) array as binary P5 (values must be <= maxval <= 255)."""
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
        f.write(gray.tobytes())


def read_pgm(path) -> tuple[np.ndarray, int]:
    w, h, maxval, raw = _read_header(Path(path).read_bytes(), b"P5")
    if maxval > 255:
        raise ValueError(f"unsupported PGM maxval {maxval}")
    return np.frombuffer(raw[: w * h], dtype=np.uint8).reshape(h, w).copy(), maxval


def write_mask(path, mask: BinaryMask) -> None:
    write_pgm(path, mask.bits.astype(np.uint8), maxval=1)


def read_mask(path) -> BinaryMask:
    gray, maxval = read_pgm(path)
    if maxval != 1:
        raise ValueError(f"mask PGM must have maxval 1, got {maxval}")
    return BinaryMask(gray.astype(bool))


def write_frame(path, frame: FrameRGBA, alpha_sidecar=None) -> None:
    """Write rgb as P6; when `alpha_sidecar` is given, write alpha as P5."""
    write_ppm(path, frame.pixels[:, :, :3])
    if alpha_sidecar is not None:
        write_pgm(alpha_sidecar, frame.pixels[:, :, 3])


def read_frame(path, alpha_sidecar=None) -> FrameRGBA:
    rgb = read_ppm(path)
    if alpha_sidecar is not None:
        alpha, maxval = read_pgm(alpha_sidecar)
        if maxval != 255:
            raise ValueError("alpha sidecar must have maxval 255")
    else:
        alpha = np.full(rgb.shape[:2], 255, dtype=np.uint8)
    return FrameRGBA(np.dstack([rgb, alpha]))
