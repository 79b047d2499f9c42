"""Binary PGM (P5) and PPM (P6) images and numeric CSV files."""

from __future__ import annotations

import csv
import io
import os
import re

import numpy as np

from .errors import DataError

_MAGIC = {b"P5": 1, b"P6": 3}
_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header(data: bytes):
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise DataError("truncated image header")
        fields.append(m.group(1))
        pos = m.end()
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise DataError("malformed image header")
    return fields, pos + 1


def read_pnm(path) -> np.ndarray:
    """Read an 8-bit binary PGM or PPM as ``uint8`` (``H x W`` or ``H x W x 3``)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    (magic, w, h, maxval), start = _header(data)
    if magic not in _MAGIC:
        raise DataError(f"{path}: only binary PGM (P5) and PPM (P6) are supported")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric header field") from exc
    if maxval != 255:
        raise DataError(f"{path}: only 8-bit images are supported (maxval {maxval})")
    channels = _MAGIC[magic]
    n = w * h * channels
    pixels = np.frombuffer(data, dtype=np.uint8, count=-1, offset=start)
    if pixels.size < n:
        raise DataError(f"{path}: expected {n} bytes of pixel data, found {pixels.size}")
    pixels = pixels[:n].reshape((h, w, channels) if channels == 3 else (h, w))
    return pixels.copy()


def to_uint8(image) -> np.ndarray:
    return np.clip(np.round(np.asarray(image, dtype=float)), 0, 255).astype(np.uint8)


def write_pnm(path, image) -> None:
    """Write a grayscale (P5) or RGB (P6) image; float input is rounded and clipped."""
    img = np.asarray(image)
    img = img if img.dtype == np.uint8 else to_uint8(img)
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise DataError(f"cannot write image of shape {img.shape}")
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(img).tobytes())


def center_crop_dyadic(image):
    """Largest centered power-of-two square; returns ``(cropped, was_cropped)``."""
    h, w = image.shape[:2]
    side = 1 << (min(h, w).bit_length() - 1)
    if (h, w) == (side, side):
        return image, False
    r0, c0 = (h - side) // 2, (w - side) // 2
    return image[r0 : r0 + side, c0 : c0 + side], True


def format_float(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    return "%.17g" % x


def read_signal_csv(path) -> np.ndarray:
    """Numeric CSV: one value per row, or several columns (one signal per column).

    A non-numeric first row is treated as a header; a leading column headed
    ``index`` (as written by :func:`write_signal_csv`) is dropped.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    skip_index = False
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            skip_index = rows[0][0].strip().lower() == "index" and len(rows[0]) > 1
            rows = rows[1:]
    if skip_index:
        rows = [r[1:] for r in rows]
    if not rows:
        raise DataError(f"{path}: no numeric rows")
    try:
        arr = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return arr[:, 0] if arr.shape[1] == 1 else arr


def write_table_csv(path, header, rows) -> None:
    """Comma-separated table with a header row; floats use :func:`format_float`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def write_signal_csv(path, signal, name: str = "value") -> None:
    x = np.asarray(signal, dtype=float)
    if x.ndim == 1:
        write_table_csv(path, ["index", name], ((i, v) for i, v in enumerate(x)))
    else:
        cols = [f"{name}{j}" for j in range(x.shape[1])]
        write_table_csv(path, ["index"] + cols, ([i] + list(r) for i, r in enumerate(x)))


def is_image_path(path) -> bool:
    return os.path.splitext(str(path))[1].lower() in (".pgm", ".ppm", ".pnm")
