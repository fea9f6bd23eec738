"""Graymap export/import for intensity images.

Images are written as binary PGM (P5), 8 or 16 bit, big-endian for 16 bit
as the format requires.  A text sidecar ``<name>.hdr`` records the grid
pitch, the physical extent and the intensity that maps to full scale, so
an image plus its sidecar is quantitatively recoverable.  A lossless PNG
copy can be written too when Pillow is available.
"""

from __future__ import annotations

import numpy as np

from .field import Grid2D

SIDECAR_SUFFIX = ".hdr"


class IOFailure(OSError):
    """Raised when an image or sidecar cannot be read or written."""


def write_pgm(
    image: np.ndarray,
    path,
    grid: Grid2D | None = None,
    bits: int = 16,
    max_value: float | None = None,
) -> None:
    """Write an intensity image as binary PGM plus a text sidecar.

    ``max_value`` (defaults to the image maximum) maps to full scale;
    values above it saturate.  Axis 0 of ``image`` is x; the file is
    stored row-major with y as rows so width = nx, height = ny.
    """
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    if max_value is None:
        max_value = float(img.max()) if img.size else 0.0
    full = (1 << bits) - 1
    if max_value > 0:
        q = np.clip(img / max_value, 0.0, 1.0) * full
    else:
        q = np.zeros_like(img)
    q = np.round(q).astype(np.uint8 if bits == 8 else ">u2")
    # transpose: PGM rows scan y, columns scan x
    rows = q.T
    path = str(path)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{img.shape[0]} {img.shape[1]}\n{full}\n".encode("ascii"))
            fh.write(rows.tobytes())
        with open(path + SIDECAR_SUFFIX, "w", encoding="ascii", newline="\n") as fh:
            fh.write("format = pgm-intensity\n")
            fh.write(f"bits = {bits}\n")
            fh.write(f"max_intensity = {max_value!r}\n")
            if grid is not None:
                fh.write(f"pitch_x_m = {grid.dx!r}\n")
                fh.write(f"pitch_y_m = {grid.dy!r}\n")
                fh.write(f"extent_x_m = {grid.extent_x!r}\n")
                fh.write(f"extent_y_m = {grid.extent_y!r}\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def read_pgm(path) -> tuple[np.ndarray, dict]:
    """Read a binary PGM written by :func:`write_pgm` (or any P5 file).

    Returns ``(image, header)`` where image axis 0 is x and values are
    rescaled to physical intensity when a sidecar records max_intensity;
    otherwise raw counts are returned.  ``header`` holds the parsed
    sidecar fields (empty dict if no sidecar exists).
    """
    path = str(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    tokens = []
    pos = 0
    while len(tokens) < 4:
        # header tokens with '#' comments permitted
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if tokens[0] != b"P5":
        raise IOFailure(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(t) for t in tokens[1:4])
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    raw = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    img = raw.reshape(height, width).T.astype(np.float64)

    header: dict = {}
    try:
        with open(path + SIDECAR_SUFFIX, "r", encoding="ascii") as fh:
            for line in fh:
                if "=" in line:
                    key, _, val = line.partition("=")
                    header[key.strip()] = val.strip()
    except OSError:
        pass
    if "max_intensity" in header:
        img = img * (float(header["max_intensity"]) / maxval)
    return img, header


def write_png(image: np.ndarray, path, bits: int = 16, max_value: float | None = None) -> None:
    """Optional lossless raster copy; requires Pillow."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise IOFailure("PNG export requires Pillow") from exc
    img = np.asarray(image, dtype=np.float64)
    if max_value is None:
        max_value = float(img.max()) if img.size else 0.0
    full = (1 << bits) - 1
    scale = np.clip(img / max_value, 0.0, 1.0) * full if max_value > 0 else np.zeros_like(img)
    if bits == 8:
        Image.fromarray(np.round(scale.T).astype(np.uint8), mode="L").save(str(path))
    else:
        Image.fromarray(np.round(scale.T).astype(np.uint32), mode="I").save(str(path))
