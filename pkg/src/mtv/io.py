"""Grayscale image files and CSV reports.

Binary PGM (P5, maxval 255) is read and written directly; 8-bit grayscale
PNG goes through Pillow.  Intensities are mapped to ``[0, 1]`` by ``/ 255``.
"""

from __future__ import annotations

import csv
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .grid import PixelImage, as_array

__all__ = [
    "ImageFile",
    "ReportRow",
    "UnsupportedImageError",
    "load_image",
    "save_image",
    "write_csv",
    "read_csv",
    "default_data_dir",
    "list_images",
    "DATA_DIR_ENV",
]

DATA_DIR_ENV = "MTV_DATA_DIR"
IMAGE_SUFFIXES = (".pgm", ".png")


class UnsupportedImageError(ValueError):
    """Unsupported, colour or corrupt image file."""


@dataclass(frozen=True)
class ImageFile:
    path: str
    format: str  # "pgm" | "png"
    width: int
    height: int


def _format_of(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return "pgm"
    if suffix == ".png":
        return "png"
    raise UnsupportedImageError(f"{path}: unsupported extension {suffix!r} (use .pgm or .png)")


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval, separated by whitespace/comments
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnsupportedImageError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise UnsupportedImageError(f"{path}: only binary PGM (P5) is supported")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise UnsupportedImageError(f"{path}: malformed PGM header") from None
    if maxval != 255 or width <= 0 or height <= 0:
        raise UnsupportedImageError(f"{path}: need 8-bit PGM with positive size")
    pos += 1  # single whitespace after maxval
    pixels = data[pos : pos + width * height]
    if len(pixels) != width * height:
        raise UnsupportedImageError(f"{path}: truncated pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("L", "1", "P") or (im.mode == "P" and not _palette_is_gray(im)):
                raise UnsupportedImageError(
                    f"{path}: colour image (mode {im.mode}); convert to 8-bit grayscale first"
                )
            return np.asarray(im.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise UnsupportedImageError(f"{path}: cannot decode PNG ({exc})") from exc


def _palette_is_gray(im) -> bool:
    rgb = np.asarray(im.convert("RGB"))
    return bool(np.all(rgb[..., 0] == rgb[..., 1]) and np.all(rgb[..., 1] == rgb[..., 2]))


def load_image(path) -> PixelImage:
    """Load a grayscale PGM/PNG as intensities in ``[0, 1]``.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    UnsupportedImageError
        For other formats, colour images or corrupt files.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image not found: {path}")
    fmt = _format_of(path)
    raw = _read_pgm(path) if fmt == "pgm" else _read_png(path)
    return PixelImage(raw.astype(float) / 255.0, nonneg=True)


def describe_image(path) -> ImageFile:
    img = load_image(path)
    h, w = img.shape
    return ImageFile(str(path), _format_of(Path(path)), w, h)


def to_bytes(img) -> np.ndarray:
    """Clamp to ``[0, 1]`` and quantize to 8 bits, rounding half to even."""
    arr = np.clip(as_array(img), 0.0, 1.0)
    return np.rint(arr * 255.0).astype(np.uint8)


def save_image(img, path) -> None:
    """Write an image as binary PGM or 8-bit grayscale PNG (by extension)."""
    path = Path(path)
    fmt = _format_of(path)
    raw = to_bytes(img)
    if fmt == "pgm":
        h, w = raw.shape
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(raw.tobytes())
    else:
        from PIL import Image

        Image.fromarray(raw, mode="L").save(path)


@dataclass
class ReportRow:
    image_id: str
    sigma: float
    lam: float
    theta: float
    psnr_db: float
    iterations: int
    runtime_ms: float
    objective: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name if f.name != "lam" else "lambda" for f in fields(cls)]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows, path) -> None:
    """CSV with a header row; floats are written at full precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ReportRow.header())
        for r in rows:
            w.writerow([_fmt(v) for v in asdict(r).values()])


def read_csv(path) -> list[ReportRow]:
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(
                ReportRow(
                    image_id=rec["image_id"],
                    sigma=float(rec["sigma"]),
                    lam=float(rec["lambda"]),
                    theta=float(rec["theta"]),
                    psnr_db=float(rec["psnr_db"]),
                    iterations=int(rec["iterations"]),
                    runtime_ms=float(rec["runtime_ms"]),
                    objective=float(rec["objective"]),
                )
            )
    return out


def default_data_dir() -> str | None:
    return os.environ.get(DATA_DIR_ENV) or None


def list_images(directory) -> list[Path]:
    """Supported image files in ``directory``, sorted by name."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"data directory not found: {d}")
    return sorted(p for p in d.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
