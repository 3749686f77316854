"""Dataset ingestion and file outputs (PGM images, loss CSV, model files)."""

from __future__ import annotations

import csv
import gzip
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

PathLike = Union[str, Path]
N_PIXELS = 64
MODEL_FORMAT = "photonic-qgan-model"
MODEL_VERSION = 1


class DatasetError(ValueError):
    pass


class ModelFileError(ValueError):
    pass


@dataclass(frozen=True)
class ImageSample:
    pixels: np.ndarray  # 64 values in [0, 1], row-major
    label: int


@dataclass
class Dataset:
    images: np.ndarray  # (N, 64)
    labels: np.ndarray  # (N,)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> ImageSample:
        return ImageSample(self.images[i], int(self.labels[i]))

    def counts(self) -> dict[int, int]:
        """Samples per digit."""
        return {d: int(np.sum(self.labels == d)) for d in range(10)}


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="ascii")
    return open(path, encoding="ascii", newline="")


def _read_rows(path: PathLike, scale: float, integral: bool) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    images, labels = [], []
    with _open_text(path) as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != N_PIXELS + 1:
                raise DatasetError(f"{path}:{lineno}: expected {N_PIXELS + 1} values, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from None
            pixels, label = values[:N_PIXELS], values[N_PIXELS]
            if integral and any(p != int(p) or not 0 <= p <= scale for p in pixels):
                raise DatasetError(f"{path}:{lineno}: pixels must be integers in 0..{int(scale)}")
            if not integral and any(not 0.0 <= p <= 1.0 for p in pixels):
                raise DatasetError(f"{path}:{lineno}: pixels must lie in [0, 1]")
            if label != int(label) or not 0 <= label <= 9:
                raise DatasetError(f"{path}:{lineno}: label must be an integer 0..9, got {row[-1]}")
            images.append(pixels)
            labels.append(int(label))
    data = np.array(images, dtype=float).reshape(-1, N_PIXELS) / scale
    return Dataset(data, np.array(labels, dtype=int))


def load_dataset(path: PathLike) -> Dataset:
    """Read optdigits-style CSV: 64 pixel counts 0..16 then the label (``.gz`` accepted)."""
    return _read_rows(path, 16.0, integral=True)


def load_normalized(path: PathLike) -> Dataset:
    """Read CSV rows of 64 floats in [0, 1] followed by the label."""
    return _read_rows(path, 1.0, integral=False)


def save_dataset(ds: Dataset, path: PathLike) -> None:
    """Write back in optdigits format (pixels rounded to the nearest 1/16)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for pixels, label in zip(ds.images, ds.labels):
            w.writerow([int(math.floor(p * 16 + 0.5)) for p in pixels] + [int(label)])


def filter_digit(ds: Dataset, digit: int) -> Dataset:
    if not 0 <= digit <= 9:
        raise DatasetError(f"digit must be in 0..9, got {digit}")
    mask = ds.labels == digit
    if not mask.any():
        raise DatasetError(f"dataset has no samples of digit {digit}")
    return Dataset(ds.images[mask], ds.labels[mask])


def sample_batch(ds: Dataset, size: int, seed: Union[int, np.random.Generator, None] = None) -> list[ImageSample]:
    """Uniform draw without replacement."""
    if len(ds) == 0:
        raise DatasetError("cannot sample from an empty dataset")
    if not 1 <= size <= len(ds):
        raise DatasetError(f"batch size {size} not in 1..{len(ds)}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return [ds[int(i)] for i in rng.choice(len(ds), size=size, replace=False)]


# --- image and loss files ---------------------------------------------------------


def quantize(pixel: float) -> int:
    """Pixel in [0, 1] to 0..255, rounding half up."""
    return int(math.floor(pixel * 255 + 0.5))


def write_pgm(image, path: PathLike, width: int = 8, height: int = 8) -> None:
    """Plain-text (P2) greyscale image."""
    image = np.asarray(image, dtype=float).ravel()
    if image.size != width * height:
        raise ValueError(f"expected {width * height} pixels, got {image.size}")
    if np.any(image < 0) or np.any(image > 1) or not np.all(np.isfinite(image)):
        raise ValueError("pixels must lie in [0, 1]")
    lines = ["P2", f"{width} {height}", "255"]
    for r in range(height):
        lines.append(" ".join(str(quantize(p)) for p in image[r * width : (r + 1) * width]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_pgm(path: PathLike) -> np.ndarray:
    """Strict reader for the files produced by :func:`write_pgm`; returns values in [0, 1]."""
    tokens = Path(path).read_text(encoding="ascii").split()
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain PGM file")
    width, height, maxval = (int(t) for t in tokens[1:4])
    body = [int(t) for t in tokens[4:]]
    if len(body) != width * height or any(not 0 <= v <= maxval for v in body):
        raise ValueError(f"{path}: malformed PGM body")
    return np.array(body, dtype=float) / maxval


def write_loss_csv(rows: Iterable[tuple[int, float, float]], path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "loss_g", "loss_d"])
        for it, lg, ld in rows:
            w.writerow([it, repr(float(lg)), repr(float(ld))])


def read_loss_csv(path: PathLike) -> list[tuple[int, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["iter", "loss_g", "loss_d"]:
            raise ValueError(f"{path}: unexpected header {header}")
        return [(int(a), float(b), float(c)) for a, b, c in reader]


# --- model files ------------------------------------------------------------------


def save_model(payload: dict, path: PathLike) -> None:
    """Write a model document as JSON with a format/version tag.

    Floats are written with ``repr`` precision, so parameters round-trip bit-exactly.
    """
    doc = {"format": MODEL_FORMAT, "version": MODEL_VERSION, **payload}
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")


def load_model(path: PathLike, expected_version: Optional[int] = MODEL_VERSION) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: corrupt model file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFileError(f"{path}: not a {MODEL_FORMAT} file")
    if expected_version is not None and doc.get("version") != expected_version:
        raise ModelFileError(
            f"{path}: model file version {doc.get('version')!r}, this build reads version {expected_version}"
        )
    return doc
