"""CSV and IDX readers/writers."""
import gzip
import re
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from dstlab.data.dataset import Dataset
from dstlab.exceptions import ParseError

logger = structlog.get_logger()

PathLike = Union[str, Path]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
_HEADER_LINES = 1


def load_csv(path: PathLike, label_column: str = "label",
             num_classes: Optional[int] = None) -> Dataset:
    """Read a headered numeric CSV; every column but ``label_column`` is a feature.

    Line numbers in errors are 1-based file lines, the header being line 1.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise ParseError("row arity mismatch", path=str(path),
                         line=int(match.group(1)) if match else None) from e
    except pd.errors.EmptyDataError as e:
        raise ParseError("empty CSV file", path=str(path), line=1) from e

    if label_column not in frame.columns:
        raise ParseError(f"missing label column '{label_column}'", path=str(path), line=1)

    short_rows = frame.isna().any(axis=1).to_numpy()
    if short_rows.any():
        line = int(np.flatnonzero(short_rows)[0]) + _HEADER_LINES + 1
        raise ParseError(f"row has fewer than {frame.shape[1]} fields", path=str(path), line=line)

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().to_numpy()
    if bad.any():
        row, col = (int(i) for i in np.argwhere(bad)[0])
        raise ParseError(
            f"non-numeric cell {frame.iat[row, col]!r} in column '{frame.columns[col]}'",
            path=str(path), line=row + _HEADER_LINES + 1)

    labels = numeric[label_column].to_numpy(dtype=np.float64)
    if np.any(labels != np.round(labels)) or np.any(labels < 0):
        row = int(np.flatnonzero((labels != np.round(labels)) | (labels < 0))[0])
        raise ParseError("labels must be non-negative integers", path=str(path),
                         line=row + _HEADER_LINES + 1)
    labels = labels.astype(np.int64)
    feature_columns = [c for c in numeric.columns if c != label_column]
    features = numeric[feature_columns].to_numpy(dtype=np.float64)
    num_classes = num_classes or max(int(labels.max(initial=0)) + 1, 2)
    logger.debug("Loaded CSV dataset", path=str(path), rows=len(labels),
                 features=len(feature_columns))
    return Dataset(features, labels, num_classes=num_classes, name=path.stem,
                   feature_names=tuple(feature_columns))


def export_csv(dataset: Dataset, path: PathLike, label_column: str = "label") -> Path:
    """Write ``dataset`` in the layout ``load_csv`` reads back."""
    path = Path(path)
    names = list(dataset.feature_names) or [f"x{i}" for i in range(dataset.input_dim)]
    frame = pd.DataFrame(dataset.features, columns=names)
    frame[label_column] = dataset.labels
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def _read_bytes(path: Path) -> bytes:
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as handle:
        return handle.read()


def _write_bytes(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as handle:
        handle.write(payload)


def _read_idx(path: Path, magic: int, ndim: int) -> np.ndarray:
    raw = _read_bytes(path)
    header_size = 4 * (ndim + 1)
    if len(raw) < 4:
        raise ParseError("truncated IDX header", path=str(path), offset=0)
    found = int.from_bytes(raw[:4], "big")
    if found != magic:
        raise ParseError(f"bad IDX magic 0x{found:08x}, expected 0x{magic:08x}",
                         path=str(path), offset=0)
    if len(raw) < header_size:
        raise ParseError("truncated IDX header", path=str(path), offset=len(raw))
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype=">u4", count=ndim, offset=4))
    expected = int(np.prod(dims))
    if len(raw) - header_size != expected:
        raise ParseError(f"IDX payload holds {len(raw) - header_size} bytes, header declares {expected}",
                         path=str(path), offset=header_size)
    return np.frombuffer(raw, dtype=np.uint8, offset=header_size).reshape(dims)


def load_idx(images_path: PathLike, labels_path: PathLike,
             num_classes: Optional[int] = None) -> Dataset:
    """MNIST-format images and labels; pixels are scaled to [0, 1]."""
    images_path, labels_path = Path(images_path), Path(labels_path)
    images = _read_idx(images_path, IDX_IMAGES_MAGIC, ndim=3)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC, ndim=1).astype(np.int64)
    if images.shape[0] != labels.shape[0]:
        raise ParseError(f"{images.shape[0]} images but {labels.shape[0]} labels",
                         path=str(labels_path), offset=4)
    count, rows, cols = images.shape
    features = images.reshape(count, rows * cols).astype(np.float64) / 255.0
    num_classes = num_classes or max(int(labels.max(initial=0)) + 1, 2)
    logger.debug("Loaded IDX dataset", images=str(images_path), count=count, grid=(rows, cols))
    return Dataset(features, labels, num_classes=num_classes, name=images_path.name.split(".")[0],
                   grid_shape=(rows, cols))


def write_idx(images: np.ndarray, labels: np.ndarray, images_path: PathLike,
              labels_path: PathLike) -> Tuple[Path, Path]:
    """Write uint8 images [N x H x W] and labels [N] as IDX (gzip for ``.gz`` paths)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1)
    if images.ndim != 3:
        raise ParseError(f"images must be [N x H x W], got shape {images.shape}")
    images_path, labels_path = Path(images_path), Path(labels_path)
    header = np.array([IDX_IMAGES_MAGIC, *images.shape], dtype=">u4").tobytes()
    _write_bytes(images_path, header + images.tobytes())
    header = np.array([IDX_LABELS_MAGIC, labels.shape[0]], dtype=">u4").tobytes()
    _write_bytes(labels_path, header + labels.tobytes())
    return images_path, labels_path
