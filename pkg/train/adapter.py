"""
Linear adapter over frozen provider embeddings and its TADP1 file format
"""

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from utils.constants import ADAPTER_MAGIC, DEGENERATE_NORM
from utils.errors import DataError, DegenerateProjectionError, DimensionMismatchError, IndexFormatError

_DIMS = struct.Struct("<II")


@dataclass
class AdapterMatrix:
    """Row-major weight matrix W (rows = output dim, cols = provider dim)"""
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[0] < 2:
            raise DataError(f"adapter must be a matrix with >= 2 rows, got shape {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)):
            raise DataError("adapter weights must be finite")

    @property
    def rows(self) -> int:
        return int(self.weights.shape[0])

    @property
    def cols(self) -> int:
        return int(self.weights.shape[1])

    @property
    def fingerprint(self) -> str:
        """SHA-256 of the serialized adapter"""
        return hashlib.sha256(dump_adapter(self)).hexdigest()

    @classmethod
    def identity(cls, dim: int) -> "AdapterMatrix":
        return cls(np.eye(dim))


def apply_adapter(adapter: AdapterMatrix, v: np.ndarray) -> np.ndarray:
    """Project v through W and renormalize"""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (adapter.cols,):
        raise DimensionMismatchError(f"adapter expects dim {adapter.cols}, got vector of shape {v.shape}")
    w = adapter.weights @ v
    norm = float(np.linalg.norm(w))
    if norm < DEGENERATE_NORM:
        raise DegenerateProjectionError(f"adapter maps vector to norm {norm:.3e}")
    return w / norm


def project_batch(weights: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Row-wise normalized projection; returns (unit rows, pre-normalization norms)"""
    u = x @ weights.T
    norms = np.linalg.norm(u, axis=1)
    if np.any(norms < DEGENERATE_NORM):
        raise DegenerateProjectionError("adapter maps a training vector to (numerically) zero")
    return u / norms[:, None], norms


def projection_weight_gradient(
    x: np.ndarray, unit: np.ndarray, norms: np.ndarray, grad_unit: np.ndarray
) -> np.ndarray:
    """Chain rule from dL/d(unit rows) back to dL/dW for unit = normalize(W x)"""
    radial = np.sum(grad_unit * unit, axis=1, keepdims=True)
    grad_u = (grad_unit - radial * unit) / norms[:, None]
    return grad_u.T @ x


def dump_adapter(adapter: AdapterMatrix) -> bytes:
    return (
        ADAPTER_MAGIC
        + _DIMS.pack(adapter.rows, adapter.cols)
        + adapter.weights.astype("<f4").tobytes()
    )


def parse_adapter(data: bytes, source: str = "<bytes>") -> AdapterMatrix:
    header = len(ADAPTER_MAGIC) + _DIMS.size
    if len(data) < header or data[:len(ADAPTER_MAGIC)] != ADAPTER_MAGIC:
        raise IndexFormatError(f"{source}: not a {ADAPTER_MAGIC.decode()} adapter file")
    rows, cols = _DIMS.unpack(data[len(ADAPTER_MAGIC):header])
    if len(data) != header + 4 * rows * cols:
        raise IndexFormatError(f"{source}: expected {rows}x{cols} weights, file has {len(data) - header} payload bytes")
    weights = np.frombuffer(data[header:], dtype="<f4").reshape(rows, cols)
    return AdapterMatrix(weights.astype(np.float64))


def save_adapter(adapter: AdapterMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_adapter(adapter))
    return path


def load_adapter(path: Union[str, Path]) -> AdapterMatrix:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise IndexFormatError(f"adapter file not found: {path}") from None
    return parse_adapter(data, str(path))
