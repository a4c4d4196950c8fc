"""
Multiple Negatives Ranking loss with analytic gradients

For anchors A and positives P (rows, n x dim) and scale s the logits are
S = s * A P^T; row i is a softmax over all positives with target column i.
Inputs are taken as given (unit-norm), so cosine is the plain dot product.
"""

from typing import Sequence, Tuple, Union

import numpy as np

from utils.errors import DataError, DimensionMismatchError

ArrayLike = Union[np.ndarray, Sequence[np.ndarray]]


def _as_batch(anchors: ArrayLike, positives: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(anchors, dtype=np.float64)
    p = np.asarray(positives, dtype=np.float64)
    if a.ndim != 2 or p.ndim != 2:
        raise DimensionMismatchError("anchors and positives must be 2-D batches")
    if a.shape[0] != p.shape[0]:
        raise DimensionMismatchError(f"{a.shape[0]} anchors but {p.shape[0]} positives")
    if a.shape[1] != p.shape[1]:
        raise DimensionMismatchError(f"anchor dim {a.shape[1]} != positive dim {p.shape[1]}")
    if a.shape[0] == 0:
        raise DataError("MNR loss needs at least one pair")
    return a, p


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def mnr_loss(anchors: ArrayLike, positives: ArrayLike, scale: float = 20.0) -> float:
    """Mean over anchors of -log softmax(s * a_i . P)[i]"""
    a, p = _as_batch(anchors, positives)
    log_probs = _log_softmax(scale * (a @ p.T))
    return float(-np.mean(np.diag(log_probs)))


def mnr_gradient(anchors: ArrayLike, positives: ArrayLike, scale: float = 20.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradient of mnr_loss with respect to every anchor and positive row

    Returns:
        (dL/dA, dL/dP), each shaped like its input batch
    """
    a, p = _as_batch(anchors, positives)
    n = a.shape[0]
    probs = np.exp(_log_softmax(scale * (a @ p.T)))
    g = (probs - np.eye(n)) / n
    return scale * (g @ p), scale * (g.T @ a)


def mnr_loss_and_gradient(
    anchors: ArrayLike, positives: ArrayLike, scale: float = 20.0
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Loss and both gradients from one softmax evaluation"""
    a, p = _as_batch(anchors, positives)
    n = a.shape[0]
    log_probs = _log_softmax(scale * (a @ p.T))
    g = (np.exp(log_probs) - np.eye(n)) / n
    return float(-np.mean(np.diag(log_probs))), scale * (g @ p), scale * (g.T @ a)
