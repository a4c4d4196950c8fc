"""
Adapter fine-tuning with in-batch negatives
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from corpus.models import Corpus
from index.embeddings import EmbeddingProvider, embed
from retrieve.models import Representation
from retrieve.representations import representation_for
from train.adapter import AdapterMatrix, project_batch, projection_weight_gradient
from train.mnr import mnr_loss_and_gradient
from utils.constants import TRAINING
from utils.errors import ReferentialIntegrityError, TrainingDivergedError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingPair:
    """Question with its single positive passage"""
    question_id: str
    question_text: str
    positive_passage_id: str


@dataclass
class TrainConfig:
    """Optimizer settings; a learning rate of 0 freezes the initial adapter"""
    learning_rate: float = TRAINING["learning_rate"]
    epochs: int = TRAINING["epochs"]
    batch_size: int = TRAINING["batch_size"]
    scale: float = TRAINING["scale"]
    seed: int = 0
    init_noise: float = TRAINING["init_noise"]

    def __post_init__(self):
        if self.learning_rate < 0:
            raise UsageError(f"train.learning_rate must be >= 0, got {self.learning_rate}")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise UsageError(f"train.epochs must be >= 1, got {self.epochs!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 2:
            raise UsageError(f"train.batch_size must be >= 2 for in-batch negatives, got {self.batch_size!r}")
        if self.scale <= 0:
            raise UsageError(f"train.scale must be > 0, got {self.scale}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "scale": self.scale,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], seed: int = 0) -> "TrainConfig":
        return cls(
            learning_rate=float(data.get("learning_rate", TRAINING["learning_rate"])),
            epochs=data.get("epochs", TRAINING["epochs"]),
            batch_size=data.get("batch_size", TRAINING["batch_size"]),
            scale=float(data.get("scale", TRAINING["scale"])),
            seed=int(data.get("seed", seed)),
        )


def fit_adapter(
    questions: np.ndarray,
    positives: np.ndarray,
    config: TrainConfig
) -> Tuple[AdapterMatrix, List[float]]:
    """
    Gradient descent on the adapter for pre-embedded (question, positive) rows

    W starts at identity plus seeded uniform noise. Each epoch shuffles the
    pairs with the same seeded generator; a trailing batch of one pair is
    skipped since it has no negatives. With a zero learning rate the epoch-1
    order is reused, so every epoch reports the same loss.

    Returns:
        Trained adapter and the mean batch loss of every epoch
    """
    questions = np.asarray(questions, dtype=np.float64)
    positives = np.asarray(positives, dtype=np.float64)
    n, dim = questions.shape
    if n < config.batch_size:
        raise UsageError(f"need at least batch_size={config.batch_size} training pairs, got {n}")

    rng = np.random.default_rng(config.seed)
    weights = np.eye(dim) + rng.uniform(-config.init_noise, config.init_noise, size=(dim, dim))
    history: List[float] = []
    order = None
    for epoch in range(1, config.epochs + 1):
        # a frozen W keeps the epoch-1 batches so the loss history stays flat
        if order is None or config.learning_rate > 0:
            order = rng.permutation(n)
        losses = []
        for batch, start in enumerate(range(0, n, config.batch_size), start=1):
            idx = order[start:start + config.batch_size]
            if idx.size < 2:
                continue
            xa, xp = questions[idx], positives[idx]
            anchors, anchor_norms = project_batch(weights, xa)
            targets, target_norms = project_batch(weights, xp)
            loss, grad_a, grad_p = mnr_loss_and_gradient(anchors, targets, config.scale)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch, loss)
            grad_w = (
                projection_weight_gradient(xa, anchors, anchor_norms, grad_a)
                + projection_weight_gradient(xp, targets, target_norms, grad_p)
            )
            weights = weights - config.learning_rate * grad_w
            if not np.all(np.isfinite(weights)):
                raise TrainingDivergedError(epoch, batch, float("nan"))
            losses.append(loss)
        history.append(float(np.mean(losses)))
        logger.debug("Epoch %d/%d: mean batch loss %.6f", epoch, config.epochs, history[-1])
    return AdapterMatrix(weights), history


async def train_adapter(
    pairs: Sequence[TrainingPair],
    corpus: Corpus,
    provider: EmbeddingProvider,
    config: TrainConfig,
    representation: Representation = Representation.SECTIONED
) -> Tuple[AdapterMatrix, List[float]]:
    """
    Train a linear adapter with the MNR objective

    Questions and positive passage representations are embedded once up
    front; the loop itself is single-threaded and deterministic for a seed.
    """
    if len(pairs) < config.batch_size:
        raise UsageError(f"need at least batch_size={config.batch_size} training pairs, got {len(pairs)}")
    for pair in pairs:
        if pair.positive_passage_id not in corpus:
            raise ReferentialIntegrityError(
                f"training pair {pair.question_id!r} references unknown passage {pair.positive_passage_id!r}"
            )

    passage_ids = sorted({p.positive_passage_id for p in pairs})
    passage_vectors = await embed(
        provider, [representation_for(corpus.passage(pid), representation) for pid in passage_ids]
    )
    by_id = dict(zip(passage_ids, passage_vectors))
    question_vectors = await embed(provider, [p.question_text for p in pairs])

    logger.info(
        "Training adapter on %d pairs (%d passages), dim %d, %d epochs",
        len(pairs), len(passage_ids), provider.dim, config.epochs
    )
    return fit_adapter(
        np.vstack(question_vectors),
        np.vstack([by_id[p.positive_passage_id] for p in pairs]),
        config,
    )


def write_loss_history(history: Sequence[float], path: Union[str, Path]) -> Path:
    """CSV columns: epoch, mean_batch_loss"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["epoch", "mean_batch_loss"])
        for epoch, loss in enumerate(history, start=1):
            writer.writerow([epoch, f"{loss:.9f}"])
    return path
