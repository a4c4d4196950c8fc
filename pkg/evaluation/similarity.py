"""
Question/gold-passage cosine distributions
"""

import csv
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from evaluation.models import SimilarityHistogram
from index.embeddings import EmbeddingProvider, cosine, embed
from train.adapter import AdapterMatrix, apply_adapter
from utils.constants import HISTOGRAM_BINS
from utils.errors import DataError, UsageError

logger = logging.getLogger(__name__)


def histogram_of(cosines: Sequence[float], bins: int = HISTOGRAM_BINS, label: str = "") -> SimilarityHistogram:
    """Bin cosines uniformly over [-1, 1]; the top bin includes 1.0"""
    if bins < 2:
        raise UsageError(f"histogram needs >= 2 bins, got {bins}")
    values = np.clip(np.asarray(cosines, dtype=np.float64), -1.0, 1.0)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    return SimilarityHistogram(
        bin_edges=[float(e) for e in edges],
        counts=[int(c) for c in counts],
        model_label=label,
        mean=float(np.mean(values)) if values.size else None,
    )


async def similarity_distribution(
    questions: Sequence[str],
    gold_passages: Sequence[str],
    provider: EmbeddingProvider,
    adapter: Optional[AdapterMatrix] = None,
    bins: int = HISTOGRAM_BINS,
    label: str = ""
) -> SimilarityHistogram:
    """
    Histogram of cos(question, gold passage representation)

    Args:
        questions: Question texts
        gold_passages: Representation text of each question's gold passage
        provider: Embedding provider
        adapter: Optional adapter applied to both sides
        bins: Number of uniform bins
        label: Model label carried by the histogram
    """
    if len(questions) != len(gold_passages):
        raise DataError(f"{len(questions)} questions but {len(gold_passages)} gold passages")
    if bins < 2:
        raise UsageError(f"histogram needs >= 2 bins, got {bins}")
    q_vectors = await embed(provider, list(questions))
    p_vectors = await embed(provider, list(gold_passages))
    if adapter is not None:
        q_vectors = [apply_adapter(adapter, v) for v in q_vectors]
        p_vectors = [apply_adapter(adapter, v) for v in p_vectors]
    cosines = [cosine(q, p) for q, p in zip(q_vectors, p_vectors)]
    histogram = histogram_of(cosines, bins, label)
    logger.debug("Similarity histogram %s: n=%d mean=%s", label, histogram.n_samples, histogram.mean)
    return histogram


def write_histogram_csv(histogram: SimilarityHistogram, path: Union[str, Path]) -> Path:
    """CSV columns: bin_start, bin_end, count"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["bin_start", "bin_end", "count"])
        edges = histogram.bin_edges
        for i, count in enumerate(histogram.counts):
            writer.writerow([f"{edges[i]:.6f}", f"{edges[i + 1]:.6f}", count])
    return path
