"""
Exception hierarchy for specqa
Library code raises these; main.py maps them to exit codes
"""

from typing import Optional

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE_ERROR = 2


class SpecQAError(Exception):
    """Base class for all specqa errors"""

    exit_code = EXIT_DATA_ERROR


class DataError(SpecQAError):
    """Invalid or inconsistent input data"""

    exit_code = EXIT_DATA_ERROR


class CorpusValidationError(DataError):
    """Malformed corpus line or violated record invariant"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ReferentialIntegrityError(CorpusValidationError):
    """A doc_id or table_id reference does not resolve"""


class DuplicateIdError(CorpusValidationError):
    """An identifier that must be unique appears twice"""


class IndexFormatError(DataError):
    """Index or adapter file is unreadable or has the wrong magic/version"""


class DimensionMismatchError(DataError):
    """Vectors, indexes or adapters disagree on dimension"""


class TrainingDivergedError(DataError):
    """Loss became non-finite during adapter training"""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}")


class GradingError(DataError):
    """Predictions do not line up with the graded items"""


class UsageError(SpecQAError):
    """Bad command-line usage or configuration value"""

    exit_code = EXIT_USAGE_ERROR


class ProviderError(SpecQAError):
    """An external service (embedding provider, LLM) failed"""


class EmbeddingError(ProviderError):
    """Embedding provider failure"""

    def __init__(self, message: str, retriable: bool = False, start: Optional[int] = None):
        self.retriable = retriable
        self.start = start
        super().__init__(message)


class LLMError(ProviderError):
    """LLM client failure"""


class UnparseableAnswerError(SpecQAError):
    """No option letter could be read from an LLM answer"""

    def __init__(self, text: str, n_options: int):
        self.text = text
        self.n_options = n_options
        super().__init__(f"no option letter among {n_options} options in answer {text[:80]!r}")


class DegenerateProjectionError(DataError):
    """Adapter maps a vector to (numerically) zero"""
