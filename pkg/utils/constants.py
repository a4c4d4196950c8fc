"""
Constants and default values for specqa
"""

# Project Information
PROJECT_NAME = "specqa"
PROJECT_VERSION = "1.0.0"
PROJECT_DESCRIPTION = "Retrieval engine and evaluation harness for hybrid technical-specification QA"

CONFIG_ENV_VAR = "TDPR_CONFIG"
DEFAULT_CONFIG_PATH = "config.yaml"

# Corpus Constants
TOKEN_LIMIT = 512
MIN_AGGREGATE_TOKENS = 64
MIN_SPLIT_LIMIT = 16
SEP_TOKEN = "[SEP]"
SUMMARY_COLUMNS_MARKER = "— columns: "

# Index Constants
BM25_K1 = 1.2
BM25_B = 0.75
EMBED_BATCH_SIZE = 64
EMBED_MAX_IN_FLIGHT = 4
NORM_TOLERANCE = 1e-6
INDEX_MAGIC = b"TDPR1"
ADAPTER_MAGIC = b"TADP1"
SPARSE_INDEX_SUFFIX = ".sparse.idx"
DENSE_INDEX_SUFFIX = ".dense.idx"

INDEX_FILES = {
    "sparse": "bm25" + SPARSE_INDEX_SUFFIX,
    "passages": "passages" + DENSE_INDEX_SUFFIX,
    "passages_plain": "passages_plain" + DENSE_INDEX_SUFFIX,
    "documents": "documents" + DENSE_INDEX_SUFFIX,
}

# Retrieval Constants
DEFAULT_K = 10
DEFAULT_D = 5

# Training Constants
TRAINING = {
    "learning_rate": 0.2,
    "epochs": 10,
    "batch_size": 16,
    "scale": 20.0,
    "init_noise": 0.01,
}
DEGENERATE_NORM = 1e-12

# Evaluation Constants
REPORT_KS = (1, 3, 5, 10)
MRR_K = 10
HISTOGRAM_BINS = 20
REPORT_PRECISION = 6

# RAG Constants
LLM_MAX_IN_FLIGHT = 2
LLM_MAX_TOKENS = 256
CONTEXT_TOKENS = 4096
MIN_CONTEXT_TOKENS = 128
MAX_QUESTIONS_PER_PASSAGE = 5
MIN_QUESTION_TOKENS = 5
MAX_QUESTION_TOKENS = 64
OPTION_LETTERS = "ABCDE"
MCQ_DIRECTIVE = "Answer with the letter only."

FIRST_QUESTION_WORDS = ("what", "which", "how", "is/are", "where", "why", "others")

# Function words ignored when checking that an answer is supported by its passage.
STOPWORDS = frozenset({
    "a", "an", "the", "and", "or", "of", "to", "in", "on", "for", "with", "by", "at",
    "from", "as", "is", "are", "was", "were", "be", "been", "it", "its", "this",
    "that", "these", "those", "which", "what", "how", "why", "where", "when", "who",
    "does", "do", "did", "can", "could", "should", "would", "may", "might", "not",
    "no", "yes", "if", "than", "then", "there", "their", "they", "into", "also",
})
