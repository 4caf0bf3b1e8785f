"""Kernel-smoothing date imputation over shingle-resemblance distances."""

from .corpus import Corpus, Document, SplitSpec, normalize_text, parse_manifest, read_manifest, split_corpus
from .errors import (
    ConvergenceError,
    DataError,
    DocumentTooShortError,
    EmptyDocumentError,
    ManifestError,
    StageError,
)
from .estimator import INF, Estimate, KernelConfig, RobustSpec, impute_date, impute_many, kernel_weight, robust_impute
from .neighbors import CandidatePool, DistanceStore, build_store, candidate_pool, nearest_m
from .shingle import (
    DistanceVector,
    ExactShingleSet,
    ShingleIndex,
    ShingleSet,
    distance_vector,
    extract_shingles,
    fingerprint,
    resemblance_distance,
)
from .tuner import BandwidthGrid, TuneResult, cv_loss, tune

__version__ = "0.1.0"
