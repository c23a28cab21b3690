"""biomeval: a biometric recognition evaluation engine.

Pipeline: align (two-landmark similarity transform) -> extract (external
boundary) -> enroll (embedding average) -> score (cosine). Evaluation:
identity-disjoint dev/eval splits, a single combined threshold at a target
FMR, per-sub-protocol FMR/FNMR reporting, verification ROC, and rank-1
TPIR/FPIR open-set curves. A seeded synthetic harness makes every metric
verifiable without proprietary datasets.
"""

from .alignment import (
    PRESETS,
    AlignmentProfile,
    AlignmentSpec,
    LandmarkSet,
    SimilarityTransform,
    align_sample,
    choose_spec,
    read_image,
    read_landmarks,
    resolve_alignment,
    solve_transform,
    warp_crop,
    write_image,
    write_landmarks,
)
from .embeddings import (
    DownsampleFlattenExtractor,
    Embedding,
    ExternalProcessExtractor,
    Template,
    cosine_score,
    cosine_similarity,
    enroll,
    enroll_all,
    extract,
    load_embedding_file,
    load_template_file,
    negated_euclidean,
    save_embedding_file,
    save_template_file,
    score_pairs,
    score_protocol,
)
from .errors import (
    AlignmentError,
    BiomevalError,
    EmbeddingError,
    EvaluationError,
    FormatError,
    MetricError,
    ProtocolError,
)
from .evaluator import (
    EvaluationResult,
    ThresholdPolicy,
    evaluate,
    evaluate_scores,
    openset_evaluate,
    openset_matches_from_records,
    roc_evaluate,
    save_report,
)
from .metrics import (
    InsufficientImpostorsWarning,
    MetricReport,
    OpenSetCurve,
    OpenSetPoint,
    ProbeTopMatch,
    RocPoint,
    SubProtocolRates,
    candidate_thresholds,
    eer_threshold,
    fmr_at,
    fnmr_at,
    interpolate_tpir_at_fpir,
    openset_curve,
    roc_points,
    save_openset_csv,
    save_roc_csv,
    threshold_at_fmr,
)
from .protocol import (
    ComparisonPair,
    ModelSpec,
    Protocol,
    SampleRecord,
    comparison_pairs,
    load_protocol,
    save_protocol,
)
from .scores import (
    ScoreRecord,
    ScoreSet,
    load_score_file,
    save_score_file,
    split_by_group,
    split_by_label,
)
from .synth import (
    LabelShift,
    ScoreSynthConfig,
    SubProtocolNoise,
    SynthConfig,
    generate,
    generate_scores,
)

__version__ = "0.1.0"
