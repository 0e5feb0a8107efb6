"""Language-sensitive intelligibility scoring for recognized phone sequences.

Aligns recognized phones against canonical targets under confusability-
derived costs, applies per-language phonological constraints to separate
true errors from permissible variation, and reports raw and corrected PER,
WER, tone error rate, and GoP. A symbolic degradation simulator makes
cross-language comparisons reproducible without patient data.
"""

__version__ = "0.1.0"

from .alignment import (
    AlignmentResult,
    AlignmentStep,
    align,
    brute_force_align,
    render_alignment,
)
from .confusion import (
    ConfusionMatrix,
    CostMatrix,
    build_confusion,
    confusion_from_csv,
    confusion_to_csv,
    density_report,
    to_cost_matrix,
    unit_cost_matrix,
)
from .errors import PhonoscoreError
from .g2p import (
    PhoneSequence,
    Token,
    format_phone_document,
    format_phone_line,
    ingest_canonical,
    read_phone_document,
    read_phone_file,
    transcribe,
)
from .profiles import (
    AllophoneRule,
    G2PRule,
    LanguageProfile,
    PhonemeSpec,
    bundled_profile,
    bundled_profile_path,
    feature_distance,
    load_profile,
    profile_from_json,
    profile_to_dict,
    validate_profile,
    with_confusion,
)
from .scoring import (
    AssessmentReport,
    ErrorLabel,
    PosteriorSet,
    ScoringConfig,
    assess_utterance,
    classify_errors,
    corpus_summary,
    gop,
    per,
    wer,
)
from .simulator import PerturbationSpec, centralization_targets, perturb, predict_impact

__all__ = [
    "AlignmentResult",
    "AlignmentStep",
    "AllophoneRule",
    "AssessmentReport",
    "ConfusionMatrix",
    "CostMatrix",
    "ErrorLabel",
    "G2PRule",
    "LanguageProfile",
    "PerturbationSpec",
    "PhonemeSpec",
    "PhoneSequence",
    "PhonoscoreError",
    "PosteriorSet",
    "ScoringConfig",
    "Token",
    "align",
    "assess_utterance",
    "brute_force_align",
    "build_confusion",
    "bundled_profile",
    "bundled_profile_path",
    "centralization_targets",
    "classify_errors",
    "confusion_from_csv",
    "confusion_to_csv",
    "corpus_summary",
    "density_report",
    "feature_distance",
    "format_phone_document",
    "format_phone_line",
    "gop",
    "ingest_canonical",
    "load_profile",
    "per",
    "perturb",
    "predict_impact",
    "profile_from_json",
    "profile_to_dict",
    "read_phone_document",
    "read_phone_file",
    "render_alignment",
    "to_cost_matrix",
    "transcribe",
    "unit_cost_matrix",
    "validate_profile",
    "wer",
    "with_confusion",
]
