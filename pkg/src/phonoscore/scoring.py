"""Error classification under language constraints and the metric suite.

Alignment steps are first labeled (correct, allophonically acceptable,
substitution, distortion, insertion, deletion, tone error), then the labels
feed raw and corrected phoneme error rates, word error rate, tone error
rate, and goodness-of-pronunciation summaries. Raw PER counts allophonic
variation as errors; corrected PER forgives exactly those steps, so it can
never exceed the raw rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .alignment import DELETE, INSERT, MATCH, AlignmentResult, align
from .confusion import (
    DEFAULT_DEL_COST,
    DEFAULT_FLOOR,
    DEFAULT_INS_COST,
    DEFAULT_TEMPERATURE,
    CostMatrix,
    build_confusion,
    to_cost_matrix,
    unit_cost_matrix,
)
from .errors import (
    DimensionMismatch,
    PhonoscoreError,
    EmptyReference,
    ProfileMismatch,
    RowNotNormalized,
    SegmentationOutOfRange,
    UnknownPhoneme,
    ZeroLengthUtterance,
)
from .g2p import PhoneSequence, transcribe
from .profiles import AllophoneRule, LanguageProfile

CORRECT = "correct"
ALLOPHONIC = "allophonic_acceptable"
SUBSTITUTION = "substitution"
DISTORTION = "distortion"
INSERTION = "insertion"
DELETION = "deletion"
TONE_ERROR = "tone_error"

CATEGORIES = (
    CORRECT,
    ALLOPHONIC,
    SUBSTITUTION,
    DISTORTION,
    INSERTION,
    DELETION,
    TONE_ERROR,
)

# categories that count as segmental errors; ALLOPHONIC joins them only in
# the raw (uncorrected) rate
ERROR_CATEGORIES = (SUBSTITUTION, DISTORTION, INSERTION, DELETION)

DEFAULT_GOP_EPSILON = 1e-6


@dataclass(frozen=True)
class ErrorLabel:
    step_index: int
    category: str
    rule_id: str | None = None


@dataclass(frozen=True)
class ScoringConfig:
    temperature: float = DEFAULT_TEMPERATURE
    floor: float = DEFAULT_FLOOR
    ins_cost: float = DEFAULT_INS_COST
    del_cost: float = DEFAULT_DEL_COST
    gop_epsilon: float = DEFAULT_GOP_EPSILON

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "floor": self.floor,
            "ins_cost": self.ins_cost,
            "del_cost": self.del_cost,
            "gop_epsilon": self.gop_epsilon,
        }


@dataclass(frozen=True)
class PosteriorSet:
    """Frame-level posteriors plus a segmentation, for GoP scoring."""

    symbols: tuple[str, ...]
    matrix: np.ndarray
    segments: tuple[tuple[str, int, int], ...]


@dataclass
class AssessmentReport:
    utterance_id: str
    counts: dict[str, int]
    canonical_phone_count: int
    per_raw: float
    per_corrected: float
    wer: float | None = None
    tone_error_rate: float | None = None
    tone_bearing_count: int = 0
    gop_summary: dict | None = None
    config_echo: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "counts": dict(self.counts),
            "canonical_phone_count": self.canonical_phone_count,
            "per_raw": self.per_raw,
            "per_corrected": self.per_corrected,
            "wer": self.wer,
            "tone_error_rate": self.tone_error_rate,
            "tone_bearing_count": self.tone_bearing_count,
            "gop_summary": self.gop_summary,
            "config_echo": dict(self.config_echo),
        }


def _word_neighbors(seq: PhoneSequence, index: int) -> tuple[str | None, str | None]:
    """Adjacent phones within the same word; None at word edges."""
    word = seq.word_of_token(index)
    left = None
    if index > 0 and seq.word_of_token(index - 1) == word:
        left = seq.tokens[index - 1].phone
    right = None
    if index + 1 < len(seq.tokens) and seq.word_of_token(index + 1) == word:
        right = seq.tokens[index + 1].phone
    return left, right


def _licensing_rule(
    canonical_phone: str,
    recognized_phone: str,
    left: str | None,
    right: str | None,
    profile: LanguageProfile,
) -> AllophoneRule | None:
    best: AllophoneRule | None = None
    for rule in profile.allophone_rules:
        if rule.canonical != canonical_phone or rule.surface != recognized_phone:
            continue
        if not profile.matches_context(rule.left_context, left):
            continue
        if not profile.matches_context(rule.right_context, right):
            continue
        if best is None or rule.priority > best.priority:
            best = rule
    return best


def classify_errors(
    alignment: AlignmentResult,
    canonical: PhoneSequence,
    recognized: PhoneSequence,
    profile: LanguageProfile,
) -> list[ErrorLabel]:
    """Label every alignment step under the profile's phonological constraints.

    Matches are correct; substitutions are allophonically acceptable when a
    rule licenses canonical -> surface in the canonical context, distortions
    when the recognized phone is outside the inventory, and substitutions
    otherwise. Tone tags are compared on match/substitute pairs of a tonal
    profile and reported as separate tone-error labels.
    """
    if alignment.canonical_len != len(canonical.tokens) or alignment.recognized_len != len(
        recognized.tokens
    ):
        raise ValueError("alignment does not correspond to these sequences")
    for token in canonical.tokens:
        if not profile.has(token.phone):
            raise ProfileMismatch(
                f"canonical phone {token.phone!r} is not in the {profile.id} "
                "inventory; was this sequence produced for a different profile?"
            )

    labels: list[ErrorLabel] = []
    for index, step in enumerate(alignment.steps):
        if step.op == INSERT:
            labels.append(ErrorLabel(index, INSERTION))
            continue
        if step.op == DELETE:
            labels.append(ErrorLabel(index, DELETION))
            continue

        c_token = canonical.tokens[step.canonical_index]
        r_token = recognized.tokens[step.recognized_index]
        if step.op == MATCH:
            labels.append(ErrorLabel(index, CORRECT))
        else:
            left, right = _word_neighbors(canonical, step.canonical_index)
            rule = _licensing_rule(c_token.phone, r_token.phone, left, right, profile)
            if rule is not None:
                labels.append(ErrorLabel(index, ALLOPHONIC, rule_id=rule.rule_id))
            elif not profile.has(r_token.phone):
                labels.append(ErrorLabel(index, DISTORTION))
            else:
                labels.append(ErrorLabel(index, SUBSTITUTION))

        if (
            profile.tonal
            and profile.spec(c_token.phone).tone_bearing
            and c_token.tone != r_token.tone
        ):
            labels.append(ErrorLabel(index, TONE_ERROR))
    return labels


def count_labels(labels: Sequence[ErrorLabel]) -> dict[str, int]:
    counts = {category: 0 for category in CATEGORIES}
    for label in labels:
        counts[label.category] += 1
    return counts


def per(labels: Sequence[ErrorLabel], canonical_phone_count: int, corrected: bool) -> float:
    """Phoneme error rate over the canonical length.

    The raw rate (corrected=False) counts allophonically acceptable steps as
    errors; the corrected rate forgives them. Insertions keep the canonical
    denominator, so the rate may exceed 1.
    """
    if canonical_phone_count <= 0:
        raise ZeroLengthUtterance("canonical phone count must be positive")
    counted = set(ERROR_CATEGORIES)
    if not corrected:
        counted.add(ALLOPHONIC)
    errors = sum(1 for label in labels if label.category in counted)
    return errors / canonical_phone_count


def wer(reference_words: Sequence[str], hypothesis_words: Sequence[str]) -> float:
    """Word error rate: unit-cost edit distance over the reference length."""
    if not reference_words:
        raise EmptyReference("reference word list is empty")
    vocabulary = list(dict.fromkeys([*reference_words, *hypothesis_words]))
    result = align(list(reference_words), list(hypothesis_words), unit_cost_matrix(vocabulary))
    return result.total_cost / len(reference_words)


def gop(
    posteriors,
    segmentation: Sequence[tuple[str, int, int]],
    inventory: Sequence[str],
    epsilon: float = DEFAULT_GOP_EPSILON,
) -> list[float]:
    """Goodness of pronunciation per segment.

    For each segment, averages log(P(target) / max_q P(q)) over its frames,
    with posteriors floored at epsilon. The score is always <= 0 and hits 0
    exactly when the target attains the frame-wise maximum throughout.
    """
    matrix = np.asarray(posteriors, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != len(inventory):
        raise DimensionMismatch(
            f"posterior matrix shape {matrix.shape} does not match "
            f"{len(inventory)} phones"
        )
    if (matrix < 0).any():
        raise RowNotNormalized("posteriors must be non-negative")
    sums = matrix.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > 1e-6)[0]
    if bad.size:
        raise RowNotNormalized(
            f"posterior row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1"
        )

    index = {symbol: i for i, symbol in enumerate(inventory)}
    frames = matrix.shape[0]
    spans: list[tuple[int, int]] = []
    for target, start, end in segmentation:
        if target not in index:
            raise UnknownPhoneme(f"segment target {target!r} is not in the inventory")
        if not (0 <= start < end <= frames):
            raise SegmentationOutOfRange(
                f"segment ({target}, {start}, {end}) outside 0..{frames}"
            )
        for a, b in spans:
            if start < b and a < end:
                raise SegmentationOutOfRange(
                    f"segment ({target}, {start}, {end}) overlaps another segment"
                )
        spans.append((start, end))

    best = np.maximum(matrix.max(axis=1), epsilon)
    scores = []
    for target, start, end in segmentation:
        target_post = np.maximum(matrix[start:end, index[target]], epsilon)
        scores.append(float(np.mean(np.log(target_post) - np.log(best[start:end]))))
    return scores


def _word_strings(seq: PhoneSequence) -> list[str]:
    return [" ".join(t.text() for t in word) for word in seq.words()]


def default_cost_matrix(profile: LanguageProfile, config: ScoringConfig) -> CostMatrix:
    """Cost matrix from the profile's confusion matrix, building one if absent."""
    cm = profile.confusion or build_confusion(profile, temperature=config.temperature)
    return to_cost_matrix(cm, config.floor, config.ins_cost, config.del_cost)


class _Stage:
    """Tags errors escaping one pipeline stage so reports can name it."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, PhonoscoreError):
            if not getattr(exc, "stage", None):
                exc.stage = self.name
                exc.args = (f"[{self.name}] {exc.args[0]}" if exc.args else f"[{self.name}]",)
        return False


def assess_utterance(
    canonical: PhoneSequence | str,
    recognized: PhoneSequence,
    profile: LanguageProfile,
    config: ScoringConfig = ScoringConfig(),
    *,
    posteriors: PosteriorSet | None = None,
    costs: CostMatrix | None = None,
) -> AssessmentReport:
    """Run the full per-utterance pipeline and return one report.

    `canonical` may be orthographic text (transcribed with the profile's
    rules) or an already-built phone sequence. A precomputed cost matrix can
    be passed to avoid rebuilding it per utterance in batch runs. Errors are
    tagged with the stage that raised them.
    """
    if isinstance(canonical, str):
        with _Stage("transcription"):
            canonical = transcribe(
                canonical, profile, utterance_id=recognized.utterance_id
            )
    if costs is None:
        with _Stage("confusion"):
            costs = default_cost_matrix(profile, config)

    with _Stage("alignment"):
        alignment = align(canonical, recognized, costs)
    with _Stage("classification"):
        labels = classify_errors(alignment, canonical, recognized, profile)
    counts = count_labels(labels)
    n = len(canonical.tokens)

    bearing = 0
    tone_rate = None
    if profile.tonal:
        bearing = sum(1 for t in canonical.tokens if profile.spec(t.phone).tone_bearing)
        if bearing:
            tone_rate = counts[TONE_ERROR] / bearing

    gop_summary = None
    if posteriors is not None:
        with _Stage("gop"):
            scores = gop(
                posteriors.matrix,
                posteriors.segments,
                posteriors.symbols,
                config.gop_epsilon,
            )
        gop_summary = {
            "mean": float(np.mean(scores)) if scores else None,
            "min": float(min(scores)) if scores else None,
            "scores": [
                {"phone": segment[0], "gop": score}
                for segment, score in zip(posteriors.segments, scores)
            ],
        }

    with _Stage("metrics"):
        per_raw = per(labels, n, corrected=False)
        per_corrected = per(labels, n, corrected=True)
        word_rate = wer(_word_strings(canonical), _word_strings(recognized))
    return AssessmentReport(
        utterance_id=recognized.utterance_id or canonical.utterance_id,
        counts=counts,
        canonical_phone_count=n,
        per_raw=per_raw,
        per_corrected=per_corrected,
        wer=word_rate,
        tone_error_rate=tone_rate,
        tone_bearing_count=bearing,
        gop_summary=gop_summary,
        config_echo=config.to_dict(),
    )


def corpus_summary(reports: Sequence[AssessmentReport]) -> dict:
    """Pool utterance reports into corpus metrics.

    Pooled rates (total errors over total canonical phones) are primary;
    per-utterance means are included alongside.
    """
    totals = {category: 0 for category in CATEGORIES}
    phones = 0
    bearing = 0
    for report in reports:
        for category, value in report.counts.items():
            totals[category] += value
        phones += report.canonical_phone_count
        bearing += report.tone_bearing_count

    raw_errors = sum(totals[c] for c in ERROR_CATEGORIES) + totals[ALLOPHONIC]
    corrected_errors = sum(totals[c] for c in ERROR_CATEGORIES)
    wers = [r.wer for r in reports if r.wer is not None]

    return {
        "utterances": len(reports),
        "canonical_phone_count": phones,
        "tone_bearing_count": bearing,
        "counts": totals,
        "per_raw": raw_errors / phones if phones else None,
        "per_corrected": corrected_errors / phones if phones else None,
        "tone_error_rate": totals[TONE_ERROR] / bearing if bearing else None,
        "mean_per_raw": (
            sum(r.per_raw for r in reports) / len(reports) if reports else None
        ),
        "mean_per_corrected": (
            sum(r.per_corrected for r in reports) / len(reports) if reports else None
        ),
        "mean_wer": sum(wers) / len(wers) if wers else None,
    }
