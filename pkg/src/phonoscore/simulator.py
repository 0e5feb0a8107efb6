"""Symbolic dysarthria-like degradation of canonical phone sequences.

Degradations operate on phone tokens, tone tags, and durations rather than
audio, which is enough to probe how differently languages score the same
kind of disruption. Every run is reproducible: each utterance gets its own
generator seeded by a documented mix of the spec seed and the utterance id,
so corpus order and parallelism never change the output.

Operations are applied in a fixed order that is part of the interface:
tone_flatten, centralize, confusion_noise, deletion, rhythm_equalize.
Operations whose rate is zero are skipped without consuming randomness.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, replace

from .errors import (
    MissingConfusionMatrix,
    MissingDurations,
    PhonoscoreError,
    ValidationError,
)
from .g2p import PhoneSequence, Token, transcribe
from .profiles import LanguageProfile
from .scoring import ScoringConfig, assess_utterance, corpus_summary, default_cost_matrix

_RATE_FIELDS = ("tone_flatten", "centralize", "confusion_noise", "deletion_rate")


@dataclass(frozen=True)
class PerturbationSpec:
    tone_flatten: float = 0.0
    centralize: float = 0.0
    confusion_noise: float = 0.0
    deletion_rate: float = 0.0
    rhythm_equalize: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in _RATE_FIELDS:
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")

    def to_dict(self) -> dict:
        return {
            "tone_flatten": self.tone_flatten,
            "centralize": self.centralize,
            "confusion_noise": self.confusion_noise,
            "deletion_rate": self.deletion_rate,
            "rhythm_equalize": self.rhythm_equalize,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PerturbationSpec":
        unknown = set(doc) - {*_RATE_FIELDS, "rhythm_equalize", "seed"}
        if unknown:
            raise ValidationError(f"unknown perturbation fields: {sorted(unknown)}")
        try:
            return cls(
                **{name: float(doc[name]) for name in _RATE_FIELDS if name in doc},
                rhythm_equalize=bool(doc.get("rhythm_equalize", False)),
                seed=int(doc.get("seed", 0)),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad perturbation field value: {exc}") from exc


def utterance_seed(base_seed: int, utterance_id: str) -> int:
    """64-bit stream seed: blake2b of the decimal base seed and the id."""
    digest = hashlib.blake2b(
        f"{base_seed}:{utterance_id}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def _norm_sq(spec, height_idx: int, backness_idx: int) -> float:
    return spec.features[height_idx] ** 2 + spec.features[backness_idx] ** 2


def centralization_targets(profile: LanguageProfile) -> dict[str, str]:
    """Map each vowel to its nearest strictly-more-central vowel, if any.

    "More central" means a strictly smaller norm over the height/backness
    feature pair; nearness uses the full feature vector. Vowels with no
    more-central neighbor (the centre of the space) are absent from the map.
    """
    try:
        height_idx = profile.feature_names.index("height")
        backness_idx = profile.feature_names.index("backness")
    except ValueError as exc:
        raise ValidationError(
            f"profile {profile.id} lacks height/backness features needed "
            "for centralization"
        ) from exc
    vowels = [s for s in profile.inventory if s.is_vowel]
    targets: dict[str, str] = {}
    for source in vowels:
        source_norm = _norm_sq(source, height_idx, backness_idx)
        best = None
        best_dist = None
        for candidate in vowels:
            if _norm_sq(candidate, height_idx, backness_idx) >= source_norm:
                continue
            dist = sum(
                (a - b) ** 2 for a, b in zip(source.features, candidate.features)
            )
            if best_dist is None or dist < best_dist:
                best, best_dist = candidate, dist
        if best is not None:
            targets[source.symbol] = best.symbol
    return targets


def _retag(token: Token, new_phone: str, profile: LanguageProfile) -> Token:
    """Move a token to a new phone, keeping the tone only if it can bear one."""
    keeps_tone = token.tone is not None and profile.spec(new_phone).tone_bearing
    return Token(new_phone, token.tone if keeps_tone else None, token.duration)


def perturb(
    canonical: PhoneSequence, spec: PerturbationSpec, profile: LanguageProfile
) -> PhoneSequence:
    """Apply the degradations in fixed order with a per-utterance generator."""
    rng = random.Random(utterance_seed(spec.seed, canonical.utterance_id))
    tokens = list(canonical.tokens)

    if spec.tone_flatten > 0 and profile.tone_categories:
        flat = profile.tone_categories[0]
        for i, token in enumerate(tokens):
            if token.tone is not None and rng.random() < spec.tone_flatten:
                tokens[i] = Token(token.phone, flat, token.duration)

    if spec.centralize > 0:
        targets = centralization_targets(profile)
        for i, token in enumerate(tokens):
            if not profile.has(token.phone) or not profile.spec(token.phone).is_vowel:
                continue
            if rng.random() < spec.centralize:
                target = targets.get(token.phone)
                if target is not None:
                    tokens[i] = _retag(token, target, profile)

    if spec.confusion_noise > 0:
        cm = profile.confusion
        if cm is None:
            raise MissingConfusionMatrix(
                f"confusion_noise needs a confusion matrix on profile {profile.id}"
            )
        for i, token in enumerate(tokens):
            if rng.random() < spec.confusion_noise:
                row = cm.row(token.phone)
                phone = rng.choices(cm.symbols, weights=row.tolist())[0]
                tokens[i] = _retag(token, phone, profile)

    if spec.deletion_rate > 0:
        survivors = []
        words = []
        for i, token in enumerate(tokens):
            if rng.random() >= spec.deletion_rate:
                survivors.append(token)
                words.append(canonical.word_of_token(i))
        tokens = survivors
        boundaries = tuple(
            i for i in range(1, len(tokens)) if words[i] != words[i - 1]
        )
    else:
        boundaries = canonical.word_boundaries

    if spec.rhythm_equalize and tokens:
        durations = [t.duration for t in tokens]
        if any(d is None for d in durations):
            raise MissingDurations(
                "rhythm_equalize needs every token to carry a duration"
            )
        mean = sum(durations) / len(durations)
        tokens = [Token(t.phone, t.tone, mean) for t in tokens]

    return PhoneSequence(canonical.utterance_id, tuple(tokens), boundaries)


def predict_impact(
    profiles: list[LanguageProfile],
    spec: PerturbationSpec,
    corpora: list[list[str]],
    trials: int,
    config: ScoringConfig = ScoringConfig(),
) -> dict:
    """Score each profile's corpus against its perturbed version.

    For every profile: transcribe its texts, perturb them over `trials`
    derived seeds (base seed + trial index), assess each perturbed corpus
    against the canonical one, and report pooled corrected PER and tone
    error rate with deltas against the unperturbed baseline. Seeds are
    shared across profiles so trials are paired.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if len(profiles) != len(corpora):
        raise ValidationError("one corpus (list of texts) is required per profile")

    table: dict[str, dict] = {}
    for profile, texts in zip(profiles, corpora):
        try:
            table[profile.id] = _impact_for_profile(profile, spec, texts, trials, config)
        except PhonoscoreError as exc:
            exc.args = (f"[{profile.id}] {exc.args[0]}" if exc.args else f"[{profile.id}]",)
            raise

    return {
        "spec": spec.to_dict(),
        "trials": trials,
        "config": config.to_dict(),
        "profiles": table,
    }


def _impact_for_profile(
    profile: LanguageProfile,
    spec: PerturbationSpec,
    texts: list[str],
    trials: int,
    config: ScoringConfig,
) -> dict:
    costs = default_cost_matrix(profile, config)
    canonical = [
        transcribe(text, profile, utterance_id=f"u{i:05d}")
        for i, text in enumerate(texts)
    ]
    baseline_reports = [
        assess_utterance(c, c, profile, config, costs=costs) for c in canonical
    ]
    baseline = corpus_summary(baseline_reports)
    base_per = baseline["per_corrected"] or 0.0
    base_tone = baseline["tone_error_rate"] or 0.0

    trial_rows = []
    for trial in range(trials):
        trial_spec = replace(spec, seed=spec.seed + trial)
        reports = [
            assess_utterance(
                c, perturb(c, trial_spec, profile), profile, config, costs=costs
            )
            for c in canonical
        ]
        pooled = corpus_summary(reports)
        per_corrected = pooled["per_corrected"] or 0.0
        tone_rate = pooled["tone_error_rate"] or 0.0
        trial_rows.append(
            {
                "seed": trial_spec.seed,
                "per_corrected": per_corrected,
                "tone_error_rate": tone_rate,
                "delta_per_corrected": per_corrected - base_per,
                "delta_tone_error_rate": tone_rate - base_tone,
            }
        )

    return {
        "baseline_per_corrected": base_per,
        "baseline_tone_error_rate": base_tone,
        "mean_per_corrected": sum(t["per_corrected"] for t in trial_rows) / trials,
        "mean_tone_error_rate": sum(t["tone_error_rate"] for t in trial_rows) / trials,
        "mean_delta_per_corrected": sum(t["delta_per_corrected"] for t in trial_rows)
        / trials,
        "mean_delta_tone_error_rate": sum(
            t["delta_tone_error_rate"] for t in trial_rows
        )
        / trials,
        "trials": trial_rows,
    }
