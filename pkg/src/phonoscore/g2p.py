"""Grapheme-to-phoneme conversion and phone-sequence handling.

Canonical (target) sequences come either from per-profile rewrite rules
applied to orthographic text, or from phone-sequence files produced by an
external system. Recognized sequences always come from files.

Phone-sequence file format, one utterance per line:

    utterance_id<TAB>space-separated phone tokens

with "|" as the word-boundary token and tone tags appended to tokens with
"+" (e.g. "ma+T1"). The same format is used for canonical and recognized
sequences.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import DuplicateId, NoRuleMatches, ParseError, UnknownPhoneme, ValidationError
from .profiles import G2PRule, LanguageProfile

WORD_SEPARATOR = "|"

# Stands in for an untranscribable character in lenient mode. It is not a
# member of any bundled inventory, so downstream scoring treats it as a
# distortion candidate.
DISTORTION_PLACEHOLDER = "<?>"


@dataclass(frozen=True)
class Token:
    phone: str
    tone: str | None = None
    duration: float | None = None

    def text(self) -> str:
        return self.phone if self.tone is None else f"{self.phone}+{self.tone}"


@dataclass(frozen=True)
class PhoneSequence:
    """An utterance as phone tokens plus word segmentation.

    `word_boundaries` holds the indices at which a new word starts
    (0 is implicit and never listed).
    """

    utterance_id: str
    tokens: tuple[Token, ...]
    word_boundaries: tuple[int, ...] = ()

    def __post_init__(self):
        previous = 0
        for b in self.word_boundaries:
            if not (0 < b < len(self.tokens)):
                raise ValidationError(
                    f"word boundary {b} out of range for {len(self.tokens)} tokens"
                )
            if b <= previous:
                raise ValidationError("word boundaries must be strictly increasing")
            previous = b

    def phones(self) -> list[str]:
        return [t.phone for t in self.tokens]

    def words(self) -> list[tuple[Token, ...]]:
        if not self.tokens:
            return []
        cuts = [0, *self.word_boundaries, len(self.tokens)]
        return [tuple(self.tokens[a:b]) for a, b in zip(cuts, cuts[1:])]

    def word_of_token(self, index: int) -> int:
        word = 0
        for b in self.word_boundaries:
            if index >= b:
                word += 1
        return word


def parse_token(text: str) -> Token:
    phone, sep, tone = text.partition("+")
    if not phone or (sep and not tone):
        raise ParseError(f"malformed phone token {text!r}")
    return Token(phone=phone, tone=tone or None)


def parse_phone_line(line: str, lineno: int | None = None) -> PhoneSequence:
    """Parse one `id<TAB>tokens` record."""
    if "\t" not in line:
        raise ParseError("expected 'utterance_id<TAB>phones'", line=lineno)
    utterance_id, payload = line.split("\t", 1)
    utterance_id = utterance_id.strip()
    if not utterance_id:
        raise ParseError("empty utterance id", line=lineno)

    tokens: list[Token] = []
    boundaries: list[int] = []
    for raw in payload.split():
        if raw == WORD_SEPARATOR:
            if not tokens or (boundaries and boundaries[-1] == len(tokens)):
                raise ParseError(
                    "word separator must fall between phone tokens", line=lineno
                )
            boundaries.append(len(tokens))
            continue
        tokens.append(parse_token(unicodedata.normalize("NFC", raw)))
    if boundaries and boundaries[-1] == len(tokens):
        raise ParseError("word separator must fall between phone tokens", line=lineno)
    return PhoneSequence(utterance_id, tuple(tokens), tuple(boundaries))


def read_phone_document(text: str) -> list[PhoneSequence]:
    """Parse a multi-utterance phone-sequence document; blank lines are skipped."""
    sequences = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        seq = parse_phone_line(line, lineno=lineno)
        if seq.utterance_id in seen:
            raise DuplicateId(f"utterance id {seq.utterance_id!r} occurs twice")
        seen.add(seq.utterance_id)
        sequences.append(seq)
    return sequences


def read_phone_file(path: str | Path) -> list[PhoneSequence]:
    return read_phone_document(Path(path).read_text(encoding="utf-8"))


def format_phone_line(seq: PhoneSequence) -> str:
    parts: list[str] = []
    boundaries = set(seq.word_boundaries)
    for i, token in enumerate(seq.tokens):
        if i in boundaries:
            parts.append(WORD_SEPARATOR)
        parts.append(token.text())
    return f"{seq.utterance_id}\t{' '.join(parts)}"


def format_phone_document(sequences: Iterable[PhoneSequence]) -> str:
    return "".join(format_phone_line(s) + "\n" for s in sequences)


def validate_sequence(seq: PhoneSequence, profile: LanguageProfile) -> None:
    """Check a canonical sequence against a profile (inventory and tone tags)."""
    for token in seq.tokens:
        if not profile.has(token.phone):
            raise UnknownPhoneme(
                f"{token.phone!r} in utterance {seq.utterance_id!r} is not in "
                f"the {profile.id} inventory"
            )
        if token.tone is not None:
            if not profile.spec(token.phone).tone_bearing:
                raise ValidationError(
                    f"tone tag on non-tone-bearing phone {token.phone!r} "
                    f"in utterance {seq.utterance_id!r}"
                )
            if token.tone not in profile.tone_categories:
                raise ValidationError(
                    f"unknown tone tag {token.tone!r} in utterance {seq.utterance_id!r}"
                )


def ingest_canonical(document: str, profile: LanguageProfile | None = None) -> PhoneSequence:
    """Parse a single-utterance phone record, optionally validating it."""
    records = read_phone_document(document)
    if len(records) != 1:
        raise ParseError(f"expected exactly one utterance, found {len(records)}")
    seq = records[0]
    if profile is not None:
        validate_sequence(seq, profile)
    return seq


def _rule_applies(
    rule: G2PRule, word: str, pos: int, profile: LanguageProfile
) -> bool:
    end = pos + len(rule.grapheme_pattern)
    if word[pos:end] != rule.grapheme_pattern:
        return False
    left = word[pos - 1] if pos > 0 else None
    right = word[end] if end < len(word) else None
    return profile.matches_context(rule.left_context, left) and profile.matches_context(
        rule.right_context, right
    )


def _pick_rule(
    word: str, pos: int, profile: LanguageProfile
) -> G2PRule | None:
    best: G2PRule | None = None
    best_key = None
    for order, rule in enumerate(profile.g2p_rules):
        if not _rule_applies(rule, word, pos, profile):
            continue
        key = (len(rule.grapheme_pattern), rule.priority, -order)
        if best_key is None or key > best_key:
            best, best_key = rule, key
    return best


def transcribe(
    text: str,
    profile: LanguageProfile,
    *,
    utterance_id: str = "",
    lenient: bool = False,
) -> PhoneSequence:
    """Convert orthographic text to a canonical phone sequence.

    Scans left to right; at each position the applicable rule with the
    longest grapheme match wins, then the highest priority, then the one
    listed first in the profile. Word boundaries are recorded at whitespace
    and rule contexts never cross them.
    """
    if not profile.g2p_rules:
        raise ValidationError(f"profile {profile.id} has no g2p rules")
    text = unicodedata.normalize("NFC", text)

    tokens: list[Token] = []
    boundaries: list[int] = []
    offset = 0
    for word in text.split():
        offset = text.index(word, offset)
        word_start = len(tokens)
        pos = 0
        while pos < len(word):
            rule = _pick_rule(word, pos, profile)
            if rule is None:
                if lenient:
                    tokens.append(Token(DISTORTION_PLACEHOLDER))
                    pos += 1
                    continue
                raise NoRuleMatches(word[pos], offset + pos)
            tokens.extend(parse_token(t) for t in rule.output)
            pos += len(rule.grapheme_pattern)
        if word_start > 0 and len(tokens) > word_start:
            boundaries.append(word_start)
        offset += len(word)
    return PhoneSequence(utterance_id, tuple(tokens), tuple(boundaries))


def find_rule_ties(profile: LanguageProfile) -> list[str]:
    """Warn about g2p rules distinguishable only by their order in the file."""
    warnings = []
    by_key: dict[tuple, list[int]] = {}
    for i, rule in enumerate(profile.g2p_rules):
        key = (
            rule.grapheme_pattern,
            rule.priority,
            rule.left_context,
            rule.right_context,
        )
        by_key.setdefault(key, []).append(i)
    for (pattern, priority, left, right), indices in by_key.items():
        if len(indices) > 1:
            warnings.append(
                f"g2p rules {indices} for pattern {pattern!r} "
                f"(priority {priority}, context {left!r}_{right!r}) are tied; "
                "file order decides"
            )
    return warnings


def read_text_document(text: str) -> list[tuple[str, str]]:
    """Parse an `id<TAB>orthographic text` document."""
    records = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError("expected 'utterance_id<TAB>text'", line=lineno)
        utterance_id, content = line.split("\t", 1)
        utterance_id = utterance_id.strip()
        if not utterance_id:
            raise ParseError("empty utterance id", line=lineno)
        if utterance_id in seen:
            raise DuplicateId(f"utterance id {utterance_id!r} occurs twice")
        seen.add(utterance_id)
        records.append((utterance_id, content.strip()))
    return records
