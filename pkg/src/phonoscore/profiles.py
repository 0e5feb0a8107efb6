"""Language profiles: phoneme inventories, feature vectors, and rewrite rules.

A profile is the single container for everything the scorer knows about a
language: its phoneme inventory with articulatory-style feature vectors,
named phoneme classes, allophone rules, grapheme-to-phoneme rules, tone and
rhythm metadata, and an optional confusion matrix. Profiles are immutable
after loading and safe to share between workers.
"""

from __future__ import annotations

import json
import math
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping

from .errors import ParseError, UnknownPhoneme, ValidationError

if TYPE_CHECKING:
    from .confusion import ConfusionMatrix

RHYTHM_CLASSES = ("stress_timed", "syllable_timed", "mora_timed")

WILDCARD = "*"
BOUNDARY = "#"

_BUNDLED = ("spanish_demo", "english_demo", "tonal_demo")


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True)
class PhonemeSpec:
    """One inventory member: an IPA symbol plus its feature vector."""

    symbol: str
    features: tuple[float, ...]
    is_vowel: bool = False
    tone_bearing: bool = False


@dataclass(frozen=True)
class AllophoneRule:
    """Licenses canonical -> surface in a context; surface may be non-native.

    Context patterns are a phoneme symbol, a class name, the word boundary
    marker "#", or the wildcard "*".
    """

    canonical: str
    surface: str
    left_context: str = WILDCARD
    right_context: str = WILDCARD
    priority: int = 0
    rule_id: str = ""


@dataclass(frozen=True)
class G2PRule:
    """Rewrites a grapheme string to phone tokens (possibly none).

    Output tokens may carry a tone suffix, e.g. "a+T1". Contexts use the
    same pattern language as AllophoneRule but match single orthographic
    characters.
    """

    grapheme_pattern: str
    output: tuple[str, ...]
    left_context: str = WILDCARD
    right_context: str = WILDCARD
    priority: int = 0


@dataclass(frozen=True)
class LanguageProfile:
    id: str
    feature_names: tuple[str, ...]
    inventory: tuple[PhonemeSpec, ...]
    classes: Mapping[str, frozenset[str]] = field(default_factory=dict)
    allophone_rules: tuple[AllophoneRule, ...] = ()
    g2p_rules: tuple[G2PRule, ...] = ()
    tonal: bool = False
    tone_categories: tuple[str, ...] = ()
    rhythm_class: str = "syllable_timed"
    confusion: "ConfusionMatrix | None" = None

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(p.symbol for p in self.inventory)

    def spec(self, symbol: str) -> PhonemeSpec:
        found = self._by_symbol().get(symbol)
        if found is None:
            raise UnknownPhoneme(f"{symbol!r} is not in the {self.id} inventory")
        return found

    def has(self, symbol: str) -> bool:
        return symbol in self._by_symbol()

    def _by_symbol(self) -> dict[str, PhonemeSpec]:
        # cached on first use; the profile is frozen so this is safe
        cache = self.__dict__.get("_symbol_cache")
        if cache is None:
            cache = {p.symbol: p for p in self.inventory}
            object.__setattr__(self, "_symbol_cache", cache)
        return cache

    def matches_context(self, pattern: str, token: str | None) -> bool:
        """True if `token` (None = word boundary) satisfies a context pattern."""
        if pattern == WILDCARD:
            return True
        if pattern == BOUNDARY:
            return token is None
        if token is None:
            return False
        members = self.classes.get(pattern)
        if members is not None:
            return token in members
        return pattern == token


def feature_distance(p: str, q: str, profile: LanguageProfile) -> float:
    """Euclidean distance between two inventory phonemes in feature space."""
    return math.dist(profile.spec(p).features, profile.spec(q).features)


def validate_profile(profile: LanguageProfile) -> list[str]:
    """Check every profile invariant; return one description per violation."""
    violations: list[str] = []
    n_features = len(profile.feature_names)

    if not profile.id:
        violations.append("profile id must be non-empty")
    if len(set(profile.feature_names)) != n_features:
        violations.append("feature_names contains duplicates")

    seen: set[str] = set()
    for spec in profile.inventory:
        if not spec.symbol:
            violations.append("inventory symbol must be non-empty")
        elif spec.symbol in seen:
            violations.append(f"duplicate inventory symbol {spec.symbol!r}")
        seen.add(spec.symbol)
        if len(spec.features) != n_features:
            violations.append(
                f"phoneme {spec.symbol!r} has {len(spec.features)} features, "
                f"schema has {n_features}"
            )
        for name, value in zip(profile.feature_names, spec.features):
            if not (-1.0 <= value <= 1.0):
                violations.append(
                    f"phoneme {spec.symbol!r} feature {name!r} = {value} "
                    "is outside [-1, +1]"
                )

    for name, members in profile.classes.items():
        for symbol in sorted(members):
            if symbol not in seen:
                violations.append(
                    f"class {name!r} member {symbol!r} is not in the inventory"
                )

    rule_keys: set[tuple] = set()
    for rule in profile.allophone_rules:
        label = rule.rule_id or f"{rule.canonical}>{rule.surface}"
        if rule.canonical not in seen:
            violations.append(
                f"allophone rule {label!r}: canonical {rule.canonical!r} "
                "is not in the inventory"
            )
        key = (rule.canonical, rule.surface, rule.left_context, rule.right_context)
        if key in rule_keys:
            violations.append(f"duplicate allophone rule {label!r}")
        rule_keys.add(key)

    for rule in profile.g2p_rules:
        if not rule.grapheme_pattern:
            violations.append("g2p rule with empty grapheme pattern")
        for token in rule.output:
            phone, _, tone = token.partition("+")
            if phone not in seen:
                violations.append(
                    f"g2p rule {rule.grapheme_pattern!r}: output phone "
                    f"{phone!r} is not in the inventory"
                )
            if tone and tone not in profile.tone_categories:
                violations.append(
                    f"g2p rule {rule.grapheme_pattern!r}: unknown tone tag {tone!r}"
                )

    if profile.tonal != bool(profile.tone_categories):
        violations.append(
            "tonal must be true exactly when tone_categories is non-empty"
        )
    if len(set(profile.tone_categories)) != len(profile.tone_categories):
        violations.append("tone_categories contains duplicates")

    if profile.rhythm_class not in RHYTHM_CLASSES:
        violations.append(
            f"rhythm_class {profile.rhythm_class!r} is not one of {RHYTHM_CLASSES}"
        )

    if profile.confusion is not None:
        if tuple(profile.confusion.symbols) != profile.symbols:
            violations.append(
                "confusion matrix axis does not equal the inventory symbol list"
            )

    return violations


def _parse_features(raw: Any, feature_names: tuple[str, ...], symbol: str) -> tuple[float, ...]:
    if not isinstance(raw, dict):
        raise ParseError(f"features of {symbol!r} must be an object")
    missing = [n for n in feature_names if n not in raw]
    extra = [n for n in raw if n not in feature_names]
    if missing or extra:
        raise ParseError(
            f"features of {symbol!r} do not match the profile schema "
            f"(missing {missing}, unexpected {extra})"
        )
    return tuple(float(raw[n]) for n in feature_names)


def profile_from_dict(doc: dict) -> LanguageProfile:
    """Build a profile from a parsed JSON document, without validating invariants."""
    if not isinstance(doc, dict):
        raise ParseError("profile document must be a JSON object")
    required = ("id", "feature_names", "inventory")
    for key in required:
        if key not in doc:
            raise ParseError(f"profile document is missing {key!r}")
    try:
        return _profile_from_dict(doc)
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise ParseError(f"malformed profile document: {exc!r}") from exc


def _profile_from_dict(doc: dict) -> LanguageProfile:

    feature_names = tuple(_nfc(str(n)) for n in doc["feature_names"])

    inventory = []
    for entry in doc["inventory"]:
        if not isinstance(entry, dict) or "symbol" not in entry:
            raise ParseError("inventory entries must be objects with a 'symbol'")
        symbol = _nfc(str(entry["symbol"]))
        inventory.append(
            PhonemeSpec(
                symbol=symbol,
                features=_parse_features(entry.get("features", {}), feature_names, symbol),
                is_vowel=bool(entry.get("is_vowel", False)),
                tone_bearing=bool(entry.get("tone_bearing", False)),
            )
        )

    classes = {
        _nfc(str(name)): frozenset(_nfc(str(s)) for s in members)
        for name, members in doc.get("classes", {}).items()
    }

    allophone_rules = []
    for i, entry in enumerate(doc.get("allophone_rules", [])):
        canonical = _nfc(str(entry["canonical"]))
        surface = _nfc(str(entry["surface"]))
        allophone_rules.append(
            AllophoneRule(
                canonical=canonical,
                surface=surface,
                left_context=_nfc(str(entry.get("left", WILDCARD))),
                right_context=_nfc(str(entry.get("right", WILDCARD))),
                priority=int(entry.get("priority", 0)),
                rule_id=str(entry.get("id", f"{canonical}>{surface}/{i}")),
            )
        )

    g2p_rules = []
    for entry in doc.get("g2p_rules", []):
        g2p_rules.append(
            G2PRule(
                grapheme_pattern=_nfc(str(entry["pattern"])),
                output=tuple(_nfc(str(t)) for t in entry.get("output", [])),
                left_context=_nfc(str(entry.get("left", WILDCARD))),
                right_context=_nfc(str(entry.get("right", WILDCARD))),
                priority=int(entry.get("priority", 0)),
            )
        )

    confusion = None
    if doc.get("confusion") is not None:
        from .confusion import ConfusionMatrix

        raw = doc["confusion"]
        try:
            confusion = ConfusionMatrix(
                symbols=tuple(_nfc(str(s)) for s in raw["symbols"]),
                p=raw["p"],
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed embedded confusion matrix: {exc}") from exc

    return LanguageProfile(
        id=str(doc["id"]),
        feature_names=feature_names,
        inventory=tuple(inventory),
        classes=classes,
        allophone_rules=tuple(allophone_rules),
        g2p_rules=tuple(g2p_rules),
        tonal=bool(doc.get("tonal", False)),
        tone_categories=tuple(str(t) for t in doc.get("tone_categories", [])),
        rhythm_class=str(doc.get("rhythm_class", "syllable_timed")),
        confusion=confusion,
    )


def profile_from_json(text: str) -> LanguageProfile:
    """Parse and validate a profile from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    profile = profile_from_dict(doc)
    violations = validate_profile(profile)
    if violations:
        raise ValidationError(violations[0])
    return profile


def load_profile(path: str | Path) -> LanguageProfile:
    """Load and validate a profile from a JSON file."""
    return profile_from_json(Path(path).read_text(encoding="utf-8"))


def profile_to_dict(profile: LanguageProfile) -> dict:
    """Serialize a profile to a JSON-compatible document (round-trip safe)."""
    doc: dict[str, Any] = {
        "id": profile.id,
        "feature_names": list(profile.feature_names),
        "inventory": [
            {
                "symbol": p.symbol,
                "features": dict(zip(profile.feature_names, p.features)),
                "is_vowel": p.is_vowel,
                "tone_bearing": p.tone_bearing,
            }
            for p in profile.inventory
        ],
        "classes": {name: sorted(members) for name, members in profile.classes.items()},
        "allophone_rules": [
            {
                "canonical": r.canonical,
                "surface": r.surface,
                "left": r.left_context,
                "right": r.right_context,
                "priority": r.priority,
                "id": r.rule_id,
            }
            for r in profile.allophone_rules
        ],
        "g2p_rules": [
            {
                "pattern": r.grapheme_pattern,
                "output": list(r.output),
                "left": r.left_context,
                "right": r.right_context,
                "priority": r.priority,
            }
            for r in profile.g2p_rules
        ],
        "tonal": profile.tonal,
        "tone_categories": list(profile.tone_categories),
        "rhythm_class": profile.rhythm_class,
        "confusion": None,
    }
    if profile.confusion is not None:
        doc["confusion"] = {
            "symbols": list(profile.confusion.symbols),
            "p": [[float(x) for x in row] for row in profile.confusion.p],
        }
    return doc


def with_confusion(profile: LanguageProfile, confusion: "ConfusionMatrix") -> LanguageProfile:
    """Return a copy of the profile with a confusion matrix attached."""
    updated = replace(profile, confusion=confusion)
    violations = validate_profile(updated)
    if violations:
        raise ValidationError(violations[0])
    return updated


def bundled_profile_path(name: str) -> Path:
    """Path of one of the demo profiles shipped with the package."""
    if name not in _BUNDLED:
        raise KeyError(f"no bundled profile {name!r}; available: {_BUNDLED}")
    return Path(__file__).parent / "data" / f"{name}.json"


def bundled_profile(name: str) -> LanguageProfile:
    return load_profile(bundled_profile_path(name))
