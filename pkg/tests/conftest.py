import pytest

from phonoscore.profiles import (
    LanguageProfile,
    PhonemeSpec,
    bundled_profile,
)

FEATURES = (
    "height",
    "backness",
    "rounding",
    "voicing",
    "sonorant",
    "continuant",
    "nasal",
    "place",
)


def make_phoneme(symbol, **overrides):
    values = {
        "height": 0.0,
        "backness": 0.0,
        "rounding": -1.0,
        "voicing": 1.0,
        "sonorant": -1.0,
        "continuant": -1.0,
        "nasal": -1.0,
        "place": 0.0,
    }
    is_vowel = overrides.pop("is_vowel", False)
    tone_bearing = overrides.pop("tone_bearing", False)
    values.update(overrides)
    return PhonemeSpec(
        symbol=symbol,
        features=tuple(values[name] for name in FEATURES),
        is_vowel=is_vowel,
        tone_bearing=tone_bearing,
    )


def make_profile(symbols, profile_id="toy", **kwargs):
    """A small profile whose phonemes differ only in a synthetic place value."""
    inventory = tuple(
        make_phoneme(s, place=-1.0 + 2.0 * i / max(len(symbols) - 1, 1))
        for i, s in enumerate(symbols)
    )
    defaults = dict(
        id=profile_id,
        feature_names=FEATURES,
        inventory=inventory,
        g2p_rules=(),
    )
    defaults.update(kwargs)
    return LanguageProfile(**defaults)


@pytest.fixture(scope="session")
def spanish():
    return bundled_profile("spanish_demo")


@pytest.fixture(scope="session")
def english():
    return bundled_profile("english_demo")


@pytest.fixture(scope="session")
def tonal():
    return bundled_profile("tonal_demo")
