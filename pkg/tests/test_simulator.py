import pytest

from phonoscore.confusion import build_confusion
from phonoscore.errors import (
    MissingConfusionMatrix,
    MissingDurations,
    ValidationError,
)
from phonoscore.g2p import (
    PhoneSequence,
    Token,
    format_phone_line,
    ingest_canonical,
    parse_phone_line,
    transcribe,
)
from phonoscore.profiles import with_confusion
from phonoscore.scoring import assess_utterance
from phonoscore.simulator import (
    PerturbationSpec,
    centralization_targets,
    perturb,
    predict_impact,
    utterance_seed,
)

SP_TEXT = "piel salud libro bar"
TONAL_TEXT = "ma1 ma2 ni3 tu4"


def test_rates_validated():
    with pytest.raises(ValidationError):
        PerturbationSpec(tone_flatten=1.5)
    with pytest.raises(ValidationError):
        PerturbationSpec(deletion_rate=-0.1)


def test_spec_round_trip():
    spec = PerturbationSpec(centralize=0.5, seed=9)
    assert PerturbationSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValidationError):
        PerturbationSpec.from_dict({"centralise": 0.5})


def test_zero_spec_is_identity(spanish, tonal):
    for profile, text in ((spanish, SP_TEXT), (tonal, TONAL_TEXT)):
        canonical = transcribe(text, profile, utterance_id="u1")
        assert perturb(canonical, PerturbationSpec(seed=3), profile) == canonical


def test_tone_flatten_forces_first_category(tonal):
    canonical = transcribe(TONAL_TEXT, tonal, utterance_id="u1")
    out = perturb(canonical, PerturbationSpec(tone_flatten=1.0, seed=1), tonal)
    tones = [t.tone for t in out.tokens if t.tone is not None]
    assert tones and all(t == "T1" for t in tones)
    assert [t.phone for t in out.tokens] == [t.phone for t in canonical.tokens]


def test_tone_flatten_noop_for_non_tonal(spanish):
    canonical = transcribe(SP_TEXT, spanish, utterance_id="u1")
    out = perturb(canonical, PerturbationSpec(tone_flatten=1.0, seed=1), spanish)
    assert out == canonical


def test_centralization_map_spanish(spanish):
    assert centralization_targets(spanish) == {"i": "e", "u": "o"}


def test_centralization_map_english_covers_nine(english):
    targets = centralization_targets(english)
    assert len(targets) == 9
    assert "ɛ" not in targets  # the centre of the space has nowhere to go
    assert targets["o"] == "ɔ"
    assert targets["i"] == "ɪ"


def test_centralize_full_probability(spanish):
    canonical = ingest_canonical("u\tp i k u", spanish)
    out = perturb(canonical, PerturbationSpec(centralize=1.0, seed=5), spanish)
    assert out.phones() == ["p", "e", "k", "o"]


def test_centralize_leaves_central_vowels(spanish):
    canonical = ingest_canonical("u\tp a k e s o", spanish)
    out = perturb(canonical, PerturbationSpec(centralize=1.0, seed=5), spanish)
    assert out == canonical


def test_confusion_noise_requires_matrix(spanish):
    canonical = transcribe(SP_TEXT, spanish, utterance_id="u1")
    with pytest.raises(MissingConfusionMatrix):
        perturb(canonical, PerturbationSpec(confusion_noise=0.5, seed=1), spanish)


def test_confusion_noise_resamples_from_rows(spanish):
    profile = with_confusion(spanish, build_confusion(spanish))
    canonical = transcribe(SP_TEXT, profile, utterance_id="u1")
    out = perturb(canonical, PerturbationSpec(confusion_noise=1.0, seed=11), profile)
    assert len(out.tokens) == len(canonical.tokens)
    assert all(profile.has(t.phone) for t in out.tokens)
    assert out.phones() != canonical.phones()


def test_deletion_rewrites_word_boundaries(spanish):
    canonical = transcribe(SP_TEXT, spanish, utterance_id="u1")
    out = perturb(canonical, PerturbationSpec(deletion_rate=0.5, seed=4), spanish)
    assert len(out.tokens) < len(canonical.tokens)
    # boundaries stay strictly increasing and in range (validated on build),
    # and the file format round-trips
    assert parse_phone_line(format_phone_line(out)) == out


def test_deletion_rate_one_empties_sequence(spanish):
    canonical = transcribe(SP_TEXT, spanish, utterance_id="u1")
    out = perturb(canonical, PerturbationSpec(deletion_rate=1.0, seed=4), spanish)
    assert out.tokens == ()
    assert out.word_boundaries == ()


def test_rhythm_equalize_sets_means(spanish):
    tokens = (Token("p", None, 0.1), Token("a", None, 0.3))
    seq = PhoneSequence("u", tokens)
    out = perturb(seq, PerturbationSpec(rhythm_equalize=True, seed=1), spanish)
    assert [t.duration for t in out.tokens] == [pytest.approx(0.2)] * 2


def test_rhythm_equalize_requires_durations(spanish):
    seq = PhoneSequence("u", (Token("p"), Token("a")))
    with pytest.raises(MissingDurations):
        perturb(seq, PerturbationSpec(rhythm_equalize=True, seed=1), spanish)


def test_perturb_deterministic_and_order_free(spanish):
    spec = PerturbationSpec(centralize=0.5, deletion_rate=0.3, seed=123)
    a = transcribe(SP_TEXT, spanish, utterance_id="utt-a")
    b = transcribe("libro bar", spanish, utterance_id="utt-b")
    first = [perturb(a, spec, spanish), perturb(b, spec, spanish)]
    second = [perturb(b, spec, spanish), perturb(a, spec, spanish)][::-1]
    assert first == second
    assert perturb(a, spec, spanish) == first[0]


def test_utterance_seed_mixes_id_and_seed():
    assert utterance_seed(1, "a") != utterance_seed(2, "a")
    assert utterance_seed(1, "a") != utterance_seed(1, "b")
    assert utterance_seed(1, "a") == utterance_seed(1, "a")


def test_deletion_monotonic_in_rate_paired_seeds(spanish):
    canonical = transcribe(SP_TEXT, spanish, utterance_id="u1")
    for seed in range(30):
        low = perturb(canonical, PerturbationSpec(deletion_rate=0.2, seed=seed), spanish)
        high = perturb(canonical, PerturbationSpec(deletion_rate=0.7, seed=seed), spanish)
        assert len(high.tokens) <= len(low.tokens)


def test_closure_perturbed_remains_assessable(spanish):
    profile = with_confusion(spanish, build_confusion(spanish))
    spec = PerturbationSpec(
        centralize=0.4, confusion_noise=0.2, deletion_rate=0.2, seed=8
    )
    for i in range(20):
        canonical = transcribe(SP_TEXT, profile, utterance_id=f"u{i}")
        out = perturb(canonical, spec, profile)
        round_tripped = parse_phone_line(format_phone_line(out))
        assert round_tripped == out
        report = assess_utterance(canonical, round_tripped, profile)
        assert 0.0 <= report.per_corrected <= report.per_raw


def test_predict_impact_zero_spec_all_deltas_zero(spanish, tonal):
    impact = predict_impact(
        [spanish, tonal],
        PerturbationSpec(seed=42),
        [["piel bar", "libro"], ["ma1 ni3", "tu4"]],
        trials=3,
    )
    for row in impact["profiles"].values():
        assert row["mean_delta_per_corrected"] == 0.0
        assert row["mean_delta_tone_error_rate"] == 0.0


def test_predict_impact_tone_sign(spanish, english, tonal):
    impact = predict_impact(
        [tonal, spanish, english],
        PerturbationSpec(tone_flatten=1.0, seed=1),
        [["ma2 ni3", "tu4 sa2"], ["piel bar"], ["mee too"]],
        trials=4,
    )
    rows = impact["profiles"]
    assert rows["tonal_demo"]["mean_delta_tone_error_rate"] > 0.0
    assert rows["spanish_demo"]["mean_delta_tone_error_rate"] == 0.0
    assert rows["english_demo"]["mean_delta_tone_error_rate"] == 0.0
    for row in rows.values():
        assert row["mean_delta_per_corrected"] == 0.0


def test_predict_impact_validates_arguments(spanish):
    with pytest.raises(ValidationError):
        predict_impact([spanish], PerturbationSpec(), [["a"]], trials=0)
    with pytest.raises(ValidationError):
        predict_impact([spanish], PerturbationSpec(), [], trials=1)


def test_predict_impact_deterministic(spanish):
    spec = PerturbationSpec(centralize=0.5, seed=321)
    corpora = [["piel salud", "libro bar"]]
    first = predict_impact([spanish], spec, corpora, trials=5)
    second = predict_impact([spanish], spec, corpora, trials=5)
    assert first == second


def test_retagged_phone_drops_tone_when_not_bearing(tonal):
    # confusion resampling may land on a consonant; the tag must not survive
    profile = with_confusion(tonal, build_confusion(tonal))
    canonical = transcribe("ma1 ma2 ma3 ma4 mi1 mi2", profile, utterance_id="u")
    out = perturb(canonical, PerturbationSpec(confusion_noise=1.0, seed=2), profile)
    for token in out.tokens:
        if token.tone is not None:
            assert profile.spec(token.phone).tone_bearing


def test_predict_impact_errors_name_the_profile(spanish):
    # confusion_noise without a matrix fails inside one profile's run
    with pytest.raises(MissingConfusionMatrix, match=r"\[spanish_demo\]"):
        predict_impact(
            [spanish],
            PerturbationSpec(confusion_noise=0.5, seed=1),
            [["piel bar"]],
            trials=1,
        )


def test_spec_from_dict_rejects_bad_values():
    with pytest.raises(ValidationError):
        PerturbationSpec.from_dict({"centralize": "lots"})
    spec = PerturbationSpec.from_dict({"centralize": "0.5", "seed": "7"})
    assert spec.centralize == 0.5 and spec.seed == 7
