import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonoscore.confusion import (
    ConfusionMatrix,
    build_confusion,
    confusion_from_csv,
    confusion_to_csv,
    density_report,
    to_cost_matrix,
    unit_cost_matrix,
)
from phonoscore.errors import (
    DimensionMismatch,
    NonPositiveTemperature,
    UnknownPhoneme,
    ValidationError,
)
from phonoscore.profiles import LanguageProfile, PhonemeSpec


def vector_profile(vectors, profile_id="vec"):
    """Profile whose phonemes carry explicit low-dimensional vectors."""
    n_dims = len(next(iter(vectors.values())))
    names = tuple(f"f{i}" for i in range(n_dims))
    inventory = tuple(
        PhonemeSpec(symbol, tuple(values)) for symbol, values in vectors.items()
    )
    return LanguageProfile(id=profile_id, feature_names=names, inventory=inventory)


def test_singleton_inventory():
    cm = build_confusion(vector_profile({"a": [0.0]}))
    assert cm.p.tolist() == [[1.0]]


def test_identical_vectors_split_evenly():
    cm = build_confusion(vector_profile({"a": [0.3, 0.1], "b": [0.3, 0.1]}))
    assert cm.p.tolist() == [[0.5, 0.5], [0.5, 0.5]]


def test_softmax_values_match_direct_formula():
    # hand-rolled softmax over -distance for a 3-phoneme line
    vectors = {"a": [0.0], "b": [1.0], "c": [0.4]}
    cm = build_confusion(vector_profile(vectors), temperature=1.0)
    symbols = list(vectors)
    for i, p in enumerate(symbols):
        weights = [
            math.exp(-abs(vectors[p][0] - vectors[q][0])) for q in symbols
        ]
        total = sum(weights)
        for j in range(3):
            assert cm.p[i][j] == pytest.approx(weights[j] / total, abs=1e-12)


def test_spanish_o_row_prefers_u(spanish):
    cm = build_confusion(spanish)
    row = cm.row("o")
    assert row[cm.index("u")] > row[cm.index("i")]


def test_rows_are_stochastic(spanish, english, tonal):
    for profile in (spanish, english, tonal):
        cm = build_confusion(profile)
        assert np.allclose(cm.p.sum(axis=1), 1.0, atol=1e-9)
        assert (cm.p >= 0).all()


def test_non_positive_temperature_rejected(spanish):
    with pytest.raises(NonPositiveTemperature):
        build_confusion(spanish, temperature=0.0)
    with pytest.raises(NonPositiveTemperature):
        build_confusion(spanish, temperature=-1.0)


def test_centroids_override_features(spanish):
    centroids = {s: [float(i), 0.0] for i, s in enumerate(spanish.symbols)}
    cm = build_confusion(spanish, centroids=centroids)
    # nearest neighbours are now adjacent indices
    row = cm.row(spanish.symbols[0])
    assert row[1] > row[2] > row[3]


def test_centroid_dimension_mismatch(spanish):
    centroids = {s: [0.0, 1.0] for s in spanish.symbols}
    centroids[spanish.symbols[0]] = [0.0]
    with pytest.raises(DimensionMismatch):
        build_confusion(spanish, centroids=centroids)
    with pytest.raises(DimensionMismatch):
        build_confusion(spanish, centroids={"a": [0.0]})


def test_monotonicity_closer_means_more_confusable():
    near = build_confusion(vector_profile({"a": [0.0], "b": [0.5], "c": [2.0]}))
    far = build_confusion(vector_profile({"a": [0.0], "b": [1.0], "c": [2.0]}))
    assert near.p[0][1] > far.p[0][1]


def test_density_adding_member_decreases_self_mass():
    base = vector_profile({"a": [0.0], "b": [1.0]})
    denser = vector_profile({"a": [0.0], "b": [1.0], "c": [0.7]})
    p_base = build_confusion(base)
    p_dense = build_confusion(denser)
    assert p_dense.p[0][0] < p_base.p[0][0]


def test_duplicate_neighbour_increases_off_diagonal_mass():
    base = vector_profile({"a": [0.0], "b": [1.0]})
    doubled = vector_profile({"a": [0.0], "b": [1.0], "b2": [1.0]})
    off_base = 1.0 - build_confusion(base).p[0][0]
    off_doubled = 1.0 - build_confusion(doubled).p[0][0]
    assert off_doubled > off_base


def test_temperature_limits(spanish):
    hot = build_confusion(spanish, temperature=1e3)
    n = len(spanish.symbols)
    assert np.allclose(hot.p, 1.0 / n, atol=1e-3)
    cold = build_confusion(spanish, temperature=1e-3)
    # no two phonemes share a vector, so all mass collapses onto the target
    assert np.allclose(np.diagonal(cold.p), 1.0, atol=1e-9)


def test_cost_matrix_uniform_off_diagonal():
    p = [
        [0.8, 0.1, 0.1],
        [0.1, 0.8, 0.1],
        [0.1, 0.1, 0.8],
    ]
    costs = to_cost_matrix(ConfusionMatrix(("a", "b", "c"), p), floor=0.25)
    off = [costs.cost[i][j] for i in range(3) for j in range(3) if i != j]
    assert len(set(off)) == 1


def test_strongest_competitor_hits_floor(spanish):
    cm = build_confusion(spanish)
    costs = to_cost_matrix(cm, floor=0.25)
    for i in range(len(cm.symbols)):
        row = cm.p[i].copy()
        row[i] = -1.0
        j = int(np.argmax(row))
        assert costs.cost[i][j] == 0.25


def test_cost_ordering_follows_confusability(spanish):
    costs = to_cost_matrix(build_confusion(spanish), floor=0.25)
    o = costs.index("o")
    assert costs.cost[o][costs.index("u")] < costs.cost[o][costs.index("i")]


def test_cost_matrix_invariants(spanish):
    costs = to_cost_matrix(build_confusion(spanish))
    n = len(costs.symbols)
    assert np.diagonal(costs.cost).tolist() == [0.0] * n
    off = costs.cost[~np.eye(n, dtype=bool)]
    assert ((off > 0) & (off <= 1)).all()


def test_cost_floor_validated(spanish):
    cm = build_confusion(spanish)
    with pytest.raises(ValidationError):
        to_cost_matrix(cm, floor=0.0)
    with pytest.raises(ValidationError):
        to_cost_matrix(cm, floor=1.0)


def test_out_of_matrix_substitution_costs_one(spanish):
    costs = to_cost_matrix(build_confusion(spanish))
    assert costs.sub_cost("o", "ə") == 1.0
    with pytest.raises(UnknownPhoneme):
        costs.sub_cost("ə", "o")


def test_density_report_singleton():
    assert density_report(vector_profile({"a": [0.0]}), "a") == []


def test_density_report_rankings(spanish, english):
    assert density_report(spanish, "o")[0][0] == "u"
    assert density_report(english, "o")[0][0] == "ɔ"
    assert "ɔ" not in spanish.symbols


def test_density_report_unknown_target(spanish):
    with pytest.raises(UnknownPhoneme):
        density_report(spanish, "zz")


def test_density_report_sorted_descending(english):
    report = density_report(english, "i")
    values = [v for _, v in report]
    assert values == sorted(values, reverse=True)
    assert all(symbol != "i" for symbol, _ in report)


def test_csv_round_trip(spanish):
    cm = build_confusion(spanish)
    again = confusion_from_csv(confusion_to_csv(cm))
    assert again == cm


def test_invalid_rows_rejected():
    with pytest.raises(ValidationError):
        ConfusionMatrix(("a", "b"), [[0.9, 0.2], [0.5, 0.5]])
    with pytest.raises(ValidationError):
        ConfusionMatrix(("a", "b"), [[1.1, -0.1], [0.5, 0.5]])


def test_unit_cost_matrix():
    costs = unit_cost_matrix(["x", "y", "z"])
    assert costs.sub_cost("x", "x") == 0.0
    assert costs.sub_cost("x", "y") == 1.0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
        min_size=1,
        max_size=6,
    ),
    st.floats(0.05, 20.0),
)
def test_build_confusion_rows_always_stochastic(points, temperature):
    vectors = {f"s{i}": list(p) for i, p in enumerate(points)}
    cm = build_confusion(vector_profile(vectors), temperature=temperature)
    assert np.allclose(cm.p.sum(axis=1), 1.0, atol=1e-9)
    assert (cm.p >= 0).all()
