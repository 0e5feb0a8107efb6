"""Phoneme confusability from feature-space geometry, and alignment costs.

Confusability is modeled as a softmax over negative Euclidean distances in
the profile's feature space (or externally supplied centroid vectors). The
resulting row-stochastic matrix converts to substitution costs by
normalizing each row against its strongest competitor, so the most
confusable pair always sits at the floor cost regardless of how dense the
space is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonPositiveTemperature,
    ParseError,
    UnknownPhoneme,
    ValidationError,
)

if TYPE_CHECKING:
    from .profiles import LanguageProfile

ROW_SUM_TOLERANCE = 1e-9

DEFAULT_TEMPERATURE = 1.0
DEFAULT_FLOOR = 0.25
DEFAULT_INS_COST = 1.0
DEFAULT_DEL_COST = 1.0


def _frozen_array(values) -> np.ndarray:
    a = np.array(values, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """p[i][j] = probability of confusing target symbols[i] with symbols[j]."""

    symbols: tuple[str, ...]
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "p", _frozen_array(self.p))
        n = len(self.symbols)
        if self.p.shape != (n, n):
            raise ValidationError(
                f"confusion matrix shape {self.p.shape} does not match "
                f"{n} symbols"
            )
        if n and (self.p < 0).any():
            raise ValidationError("confusion probabilities must be non-negative")
        if n:
            sums = self.p.sum(axis=1)
            worst = int(np.argmax(np.abs(sums - 1.0)))
            if abs(sums[worst] - 1.0) > ROW_SUM_TOLERANCE:
                raise ValidationError(
                    f"row for {self.symbols[worst]!r} sums to {sums[worst]!r}, not 1"
                )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.symbols == other.symbols and np.array_equal(self.p, other.p)

    def index(self, symbol: str) -> int:
        lookup = self.__dict__.get("_index")
        if lookup is None:
            lookup = {s: i for i, s in enumerate(self.symbols)}
            object.__setattr__(self, "_index", lookup)
        try:
            return lookup[symbol]
        except KeyError:
            raise UnknownPhoneme(f"{symbol!r} is not on the confusion axis") from None

    def row(self, symbol: str) -> np.ndarray:
        return self.p[self.index(symbol)]


@dataclass(frozen=True)
class CostMatrix:
    """Substitution costs in [0, 1] with zero diagonal, plus indel costs."""

    symbols: tuple[str, ...]
    cost: np.ndarray
    ins_cost: float = DEFAULT_INS_COST
    del_cost: float = DEFAULT_DEL_COST

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "cost", _frozen_array(self.cost))
        n = len(self.symbols)
        if self.cost.shape != (n, n):
            raise ValidationError(
                f"cost matrix shape {self.cost.shape} does not match {n} symbols"
            )
        if n:
            if np.diagonal(self.cost).any():
                raise ValidationError("substitution cost of a symbol with itself must be 0")
            off = self.cost[~np.eye(n, dtype=bool)]
            if off.size and ((off <= 0) | (off > 1)).any():
                raise ValidationError("off-diagonal costs must lie in (0, 1]")
        if self.ins_cost <= 0 or self.del_cost <= 0:
            raise ValidationError("insertion and deletion costs must be positive")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return (
            self.symbols == other.symbols
            and np.array_equal(self.cost, other.cost)
            and self.ins_cost == other.ins_cost
            and self.del_cost == other.del_cost
        )

    def index(self, symbol: str) -> int:
        lookup = self.__dict__.get("_index")
        if lookup is None:
            lookup = {s: i for i, s in enumerate(self.symbols)}
            object.__setattr__(self, "_index", lookup)
        try:
            return lookup[symbol]
        except KeyError:
            raise UnknownPhoneme(f"{symbol!r} is not on the cost matrix axis") from None

    def sub_cost(self, canonical: str, recognized: str) -> float:
        """Substitution cost; non-native recognized phones cost the maximum 1."""
        i = self.index(canonical)
        lookup = self.__dict__["_index"]
        j = lookup.get(recognized)
        if j is None:
            return 1.0
        return float(self.cost[i, j])


def _profile_vectors(
    profile: "LanguageProfile",
    centroids: Mapping[str, Sequence[float]] | None,
) -> np.ndarray:
    if centroids is None:
        return np.array([spec.features for spec in profile.inventory], dtype=float)
    missing = [s for s in profile.symbols if s not in centroids]
    if missing:
        raise DimensionMismatch(f"centroids missing for symbols {missing}")
    rows = [np.asarray(centroids[s], dtype=float) for s in profile.symbols]
    dims = {r.shape for r in rows}
    if len(dims) > 1 or any(r.ndim != 1 for r in rows):
        raise DimensionMismatch(f"centroid vectors disagree in shape: {sorted(dims)}")
    return np.stack(rows)


def build_confusion(
    profile: "LanguageProfile",
    centroids: Mapping[str, Sequence[float]] | None = None,
    temperature: float = DEFAULT_TEMPERATURE,
) -> ConfusionMatrix:
    """Softmax over negative pairwise distances, one row per target phoneme."""
    if not temperature > 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature}")
    vectors = _profile_vectors(profile, centroids)
    if vectors.size == 0 and len(profile.symbols) == 0:
        raise ValidationError("cannot build a confusion matrix for an empty inventory")
    deltas = vectors[:, None, :] - vectors[None, :, :]
    distances = np.sqrt((deltas**2).sum(axis=2))
    logits = -distances / temperature
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    p = weights / weights.sum(axis=1, keepdims=True)
    return ConfusionMatrix(symbols=profile.symbols, p=p)


def to_cost_matrix(
    cm: ConfusionMatrix,
    floor: float = DEFAULT_FLOOR,
    ins_cost: float = DEFAULT_INS_COST,
    del_cost: float = DEFAULT_DEL_COST,
) -> CostMatrix:
    """Convert confusabilities to substitution costs.

    cost[i][j] = clamp(1 - p[i][j] / max_k!=i p[i][k], floor, 1) off the
    diagonal, 0 on it: the strongest competitor of every target lands
    exactly on the floor.
    """
    if not (0 < floor < 1):
        raise ValidationError(f"floor must lie in (0, 1), got {floor}")
    n = len(cm.symbols)
    if n <= 1:
        return CostMatrix(cm.symbols, np.zeros((n, n)), ins_cost, del_cost)
    off_diag = ~np.eye(n, dtype=bool)
    competitors = np.where(off_diag, cm.p, -np.inf).max(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = 1.0 - np.where(competitors > 0, cm.p / competitors, 0.0)
    cost = np.clip(raw, floor, 1.0)
    cost[~off_diag] = 0.0
    return CostMatrix(cm.symbols, cost, ins_cost, del_cost)


def unit_cost_matrix(symbols: Sequence[str]) -> CostMatrix:
    """All substitutions cost 1; used for plain (unweighted) edit distance."""
    n = len(symbols)
    cost = np.ones((n, n)) - np.eye(n)
    return CostMatrix(tuple(symbols), cost)


def density_report(
    profile: "LanguageProfile",
    target: str,
    temperature: float = DEFAULT_TEMPERATURE,
) -> list[tuple[str, float]]:
    """Neighbors of `target` ranked by confusability, most confusable first."""
    if not profile.has(target):
        raise UnknownPhoneme(f"{target!r} is not in the {profile.id} inventory")
    cm = profile.confusion or build_confusion(profile, temperature=temperature)
    row = cm.row(target)
    ranked = sorted(
        (
            (symbol, float(row[j]))
            for j, symbol in enumerate(cm.symbols)
            if symbol != target
        ),
        key=lambda item: -item[1],
    )
    return ranked


def confusion_to_csv(cm: ConfusionMatrix) -> str:
    lines = ["," + ",".join(cm.symbols)]
    for symbol, row in zip(cm.symbols, cm.p):
        lines.append(symbol + "," + ",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def confusion_from_csv(text: str) -> ConfusionMatrix:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty confusion matrix document")
    header = lines[0].split(",")
    if header[0].strip():
        raise ParseError("confusion CSV must start with an empty header cell")
    symbols = tuple(s.strip() for s in header[1:])
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(symbols) + 1:
            raise ParseError(
                f"expected {len(symbols) + 1} cells, found {len(cells)}", line=lineno
            )
        if cells[0].strip() != symbols[len(rows)]:
            raise ParseError(
                f"row label {cells[0].strip()!r} does not match column order",
                line=lineno,
            )
        try:
            rows.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise ParseError(f"bad probability: {exc}", line=lineno) from exc
    if len(rows) != len(symbols):
        raise ParseError(f"expected {len(symbols)} rows, found {len(rows)}")
    return ConfusionMatrix(symbols=symbols, p=rows)
