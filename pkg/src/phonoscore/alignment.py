"""Optimal global alignment of phone sequences under a cost matrix.

The aligner is a weighted three-operation edit-distance dynamic program
over the full (m+1) x (n+1) lattice with a deterministic traceback.
`brute_force_align` recomputes the minimal cost by plain exhaustive
recursion and exists purely as a reference for testing the DP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .confusion import CostMatrix
from .errors import EmptyCostMatrix, SizeLimitExceeded
from .g2p import PhoneSequence

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"

# Fixed traceback preference on cost ties; part of the interface because it
# decides which steps downstream error classification sees.
TIE_ORDER = (MATCH, SUBSTITUTE, DELETE, INSERT)

BRUTE_FORCE_LIMIT = 14

Alignable = Union[PhoneSequence, Sequence[str]]


@dataclass(frozen=True)
class AlignmentStep:
    op: str
    canonical_index: int | None
    recognized_index: int | None
    cost: float


@dataclass(frozen=True)
class AlignmentResult:
    steps: tuple[AlignmentStep, ...]
    total_cost: float
    canonical_len: int
    recognized_len: int


def _phones(seq: Alignable) -> list[str]:
    if isinstance(seq, PhoneSequence):
        return seq.phones()
    return list(seq)


def _check(costs: CostMatrix, canonical: list[str]) -> None:
    if not costs.symbols:
        raise EmptyCostMatrix("alignment needs a non-empty cost matrix")
    for phone in canonical:
        costs.index(phone)  # raises UnknownPhoneme for out-of-matrix phones


def align(canonical: Alignable, recognized: Alignable, costs: CostMatrix) -> AlignmentResult:
    """Minimum-cost global alignment with a deterministic traceback.

    Canonical phones must be on the cost matrix axis; recognized phones
    outside it are allowed and charged the maximum substitution cost 1.
    Ties are resolved in the order match > substitute > delete > insert.
    """
    c = _phones(canonical)
    r = _phones(recognized)
    _check(costs, c)
    m, n = len(c), len(r)
    ins, dele = costs.ins_cost, costs.del_cost

    # boundary cells accumulate (not multiply) so traceback equality tests
    # compare bit-identical float expressions
    d = [[0.0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        d[i][0] = d[i - 1][0] + dele
    for j in range(1, n + 1):
        d[0][j] = d[0][j - 1] + ins
    for i in range(1, m + 1):
        row, above = d[i], d[i - 1]
        ci = c[i - 1]
        for j in range(1, n + 1):
            best = above[j - 1] + costs.sub_cost(ci, r[j - 1])
            via_delete = above[j] + dele
            if via_delete < best:
                best = via_delete
            via_insert = row[j - 1] + ins
            if via_insert < best:
                best = via_insert
            row[j] = best

    steps: list[AlignmentStep] = []
    i, j = m, n
    while i > 0 or j > 0:
        here = d[i][j]
        if i > 0 and j > 0:
            sub = costs.sub_cost(c[i - 1], r[j - 1])
            if here == d[i - 1][j - 1] + sub:
                op = MATCH if c[i - 1] == r[j - 1] else SUBSTITUTE
                steps.append(AlignmentStep(op, i - 1, j - 1, sub))
                i, j = i - 1, j - 1
                continue
        if i > 0 and here == d[i - 1][j] + dele:
            steps.append(AlignmentStep(DELETE, i - 1, None, dele))
            i -= 1
            continue
        steps.append(AlignmentStep(INSERT, None, j - 1, ins))
        j -= 1
    steps.reverse()
    return AlignmentResult(
        steps=tuple(steps),
        total_cost=d[m][n],
        canonical_len=m,
        recognized_len=n,
    )


def brute_force_align(
    canonical: Alignable, recognized: Alignable, costs: CostMatrix
) -> float:
    """Exact minimal alignment cost by exhaustive recursion (reference only)."""
    c = _phones(canonical)
    r = _phones(recognized)
    _check(costs, c)
    m, n = len(c), len(r)
    if m + n > BRUTE_FORCE_LIMIT:
        raise SizeLimitExceeded(
            f"combined length {m + n} exceeds the exhaustive-search limit "
            f"{BRUTE_FORCE_LIMIT}"
        )
    ins, dele = costs.ins_cost, costs.del_cost
    sub_cost = costs.sub_cost

    def best(i: int, j: int) -> float:
        if i == m and j == n:
            return 0.0
        candidates = []
        if i < m and j < n:
            candidates.append(sub_cost(c[i], r[j]) + best(i + 1, j + 1))
        if i < m:
            candidates.append(dele + best(i + 1, j))
        if j < n:
            candidates.append(ins + best(i, j + 1))
        return min(candidates)

    return best(0, 0)


_OP_LETTER = {MATCH: "M", SUBSTITUTE: "S", DELETE: "D", INSERT: "I"}
_GAP = "-"


def render_alignment(
    result: AlignmentResult, canonical: Alignable, recognized: Alignable
) -> str:
    """Three-row text view: canonical tokens, operations, recognized tokens."""
    c = _phones(canonical)
    r = _phones(recognized)
    top, mid, bottom = [], [], []
    for step in result.steps:
        a = c[step.canonical_index] if step.canonical_index is not None else _GAP
        b = r[step.recognized_index] if step.recognized_index is not None else _GAP
        width = max(len(a), len(b), 1)
        top.append(a.ljust(width))
        mid.append(_OP_LETTER[step.op].ljust(width))
        bottom.append(b.ljust(width))
    return "\n".join(" ".join(row).rstrip() for row in (top, mid, bottom))


def alignment_to_dict(result: AlignmentResult) -> dict:
    return {
        "steps": [
            {
                "op": s.op,
                "canonical_index": s.canonical_index,
                "recognized_index": s.recognized_index,
                "cost": s.cost,
            }
            for s in result.steps
        ],
        "total_cost": result.total_cost,
        "canonical_len": result.canonical_len,
        "recognized_len": result.recognized_len,
    }
