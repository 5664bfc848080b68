"""Inter-rater reliability for the manual coding workflow: confusion
matrices, Cohen's kappa with its asymptotic 95% CI, per-category
(one-vs-rest) kappa, and disagreement listing."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Mapping, Optional

from .model import (
    ASSIGNABLE_MOTIVES,
    DegenerateMarginalsError,
    Motive,
    NoCommonItemsError,
)


@dataclass(frozen=True, slots=True)
class ConfusionMatrix:
    """Square count matrix over motive labels for one rater pair."""

    labels: tuple[Motive, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def observed_agreement(self) -> float:
        return sum(self.counts[i][i] for i in range(len(self.labels))) / self.n

    def transposed(self) -> "ConfusionMatrix":
        size = len(self.labels)
        return ConfusionMatrix(
            labels=self.labels,
            counts=tuple(
                tuple(self.counts[j][i] for j in range(size)) for i in range(size)
            ),
        )


@dataclass(frozen=True, slots=True)
class KappaResult:
    kappa: float
    po: float
    pe: float
    se: float
    ci95: tuple[float, float]
    n: int


def confusion_matrix(
    codes_a: Mapping[str, Motive],
    codes_b: Mapping[str, Motive],
) -> ConfusionMatrix:
    """Cross-tabulate two coders over the prompts both of them coded.

    Rows are coder A, columns coder B, in the canonical motive order
    (labels neither coder used are dropped).
    """
    common = sorted(codes_a.keys() & codes_b.keys())
    if not common:
        raise NoCommonItemsError("coders share no coded prompts")
    used = [
        m
        for m in ASSIGNABLE_MOTIVES
        if any(codes_a[p] is m or codes_b[p] is m for p in common)
    ]
    index = {m: i for i, m in enumerate(used)}
    counts = [[0] * len(used) for _ in used]
    for prompt in common:
        counts[index[codes_a[prompt]]][index[codes_b[prompt]]] += 1
    return ConfusionMatrix(
        labels=tuple(used),
        counts=tuple(tuple(row) for row in counts),
    )


def kappa_ci(po: float, pe: float, n: int) -> KappaResult:
    """Kappa with Cohen's (1960) asymptotic standard error and a 95% CI
    (normal quantile 1.96), clamped to [-1, 1]."""
    if n < 2:
        raise ValueError("need at least two doubly-coded items")
    if pe >= 1.0:
        raise DegenerateMarginalsError("expected agreement is 1; kappa undefined")
    kappa = (po - pe) / (1.0 - pe)
    se = sqrt(po * (1.0 - po) / (n * (1.0 - pe) ** 2))
    low = max(-1.0, kappa - 1.96 * se)
    high = min(1.0, kappa + 1.96 * se)
    return KappaResult(kappa=kappa, po=po, pe=pe, se=se, ci95=(low, high), n=n)


def cohen_kappa(matrix: ConfusionMatrix) -> KappaResult:
    """Cohen's kappa from a confusion matrix.

    pe is the chance agreement implied by the marginals:
    sum_i (row_i * col_i) / n^2.
    """
    n = matrix.n
    size = len(matrix.labels)
    row_sums = [sum(matrix.counts[i]) for i in range(size)]
    col_sums = [sum(matrix.counts[i][j] for i in range(size)) for j in range(size)]
    po = matrix.observed_agreement
    pe = sum(row_sums[i] * col_sums[i] for i in range(size)) / (n * n)
    return kappa_ci(po, pe, n)


def per_category_kappa(
    matrix: ConfusionMatrix,
) -> list[tuple[Motive, Optional[KappaResult]]]:
    """One-vs-rest kappa for each motive in the matrix.

    Each category collapses the matrix to 2x2 (category vs rest); categories
    whose collapse is degenerate (used by neither rater) yield None.
    """
    size = len(matrix.labels)
    total = matrix.n
    out: list[tuple[Motive, Optional[KappaResult]]] = []
    for c, motive in enumerate(matrix.labels):
        cc = matrix.counts[c][c]
        row_c = sum(matrix.counts[c])
        col_c = sum(matrix.counts[i][c] for i in range(size))
        collapsed = (
            (cc, row_c - cc),
            (col_c - cc, total - row_c - col_c + cc),
        )
        binary = ConfusionMatrix(
            labels=(motive, Motive.UNLABELED),  # second label is "rest"
            counts=collapsed,
        )
        try:
            out.append((motive, cohen_kappa(binary)))
        except DegenerateMarginalsError:
            out.append((motive, None))
    return out


def disagreements(
    codes_a: Mapping[str, Motive],
    codes_b: Mapping[str, Motive],
    frequencies: Optional[Mapping[str, int]] = None,
) -> list[tuple[str, Motive, Motive]]:
    """Common prompts the two coders labeled differently, ordered by prompt
    frequency descending (ties lexicographic)."""
    common = codes_a.keys() & codes_b.keys()
    if not common:
        raise NoCommonItemsError("coders share no coded prompts")
    diffs = [
        (p, codes_a[p], codes_b[p]) for p in common if codes_a[p] is not codes_b[p]
    ]
    freq = frequencies or {}
    diffs.sort(key=lambda item: (-freq.get(item[0], 0), item[0]))
    return diffs
