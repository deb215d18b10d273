"""Geometric-mean rank aggregation with seeded tie-breaking."""

from __future__ import annotations

import math
import random
from typing import Sequence


def dense_rank(values: Sequence[float], higher_is_better: bool = True) -> list[int]:
    """Rank 1 is best; equal values share a rank and the next distinct value gets the next integer."""
    distinct = sorted(set(values), reverse=higher_is_better)
    position = {v: i + 1 for i, v in enumerate(distinct)}
    return [position[v] for v in values]


def geometric_mean(ranks: Sequence[int]) -> float:
    if not ranks:
        raise ValueError("need at least one rank")
    # exact integer product first, so equal products give bit-identical aggregates
    product = math.prod(ranks)
    root = product ** (1.0 / len(ranks))
    nearest = round(root)
    return float(nearest) if nearest ** len(ranks) == product else root


def aggregate_order(criteria: Sequence[tuple[Sequence[float], bool]], seed: int) -> tuple[list[list[int]], list[float], list[int]]:
    """Rank each criterion, combine by geometric mean, and order best-first.

    ``criteria`` is a list of ``(raw_scores, higher_is_better)`` pairs of equal
    length. Returns the per-criterion ranks, the aggregates and the best-first
    permutation of candidate indices. Equal aggregates are broken by a shuffle
    seeded with ``seed`` ahead of a stable sort.
    """
    n = len(criteria[0][0])
    if any(len(scores) != n for scores, _ in criteria):
        raise ValueError("all criteria need one score per candidate")
    ranks = [dense_rank(scores, better) for scores, better in criteria]
    aggregates = [geometric_mean([r[i] for r in ranks]) for i in range(n)]
    order = list(range(n))
    random.Random(seed).shuffle(order)
    order.sort(key=lambda i: aggregates[i])
    return ranks, aggregates, order
