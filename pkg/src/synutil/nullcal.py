"""Resampling estimates of null expectations: label permutation and pairs of syntheses."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, DatasetPair, check_same_schema
from .parallel import derived_rng, pmap
from .propensity import ModelSpec, score_values
from .results import SCORE_MEASURES, MeasureError, UtilityResult, resolve_measures

PAIRS_ONLY = ("SPECKS", "PO50", "U")
DEFAULT_B = 50


@dataclass
class NullEstimate:
    measure: str
    values: np.ndarray
    method: str

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def sd(self) -> float:
        if self.values.size < 2:
            return math.nan
        return float(np.std(self.values, ddof=1))


def null_permutation(
    p: DatasetPair,
    model: ModelSpec,
    measures=("pMSE",),
    B: int = DEFAULT_B,
    seed: int = 0,
    vars: Sequence[str] | None = None,
    threads: int | None = None,
) -> dict[str, NullEstimate]:
    """Permute source labels over the stacked records, refit, recompute.

    Only pMSE is accepted: permuted labels cannot reproduce the way a fitted
    model separates the score distributions, so the rank and threshold
    measures get a meaningless null this way.
    """
    wanted = resolve_measures(measures, SCORE_MEASURES)
    bad = [m for m in wanted if m in PAIRS_ONLY]
    if bad:
        raise MeasureError(f"permutation null is invalid for {', '.join(bad)}; use the pairs method")
    if B < 1:
        raise ValueError("B must be >= 1")
    fitter = model.prepare(p, vars)
    t = np.concatenate([np.zeros(p.n1, np.uint8), np.ones(p.n2, np.uint8)])

    def one(b):
        tb = derived_rng(seed, b).permutation(t)
        return score_values(fitter.fit(tb), wanted)

    reps = pmap(one, range(B), threads)
    return {m: NullEstimate(m, np.array([r[m] for r in reps]), "permutation") for m in wanted}


def pair_indices(m: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(m), 2))


def null_pairs(
    syntheses: Sequence[Dataset],
    model: ModelSpec,
    measures=("pMSE",),
    seed: int = 0,
    vars: Sequence[str] | None = None,
    threads: int | None = None,
    schema: Dataset | None = None,
) -> dict[str, NullEstimate]:
    """Utility of every unordered pair of syntheses, the lower-indexed one playing original."""
    if len(syntheses) < 2:
        raise ValueError("pairs method needs at least 2 syntheses")
    ref = schema if schema is not None else syntheses[0]
    for s in syntheses:
        check_same_schema(ref, s)
    wanted = resolve_measures(measures, SCORE_MEASURES)

    def one(ij):
        i, j = ij
        fitter = model.prepare(DatasetPair(syntheses[i], syntheses[j]), vars)
        return score_values(fitter.fit(), wanted)

    reps = pmap(one, pair_indices(len(syntheses)), threads)
    return {m: NullEstimate(m, np.array([r[m] for r in reps]), "pairs") for m in wanted}


def apply_null(result: UtilityResult, nulls: dict[str, NullEstimate], keep_replicates: bool = False) -> UtilityResult:
    """Attach resampled null means as the standardizing expectations."""
    if not nulls:
        return result
    method = next(iter(nulls.values())).method
    for m, est in nulls.items():
        if m in result.measures:
            result.measures[m].null_expectation = est.mean
            result.measures[m].null_method = method
    block = {
        "method": method,
        "replicates": next(iter(nulls.values())).count,
        "mean": {m: e.mean for m, e in nulls.items()},
        "sd": {m: (None if math.isnan(e.sd) else e.sd) for m, e in nulls.items()},
    }
    if keep_replicates:
        block["values"] = {m: e.values.tolist() for m, e in nulls.items()}
    result.null = block
    return result
