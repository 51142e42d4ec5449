"""Utility over every one-, two- or three-way combination of variables."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .data import BinningSpec, DataError, DatasetPair, bin_pair
from .parallel import pmap
from .results import UtilityResult, resolve_measures
from .tabular import crosstab, tab_utility

DEFAULT_KEY = "S_pMSE"


def _median(xs: list[float]) -> float:
    # midpoint of the two central values for even counts
    return float(np.median(np.asarray(xs, dtype=np.float64)))


@dataclass
class SweepResult:
    arity: int
    entries: dict[tuple[str, ...], UtilityResult]
    variables: tuple[str, ...]
    summary: dict[str, dict[str, float | None]] = field(default_factory=dict)
    fixed_var: str | None = None

    def __post_init__(self):
        if self.arity not in (1, 2, 3):
            raise ValueError(f"arity must be 1, 2 or 3, got {self.arity}")
        if not self.summary:
            self.summary = summarize(self.entries)

    def keys(self) -> list[str]:
        return list(self.summary)

    def values(self, key: str = DEFAULT_KEY) -> dict[tuple[str, ...], float | None]:
        return {combo: r.value(key) for combo, r in self.entries.items()}

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "arity": self.arity,
            "variables": list(self.variables),
            "entries": [r.to_dict() for r in self.entries.values()],
            "summary": self.summary,
        }
        if self.fixed_var is not None:
            d["fixed_var"] = self.fixed_var
        return d


def summarize(entries: dict[tuple[str, ...], UtilityResult]) -> dict[str, dict[str, float | None]]:
    """Median and maximum of every raw measure and standardized ratio across entries."""
    if not entries:
        return {}
    first = next(iter(entries.values()))
    keys = []
    for m in first.measures:
        keys.append(m)
        keys.append(f"S_{m}")
    out: dict[str, dict[str, float | None]] = {}
    for key in keys:
        vals = [r.value(key) for r in entries.values()]
        vals = [v for v in vals if v is not None and not math.isnan(v)]
        if key.startswith("S_") and not vals:
            continue
        out[key] = {"median": _median(vals) if vals else None, "max": max(vals) if vals else None}
    return out


def sweep(
    p: DatasetPair,
    arity: int,
    measures=None,
    binning: BinningSpec | None = None,
    vars: Sequence[str] | None = None,
    threads: int | None = None,
    **tab_options,
) -> SweepResult:
    """One ``tab_utility`` per combination, in the order of ``itertools.combinations``.

    Numeric variables are binned once up front with ``binning`` (cuts from the
    original); extra keyword arguments go to :func:`tab_utility`.
    """
    if arity not in (1, 2, 3):
        raise ValueError(f"arity must be 1, 2 or 3, got {arity}")
    names = list(vars) if vars is not None else [v.name for v in p.variables]
    if len(set(names)) != len(names):
        raise DataError("duplicate variable in sweep list")
    if len(names) < arity:
        raise DataError(f"a {arity}-way sweep needs at least {arity} variables, got {len(names)}")
    wanted = resolve_measures(measures)
    bp = bin_pair(p.select(names), binning)
    combos = list(itertools.combinations(names, arity))
    results = pmap(lambda cb: tab_utility(crosstab(bp, cb), wanted, **tab_options), combos, threads)
    return SweepResult(arity, dict(zip(combos, results)), tuple(names))


def _sort_key(key: str):
    def k(item):
        combo, r = item
        v = r.value(key)
        v = -math.inf if v is None or math.isnan(v) else v
        return (-v, combo)
    return k


def ranked(result: SweepResult, key: str = DEFAULT_KEY) -> list[tuple[tuple[str, ...], float | None]]:
    items = sorted(result.entries.items(), key=_sort_key(key))
    return [(combo, r.value(key)) for combo, r in items]


def worst_n(result: SweepResult, n: int = 4, key: str = DEFAULT_KEY) -> list[tuple[tuple[str, ...], float | None]]:
    """The ``n`` highest-scoring combinations, ties in lexicographic order of names."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ranked(result, key)[:n]


def pick_fixed_var(result: SweepResult, key: str = DEFAULT_KEY) -> str:
    """Variable whose worst table (the highest score among entries it appears in) is worst overall."""
    if result.arity != 3:
        raise ValueError("pick_fixed_var needs a three-way sweep")
    best: dict[str, float] = {}
    for combo, r in result.entries.items():
        v = r.value(key)
        v = -math.inf if v is None or math.isnan(v) else v
        for name in combo:
            best[name] = max(best.get(name, -math.inf), v)
    return min(best, key=lambda nm: (-best[nm], nm))


def fixed_slice(result: SweepResult, var: str) -> SweepResult:
    """Two-way view of the triples containing ``var``, keyed by the other two variables."""
    if result.arity != 3:
        raise ValueError("fixed_slice needs a three-way sweep")
    if var not in result.variables:
        raise DataError(f"unknown variable {var!r}")
    entries = {}
    for combo, r in result.entries.items():
        if var in combo:
            entries[tuple(nm for nm in combo if nm != var)] = r
    others = tuple(nm for nm in result.variables if nm != var)
    return SweepResult(2, entries, others, fixed_var=var)
