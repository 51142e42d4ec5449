"""Cross-tabulation of original/synthetic pairs and the tabular utility measures."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import CAT, DataError, Dataset, DatasetPair
from .results import MeasureValue, UtilityResult, resolve_measures
from .scores import po50, rank_sum, specks

WMABSDD_WEIGHTS = ("synthesis", "two-sample")


@dataclass(frozen=True, eq=False)
class CellTable:
    """Occupied cells of a cross-tabulation, in lexicographic order of level codes.

    ``keys[j]`` holds the level index per variable of cell ``j``; a missing
    categorical value is coded as one past the last declared level.
    """

    o: np.ndarray
    s: np.ndarray
    n1: int
    n2: int
    vars: tuple[str, ...] = ()
    keys: np.ndarray | None = None

    def __post_init__(self):
        o = np.asarray(self.o, dtype=np.float64)
        s = np.asarray(self.s, dtype=np.float64)
        if o.shape != s.shape or o.ndim != 1:
            raise DataError("cell count arrays must be 1-d and of equal length")
        if (o < 0).any() or (s < 0).any():
            raise DataError("negative cell count")
        if ((o + s) <= 0).any():
            raise DataError("table contains an unoccupied cell")
        if o.sum() != self.n1 or s.sum() != self.n2:
            raise DataError("cell counts do not sum to n1/n2")
        if self.n1 <= 0 or self.n2 <= 0:
            raise DataError("both datasets must be non-empty")
        object.__setattr__(self, "o", o)
        object.__setattr__(self, "s", s)

    @classmethod
    def from_counts(cls, o, s, vars: Sequence[str] = ()) -> "CellTable":
        """Build from raw count vectors, dropping cells empty in both."""
        o = np.asarray(o, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        keep = (o + s) > 0
        return cls(o[keep], s[keep], int(o.sum()), int(s.sum()), tuple(vars))

    @property
    def k(self) -> int:
        return int(self.o.size)

    @property
    def dfG(self) -> int:
        return int(np.count_nonzero((self.o > 0) & (self.s > 0)))

    @property
    def N(self) -> int:
        return self.n1 + self.n2

    @property
    def c(self) -> float:
        return self.n2 / self.N

    @property
    def p_hat(self) -> np.ndarray:
        return self.s / (self.o + self.s)


def cell_codes(ds: Dataset, names: Sequence[str]) -> tuple[np.ndarray, list[int]]:
    """Per-record integer code matrix (records x vars) and the radix of each column."""
    cols, radix = [], []
    for nm in names:
        v = ds.variable(nm)
        if v.kind != CAT:
            raise DataError(f"variable {nm!r} is numeric; bin it before tabulation")
        L = len(v.levels)
        col = ds.columns[nm].astype(np.int64)
        cols.append(np.where(col < 0, L, col))
        radix.append(L + 1)
    return np.column_stack(cols) if cols else np.empty((ds.n, 0), np.int64), radix


def crosstab(p: DatasetPair, vars: Sequence[str]) -> CellTable:
    vars = tuple(vars)
    if not vars:
        raise DataError("crosstab needs at least one variable")
    if len(set(vars)) != len(vars):
        raise DataError(f"duplicate variable in {list(vars)}")
    co, radix = cell_codes(p.original, vars)
    cs, _ = cell_codes(p.synthetic, vars)
    n1, n2 = co.shape[0], cs.shape[0]
    both = np.vstack([co, cs])
    if math.prod(radix) < 2**62:
        mult = np.ones(len(radix), dtype=np.int64)
        for i in range(len(radix) - 2, -1, -1):
            mult[i] = mult[i + 1] * radix[i + 1]
        flat = both @ mult
        uniq, inv = np.unique(flat, return_inverse=True)
        keys = np.column_stack([(uniq // mult[i]) % radix[i] for i in range(len(radix))])
    else:
        keys, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    k = keys.shape[0]
    o = np.bincount(inv[:n1], minlength=k)
    s = np.bincount(inv[n1:], minlength=k)
    return CellTable(o, s, n1, n2, vars, keys.astype(np.int64))


def _xlogy_ratio(x, a, b):
    """x * log(a / b) with 0 log 0 = 0 (elementwise)."""
    out = np.zeros_like(x)
    m = x > 0
    out[m] = x[m] * np.log(a[m] / b[m])
    return out


def tabular_values(table: CellTable, g_scale: str = "count", wmabsdd_weight: str = "synthesis") -> dict[str, float]:
    """Raw values of every tabular measure."""
    o, s = table.o, table.s
    n1, n2, N, c = table.n1, table.n2, table.N, table.c
    T = o + s
    ph = s / T
    po, ps = o / n1, s / n2
    vals: dict[str, float] = {}
    vals["pMSE"] = float(np.sum(T * (ph - c) ** 2) / N)
    # expected synthetic count o*n2/n1 (= o*c/(1-c), with less rounding)
    e = o * n2 / n1
    vals["VW"] = float(np.sum((s - e) ** 2 / (c * T)))
    both = (o > 0) & (s > 0)
    if g_scale == "count":
        g = 2.0 * np.sum(s[both] * np.log((ps[both]) / (po[both])))
    elif g_scale == "proportion":
        g = 2.0 * np.sum(ps[both] * np.log((ps[both]) / (po[both])))
    else:
        raise ValueError(f"g_scale must be 'count' or 'proportion', got {g_scale!r}")
    vals["G"] = float(g)
    vals["FT"] = float(4.0 * np.sum((np.sqrt(s) - np.sqrt(e)) ** 2))
    # count scale keeps identical tables at exactly bc == 1
    bc = float(np.sum(np.sqrt(o * s)) / math.sqrt(n1 * n2))
    vals["dBhatt"] = math.sqrt(max(0.0, 1.0 - bc))
    mid = (ps + po) / 2.0
    jsd = (_xlogy_ratio(ps, ps, mid).sum() + _xlogy_ratio(po, po, mid).sum()) / 2.0
    vals["JSD"] = float(max(0.0, jsd / math.log(2.0)))
    vals["PO50"] = po50(ph, o, s, c)
    vals["SPECKS"] = specks(ph, o, s)
    vals["MabsDD"] = float(np.sum(np.abs(po - ps)))
    if wmabsdd_weight == "synthesis":
        sd = np.sqrt(2.0 * c * T / math.pi)
    elif wmabsdd_weight == "two-sample":
        sd = np.sqrt(2.0 * c * T / ((1.0 - c) * math.pi))
    else:
        raise ValueError(f"wmabsdd_weight must be one of {WMABSDD_WEIGHTS}")
    vals["WMabsDD"] = float(np.sum(np.abs(s - e) / sd))
    vals["U"] = rank_sum(ph, o, s)
    return vals


def null_expectations(table: CellTable) -> dict[str, float]:
    """Large-sample expectations under synthesis from a correct model."""
    df = table.k - 1
    N, c = table.N, table.c
    return {
        "pMSE": df * c * (1 - c) ** 2 / N,
        "VW": float(df),
        "G": float(df),
        "FT": float(df),
        "JSD": df * math.log(2.0) / (2.0 * N),
        "WMabsDD": float(df),
    }


def tab_utility(
    table: CellTable,
    measures=None,
    *,
    g_scale: str = "count",
    wmabsdd_weight: str = "synthesis",
) -> UtilityResult:
    wanted = resolve_measures(measures)
    vals = tabular_values(table, g_scale=g_scale, wmabsdd_weight=wmabsdd_weight)
    nulls = null_expectations(table)
    out = {}
    for m in wanted:
        ne = nulls.get(m)
        out[m] = MeasureValue(vals[m], ne, "analytic" if ne is not None else None)
    return UtilityResult(out, vars=table.vars, df=table.k - 1, k=table.k, dfG=table.dfG)
