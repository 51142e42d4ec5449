"""Toy synthesizers and the Monte-Carlo power / calibration studies.

``synth_catall`` resamples complete rows (a saturated, "correct" generator);
``synth_sample`` resamples every column independently, keeping the marginals
and destroying all joint structure.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .data import CAT, DataError, Dataset, DatasetPair
from .nullcal import DEFAULT_B, null_pairs, null_permutation
from .parallel import derived_rng, derived_seed, pmap
from .propensity import CartParams, ModelSpec, fit_model, score_values
from .results import MEASURES
from .tabular import crosstab, tab_utility

CALIBRATION_MEASURES = ("pMSE", "FT", "JSD", "WMabsDD", "G")
TABLE1_MEASURES = ("VW", "FT", "JSD", "PO50", "U", "WMabsDD", "G")


def _require_categorical(ds: Dataset) -> None:
    num = [v.name for v in ds.variables if v.kind != CAT]
    if num:
        raise DataError(f"toy synthesizers need categorical data; bin {num} first")


def synth_sample(ds: Dataset, m: int, seed: int = 0) -> list[Dataset]:
    _require_categorical(ds)
    out = []
    for i in range(m):
        rng = derived_rng(seed, i)
        cols = {nm: ds.columns[nm][rng.integers(0, ds.n, ds.n)] for nm in ds.names}
        out.append(Dataset(ds.variables, cols))
    return out


def synth_catall(ds: Dataset, m: int, seed: int = 0) -> list[Dataset]:
    _require_categorical(ds)
    return [ds.take(derived_rng(seed, i).integers(0, ds.n, ds.n)) for i in range(m)]


def _first_vars(ds: Dataset, nvars: int) -> list[str]:
    if nvars < 1 or nvars > len(ds.variables):
        raise DataError(f"nvars={nvars} out of range for {len(ds.variables)} variables")
    return ds.names[:nvars]


def _tab_rows(orig: Dataset, syns: Sequence[Dataset], names, threads):
    def one(s):
        return tab_utility(crosstab(DatasetPair(orig, s.select(names)), names))
    return pmap(one, syns, threads)


@dataclass
class PowerReport:
    nvars: int
    m: int
    power: dict[str, float | None]
    medians: dict[str, float]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"nvars": self.nvars, "m": self.m, "power": self.power, "medians": self.medians,
                "warnings": self.warnings}


def power_sim(
    ds: Dataset,
    nvars: int,
    m: int,
    measures=MEASURES,
    seed: int = 0,
    bad: Sequence[Dataset] | None = None,
    threads: int | None = None,
) -> PowerReport:
    """Power of each measure to tell row-bootstrap from column-bootstrap syntheses.

    Power is (mean_bad - mean_good) / sd_good.  The column-bootstrap
    syntheses are drawn once from the full dataset and restricted to the
    first ``nvars`` variables; the row-bootstrap ones are drawn from that
    subset itself.  Pass ``bad`` to reuse them across ``nvars``.
    """
    names = _first_vars(ds, nvars)
    sub = ds.select(names)
    good = synth_catall(sub, m, seed)
    if bad is None:
        bad = synth_sample(ds, m, seed)
    rg = _tab_rows(sub, good, names, threads)
    rb = _tab_rows(sub, bad[:m], names, threads)
    notes = []
    power: dict[str, float | None] = {}
    for meas in measures:
        g = np.array([r.raw(meas) for r in rg])
        b = np.array([r.raw(meas) for r in rb])
        sd = float(np.std(g, ddof=1)) if m >= 2 else math.nan
        if not sd > 0:
            power[meas] = None
            notes.append(f"{meas}: sd of correct syntheses is {'undefined' if m < 2 else 0}; power not reported")
        else:
            power[meas] = float((b.mean() - g.mean()) / sd)
    medians = {
        "df_good": float(np.median([r.df for r in rg])),
        "df_bad": float(np.median([r.df for r in rb])),
        "dfG_good": float(np.median([r.dfG for r in rg])),
        "dfG_bad": float(np.median([r.dfG for r in rb])),
    }
    for w in notes:
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    return PowerReport(nvars, m, power, medians, notes)


def calibration_sim(
    ds: Dataset,
    nvars: int,
    m: int,
    seed: int = 0,
    threads: int | None = None,
) -> dict[str, float]:
    """Mean analytic standardized ratios over ``m`` row-bootstrap syntheses."""
    names = _first_vars(ds, nvars)
    sub = ds.select(names)
    rows = _tab_rows(sub, synth_catall(sub, m, seed), names, threads)
    return {f"S_{meas}": float(np.mean([r.S(meas) for r in rows])) for meas in CALIBRATION_MEASURES}


def resampling_sim(
    ds: Dataset,
    nvars: int,
    seed: int = 0,
    n_perm: int = 100,
    B: int = DEFAULT_B,
    m_pairs: int = 16,
    model: ModelSpec | None = None,
    threads: int | None = None,
) -> dict[str, float]:
    """Mean resampled standardized ratios for correct syntheses.

    ``S_pMSE_perm``: each of ``n_perm`` syntheses standardized by its own
    ``B``-replicate permutation null.  ``S_pMSE_pairs``, ``S_SPECKS_pairs``,
    ``S_U_pairs``: each of ``m_pairs`` syntheses standardized by the mean over
    all pairs of those syntheses.
    """
    model = model or ModelSpec("cart", None, CartParams())
    names = _first_vars(ds, nvars)
    sub = ds.select(names)
    out: dict[str, float] = {}
    if n_perm:
        syns = synth_catall(sub, n_perm, seed)

        def perm_one(i):
            pr = DatasetPair(sub, syns[i])
            obs = score_values(fit_model(pr, model), ("pMSE",))["pMSE"]
            null = null_permutation(pr, model, ("pMSE",), B, seed=derived_seed(seed, 1, i), threads=1)
            return obs / null["pMSE"].mean
        out["S_pMSE_perm"] = float(np.mean(pmap(perm_one, range(n_perm), threads)))
    if m_pairs:
        syns = synth_catall(sub, m_pairs, seed)
        meas = ("pMSE", "SPECKS", "U")
        nulls = null_pairs(syns, model, meas, seed, threads=threads)
        obs = pmap(lambda s: score_values(fit_model(DatasetPair(sub, s), model), meas), syns, threads)
        for mname in meas:
            out[f"S_{mname}_pairs"] = float(np.mean([o[mname] for o in obs]) / nulls[mname].mean)
    return out


def format_power_table(reports: Sequence[PowerReport]) -> str:
    head = ["n", *TABLE1_MEASURES, "df_good", "df_bad", "dfG_good", "dfG_bad"]
    lines = ["".join(f"{h:>10}" for h in head)]
    for r in reports:
        cells = [f"{r.nvars:>10d}"]
        for meas in TABLE1_MEASURES:
            v = r.power.get(meas)
            cells.append(f"{'-':>10}" if v is None else f"{v:>10.1f}")
        for key in ("df_good", "df_bad", "dfG_good", "dfG_bad"):
            cells.append(f"{r.medians[key]:>10g}")
        lines.append("".join(cells))
    return "\n".join(lines)


def format_calibration_table(rows: Sequence[tuple[int, dict[str, float]]]) -> str:
    keys = sorted({k for _, d in rows for k in d}, key=lambda k: (CALIBRATION_MEASURES.index(k[2:]) if k[2:] in CALIBRATION_MEASURES else 99, k))
    lines = [f"{'n':>10}" + "".join(f"{k:>15}" for k in keys)]
    for nv, d in rows:
        lines.append(f"{nv:>10d}" + "".join(f"{d[k]:>15.2f}" if k in d else f"{'-':>15}" for k in keys))
    return "\n".join(lines)
