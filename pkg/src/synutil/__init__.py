"""General utility measures for synthetic tabular data."""
from .data import (
    BinningSpec,
    DataError,
    Dataset,
    DatasetPair,
    Variable,
    bin_numeric,
    bin_pair,
    load_csv,
    load_meta,
    pair,
    write_csv,
)
from .heatmap import render_heatmap, render_threeway
from .nullcal import apply_null, null_pairs, null_permutation
from .propensity import CartParams, ModelSpec, build_design, fit_cart, fit_logistic, fit_model, score_utility
from .results import MEASURES, MeasureError, MeasureValue, UtilityResult
from .sweep import SweepResult, pick_fixed_var, sweep, worst_n
from .tabular import CellTable, crosstab, tab_utility

__version__ = "0.1.0"
