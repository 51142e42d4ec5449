"""Bundled example data.

``fixture4``: 500 rows, four categorical variables with a chain of pairwise
dependence.  ``fixture10``: 1,000 survey-like rows with mixed types, special
codes and missing values, plus a synthetic copy whose ``weight`` column has an
inflated missing rate.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..data import Dataset, load_csv, load_meta

NAMES = ("fixture4", "fixture10")


def fixture_path(filename: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(filename)))


def load_fixture(name: str) -> Dataset | tuple[Dataset, Dataset]:
    """``fixture4`` returns one Dataset; ``fixture10`` returns ``(original, synthetic)``."""
    if name == "fixture4":
        meta = load_meta(fixture_path("fixture4.meta"))
        return load_csv(fixture_path("fixture4.csv"), meta)
    if name == "fixture10":
        meta = load_meta(fixture_path("fixture10.meta"))
        return (load_csv(fixture_path("fixture10_orig.csv"), meta),
                load_csv(fixture_path("fixture10_syn.csv"), meta))
    raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
