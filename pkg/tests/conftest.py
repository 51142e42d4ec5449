import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synutil.data import Dataset, DatasetPair, Variable  # noqa: E402


def cat_dataset(levels: dict, codes: dict) -> Dataset:
    vs = tuple(Variable(k, "cat", tuple(v)) for k, v in levels.items())
    return Dataset(vs, {k: np.asarray(c) for k, c in codes.items()})


def random_cat_pair(rng, nlev, n1, n2, dependent=False):
    """Random all-categorical pair; levels named L0, L1, ..."""
    levels = {f"v{i}": [f"L{j}" for j in range(L)] for i, L in enumerate(nlev)}

    def draw(n):
        cols = {}
        for i, L in enumerate(nlev):
            col = rng.integers(0, L, n)
            if dependent and i > 0:
                prev = cols[f"v{i-1}"]
                flip = rng.random(n) < 0.6
                col = np.where(flip, prev % L, col)
            cols[f"v{i}"] = col
        return cols

    return DatasetPair(cat_dataset(levels, draw(n1)), cat_dataset(levels, draw(n2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
