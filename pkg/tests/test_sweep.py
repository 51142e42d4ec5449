import itertools

import numpy as np
import pytest

from conftest import cat_dataset, random_cat_pair
from synutil.data import DataError, DatasetPair
from synutil.fixtures import load_fixture
from synutil.results import MeasureValue, UtilityResult
from synutil.sweep import SweepResult, fixed_slice, pick_fixed_var, ranked, summarize, sweep, worst_n


@pytest.fixture(scope="module")
def f10():
    orig, syn = load_fixture("fixture10")
    return DatasetPair(orig, syn)


def fake(scores: dict, arity: int, names) -> SweepResult:
    entries = {}
    for combo, v in scores.items():
        entries[combo] = UtilityResult({"pMSE": MeasureValue(v, 1.0)}, vars=combo, df=1)
    return SweepResult(arity, entries, tuple(names))


@pytest.mark.parametrize("arity, count", [(1, 10), (2, 45), (3, 120)])
def test_entry_counts(f10, arity, count):
    assert len(sweep(f10, arity).entries) == count


def test_single_variable(f10):
    r = sweep(f10, 1, vars=["sex"])
    assert list(r.entries) == [("sex",)]


def test_too_few_variables(f10):
    with pytest.raises(DataError):
        sweep(f10, 3, vars=["sex", "age"])
    with pytest.raises(ValueError):
        sweep(f10, 4)
    with pytest.raises(DataError):
        sweep(f10, 2, vars=["sex", "sex"])


def test_combination_order(f10):
    r = sweep(f10, 2, ["pMSE"])
    assert list(r.entries) == list(itertools.combinations(f10.original.names, 2))


def test_summary_recomputed(f10):
    r = sweep(f10, 2, ["pMSE", "VW"])
    vals = [e.S("pMSE") for e in r.entries.values()]
    assert r.summary["S_pMSE"]["max"] == max(vals)
    assert r.summary["S_pMSE"]["median"] == float(np.median(vals))
    assert summarize(r.entries) == r.summary


def test_even_median_is_midpoint():
    r = fake({("a",): 1.0, ("b",): 2.0, ("c",): 4.0, ("d",): 10.0}, 1, "abcd")
    assert r.summary["S_pMSE"] == {"median": 3.0, "max": 10.0}


def test_worst_pairs_involve_problem_variable(f10):
    w = worst_n(sweep(f10, 2), 4)
    assert len(w) == 4
    assert all("weight" in combo for combo, _ in w)
    assert [v for _, v in w] == sorted((v for _, v in w), reverse=True)


def test_ties_lexicographic():
    r = fake({("b", "c"): 1.0, ("a", "c"): 1.0, ("a", "b"): 1.0}, 2, "abc")
    assert [c for c, _ in worst_n(r, 3)] == [("a", "b"), ("a", "c"), ("b", "c")]


def test_worst_n_clips():
    r = fake({("a", "b"): 2.0, ("a", "c"): 5.0, ("b", "c"): 1.0}, 2, "abc")
    assert [c for c, _ in worst_n(r, 10)] == [("a", "c"), ("a", "b"), ("b", "c")]
    with pytest.raises(ValueError):
        worst_n(r, 0)


def test_ranking_consistent_with_max(f10):
    r = sweep(f10, 2)
    full = ranked(r)
    assert full[0][1] == r.summary["S_pMSE"]["max"]
    assert len(full) == len(r.entries)


def test_pick_fixed_var_rules():
    r = fake({("a", "b", "c"): 9.0, ("a", "b", "d"): 3.0, ("a", "c", "d"): 2.0, ("b", "c", "d"): 1.0}, 3, "abcd")
    assert pick_fixed_var(r) == "a"
    r = fake({("a", "b", "c"): 1.0, ("a", "b", "d"): 2.0, ("a", "c", "d"): 1.0, ("b", "c", "d"): 7.0}, 3, "abcd")
    assert pick_fixed_var(r) == "b"
    with pytest.raises(ValueError):
        pick_fixed_var(fake({("a", "b"): 1.0}, 2, "ab"))


def test_pick_fixed_var_brute_force(rng):
    names = [f"x{i}" for i in range(6)]
    combos = list(itertools.combinations(names, 3))
    for _ in range(20):
        vals = rng.integers(0, 5, len(combos)).astype(float)
        r = fake(dict(zip(combos, vals)), 3, names)
        best = {n: max(v for c, v in zip(combos, vals) if n in c) for n in names}
        top = max(best.values())
        assert pick_fixed_var(r) == sorted(n for n in names if best[n] == top)[0]


def test_fixed_slice(f10):
    r3 = sweep(f10, 3, ["pMSE"])
    sl = fixed_slice(r3, "age")
    assert sl.arity == 2 and len(sl.entries) == 36 and "age" not in sl.variables
    assert sl.entries[("sex", "income")] is r3.entries[("sex", "income", "age")]
    with pytest.raises(DataError):
        fixed_slice(r3, "nope")


def test_order_independent(rng):
    p = random_cat_pair(rng, [3, 2, 4, 2], 100, 100, dependent=True)
    a = sweep(p, 2, threads=1)
    b = sweep(p, 2, threads=4)
    assert a.to_dict() == b.to_dict()


def test_sweep_json_shape(f10):
    d = sweep(f10, 2, ["pMSE"]).to_dict()
    assert d["arity"] == 2 and len(d["entries"]) == 45
    assert d["entries"][0]["vars"] == ["sex", "income"]
    assert set(d["summary"]) == {"pMSE", "S_pMSE"}


def test_identical_pair_scores_zero():
    ds = cat_dataset({"a": ["x", "y"], "b": ["u", "v", "w"]}, {"a": [0, 1, 1, 0], "b": [0, 1, 2, 2]})
    r = sweep(DatasetPair(ds, ds), 1)
    assert all(e.S("pMSE") == 0 for e in r.entries.values())
