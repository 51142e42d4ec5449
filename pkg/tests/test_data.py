import warnings

import numpy as np
import pytest

from synutil.data import (
    BinningSpec, DataError, Dataset, DatasetPair, Variable, bin_numeric, bin_pair,
    format_meta, load_csv, pair, parse_meta, quantile_cuts, write_csv,
)

META = """\
# three columns
name: sex
kind: cat
levels: M, F

name: income
kind: num
na_codes: -8

name: region
kind: cat
levels: a, b, c
"""


@pytest.fixture
def meta():
    return parse_meta(META)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_small_file(tmp_path, meta):
    p = write(tmp_path, "sex,income,region\nM,10,a\nF,,b\nF,-8,c\nM,3.5,a\n,7,b\n")
    ds = load_csv(p, meta)
    assert ds.n == 5 and ds.names == ["sex", "income", "region"]
    assert ds.columns["sex"].tolist() == [0, 1, 1, 0, -1]
    assert ds.marks["income"].tolist() == [0, 1, 2, 0, 0]
    # -8 is a marker, never a numeric value
    assert np.isnan(ds.columns["income"][2])
    assert ds.columns["income"][[0, 3]].tolist() == [10.0, 3.5]


def test_unknown_label_names_column_and_row(tmp_path, meta):
    p = write(tmp_path, "sex,income,region\nM,1,a\nM,2,X\n")
    with pytest.raises(DataError, match=r"row 3, column 'region'.*'X'"):
        load_csv(p, meta)


@pytest.mark.parametrize("text, msg", [
    ("sex,region,income\nM,a,1\n", "header"),
    ("sex,income,region\nM,abc,a\n", "cannot parse"),
    ("sex,income,region\nM,1\n", "expected 3 fields"),
])
def test_load_errors(tmp_path, meta, text, msg):
    with pytest.raises(DataError, match=msg):
        load_csv(write(tmp_path, text), meta)


def test_missing_file(tmp_path, meta):
    with pytest.raises(DataError, match="not found"):
        load_csv(tmp_path / "nope.csv", meta)


def test_csv_round_trip(tmp_path, meta):
    p = write(tmp_path, "sex,income,region\nM,10,a\nF,,b\nF,-8,c\nM,0.1,a\n,7,b\n")
    ds = load_csv(p, meta)
    q = tmp_path / "out.csv"
    write_csv(ds, q)
    assert load_csv(q, meta).equals(ds)


def test_meta_round_trip(meta):
    assert parse_meta(format_meta(meta)) == meta


@pytest.mark.parametrize("text", [
    "name: x\nkind: cat\n",
    "name: x\nkind: num\nlevels: a\n",
    "name: x\nkind: cat\nlevels: a, a\n",
    "name: x\nkind: cat\nlevels: a\ncolour: red\n",
    "name: x\nkind: real\n",
    "",
])
def test_bad_metadata(text):
    with pytest.raises(DataError):
        parse_meta(text)


def test_variable_invariants():
    with pytest.raises(DataError):
        Variable("x", "cat", ("a",), special_codes=(-8.0,))
    with pytest.raises(DataError):
        Variable("x", "num", special_codes=(-8.0, -8.0))


def test_dataset_is_read_only():
    ds = Dataset((Variable("a", "cat", ("x", "y")),), {"a": [0, 1]})
    with pytest.raises(ValueError):
        ds.columns["a"][0] = 1
    with pytest.raises(DataError, match="out of range"):
        Dataset((Variable("a", "cat", ("x", "y")),), {"a": [0, 2]})


def test_pair_sizes():
    v = (Variable("a", "cat", ("x", "y")),)
    p = pair(Dataset(v, {"a": np.zeros(100)}), Dataset(v, {"a": np.ones(100)}))
    assert (p.c, p.N) == (0.5, 200)
    p = pair(Dataset(v, {"a": np.zeros(300)}), Dataset(v, {"a": np.ones(100)}))
    assert (p.c, p.N) == (0.25, 400)


def test_pair_schema_mismatch():
    a = Dataset((Variable("a", "cat", ("x", "y")), Variable("b", "num")), {"a": [0], "b": [1.0]})
    b = Dataset((Variable("a", "cat", ("x", "y")),), {"a": [0]})
    with pytest.raises(DataError):
        pair(a, b)
    c = Dataset((Variable("a", "cat", ("x", "z")), Variable("b", "num")), {"a": [0], "b": [1.0]})
    with pytest.raises(DataError):
        DatasetPair(a, c)


def test_uniform_quantiles():
    x = np.arange(1, 101, dtype=float)
    assert quantile_cuts(x, 5).tolist() == [20, 40, 60, 80]
    ds = Dataset((Variable("x", "num"),), {"x": x})
    b = bin_numeric(ds, BinningSpec(5))
    assert np.bincount(b.columns["x"]).tolist() == [20] * 5
    assert b.variable("x").levels[:5] == ("[1,20]", "(20,40]", "(40,60]", "(60,80]", "(80,100]")


def test_income_categories():
    rng = np.random.default_rng(1)
    vals = rng.lognormal(7, 1, 200)
    marks = np.zeros(200, dtype=np.int8)
    marks[:10] = 2
    marks[10:20] = 1
    ds = Dataset((Variable("income", "num", special_codes=(-8.0,)),), {"income": vals}, {"income": marks})
    b = bin_numeric(ds)
    v = b.variable("income")
    assert len(v.levels) == 7
    assert v.levels[-2:] == ("code:-8", "missing")
    assert (b.columns["income"][:10] == 5).all() and (b.columns["income"][10:20] == 6).all()


def test_constant_variable_warns():
    ds = Dataset((Variable("x", "num"),), {"x": np.array([7.0] * 9 + [np.nan])})
    with pytest.warns(UserWarning, match="constant"):
        b = bin_numeric(ds)
    assert b.variable("x").levels == ("[7,7]", "missing")
    assert b.columns["x"].tolist() == [0] * 9 + [1]


def test_all_missing_numeric_is_error():
    ds = Dataset((Variable("x", "num"),), {"x": np.full(4, np.nan)})
    with pytest.raises(DataError, match="no non-missing"):
        bin_numeric(ds)


def test_binning_idempotent_on_categorical():
    ds = Dataset((Variable("a", "cat", ("x", "y")), Variable("n", "num")), {"a": [0, 1, 1], "n": [1.0, 2.0, 3.0]})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        once = bin_numeric(ds, BinningSpec(2))
        assert bin_numeric(once, BinningSpec(2)).equals(once)


def test_pair_binning_uses_original_cuts():
    v = (Variable("x", "num"),)
    orig = Dataset(v, {"x": np.arange(1, 11, dtype=float)})
    syn = Dataset(v, {"x": np.array([100.0, -5.0, 5.0, 6.0])})
    bp = bin_pair(DatasetPair(orig, syn), BinningSpec(2))
    assert bp.original.variable("x") == bp.synthetic.variable("x")
    # cut at 5: -5 and 5 fall in the first bin, 6 and 100 in the second
    assert bp.synthetic.columns["x"].tolist() == [1, 0, 0, 1]


def test_bin_counts_near_equal(rng):
    x = np.round(rng.normal(0, 1, 997), 1)
    b = bin_numeric(Dataset((Variable("x", "num"),), {"x": x}), BinningSpec(5))
    counts = np.bincount(b.columns["x"])[:-1]
    cuts = quantile_cuts(x, 5)
    ties = sum(int((x == c).sum()) for c in cuts)
    assert np.all(np.abs(counts - 997 / 5) <= ties + 1)


def test_groups_validated():
    with pytest.raises(DataError):
        BinningSpec(1)
