import itertools
import warnings

import numpy as np
import pytest

from conftest import cat_dataset, random_cat_pair
from synutil.data import DataError, Dataset, DatasetPair, Variable, bin_pair
from synutil.fixtures import load_fixture
from synutil.propensity import (
    CartParams, ConvergenceWarning, Design, LogisticFitter, ModelSpec, PropensityScores,
    ResamplingRequired, build_design, fit_cart, fit_logistic, fit_model, irls, score_utility, score_values,
)
from synutil.tabular import crosstab, tab_utility


def binary_pair():
    lv = {"a": ["0", "1"], "b": ["0", "1"]}
    o = cat_dataset(lv, {"a": [0, 0, 1, 1, 1, 0], "b": [0, 1, 0, 1, 1, 0]})
    s = cat_dataset(lv, {"a": [0, 1, 1, 1, 1, 0], "b": [1, 1, 0, 1, 0, 0]})
    return DatasetPair(o, s)


def test_design_two_binary():
    d = build_design(binary_pair(), 2)
    assert d.columns == ["(Intercept)", "a=1", "b=1", "a=1:b=1"]
    assert d.X.shape == (12, 4)
    np.testing.assert_array_equal(d.X[:, 3], d.X[:, 1] * d.X[:, 2])


def test_design_order_errors():
    with pytest.raises(DataError, match="exceeds"):
        build_design(binary_pair(), 3)
    with pytest.raises(DataError):
        build_design(binary_pair(), 0)


def test_design_parameter_count():
    orig, syn = load_fixture("fixture10")
    p = DatasetPair(orig, syn)
    d = build_design(p, 2)
    sizes = []
    for nm in orig.names:
        v = orig.variable(nm)
        if v.kind == "cat":
            x = np.concatenate([orig.columns[nm], syn.columns[nm]])
            sizes.append(len(v.levels) - 1 + int((x < 0).any()))
        else:
            mk = np.concatenate([orig.marks[nm], syn.marks[nm]])
            sizes.append(len(set(mk.tolist())))
    expected = 1 + sum(sizes) + sum(a * b for a, b in itertools.combinations(sizes, 2))
    assert len(d.columns) == expected


def test_numeric_design_columns():
    v = (Variable("x", "num", special_codes=(-8.0,)),)
    o = Dataset(v, {"x": [1.0, 2.0, np.nan, 3.0]}, {"x": [0, 0, 1, 2]})
    s = Dataset(v, {"x": [1.0, 5.0, 2.0, 3.0]})
    d = build_design(DatasetPair(o, s), 1)
    assert d.columns == ["(Intercept)", "x", "x=<missing>", "x=<code:-8>"]
    assert d.X[:, 1].tolist() == [1, 2, 0, 0, 1, 5, 2, 3]


def test_identical_data_gives_c():
    p = random_cat_pair(np.random.default_rng(3), [3, 2], 80, 80)
    same = DatasetPair(p.original, p.original)
    sc = fit_logistic(build_design(same, 2))
    np.testing.assert_allclose(sc.p_hat, 0.5, atol=1e-12)
    assert score_values(sc)["pMSE"] == pytest.approx(0, abs=1e-20)


def test_saturated_matches_cell_shares(rng):
    p = random_cat_pair(rng, [3, 4], 120, 90, dependent=True)
    sc = fit_logistic(build_design(p, 2))
    t = crosstab(p, ["v0", "v1"])
    assert sc.df == t.k - 1
    stacked = np.concatenate([p.original.columns["v0"] * 4 + p.original.columns["v1"],
                              p.synthetic.columns["v0"] * 4 + p.synthetic.columns["v1"]])
    keys = t.keys[:, 0] * 4 + t.keys[:, 1]
    share = dict(zip(keys.tolist(), (t.s / (t.o + t.s)).tolist()))
    expected = np.array([share[k] for k in stacked.tolist()])
    np.testing.assert_allclose(sc.p_hat, np.clip(expected, 1e-10, 1 - 1e-10), atol=1e-7)


def test_mean_score_equals_c(rng):
    p = random_cat_pair(rng, [3, 3, 2], 200, 140, dependent=True)
    sc = fit_logistic(build_design(p, 2))
    assert sc.converged
    assert sc.p_hat.mean() == pytest.approx(p.c, abs=1e-8)


def test_duplicate_column_is_aliased(rng):
    p = random_cat_pair(rng, [3, 2], 100, 100, dependent=True)
    d = build_design(p, 1)
    X2 = np.column_stack([d.X, d.X[:, 1]])
    d2 = Design(X2, d.columns + ["dup"], d.t, 1, d.vars)
    a, b = fit_logistic(d), fit_logistic(d2)
    assert a.df == b.df == 3
    np.testing.assert_allclose(a.p_hat, b.p_hat, atol=1e-10)
    assert b.summary["aliased"] == ["dup"]


def test_reference_level_invariance(rng):
    p = random_cat_pair(rng, [3, 3], 150, 150, dependent=True)

    def recode(ds):
        # reverse the level order of v0
        v0 = ds.variable("v0")
        rv = Variable("v0", "cat", tuple(reversed(v0.levels)))
        return Dataset((rv, ds.variable("v1")), {"v0": 2 - ds.columns["v0"], "v1": ds.columns["v1"]})
    q = DatasetPair(recode(p.original), recode(p.synthetic))
    a = score_values(fit_logistic(build_design(p, 1)))["pMSE"]
    b = score_values(fit_logistic(build_design(q, 1)))["pMSE"]
    assert a == pytest.approx(b, rel=1e-8)


def test_separation_flagged():
    lv = {"a": ["x", "y"]}
    p = DatasetPair(cat_dataset(lv, {"a": [0] * 10}), cat_dataset(lv, {"a": [1] * 10}))
    sc = fit_logistic(build_design(p, 1))
    assert sc.separated and sc.converged
    assert score_values(sc)["pMSE"] == pytest.approx(0.25, abs=1e-8)


def test_irls_iteration_cap_warns(rng):
    p = random_cat_pair(rng, [3, 3], 100, 100, dependent=True)
    fitter = LogisticFitter(build_design(p, 2))
    ysum = np.bincount(fitter.inv, weights=fitter.design.t, minlength=fitter.U.shape[0])
    _, _, iters, ok = irls(fitter.U, fitter.cnt, ysum, max_iter=1, tol=0.0)
    assert (iters, ok) == (1, False)


def test_saturated_equivalence_mixed(rng):
    for _ in range(10):
        nlev = list(rng.integers(2, 5, size=int(rng.integers(2, 4))))
        p = random_cat_pair(rng, nlev, int(rng.integers(40, 300)), int(rng.integers(40, 300)), dependent=True)
        names = p.original.names
        t = crosstab(p, names)
        tab = tab_utility(t, ["pMSE", "SPECKS", "PO50", "U"])
        sc = fit_model(p, ModelSpec.parse("logit"))
        prop = score_utility(sc, ["pMSE", "SPECKS", "PO50", "U"])
        assert sc.df == t.k - 1
        for m in ("pMSE", "SPECKS", "PO50", "U"):
            assert prop.raw(m) == pytest.approx(tab.raw(m), rel=1e-6, abs=1e-6), m
        assert prop.S("pMSE") == pytest.approx(tab.S("pMSE"), rel=1e-6)


def test_two_record_scores():
    sc = PropensityScores(np.array([1, 0], np.uint8), np.array([0.9, 0.1]), None, "cart")
    v = score_values(sc)
    assert v == {"pMSE": pytest.approx(0.16), "SPECKS": 1.0, "PO50": 50.0, "U": 2.0}


def test_constant_scores():
    sc = PropensityScores(np.array([0, 1, 0, 1], np.uint8), np.full(4, 0.5), 1, "logistic")
    v = score_values(sc)
    assert v["pMSE"] == 0 and v["SPECKS"] == 0 and v["PO50"] == 0


def test_score_ranges(rng):
    p = random_cat_pair(rng, [4, 3, 3], 150, 250, dependent=True)
    sc = fit_cart(p)
    v = score_values(sc)
    n2, N = p.n2, p.N
    assert 0 <= v["SPECKS"] <= 1 and 0 <= v["PO50"] <= 50
    assert n2 * (n2 + 1) / 2 <= v["U"] <= n2 * N - n2 * (n2 - 1) / 2
    assert ((sc.p_hat >= 0) & (sc.p_hat <= 1)).all()


def test_cart_requires_resampling(rng):
    sc = fit_cart(random_cat_pair(rng, [3, 3], 60, 60))
    assert sc.df is None
    with pytest.raises(ResamplingRequired):
        score_utility(sc, analytic=True)
    r = score_utility(sc)
    assert r.S("pMSE") is None and r.raw("pMSE") >= 0


def test_cart_root_only():
    lv = {"a": ["x", "y"]}
    ds = cat_dataset(lv, {"a": [0, 1] * 30})
    sc = fit_cart(DatasetPair(ds, ds))
    assert sc.summary["n_leaves"] == 1
    np.testing.assert_array_equal(sc.p_hat, 0.5)
    assert score_values(sc)["pMSE"] == 0


def test_cart_perfect_split():
    lv = {"a": ["x", "y"], "b": ["u", "v"]}
    rng = np.random.default_rng(0)
    o = cat_dataset(lv, {"a": [0] * 40, "b": rng.integers(0, 2, 40)})
    s = cat_dataset(lv, {"a": [1] * 40, "b": rng.integers(0, 2, 40)})
    sc = fit_cart(DatasetPair(o, s))
    assert sc.summary["n_leaves"] == 2
    assert sorted(set(sc.p_hat.tolist())) == [0.0, 1.0]
    assert sc.summary["tree"][0]["feature"] == "a"


def test_cart_deterministic(rng):
    p = random_cat_pair(rng, [4, 3, 5], 200, 200, dependent=True)
    a, b = fit_cart(p, seed=1), fit_cart(p, seed=1)
    np.testing.assert_array_equal(a.p_hat, b.p_hat)
    assert a.summary == b.summary


def test_cart_numeric_features():
    orig, syn = load_fixture("fixture10")
    sc = fit_cart(DatasetPair(orig, syn))
    feats = {n.get("feature") for n in sc.summary["tree"]}
    # the inflated missing rate in weight is what the tree finds first; the rank
    # feature's code-0 cut and the state feature tie, lower feature index wins
    root = sc.summary["tree"][0]
    assert root["feature"] == "weight" and root["left_if"] == "non-value"
    assert len(feats) > 2


def test_cart_params_validated():
    with pytest.raises((DataError, ValueError)):
        CartParams(min_split=0)
    with pytest.raises((DataError, ValueError)):
        CartParams(complexity=-1)


def test_model_spec_parse():
    assert ModelSpec.parse("logit:2").order == 2
    assert ModelSpec.parse("cart").kind == "cart"
    assert ModelSpec.parse("logit").order is None
    for bad in ("probit", "logit:x"):
        with pytest.raises(DataError):
            ModelSpec.parse(bad)


def test_logit_on_numeric_data():
    orig, syn = load_fixture("fixture10")
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        sc = fit_model(DatasetPair(orig, syn), ModelSpec.parse("logit:1"))
    r = score_utility(sc)
    assert sc.converged and r.S("pMSE") > 10
