"""Propensity-score models on the stacked original+synthetic records.

Three model classes: logistic regression with interactions up to a given
order (the saturated model when the order equals the number of variables)
and a CART classification tree.  Each is prepared once per pair and can then
be refit to any label vector, which is what the permutation null needs.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from . import _kernels
from .data import CAT, MARK_CODE0, MARK_MISSING, MARK_VALUE, DataError, DatasetPair
from .results import SCORE_MEASURES, MeasureError, MeasureValue, UtilityResult, resolve_measures
from .scores import po50, rank_sum, specks

PROB_CLAMP = 1e-10
MAX_ITER = 100
DEV_TOL = 1e-8
ALIAS_TOL = 1e-10
# Scores closer than this are one tied value (IRLS round-off is far smaller;
# distinct cell shares at N <= 1e4 differ by more).
SCORE_TIE_TOL = 1e-8


class ResamplingRequired(MeasureError):
    """Analytic standardization requested for a model without fixed degrees of freedom."""


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass
class PropensityScores:
    t: np.ndarray
    p_hat: np.ndarray
    df: int | None
    model_kind: str
    converged: bool = True
    separated: bool = False
    summary: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.t.shape != self.p_hat.shape:
            raise ValueError("t and p_hat must have the same length")

    @property
    def N(self) -> int:
        return int(self.t.size)

    @property
    def c(self) -> float:
        return float(self.t.sum()) / self.N


# ---------------------------------------------------------------------------
# Design matrices
# ---------------------------------------------------------------------------

@dataclass
class Design:
    X: np.ndarray
    columns: list[str]
    t: np.ndarray
    order: int
    vars: tuple[str, ...]


def _stacked_labels(p: DatasetPair) -> np.ndarray:
    return np.concatenate([np.zeros(p.n1, np.uint8), np.ones(p.n2, np.uint8)])


def _main_block(p: DatasetPair, name: str) -> tuple[np.ndarray, list[str]]:
    """Main-effect columns of one variable over the stacked records."""
    v = p.original.variable(name)
    cols, names = [], []
    if v.kind == CAT:
        x = np.concatenate([p.original.columns[name], p.synthetic.columns[name]])
        for j, lv in enumerate(v.levels[1:], 1):
            cols.append((x == j).astype(np.float64))
            names.append(f"{name}={lv}")
        if (x < 0).any():
            cols.append((x < 0).astype(np.float64))
            names.append(f"{name}=<missing>")
    else:
        x = np.concatenate([p.original.columns[name], p.synthetic.columns[name]])
        mk = np.concatenate([p.original.marks[name], p.synthetic.marks[name]])
        cols.append(np.where(mk == MARK_VALUE, x, 0.0))
        names.append(name)
        if (mk == MARK_MISSING).any():
            cols.append((mk == MARK_MISSING).astype(np.float64))
            names.append(f"{name}=<missing>")
        for i, code in enumerate(v.special_codes):
            ind = mk == MARK_CODE0 + i
            if ind.any():
                cols.append(ind.astype(np.float64))
                names.append(f"{name}=<code:{code:g}>")
    return (np.column_stack(cols) if cols else np.empty((p.N, 0))), names


def build_design(p: DatasetPair, order: int, vars: Sequence[str] | None = None) -> Design:
    """Intercept, main effects and all interactions of distinct variables up to ``order``.

    Categorical variables are dummy coded against their first level;
    numeric variables enter linearly with indicator columns for any missing
    or special-code values present.
    """
    vars = tuple(vars) if vars is not None else tuple(p.original.names)
    if not vars:
        raise DataError("design needs at least one variable")
    if order < 1:
        raise DataError("interaction order must be >= 1")
    if order > len(vars):
        raise DataError(f"order {order} exceeds the number of variables ({len(vars)})")
    blocks = {nm: _main_block(p, nm) for nm in vars}
    cols = [np.ones(p.N)]
    names = ["(Intercept)"]
    for r in range(1, order + 1):
        for combo in itertools.combinations(vars, r):
            mats = [blocks[nm] for nm in combo]
            for picks in itertools.product(*[range(m[0].shape[1]) for m in mats]):
                col = np.ones(p.N)
                for (mat, _), j in zip(mats, picks):
                    col = col * mat[:, j]
                cols.append(col)
                names.append(":".join(m[1][j] for m, j in zip(mats, picks)))
    return Design(np.column_stack(cols), names, _stacked_labels(p), order, vars)


# ---------------------------------------------------------------------------
# Logistic regression by IRLS
# ---------------------------------------------------------------------------

def non_aliased_columns(U: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Indices (ascending) of a maximal independent column set via pivoted QR."""
    A = U * np.sqrt(weights)[:, None]
    if A.shape[1] == 0:
        return np.empty(0, dtype=np.intp)
    _, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = np.linalg.norm(A, axis=0).max()
    rank = int(np.count_nonzero(diag > ALIAS_TOL * scale))
    return np.sort(piv[:rank])


def _deviance(ysum, cnt, mu):
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(ysum > 0, ysum * np.log(ysum / (cnt * mu)), 0.0)
        b = np.where(cnt - ysum > 0, (cnt - ysum) * np.log((cnt - ysum) / (cnt * (1 - mu))), 0.0)
    return 2.0 * float(np.sum(a + b))


def _sigmoid(eta):
    return np.clip(1.0 / (1.0 + np.exp(-eta)), PROB_CLAMP, 1.0 - PROB_CLAMP)


def irls(U, cnt, ysum, max_iter=MAX_ITER, tol=DEV_TOL):
    """Binomial logistic fit on grouped rows. Returns (beta, mu, iterations, converged)."""
    mu = (ysum + 0.5) / (cnt + 1.0)
    eta = np.log(mu / (1 - mu))
    dev_old = _deviance(ysum, cnt, mu)
    ybar = ysum / cnt
    beta = np.zeros(U.shape[1])
    for it in range(1, max_iter + 1):
        var = mu * (1 - mu)
        w = np.sqrt(cnt * var)
        z = eta + (ybar - mu) / var
        beta = np.linalg.lstsq(U * w[:, None], z * w, rcond=None)[0]
        eta = U @ beta
        mu = _sigmoid(eta)
        dev = _deviance(ysum, cnt, mu)
        if abs(dev - dev_old) / (abs(dev) + 0.1) < tol:
            return beta, mu, it, True
        dev_old = dev
    return beta, mu, max_iter, False


class LogisticFitter:
    """Grouped design prepared once; ``fit(t)`` refits for any label vector."""

    def __init__(self, design: Design):
        self.design = design
        uniq, inv = np.unique(design.X, axis=0, return_inverse=True)
        self.U_all = uniq
        self.inv = inv.reshape(-1)
        self.cnt = np.bincount(self.inv, minlength=uniq.shape[0]).astype(np.float64)
        self.keep = non_aliased_columns(uniq, self.cnt)
        self.U = uniq[:, self.keep]
        self.df = int(self.keep.size) - 1

    def fit(self, t: np.ndarray | None = None) -> PropensityScores:
        t = self.design.t if t is None else np.asarray(t, dtype=np.uint8)
        ysum = np.bincount(self.inv, weights=t, minlength=self.U.shape[0])
        beta, mu, iters, ok = irls(self.U, self.cnt, ysum)
        if not ok:
            warnings.warn(f"IRLS did not converge in {iters} iterations", ConvergenceWarning, stacklevel=2)
        sep = bool(np.any((mu <= PROB_CLAMP) | (mu >= 1 - PROB_CLAMP)))
        summary = {
            "kind": "logistic",
            "order": self.design.order,
            "n_columns": len(self.design.columns),
            "n_parameters": int(self.keep.size),
            "aliased": [self.design.columns[j] for j in range(len(self.design.columns)) if j not in set(self.keep.tolist())],
            "df": self.df,
            "iterations": iters,
            "converged": ok,
            "separation": sep,
        }
        return PropensityScores(t.copy(), mu[self.inv], self.df, "logistic", ok, sep, summary)


def fit_logistic(design: Design, t: np.ndarray | None = None) -> PropensityScores:
    return LogisticFitter(design).fit(t)


# ---------------------------------------------------------------------------
# CART
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CartParams:
    min_split: int = 20
    min_leaf: int = 5
    max_depth: int = 30
    complexity: float = 1e-4

    def __post_init__(self):
        if min(self.min_split, self.min_leaf, self.max_depth) < 1:
            raise ValueError("CART size parameters must be positive")
        if self.complexity < 0:
            raise ValueError("CART complexity must be >= 0")


@dataclass
class _Feature:
    name: str
    ordered: bool
    n_levels: int
    labels: list[str] | None = None
    values: np.ndarray | None = None


def cart_features(p: DatasetPair, vars: Sequence[str] | None = None):
    """Integer-coded features over the stacked records.

    Categorical variables become one unordered feature (missing as an extra
    level).  Numeric variables become an ordered rank feature (code 0 holds
    every non-ordinary value) plus, when missing or special codes occur, an
    unordered state feature separating them.
    """
    vars = tuple(vars) if vars is not None else tuple(p.original.names)
    cols, feats = [], []
    for nm in vars:
        v = p.original.variable(nm)
        x = np.concatenate([p.original.columns[nm], p.synthetic.columns[nm]])
        if v.kind == CAT:
            L = len(v.levels)
            cols.append(np.where(x < 0, L, x).astype(np.int32))
            feats.append(_Feature(nm, False, L + 1, list(v.levels) + ["<missing>"]))
            continue
        mk = np.concatenate([p.original.marks[nm], p.synthetic.marks[nm]])
        ordinary = mk == MARK_VALUE
        uniq, inv = np.unique(x[ordinary], return_inverse=True)
        code = np.zeros(x.size, dtype=np.int32)
        code[ordinary] = inv.reshape(-1) + 1
        cols.append(code)
        feats.append(_Feature(nm, True, uniq.size + 1, None, uniq))
        if (~ordinary).any():
            labels = ["<value>", "<missing>"] + [f"<code:{c:g}>" for c in v.special_codes]
            cols.append(mk.astype(np.int32))
            feats.append(_Feature(nm + ":state", False, len(labels), labels))
    return np.column_stack(cols).astype(np.int32), feats


class CartFitter:
    def __init__(self, p: DatasetPair, params: CartParams | None = None, vars=None, backend=None):
        self.params = params or CartParams()
        self.codes, self.features = cart_features(p, vars)
        self.nlev = np.array([f.n_levels for f in self.features], dtype=np.int32)
        self.ordered = np.array([f.ordered for f in self.features], dtype=np.uint8)
        self.t = _stacked_labels(p)
        self.backend = backend

    def fit(self, t: np.ndarray | None = None) -> PropensityScores:
        t = self.t if t is None else np.asarray(t, dtype=np.uint8)
        pr = self.params
        leaf, nodes, masks = _kernels.grow_tree(
            self.codes, self.nlev, self.ordered, t,
            pr.min_split, pr.min_leaf, pr.max_depth, pr.complexity,
            backend=self.backend,
        )
        share = nodes[:, 6] / nodes[:, 5]
        p_hat = share[leaf]
        summary = {"kind": "cart", "params": _params_dict(pr), "tree": self._describe(nodes, masks)}
        summary["n_leaves"] = int(np.count_nonzero(nodes[:, 3] < 0))
        return PropensityScores(t.copy(), p_hat, None, "cart", True, False, summary)

    def _describe(self, nodes, masks) -> list[dict[str, Any]]:
        out = []
        for i, (f, cut, cut_next, left, right, n, npos) in enumerate(nodes.tolist()):
            d: dict[str, Any] = {"id": i, "n": n, "n_synthetic": npos}
            if left >= 0:
                feat = self.features[f]
                d["feature"] = feat.name
                d["left"], d["right"] = left, right
                if feat.ordered:
                    lo = -math.inf if cut == 0 else float(feat.values[cut - 1])
                    hi = float(feat.values[cut_next - 1])
                    d["threshold"] = (lo + hi) / 2 if cut > 0 else None
                    d["left_if"] = "non-value or <= threshold" if cut > 0 else "non-value"
                else:
                    d["left_levels"] = [feat.labels[j] for j in np.flatnonzero(masks[i][: feat.n_levels])]
            out.append(d)
        return out


def _params_dict(params: CartParams) -> dict[str, Any]:
    return {
        "min_split": params.min_split,
        "min_leaf": params.min_leaf,
        "max_depth": params.max_depth,
        "complexity": params.complexity,
    }


def fit_cart(p: DatasetPair, params: CartParams | None = None, seed: int = 0, vars=None) -> PropensityScores:
    """CART propensity model; the growth rule is deterministic, ``seed`` is recorded only."""
    sc = CartFitter(p, params, vars).fit()
    sc.summary["seed"] = seed
    return sc


# ---------------------------------------------------------------------------
# Model specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    kind: str = "cart"
    order: int | None = None
    cart: CartParams = field(default_factory=CartParams)

    @classmethod
    def parse(cls, text: str, cart: CartParams | None = None) -> "ModelSpec":
        text = text.strip()
        if text == "cart":
            return cls("cart", None, cart or CartParams())
        if text in ("logit", "saturated"):
            return cls("logit", None)
        if text.startswith("logit:"):
            try:
                order = int(text.split(":", 1)[1])
            except ValueError:
                raise DataError(f"bad model spec {text!r}") from None
            return cls("logit", order)
        raise DataError(f"bad model spec {text!r}; expected logit:N or cart")

    @property
    def has_df(self) -> bool:
        return self.kind == "logit"

    def label(self) -> str:
        if self.kind == "cart":
            return "cart"
        return "logit" if self.order is None else f"logit:{self.order}"

    def prepare(self, p: DatasetPair, vars: Sequence[str] | None = None):
        vars = tuple(vars) if vars is not None else tuple(p.original.names)
        if self.kind == "cart":
            return CartFitter(p, self.cart, vars)
        order = len(vars) if self.order is None else self.order
        return LogisticFitter(build_design(p, order, vars))


def fit_model(p: DatasetPair, spec: ModelSpec, vars=None) -> PropensityScores:
    return spec.prepare(p, vars).fit()


# ---------------------------------------------------------------------------
# Score-based measures
# ---------------------------------------------------------------------------

def score_values(scores: PropensityScores, measures=SCORE_MEASURES, tie_tol: float = SCORE_TIE_TOL) -> dict[str, float]:
    t = scores.t.astype(np.float64)
    p = scores.p_hat
    c = scores.c
    out = {}
    if "pMSE" in measures:
        out["pMSE"] = float(np.sum((p - c) ** 2) / scores.N)
    if "PO50" in measures:
        out["PO50"] = po50(p, 1.0 - t, t, c, tie_tol)
    if "SPECKS" in measures:
        out["SPECKS"] = specks(p, 1.0 - t, t, tie_tol)
    if "U" in measures:
        out["U"] = rank_sum(p, 1.0 - t, t, tie_tol)
    return out


def score_utility(scores: PropensityScores, measures=None, analytic: bool | None = None) -> UtilityResult:
    """Score-based utility.  ``analytic=None`` standardizes pMSE whenever the model has a df."""
    wanted = resolve_measures(measures, SCORE_MEASURES)
    if analytic and scores.df is None:
        raise ResamplingRequired(f"{scores.model_kind} model has no fixed df; use a resampling null")
    vals = score_values(scores, wanted)
    use = scores.df is not None if analytic is None else analytic
    out = {}
    for m in wanted:
        if m == "pMSE" and use:
            c = scores.c
            out[m] = MeasureValue(vals[m], scores.df * c * (1 - c) ** 2 / scores.N, "analytic")
        else:
            out[m] = MeasureValue(vals[m])
    return UtilityResult(out, df=scores.df, model=scores.summary)
