"""Regenerate the bundled fixtures in src/synutil/fixtures/ (deterministic)."""
from pathlib import Path

import numpy as np

from synutil.data import Dataset, Variable, format_meta, write_csv
from synutil.harness import synth_catall

OUT = Path(__file__).resolve().parents[1] / "src" / "synutil" / "fixtures"


def chain(rng, n, nlev, strength, alpha):
    """Categorical columns where each one copies (a rescaled) predecessor with some probability."""
    cols, prev = [], None
    for i, L in enumerate(nlev):
        x = rng.choice(L, n, p=rng.dirichlet(np.ones(L) * alpha))
        if prev is not None and strength[i - 1] > 0:
            dep = rng.random(n) < strength[i - 1]
            x = np.where(dep, (prev * L) // nlev[i - 1], x)
        cols.append(x)
        prev = x
    return cols


def fixture4():
    rng = np.random.default_rng(7)
    names = ["region", "tenure", "hhsize", "car"]
    levels = [["north", "midlands", "south"], ["own", "mortgage", "rent"], ["1", "2", "3plus"], ["no", "yes"]]
    cols = chain(rng, 500, [3, 3, 3, 2], (0.6, 0.6, 0.2), 3)
    vs = tuple(Variable(nm, "cat", tuple(lv)) for nm, lv in zip(names, levels))
    return Dataset(vs, dict(zip(names, cols)))


def fixture10():
    rng = np.random.default_rng(11)
    n = 1000
    sex = rng.integers(0, 2, n)
    age = np.round(np.clip(rng.normal(48, 16, n), 16, 95))
    edu = np.clip((age < 35) * 1 + rng.choice(4, n, p=[0.2, 0.4, 0.3, 0.1]), 0, 3)
    socprof = np.where(age > 64, 4, rng.choice(5, n, p=[0.3, 0.25, 0.2, 0.15, 0.1]))
    income = np.round(np.exp(rng.normal(7.5, 0.5, n) + 0.15 * edu - 0.2 * sex), 0)
    income[rng.random(n) < 0.08] = -8
    inc_na = rng.random(n) < 0.05
    trust = rng.choice(3, n, p=[0.5, 0.3, 0.2]).astype(np.int32)
    trust[rng.random(n) < 0.04] = -1
    height = np.round(np.where(sex == 0, rng.normal(178, 7, n), rng.normal(165, 6, n)))
    weight = np.round(height - 100 + rng.normal(0, 9, n) + 0.1 * (age - 48))
    w_na = rng.random(n) < 0.03
    smoke = (rng.random(n) < np.where(edu >= 2, 0.15, 0.35)).astype(int)
    region = rng.choice(6, n, p=[0.25, 0.2, 0.2, 0.15, 0.1, 0.1])
    vs = (
        Variable("sex", "cat", ("MALE", "FEMALE")),
        Variable("income", "num", special_codes=(-8.0,)),
        Variable("age", "num"),
        Variable("edu", "cat", ("PRIMARY", "VOCATIONAL", "SECONDARY", "TERTIARY")),
        Variable("socprof", "cat", ("EMPLOYED", "SELF", "FARMER", "STUDENT", "RETIRED")),
        Variable("trust", "cat", ("YES", "NEUTRAL", "NO")),
        Variable("height", "num"),
        Variable("weight", "num"),
        Variable("smoke", "cat", ("NO", "YES")),
        Variable("region", "cat", ("R1", "R2", "R3", "R4", "R5", "R6")),
    )
    inc = np.where(inc_na, np.nan, income)
    marks = {
        "income": np.where(inc_na, 1, np.where(income == -8, 2, 0)),
        "age": np.zeros(n),
        "height": np.zeros(n),
        "weight": np.where(w_na, 1, 0),
    }
    cols = {
        "sex": sex, "income": np.where(income == -8, np.nan, inc), "age": age, "edu": edu,
        "socprof": socprof, "trust": trust, "height": height,
        "weight": np.where(w_na, np.nan, weight), "smoke": smoke, "region": region,
    }
    orig = Dataset(vs, cols, marks)
    # synthetic with one problem variable: too many missing weights
    rows = np.random.default_rng(5).integers(0, n, n)
    boot = orig.take(rows)
    cols2 = {nm: boot.columns[nm] for nm in orig.names}
    marks2 = {nm: boot.marks[nm].copy() for nm in ("income", "age", "height", "weight")}
    extra = np.random.default_rng(6).random(n) < 0.25
    marks2["weight"][extra] = 1
    w2 = cols2["weight"].copy()
    w2[extra] = np.nan
    cols2["weight"] = w2
    synthetic = Dataset(vs, cols2, marks2)
    return orig, synthetic


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    f4 = fixture4()
    write_csv(f4, OUT / "fixture4.csv")
    (OUT / "fixture4.meta").write_text(format_meta(f4.variables))
    orig, syn = fixture10()
    write_csv(orig, OUT / "fixture10_orig.csv")
    write_csv(syn, OUT / "fixture10_syn.csv")
    (OUT / "fixture10.meta").write_text(format_meta(orig.variables))


if __name__ == "__main__":
    main()
