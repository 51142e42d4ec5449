"""Datasets, metadata sidecars, CSV loading and quantile binning.

Categorical columns are stored as ``int32`` level codes with ``-1`` for a
missing value.  Numeric columns are stored as a ``float64`` value array plus
an ``int8`` marker array: ``0`` for an ordinary value, ``1`` for missing and
``2 + i`` for the ``i``-th declared special code (the value slot is NaN for
every non-ordinary entry).
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

CAT = "cat"
NUM = "num"

MARK_VALUE = 0
MARK_MISSING = 1
MARK_CODE0 = 2

MISSING_LABEL = "missing"


class DataError(ValueError):
    """Invalid input data, metadata, or schema."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    levels: tuple[str, ...] = ()
    special_codes: tuple[float, ...] = ()
    allow_missing: bool = True

    def __post_init__(self):
        if not self.name:
            raise DataError("variable name must be non-empty")
        if self.kind not in (CAT, NUM):
            raise DataError(f"{self.name}: kind must be 'cat' or 'num', got {self.kind!r}")
        if self.kind == CAT:
            if not self.levels:
                raise DataError(f"{self.name}: categorical variable needs levels")
            if any(not lv for lv in self.levels):
                raise DataError(f"{self.name}: empty level label")
            if len(set(self.levels)) != len(self.levels):
                raise DataError(f"{self.name}: duplicate level labels")
            if self.special_codes:
                raise DataError(f"{self.name}: special codes apply only to numeric variables")
        elif self.levels:
            raise DataError(f"{self.name}: numeric variable cannot declare levels")
        if len(set(self.special_codes)) != len(self.special_codes):
            raise DataError(f"{self.name}: duplicate special codes")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CAT


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable column store.  ``columns`` maps name to codes (cat) or values (num);
    ``marks`` holds the marker array for numeric columns only."""

    variables: tuple[Variable, ...]
    columns: Mapping[str, np.ndarray]
    marks: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise DataError("duplicate variable names")
        cols, marks = {}, {}
        n = None
        for v in self.variables:
            if v.name not in self.columns:
                raise DataError(f"missing column {v.name!r}")
            if v.kind == CAT:
                col = np.asarray(self.columns[v.name], dtype=np.int32).copy()
                if col.size and (col.min() < -1 or col.max() >= len(v.levels)):
                    raise DataError(f"{v.name}: level code out of range")
                if not v.allow_missing and (col < 0).any():
                    raise DataError(f"{v.name}: missing values not allowed")
            else:
                col = np.asarray(self.columns[v.name], dtype=np.float64).copy()
                mk = self.marks.get(v.name)
                mk = np.where(np.isnan(col), MARK_MISSING, MARK_VALUE) if mk is None else mk
                mk = np.asarray(mk, dtype=np.int8).copy()
                if mk.shape != col.shape:
                    raise DataError(f"{v.name}: marker array shape mismatch")
                if mk.size and (mk.min() < 0 or mk.max() >= MARK_CODE0 + len(v.special_codes)):
                    raise DataError(f"{v.name}: special-code marker out of range")
                if not v.allow_missing and (mk == MARK_MISSING).any():
                    raise DataError(f"{v.name}: missing values not allowed")
                col[mk != MARK_VALUE] = np.nan
                if np.isnan(col[mk == MARK_VALUE]).any():
                    raise DataError(f"{v.name}: NaN stored as an ordinary value")
                mk.setflags(write=False)
                marks[v.name] = mk
            if col.ndim != 1:
                raise DataError(f"{v.name}: column must be one-dimensional")
            if n is None:
                n = col.shape[0]
            elif col.shape[0] != n:
                raise DataError(f"{v.name}: column length {col.shape[0]} != {n}")
            col.setflags(write=False)
            cols[v.name] = col
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "marks", marks)

    @property
    def n(self) -> int:
        if not self.variables:
            return 0
        return int(self.columns[self.variables[0].name].shape[0])

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise DataError(f"unknown variable {name!r}")

    def select(self, names: Sequence[str]) -> "Dataset":
        vs = tuple(self.variable(nm) for nm in names)
        return Dataset(
            vs,
            {v.name: self.columns[v.name] for v in vs},
            {v.name: self.marks[v.name] for v in vs if v.kind == NUM},
        )

    def take(self, rows: np.ndarray) -> "Dataset":
        """Row subset (or resample) by integer index."""
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(
            self.variables,
            {nm: col[rows] for nm, col in self.columns.items()},
            {nm: mk[rows] for nm, mk in self.marks.items()},
        )

    def equals(self, other: "Dataset") -> bool:
        if self.variables != other.variables:
            return False
        for v in self.variables:
            a, b = self.columns[v.name], other.columns[v.name]
            if v.kind == CAT:
                if not np.array_equal(a, b):
                    return False
            else:
                if not np.array_equal(self.marks[v.name], other.marks[v.name]):
                    return False
                if not np.array_equal(a, b, equal_nan=True):
                    return False
        return True


@dataclass(frozen=True)
class BinningSpec:
    groups: int = 5
    style: str = "quantile"
    overrides: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.style != "quantile":
            raise DataError(f"unsupported binning style {self.style!r}")
        for g in (self.groups, *self.overrides.values()):
            if int(g) < 2:
                raise DataError("binning groups must be >= 2")

    def groups_for(self, name: str) -> int:
        return int(self.overrides.get(name, self.groups))


@dataclass(frozen=True, eq=False)
class DatasetPair:
    original: Dataset
    synthetic: Dataset

    def __post_init__(self):
        check_same_schema(self.original, self.synthetic)

    @property
    def n1(self) -> int:
        return self.original.n

    @property
    def n2(self) -> int:
        return self.synthetic.n

    @property
    def N(self) -> int:
        return self.n1 + self.n2

    @property
    def c(self) -> float:
        return self.n2 / self.N

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.original.variables

    def select(self, names: Sequence[str]) -> "DatasetPair":
        return DatasetPair(self.original.select(names), self.synthetic.select(names))


def check_same_schema(a: Dataset, b: Dataset) -> None:
    if a.variables == b.variables:
        return
    an, bn = a.names, b.names
    if an != bn:
        missing = sorted(set(an) ^ set(bn))
        detail = f"differing columns {missing}" if missing else "column order differs"
        raise DataError(f"schema mismatch: {detail}")
    for va, vb in zip(a.variables, b.variables):
        if va != vb:
            raise DataError(f"schema mismatch for variable {va.name!r}")


def pair(original: Dataset, synthetic: Dataset) -> DatasetPair:
    return DatasetPair(original, synthetic)


# ---------------------------------------------------------------------------
# Metadata sidecar
# ---------------------------------------------------------------------------

def _parse_bool(text: str, where: str) -> bool:
    t = text.strip().lower()
    if t in ("yes", "true", "1"):
        return True
    if t in ("no", "false", "0"):
        return False
    raise DataError(f"{where}: expected yes/no, got {text!r}")


def parse_meta(text: str) -> tuple[Variable, ...]:
    """Parse a metadata document.

    Blocks separated by blank lines, one variable per block, ``key: value``
    lines.  Keys: ``name``, ``kind`` (``cat``/``num``), ``levels``
    (comma-separated, cat only), ``na_codes`` (comma-separated numbers, num
    only), optional ``missing`` (yes/no, default yes).  ``#`` starts a comment.
    """
    blocks: list[list[tuple[int, str]]] = [[]]
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        blocks[-1].append((lineno, line))
    out = []
    for block in blocks:
        if not block:
            continue
        fields: dict[str, str] = {}
        for lineno, line in block:
            if ":" not in line:
                raise DataError(f"metadata line {lineno}: expected 'key: value'")
            key, val = (s.strip() for s in line.split(":", 1))
            if key not in ("name", "kind", "levels", "na_codes", "missing"):
                raise DataError(f"metadata line {lineno}: unknown key {key!r}")
            if key in fields:
                raise DataError(f"metadata line {lineno}: duplicate key {key!r}")
            fields[key] = val
        first = block[0][0]
        if "name" not in fields or "kind" not in fields:
            raise DataError(f"metadata block at line {first}: 'name' and 'kind' are required")
        levels = tuple(s.strip() for s in fields["levels"].split(",")) if fields.get("levels") else ()
        codes: tuple[float, ...] = ()
        if fields.get("na_codes"):
            try:
                codes = tuple(float(s) for s in fields["na_codes"].split(","))
            except ValueError:
                raise DataError(f"metadata block at line {first}: bad na_codes") from None
        allow = _parse_bool(fields["missing"], f"metadata block at line {first}") if "missing" in fields else True
        out.append(Variable(fields["name"], fields["kind"], levels, codes, allow))
    if not out:
        raise DataError("metadata declares no variables")
    return tuple(out)


def load_meta(path: str | Path) -> tuple[Variable, ...]:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"metadata file not found: {p}")
    return parse_meta(p.read_text(encoding="utf-8"))


def format_meta(variables: Iterable[Variable]) -> str:
    blocks = []
    for v in variables:
        lines = [f"name: {v.name}", f"kind: {v.kind}"]
        if v.levels:
            lines.append("levels: " + ", ".join(v.levels))
        if v.special_codes:
            lines.append("na_codes: " + ", ".join(_fmt_num(c) for c in v.special_codes))
        if not v.allow_missing:
            lines.append("missing: no")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt_num(x: float) -> str:
    if float(x).is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def load_csv(path: str | Path, meta: Sequence[Variable]) -> Dataset:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"data file not found: {p}")
    meta = tuple(meta)
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{p}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if header != [v.name for v in meta]:
            raise DataError(f"{p}: header {header} does not match metadata {[v.name for v in meta]}")
        rows = list(reader)
    return _parse_rows(rows, meta, str(p))


def _parse_rows(rows: list[list[str]], meta: tuple[Variable, ...], src: str) -> Dataset:
    n = len(rows)
    columns: dict[str, np.ndarray] = {}
    marks: dict[str, np.ndarray] = {}
    lookups = [{lv: i for i, lv in enumerate(v.levels)} for v in meta]
    for v in meta:
        if v.kind == CAT:
            columns[v.name] = np.full(n, -1, dtype=np.int32)
        else:
            columns[v.name] = np.full(n, np.nan)
            marks[v.name] = np.full(n, MARK_MISSING, dtype=np.int8)
    for r, row in enumerate(rows):
        line = r + 2
        if len(row) != len(meta):
            raise DataError(f"{src} row {line}: expected {len(meta)} fields, got {len(row)}")
        for j, (v, cell) in enumerate(zip(meta, row)):
            cell = cell.strip()
            if cell == "":
                if not v.allow_missing:
                    raise DataError(f"{src} row {line}, column {v.name!r}: missing value not allowed")
                continue
            if v.kind == CAT:
                code = lookups[j].get(cell)
                if code is None:
                    raise DataError(f"{src} row {line}, column {v.name!r}: undeclared label {cell!r}")
                columns[v.name][r] = code
            else:
                try:
                    x = float(cell)
                except ValueError:
                    raise DataError(f"{src} row {line}, column {v.name!r}: cannot parse number {cell!r}") from None
                if math.isnan(x):
                    continue
                if x in v.special_codes:
                    marks[v.name][r] = MARK_CODE0 + v.special_codes.index(x)
                else:
                    columns[v.name][r] = x
                    marks[v.name][r] = MARK_VALUE
    return Dataset(meta, columns, marks)


def write_csv(ds: Dataset, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.names)
        cols = []
        for v in ds.variables:
            col = ds.columns[v.name]
            if v.kind == CAT:
                cols.append(["" if c < 0 else v.levels[c] for c in col])
            else:
                mk = ds.marks[v.name]
                out = []
                for x, m in zip(col, mk):
                    if m == MARK_VALUE:
                        out.append(_fmt_num(x))
                    elif m == MARK_MISSING:
                        out.append("")
                    else:
                        out.append(_fmt_num(v.special_codes[m - MARK_CODE0]))
                cols.append(out)
        w.writerows(zip(*cols))


# ---------------------------------------------------------------------------
# Binning
# ---------------------------------------------------------------------------

def quantile_cuts(values: np.ndarray, groups: int) -> np.ndarray:
    """Nearest-rank cut points at i/groups; duplicates and cuts at the maximum dropped."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    ranks = [math.ceil(i * n / groups) - 1 for i in range(1, groups)]
    cuts = np.unique(x[ranks])
    return cuts[cuts < x[-1]]


def _bin_labels(cuts: np.ndarray, lo: float, hi: float) -> list[str]:
    edges = [lo, *cuts.tolist(), hi]
    for fmt in ("{:.6g}", "{!r}"):
        labels = []
        for i in range(len(edges) - 1):
            a, b = fmt.format(edges[i]), fmt.format(edges[i + 1])
            labels.append(f"[{a},{b}]" if i == 0 else f"({a},{b}]")
        if len(set(labels)) == len(labels):
            return labels
    return labels


def _binned_variable(v: Variable, ref_values: np.ndarray, groups: int):
    if ref_values.size == 0:
        raise DataError(f"{v.name}: no non-missing values to bin")
    cuts = quantile_cuts(ref_values, groups)
    if cuts.size == 0:
        warnings.warn(f"{v.name}: constant variable, binned into a single group", stacklevel=3)
    labels = _bin_labels(cuts, float(ref_values.min()), float(ref_values.max()))
    labels += [f"code:{_fmt_num(c)}" for c in v.special_codes]
    if v.allow_missing:
        labels.append(MISSING_LABEL)
    return Variable(v.name, CAT, tuple(labels), (), v.allow_missing), cuts


def _apply_cuts(v: Variable, values: np.ndarray, marks: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    nbins = cuts.size + 1
    codes = np.searchsorted(cuts, np.where(marks == MARK_VALUE, values, 0.0), side="left").astype(np.int32)
    is_code = marks >= MARK_CODE0
    codes[is_code] = nbins + (marks[is_code] - MARK_CODE0)
    codes[marks == MARK_MISSING] = nbins + len(v.special_codes)
    return codes


def bin_numeric(ds: Dataset, spec: BinningSpec | None = None, reference: Dataset | None = None) -> Dataset:
    """Turn every numeric variable into quantile-binned categories.

    Cut points come from ``reference`` (defaults to ``ds`` itself), so an
    original/synthetic pair binned against the original shares its partition.
    Special codes and missing values become their own trailing categories.
    """
    spec = spec or BinningSpec()
    reference = ds if reference is None else reference
    check_same_schema(ds, reference)
    variables, columns = [], {}
    for v in ds.variables:
        if v.kind == CAT:
            variables.append(v)
            columns[v.name] = ds.columns[v.name]
            continue
        ref_mk = reference.marks[v.name]
        ref_vals = reference.columns[v.name][ref_mk == MARK_VALUE]
        bv, cuts = _binned_variable(v, ref_vals, spec.groups_for(v.name))
        variables.append(bv)
        columns[v.name] = _apply_cuts(v, ds.columns[v.name], ds.marks[v.name], cuts)
    return Dataset(tuple(variables), columns)


def bin_pair(p: DatasetPair, spec: BinningSpec | None = None) -> DatasetPair:
    if not any(v.kind == NUM for v in p.variables):
        return p
    orig = bin_numeric(p.original, spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        syn = bin_numeric(p.synthetic, spec, reference=p.original)
    return DatasetPair(orig, syn)


def from_codes(variables: Sequence[Variable], codes: Mapping[str, Sequence[int]]) -> Dataset:
    """Convenience constructor for all-categorical datasets."""
    return Dataset(tuple(variables), {k: np.asarray(c) for k, c in codes.items()})
