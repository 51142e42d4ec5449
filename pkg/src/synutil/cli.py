"""``synutil`` command line: tab, gen, compare, tables, power."""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .data import BinningSpec, DataError, Dataset, DatasetPair, bin_numeric, bin_pair, load_csv, load_meta
from .harness import calibration_sim, format_calibration_table, format_power_table, power_sim, resampling_sim, synth_sample
from .heatmap import render_heatmap, render_threeway
from .nullcal import PAIRS_ONLY, apply_null, null_pairs, null_permutation
from .parallel import derived_seed
from .propensity import ModelSpec, ResamplingRequired, fit_model, score_utility
from .results import MEASURES, SCORE_MEASURES, MeasureError, UtilityResult, resolve_measures
from .sweep import pick_fixed_var, ranked, sweep, worst_n
from .tabular import crosstab, tab_utility

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
ARITY = {"oneway": 1, "twoway": 2, "threeway": 3}


class NumericalFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, syn: bool = True) -> None:
    p.add_argument("--orig", required=True, help="original data CSV")
    if syn:
        p.add_argument("--syn", action="append", required=True, help="synthetic data CSV (repeatable)")
    p.add_argument("--meta", required=True, help="variable metadata file")
    p.add_argument("--vars", help="comma-separated variable subset")
    p.add_argument("--stats", help="measures to report: comma list or 'all' (default pMSE)")
    p.add_argument("--groups", type=int, default=5, help="quantile groups for numeric variables")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-json", help="write the JSON report here ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="synutil", description="Utility measures for synthetic data.")
    ap.add_argument("--version", action="version", version=f"synutil {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tab", help="utility of one cross-tabulation")
    _common(p)

    p = sub.add_parser("gen", help="propensity-score utility of the whole dataset")
    _common(p)
    p.add_argument("--model", default="cart", help="logit:N (interaction order N), logit (saturated) or cart")
    p.add_argument("--resamp", choices=("none", "perm", "pairs"), default="none")
    p.add_argument("--B", type=int, default=50, help="permutation replicates")
    p.add_argument("--keep-replicates", action="store_true")

    p = sub.add_parser("compare", help="one-way utility for every variable")
    _common(p)

    p = sub.add_parser("tables", help="utility of all two- or three-way tables")
    _common(p)
    p.add_argument("--tables", choices=tuple(ARITY), default="twoway")
    p.add_argument("--nworst", type=int, default=4)
    p.add_argument("--out-svg", help="heatmap output path")
    p.add_argument("--max-scale", type=float)
    p.add_argument("--fixed", help="fixed variable for three-way heatmaps")

    p = sub.add_parser("power", help="Monte-Carlo power and null calibration with toy synthesizers")
    _common(p, syn=False)
    p.add_argument("--nvars", default="2..4", help="range a..b, list a,b,c, or a single count")
    p.add_argument("--m", type=int, default=200, help="replicates per setting")
    p.add_argument("--model", default="cart", help="model for the resampling columns")
    p.add_argument("--resamp", choices=("none", "perm", "pairs"), default="none",
                   help="add resampled S_pMSE columns")
    p.add_argument("--B", type=int, default=50)
    return ap


def parse_nvars(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(x) for x in text.split(",")]
    except ValueError:
        raise DataError(f"bad --nvars {text!r}") from None
    if not out:
        raise DataError(f"empty --nvars range {text!r}")
    return out


def _split(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [x.strip() for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _load(args) -> tuple[Dataset, list[Dataset]]:
    meta = load_meta(args.meta)
    orig = load_csv(args.orig, meta)
    syns = [load_csv(s, meta) for s in getattr(args, "syn", None) or []]
    return orig, syns


def _subset(ds: Dataset, names: list[str] | None) -> Dataset:
    if names is None:
        return ds
    if len(set(names)) != len(names):
        raise DataError("duplicate variable in --vars")
    return ds.select(names)


def _printed(stats: str | None) -> list[str]:
    return ["pMSE"] if stats is None else list(resolve_measures(stats))


def _fmt(x: float | None) -> str:
    return "NA" if x is None else f"{x:.6g}"


def _measure_lines(r: UtilityResult, names: Sequence[str]) -> list[str]:
    lines = []
    for m in names:
        if m not in r.measures:
            continue
        lines.append(f"  {m:<8} {_fmt(r.raw(m)):>12}   S_{m} {_fmt(r.S(m)):>10}")
    lines.extend(f"  advisory: {a}" for a in _advisories(r, names))
    return lines


def _advisories(r: UtilityResult, names: Sequence[str]) -> list[str]:
    return [a for a in r.advisories() if a.split(" ", 1)[0][2:] in names]


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return None if not math.isfinite(float(o)) else float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _finite(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


def dump_json(report: dict[str, Any]) -> str:
    return json.dumps(_finite(report), indent=2, default=_json_default, allow_nan=False) + "\n"


def _emit(args, report: dict[str, Any], out) -> None:
    if not args.out_json:
        return
    text = dump_json(report)
    if args.out_json == "-":
        out.write(text)
    else:
        Path(args.out_json).write_text(text)


def _check_converged(results: Sequence[UtilityResult]) -> None:
    for r in results:
        if r.model and r.model.get("kind") == "logistic" and not r.model.get("converged", True):
            raise NumericalFailure(f"logistic fit did not converge ({r.model.get('iterations')} iterations)")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_tab(args, out) -> dict[str, Any]:
    orig, syns = _load(args)
    if len(syns) != 1:
        raise DataError("tab takes exactly one --syn")
    names = _split(args.vars)
    if not names:
        raise DataError("tab needs --vars")
    if len(set(names)) != len(names):
        raise DataError("duplicate variable in --vars")
    p = bin_pair(DatasetPair(orig.select(names), syns[0].select(names)), BinningSpec(args.groups))
    measures = resolve_measures(args.stats) if args.stats else MEASURES
    r = tab_utility(crosstab(p, names), measures)
    out.write(f"Utility of table {':'.join(names)} (k={r.k}, dfG={r.dfG}, df={r.df})\n")
    out.write("\n".join(_measure_lines(r, _printed(args.stats))) + "\n")
    return {"command": "tab", "groups": args.groups, "result": r.to_dict()}


def cmd_gen(args, out) -> dict[str, Any]:
    orig, syns = _load(args)
    names = _split(args.vars)
    orig = _subset(orig, names)
    syns = [_subset(s, names) for s in syns]
    model = ModelSpec.parse(args.model)
    measures = resolve_measures(args.stats, SCORE_MEASURES) if args.stats else SCORE_MEASURES
    if args.resamp == "perm":
        bad = [m for m in measures if m in PAIRS_ONLY]
        if args.stats and bad:
            raise MeasureError(f"permutation null is invalid for {', '.join(bad)}; use --resamp pairs")
    if args.resamp == "pairs" and len(syns) < 2:
        raise DataError("--resamp pairs needs at least two --syn files")
    if args.B < 1:
        raise DataError("--B must be >= 1")

    results = []
    for s in syns:
        scores = fit_model(DatasetPair(orig, s), model)
        results.append(score_utility(scores, measures))
    _check_converged(results)
    if args.resamp == "perm":
        perm_meas = tuple(m for m in measures if m not in PAIRS_ONLY)
        for i, s in enumerate(syns):
            nulls = null_permutation(DatasetPair(orig, s), model, perm_meas, args.B, seed=derived_seed(args.seed, i))
            apply_null(results[i], nulls, args.keep_replicates)
    elif args.resamp == "pairs":
        nulls = null_pairs(syns, model, measures, seed=args.seed, schema=orig)
        for r in results:
            apply_null(r, nulls, args.keep_replicates)

    out.write(f"Propensity utility, model {model.label()}, null {args.resamp}\n")
    for i, r in enumerate(results):
        out.write(f"synthesis {i + 1}:\n" + "\n".join(_measure_lines(r, _printed(args.stats))) + "\n")
    report: dict[str, Any] = {
        "command": "gen",
        "model": model.label(),
        "resamp": args.resamp,
        "seed": args.seed,
        "results": [r.to_dict() for r in results],
    }
    if args.resamp == "perm":
        report["B"] = args.B
    if len(results) > 1:
        report["mean"] = {
            key: float(np.mean([r.value(key) for r in results]))
            for m in measures for key in (m, f"S_{m}")
            if all(r.value(key) is not None for r in results)
        }
    return report


def cmd_compare(args, out) -> dict[str, Any]:
    orig, syns = _load(args)
    if len(syns) != 1:
        raise DataError("compare takes exactly one --syn")
    measures = resolve_measures(args.stats) if args.stats else MEASURES
    res = sweep(DatasetPair(orig, syns[0]), 1, measures, BinningSpec(args.groups), vars=_split(args.vars))
    shown = _printed(args.stats)
    head = "".join(f"{('S_' + m):>12}" for m in shown)
    out.write(f"Selected utility measures\n{'variable':<16}{head}{'df':>6}\n")
    for combo, r in res.entries.items():
        cells = "".join(f"{_fmt(r.S(m)):>12}" for m in shown)
        out.write(f"{combo[0]:<16}{cells}{r.df:>6d}\n")
    for combo, r in res.entries.items():
        for a in _advisories(r, shown):
            out.write(f"advisory: {combo[0]}: {a}\n")
    return {"command": "compare", "groups": args.groups, **res.to_dict()}


def cmd_tables(args, out) -> dict[str, Any]:
    orig, syns = _load(args)
    if len(syns) != 1:
        raise DataError("tables takes exactly one --syn")
    if args.nworst < 1:
        raise DataError("--nworst must be >= 1")
    if args.max_scale is not None and not args.max_scale > 0:
        raise DataError("--max-scale must be positive")
    arity = ARITY[args.tables]
    measures = resolve_measures(args.stats) if args.stats else MEASURES
    res = sweep(DatasetPair(orig, syns[0]), arity, measures, BinningSpec(args.groups), vars=_split(args.vars))
    if arity == 3:
        fixed = args.fixed if args.fixed is not None else pick_fixed_var(res)
        if fixed not in res.variables:
            raise DataError(f"--fixed {fixed!r} is not a sweep variable")
        res.fixed_var = fixed
    elif args.fixed is not None:
        raise DataError("--fixed only applies to --tables threeway")

    worst = worst_n(res, args.nworst)
    out.write(f"Utility of {len(res.entries)} {args.tables} tables\n")
    out.write(f"Variable combinations with worst {len(worst)} utility scores (S_pMSE):\n")
    for combo, v in worst:
        out.write(f"  {':'.join(combo):<40}{_fmt(v):>12}\n")
    out.write("Median and maximum of selected utility measures for all tables compared\n")
    for m in _printed(args.stats):
        for key in (m, f"S_{m}"):
            if key in res.summary:
                s = res.summary[key]
                out.write(f"  {key:<12} median {_fmt(s['median']):>12}   max {_fmt(s['max']):>12}\n")
    n_adv = sum(1 for r in res.entries.values() if _advisories(r, _printed(args.stats)))
    if n_adv:
        out.write(f"advisory: {n_adv} table(s) have a standardized ratio of 10 or more\n")

    if args.out_svg:
        if arity == 2:
            svg = render_heatmap(res, args.max_scale, "Two-way utility (S_pMSE)")
        elif arity == 3:
            svg = render_threeway(res, res.fixed_var, args.max_scale)
        else:
            raise DataError("heatmaps need --tables twoway or threeway")
        Path(args.out_svg).write_text(svg)
    report = {"command": "tables", "groups": args.groups, **res.to_dict()}
    report["worst"] = [{"vars": list(c), "S_pMSE": v} for c, v in worst]
    return report


def cmd_power(args, out) -> dict[str, Any]:
    orig, _ = _load(args)
    ds = bin_numeric(_subset(orig, _split(args.vars)), BinningSpec(args.groups))
    nvars = parse_nvars(args.nvars)
    if min(nvars) < 1 or max(nvars) > len(ds.variables):
        raise DataError(f"--nvars must lie in 1..{len(ds.variables)}")
    if args.m < 1:
        raise DataError("--m must be >= 1")
    bad = synth_sample(ds, args.m, args.seed)
    reports, calib = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for nv in nvars:
            reports.append(power_sim(ds, nv, args.m, MEASURES, seed=args.seed, bad=bad))
            row = calibration_sim(ds, nv, args.m, seed=args.seed)
            if args.resamp != "none":
                model = ModelSpec.parse(args.model)
                rs = resampling_sim(
                    ds, nv, seed=args.seed, B=args.B, model=model,
                    n_perm=args.m if args.resamp == "perm" else 0,
                    m_pairs=min(args.m, 16) if args.resamp == "pairs" else 0,
                )
                row.update(rs)
            calib.append((nv, row))
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    out.write(f"Empirical power (m={args.m})\n{format_power_table(reports)}\n\n")
    out.write(f"Average standardized measures, correct syntheses (m={args.m})\n{format_calibration_table(calib)}\n")
    return {
        "command": "power",
        "m": args.m,
        "seed": args.seed,
        "groups": args.groups,
        "power": [r.to_dict() for r in reports],
        "calibration": [{"nvars": nv, **row} for nv, row in calib],
    }


COMMANDS = {"tab": cmd_tab, "gen": cmd_gen, "compare": cmd_compare, "tables": cmd_tables, "power": cmd_power}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        report = COMMANDS[args.command](args, out)
        _emit(args, report, out)
    except NumericalFailure as e:
        sys.stderr.write(f"synutil: numerical failure: {e}\n")
        return EXIT_NUMERIC
    except (DataError, MeasureError, ResamplingRequired, OSError) as e:
        sys.stderr.write(f"synutil: error: {e}\n")
        return EXIT_USAGE
    except ValueError as e:
        sys.stderr.write(f"synutil: error: {e}\n")
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
