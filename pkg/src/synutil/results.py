"""Utility result containers and their JSON form."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

MEASURES = ("pMSE", "VW", "FT", "JSD", "G", "dBhatt", "SPECKS", "MabsDD", "PO50", "WMabsDD", "U")
SCORE_MEASURES = ("pMSE", "SPECKS", "PO50", "U")

ADVISORY_LIMIT = 10.0


class MeasureError(ValueError):
    """Unknown measure or an unsupported measure/method combination."""


def resolve_measures(measures, allowed=MEASURES) -> tuple[str, ...]:
    """Normalise a measure request into canonical order; ``None``/``"all"`` selects everything."""
    if measures is None or measures == "all":
        return tuple(allowed)
    if isinstance(measures, str):
        measures = [m.strip() for m in measures.split(",") if m.strip()]
    wanted = set()
    for m in measures:
        if m == "all":
            return tuple(allowed)
        name = m[2:] if m.startswith("S_") else m
        if name not in allowed:
            raise MeasureError(f"unknown or unsupported measure {m!r}")
        wanted.add(name)
    if not wanted:
        raise MeasureError("empty measure set")
    return tuple(m for m in allowed if m in wanted)


@dataclass
class MeasureValue:
    raw: float
    null_expectation: float | None = None
    null_method: str | None = None

    @property
    def standardized(self) -> float | None:
        if self.null_expectation is None or self.null_expectation <= 0:
            return None
        return self.raw / self.null_expectation

    def to_dict(self) -> dict[str, Any]:
        return {
            "raw": _clean(self.raw),
            "null_expectation": _clean(self.null_expectation),
            "standardized": _clean(self.standardized),
        }


@dataclass
class UtilityResult:
    measures: dict[str, MeasureValue]
    vars: tuple[str, ...] = ()
    df: int | None = None
    k: int | None = None
    dfG: int | None = None
    model: dict[str, Any] | None = None
    null: dict[str, Any] | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def raw(self, name: str) -> float:
        return self.measures[name].raw

    def S(self, name: str) -> float | None:
        return self.measures[name].standardized

    def value(self, key: str) -> float | None:
        """``"pMSE"`` for the raw value, ``"S_pMSE"`` for the standardized ratio."""
        if key == "df":
            return None if self.df is None else float(self.df)
        if key.startswith("S_"):
            return self.S(key[2:])
        return self.raw(key)

    def advisories(self) -> list[str]:
        out = []
        for name, mv in self.measures.items():
            s = mv.standardized
            if s is not None and s >= ADVISORY_LIMIT:
                out.append(f"S_{name} = {s:.2f} is not below {ADVISORY_LIMIT:g}")
        return out

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "vars": list(self.vars),
            "measures": {k: v.to_dict() for k, v in self.measures.items()},
            "df": self.df,
            "k": self.k,
            "dfG": self.dfG,
        }
        if self.model is not None:
            d["model"] = self.model
        if self.null is not None:
            d["null"] = self.null
        adv = self.advisories()
        if adv:
            d["advisory"] = adv
        d.update(self.extra)
        return d


def _clean(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) or math.isinf(x) else x
