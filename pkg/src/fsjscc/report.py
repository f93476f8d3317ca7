"""Bound reports shared by the bound evaluators and the command line."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

ASYMPTOTIC_FLAG = "asymptotic-terms-dropped"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return x


@dataclass
class BoundReport:
    """A bound value with the terms it was assembled from.

    ``kind`` selects how :meth:`recompute` rebuilds ``value`` from ``terms``:

    * ``"distortion"``: ``max(terms["distortion"] - terms["delay_penalty"], 0)``
    * ``"probability"``: ``terms["prefactor"] * 2 ** (-terms["blocklength"] * terms["exponent"])``
    * ``"exponent"``: ``terms["exponent"]``
    """

    value: float
    kind: str
    terms: dict = field(default_factory=dict)
    vacuous: bool = False
    flags: list = field(default_factory=list)

    def recompute(self) -> float:
        t = self.terms
        if self.kind == "distortion":
            return max(t["distortion"] - t["delay_penalty"], 0.0)
        if self.kind == "probability":
            e = t["exponent"]
            if math.isinf(e):
                return 0.0
            return t["prefactor"] * 2.0 ** (-t["blocklength"] * e)
        if self.kind == "exponent":
            return t["exponent"]
        raise ValueError(f"unknown report kind {self.kind!r}")

    def to_dict(self) -> dict:
        return _plain(
            {
                "value": self.value,
                "kind": self.kind,
                "vacuous": self.vacuous,
                "flags": list(self.flags),
                "terms": self.terms,
            }
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def __float__(self):
        return float(self.value)
