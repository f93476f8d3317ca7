"""Reading sequences, PMFs and tables; atomic output writes."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Alphabet, SymbolSequence
from .errors import ValidationError


def read_sequence(path, labels: str | None = None, size: int | None = None) -> SymbolSequence:
    """Read a symbol sequence.

    With ``labels`` (e.g. ``"01"`` or ``"ACGT"``) every non-whitespace
    character is one symbol. Otherwise the file holds whitespace- or
    comma-separated integers.
    """
    text = Path(path).read_text()
    if labels:
        alpha = Alphabet(len(labels), tuple(labels))
        chars = [c for c in text if not c.isspace()]
        try:
            idx = [labels.index(c) for c in chars]
        except ValueError as e:
            raise ValidationError(f"symbol outside alphabet {labels!r}") from e
        return SymbolSequence(alpha, np.array(idx, dtype=np.int64))
    tokens = text.replace(",", " ").split()
    try:
        vals = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError as e:
        raise ValidationError("sequence file must contain integers or use an alphabet") from e
    if size is None:
        size = max(int(vals.max()) + 1 if vals.size else 1, 2)
    return SymbolSequence.from_list(vals, size)


def read_array(path) -> np.ndarray:
    """Matrix or vector from JSON (plain list or ``{"matrix": ...}``) or CSV/whitespace text."""
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".json":
        obj = json.loads(text)
        if isinstance(obj, dict):
            for key in ("matrix", "pmf", "table", "data"):
                if key in obj:
                    obj = obj[key]
                    break
        return np.asarray(obj, dtype=float)
    rows = [r for r in text.splitlines() if r.strip() and not r.lstrip().startswith("#")]
    data = [[float(x) for x in r.replace(",", " ").split()] for r in rows]
    if len(data) == 1:
        return np.asarray(data[0])
    return np.asarray(data)


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_atomic(path, text: str):
    """Write ``text`` so that ``path`` either keeps its old content or gets all of it."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
