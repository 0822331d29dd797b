"""JSON packing files and the convergence CSV.

File layout (``format_version`` 1)::

    {"format_version": 1, "chart": "s3",
     "balls": [{"center": [w, x, y, z], "radius_rad": r}, ...],
     "labels": ["L0", ...]}

``r3`` files use ``"radius"`` instead of ``"radius_rad"`` and 3-vector
centers. Numbers are written with 17 significant digits so doubles
round-trip exactly. Angles inside files are always radians.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .construction import LIMIT_K, LayerTally, layer_tallies
from .errors import InvalidInputError, PackingFileError, UnsupportedChartError
from .packing import CHARTS, Packing

FORMAT_VERSION = 1
_RADIUS_KEY = {"s3": "radius_rad", "r3": "radius"}
_DIM = {"s3": 4, "r3": 3}


def _num(x: float) -> str:
    return "%.17g" % x


def dumps_packing(P: Packing) -> str:
    key = _RADIUS_KEY[P.chart]
    lines = ["{", f'  "format_version": {FORMAT_VERSION},', f'  "chart": "{P.chart}",', '  "balls": [']
    rows = [
        f'    {{"center": [{", ".join(_num(v) for v in c)}], "{key}": {_num(r)}}}'
        for c, r in zip(P.centers.tolist(), P.radii.tolist())
    ]
    lines.append(",\n".join(rows))
    if P.labels is None:
        lines.append("  ]")
    else:
        lines.append("  ],")
        lines.append(f'  "labels": {json.dumps(list(P.labels))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_packing(P: Packing, path) -> None:
    Path(path).write_text(dumps_packing(P))


def loads_packing(text: str) -> Packing:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PackingFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PackingFileError("top level must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise PackingFileError(f"format_version: expected {FORMAT_VERSION}, got {version!r}")
    chart = doc.get("chart")
    if chart not in CHARTS:
        raise UnsupportedChartError(f"chart: unsupported value {chart!r}")
    balls = doc.get("balls")
    if not isinstance(balls, list):
        raise PackingFileError("balls: expected a list")
    key, dim = _RADIUS_KEY[chart], _DIM[chart]
    centers = np.empty((len(balls), dim))
    radii = np.empty(len(balls))
    for i, rec in enumerate(balls):
        if not isinstance(rec, dict):
            raise PackingFileError(f"balls[{i}]: expected an object")
        c = rec.get("center")
        if not (isinstance(c, list) and len(c) == dim and all(_is_number(v) for v in c)):
            raise PackingFileError(f"balls[{i}].center: expected {dim} numbers")
        r = rec.get(key)
        if not _is_number(r):
            raise PackingFileError(f"balls[{i}].{key}: expected a number")
        centers[i] = c
        radii[i] = r
    labels = doc.get("labels")
    if labels is not None and not (isinstance(labels, list) and all(isinstance(s, str) for s in labels)):
        raise PackingFileError("labels: expected a list of strings")
    try:
        return Packing(chart, centers, radii, None if labels is None else tuple(labels))
    except InvalidInputError as exc:
        raise InvalidInputError(f"invariant violation: {exc}") from exc


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def load_packing(path) -> Packing:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PackingFileError(f"{path}: {exc.strerror}") from exc
    return loads_packing(text)


# ---------------------------------------------------------------- convergence report

CSV_HEADER = "n,balls,tangencies,k,gap"


def _decimal(q: Fraction, places: int = 10) -> str:
    # exact rational rounding (half-even), independent of float formatting
    scaled = q * 10**places
    n = scaled.numerator // scaled.denominator
    rem = scaled - n
    if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and n % 2):
        n += 1
    sign = "-" if n < 0 else ""
    digits = str(abs(n)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def convergence_rows(max_n: int) -> list[tuple[LayerTally, Fraction]]:
    return [(t, LIMIT_K - t.k) for t in layer_tallies(max_n)]


def report_convergence(max_n: int) -> str:
    """CSV of ``k(P_n)`` and its gap to the limit for ``n = 0 .. max_n``."""
    lines = [CSV_HEADER]
    for t, gap in convergence_rows(max_n):
        lines.append(f"{t.n},{t.ball_count},{t.tangency_count},{_decimal(t.k)},{_decimal(gap)}")
    return "\n".join(lines) + "\n"
