"""Serialisation helpers: 17-digit JSON/CSV, SFT files, and a tiny SVG plot."""
from __future__ import annotations

import io as _io
import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidSft
from .sft import Sft

NAMED_SFTS = {
    "golden-mean": lambda: Sft.golden_mean(),
    "full2": lambda: Sft.full_shift(2),
    "full3": lambda: Sft.full_shift(3),
}


def fmt_float(x: float) -> str:
    """Shortest round-trip-safe text for ``x`` at 17 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, Enum):
        obj = obj.value
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else json.dumps(fmt_float(x))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float printed to 17 significant digits.

    Non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``.
    """
    return _encode(obj, indent, 0) + "\n"


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (bool, np.bool_)):
                cells.append("true" if v else "false")
            elif isinstance(v, (float, np.floating)):
                cells.append(fmt_float(v))
            elif v is None:
                cells.append("")
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def load_sft(source: str) -> Sft:
    """Load an SFT from a JSON file path or one of the names in NAMED_SFTS."""
    if source in NAMED_SFTS:
        return NAMED_SFTS[source]()
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidSft(f"cannot read SFT file {source!r}: {exc.strerror}") from None
    return Sft.from_json(text)


def save_sft(sft: Sft, path) -> None:
    Path(path).write_text(json.dumps(sft.to_dict()) + "\n")


def svg_curve(xs, ys, xlabel: str, ylabel: str, title: str = "", width: int = 480, height: int = 320) -> str:
    """A single polyline with axes and min/max tick labels."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    left, right, top, bottom = 60, 20, 30, 40
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(min(ys.min(), 0.0)), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    px = left + (xs - x0) / (x1 - x0) * (width - left - right)
    py = height - bottom - (ys - y0) / (y1 - y0) * (height - top - bottom)
    points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    ax_y = height - bottom
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-size="13">{title}</text>\n'
        f'<line x1="{left}" y1="{ax_y}" x2="{width - right}" y2="{ax_y}" stroke="black"/>\n'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{ax_y}" stroke="black"/>\n'
        f'<polyline points="{points}" fill="none" stroke="steelblue" stroke-width="2"/>\n'
        f'<text x="{left}" y="{ax_y + 15}" font-size="10">{x0:.3g}</text>\n'
        f'<text x="{width - right}" y="{ax_y + 15}" font-size="10" text-anchor="end">{x1:.3g}</text>\n'
        f'<text x="{left - 5}" y="{ax_y}" font-size="10" text-anchor="end">{y0:.3g}</text>\n'
        f'<text x="{left - 5}" y="{top + 5}" font-size="10" text-anchor="end">{y1:.3g}</text>\n'
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="11">{xlabel}</text>\n'
        f'<text x="14" y="{height / 2:.0f}" font-size="11" transform="rotate(-90 14 {height / 2:.0f})" '
        f'text-anchor="middle">{ylabel}</text>\n'
        "</svg>\n"
    )
