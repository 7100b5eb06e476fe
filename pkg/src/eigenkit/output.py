"""Lossless CSV/JSON result files, written atomically, and their readers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Any, Iterable, Sequence

__all__ = ["format_float", "read_csv", "read_json", "render_csv", "render_json", "write_text"]


def format_float(x: float) -> str:
    """17 significant digits, which round-trips every double exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _encode(obj: Any, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot write non-finite value {obj} to JSON")
        text = format_float(obj)
        # keep floats recognizable as floats when they happen to be integral
        return text if any(ch in text for ch in ".e") else text + ".0"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_json(obj: Any) -> str:
    """Indented JSON with sorted keys and 17-significant-digit floats."""
    return _encode(obj, 0) + "\n"


def write_text(path: str | None, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; stdout when ``path`` is None."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".eigenkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path: str) -> tuple[list[str], list[list[float]]]:
    """Header and numeric rows of a CSV file produced by :func:`render_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[float(v) for v in row] for row in reader]


def read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
