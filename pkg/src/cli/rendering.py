"""
Report rendering.

JSON output writes every float with 17 significant digits and keeps key
order as built, so identical runs give byte-identical reports.
"""
import json
import math
from typing import Any, List

from .models import RunReport

INDENT = "  "


def format_float(value: float) -> str:
    if not math.isfinite(value):
        return "null"
    return f"{value:.16e}"


def _encode(value: Any, depth: int) -> str:
    pad = INDENT * (depth + 1)
    close = INDENT * depth
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, complex):
        return _encode([value.real, value.imag], depth)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, depth + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(isinstance(v, (str, int, float, bool)) or v is None for v in value):
            return "[" + ", ".join(_encode(v, depth) for v in value) + "]"
        items = [pad + _encode(v, depth + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if hasattr(value, "item"):
        # numpy scalars
        return _encode(value.item(), depth)
    raise TypeError(f"cannot render {type(value).__name__} in a report")


def render_json(report: RunReport) -> str:
    return _encode(report.to_dict(), 0) + "\n"


def _text_lines(value: Any, depth: int, lines: List[str], prefix: str) -> None:
    pad = INDENT * depth
    if isinstance(value, dict):
        if prefix:
            lines.append(f"{pad}{prefix}:")
            depth += 1
        for key, item in value.items():
            _text_lines(item, depth, lines, str(key))
        return
    if isinstance(value, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in value):
        lines.append(f"{pad}{prefix}:")
        for item in value:
            if isinstance(item, dict):
                _text_lines(item, depth + 1, lines, "-")
            else:
                lines.append(f"{pad}{INDENT}- {_scalar_text(item)}")
        return
    lines.append(f"{pad}{prefix}: {_scalar_text(value)}")


def _scalar_text(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        if value and all(isinstance(v, str) for v in value):
            return "{" + ",".join(value) + "}"
        return "[" + ", ".join(_scalar_text(v) for v in value) + "]"
    return str(value)


def render_text(report: RunReport) -> str:
    """Indented key/value view for reading at a terminal; events print as {a,b}."""
    lines: List[str] = []
    _text_lines(report.to_dict(), 0, lines, "")
    return "\n".join(lines) + "\n"


def render(report: RunReport, fmt: str) -> str:
    if fmt == "text":
        return render_text(report)
    return render_json(report)
