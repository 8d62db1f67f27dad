"""Deterministic CSV and JSON writers.

Floats are rendered with ``repr`` (shortest round-trip form), so identical
inputs produce byte-identical files across runs.  CSV quoting follows
RFC 4180; JSON keys are emitted in sorted order.
"""

from __future__ import annotations

import csv
import io
import json
import math


def _fmt(v):
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()                      # numpy scalar -> python scalar
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return v


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode("utf-8")


def write_csv(path, header, rows) -> None:
    with open(path, "wb") as fh:
        fh.write(csv_bytes(header, rows))


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        try:
            return _sanitize(obj.item())
        except (AttributeError, ValueError):
            pass
    if hasattr(obj, "tolist"):
        return _sanitize(obj.tolist())
    return obj


def json_bytes(obj) -> bytes:
    return (json.dumps(_sanitize(obj), indent=2, sort_keys=True) + "\n").encode("utf-8")


def write_json(path, obj) -> None:
    with open(path, "wb") as fh:
        fh.write(json_bytes(obj))
