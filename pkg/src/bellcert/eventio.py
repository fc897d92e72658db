"""Event-file reading and writing.

Two line-oriented formats are accepted:

* delimited text: `index,herald,a,b,x,y[,timestamp_ns]` with herald and the
  outcomes written as +1/-1 and the settings as 0/1 (comma or whitespace
  separated; lines starting with '#' are comments), and
* JSON lines: one object per line with the same field names.

Malformed input raises `DataFormatError` naming the line and field.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .events import RunDataset, SettingAngles, DEFAULT_ANGLES

FIELDS = ("index", "herald", "a", "b", "x", "y")


def _parse_int(token: str, line_no: int, fld: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DataFormatError(f"expected an integer, got {token!r}",
                              line=line_no, field=fld) from None


def _check(value: int, allowed: tuple, line_no: int, fld: str) -> int:
    if value not in allowed:
        choices = " or ".join(str(v) for v in allowed)
        raise DataFormatError(f"must be {choices}, got {value}", line=line_no, field=fld)
    return value


def _parse_delimited_line(line: str, line_no: int) -> tuple:
    tokens = [t for t in line.replace(",", " ").split() if t]
    if len(tokens) not in (6, 7):
        raise DataFormatError(
            f"expected 6 or 7 fields, got {len(tokens)}", line=line_no)
    vals = [_parse_int(t, line_no, f) for t, f in zip(tokens, FIELDS)]
    ts = _parse_int(tokens[6], line_no, "timestamp_ns") if len(tokens) == 7 else None
    return (*vals, ts)


def _parse_json_line(line: str, line_no: int) -> tuple:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc}", line=line_no) from None
    if not isinstance(obj, dict):
        raise DataFormatError("expected a JSON object", line=line_no)
    vals = []
    for fld in FIELDS:
        if fld not in obj:
            raise DataFormatError("missing field", line=line_no, field=fld)
        vals.append(_parse_int(str(obj[fld]), line_no, fld))
    ts = obj.get("timestamp_ns")
    return (*vals, None if ts is None else _parse_int(str(ts), line_no, "timestamp_ns"))


def read_events(path, *, angles: SettingAngles = DEFAULT_ANGLES,
                tau: float | None = None, label: str = "") -> RunDataset:
    """Parse an event file (either format, detected per line)."""
    rows = []
    any_ts = False
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("{"):
                row = _parse_json_line(line, line_no)
            else:
                row = _parse_delimited_line(line, line_no)
            index, herald, a, b, x, y, ts = row
            _check(herald, (1, -1), line_no, "herald")
            _check(a, (0, 1), line_no, "a")
            _check(b, (0, 1), line_no, "b")
            _check(x, (1, -1), line_no, "x")
            _check(y, (1, -1), line_no, "y")
            if index < 1:
                raise DataFormatError("must be >= 1", line=line_no, field="index")
            any_ts = any_ts or ts is not None
            rows.append((herald, a, b, x, y, ts))
    if not rows:
        raise DataFormatError(f"no event records in {path}")
    cols = list(zip(*rows))
    return RunDataset(
        np.array(cols[0], dtype=np.int8),
        np.array(cols[1], dtype=np.uint8),
        np.array(cols[2], dtype=np.uint8),
        np.array(cols[3], dtype=np.int8),
        np.array(cols[4], dtype=np.int8),
        timestamps_ns=np.array([t or 0 for t in cols[5]], dtype=np.int64) if any_ts else None,
        angles=angles, tau=tau, label=label or Path(path).stem,
    )


def write_events(dataset: RunDataset, path, *, fmt: str = "delimited",
                 header: str | None = None) -> None:
    """Write a dataset in either wire format (path or open text stream)."""
    if fmt not in ("delimited", "jsonl"):
        raise DataFormatError(f"unknown event format {fmt!r}")
    if hasattr(path, "write"):
        _write_events_to(dataset, path, fmt, header)
        return
    with open(path, "w") as fh:
        _write_events_to(dataset, fh, fmt, header)


def _write_events_to(dataset: RunDataset, fh, fmt: str, header: str | None) -> None:
    ts = dataset.timestamps_ns
    if header and fmt == "delimited":
        for hline in header.splitlines():
            fh.write(f"# {hline}\n")
    for i in range(len(dataset)):
        rec = (i + 1, int(dataset.herald[i]), int(dataset.a[i]),
               int(dataset.b[i]), int(dataset.x[i]), int(dataset.y[i]))
        if fmt == "delimited":
            line = ",".join(f"{v:+d}" if j in (1, 4, 5) else str(v)
                            for j, v in enumerate(rec))
            if ts is not None:
                line += f",{int(ts[i])}"
        else:
            obj = dict(zip(FIELDS, rec))
            if ts is not None:
                obj["timestamp_ns"] = int(ts[i])
            line = json.dumps(obj, separators=(",", ":"))
        fh.write(line + "\n")
