"""CSV and configuration file handling for the command line front end."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
from dataclasses import dataclass, fields

import numpy as np

from .errors import InputError


@dataclass
class RunConfig:
    """Flat run configuration; serializes to ``key = value`` lines."""

    command: str = ""
    instance: str = "dirichlet:3"
    alpha: float = 1.0
    k: int = 1
    seed: int = 0
    restarts: int = 5
    tol_inner: float = 1e-8
    tol_outer: float = 1e-9
    max_outer_iters: int = 200
    baseline: str = "none"
    input: str = ""
    output: str = ""
    format: str = "simplex"
    svg: bool = True
    subspace: str = ""
    base: str = ""
    directions: str = ""
    truth: str = ""
    count: int = 100
    concentration: float = 100.0
    t_range: str = "-1,1"

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, base=None) -> "RunConfig":
        cfg = dataclasses.replace(base) if base is not None else cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"config line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            cfg.set(key, value, where=f"config line {lineno}")
        return cfg

    def set(self, key, value, where="option"):
        types = {f.name: f.type for f in fields(self)}
        if key not in types:
            raise InputError(f"{where}: unknown key {key!r}")
        kind = types[key]
        try:
            if kind in ("bool", bool):
                if isinstance(value, bool):
                    parsed = value
                elif str(value).lower() in ("1", "true", "yes", "on"):
                    parsed = True
                elif str(value).lower() in ("0", "false", "no", "off"):
                    parsed = False
                else:
                    raise ValueError(value)
            elif kind in ("int", int):
                parsed = int(value)
            elif kind in ("float", float):
                parsed = float(value)
            else:
                parsed = str(value)
        except ValueError:
            raise InputError(f"{where}: invalid value {value!r} for {key}") from None
        setattr(self, key, parsed)

    def digest(self) -> str:
        """SHA-256 of the configuration, ignoring where results are written."""
        text = dataclasses.replace(self, output="").to_text()
        return hashlib.sha256(text.encode()).hexdigest()


def parse_vector(text, what="vector") -> np.ndarray:
    try:
        return np.array([float(v) for v in str(text).split(",") if v.strip()], dtype=float)
    except ValueError:
        raise InputError(f"cannot parse {what} {text!r}") from None


def parse_matrix_columns(text, what="directions") -> np.ndarray:
    """``"u1,u2;v1,v2"`` -> matrix whose columns are ``u`` and ``v``."""
    cols = [parse_vector(c, what) for c in str(text).split(";") if c.strip()]
    if not cols:
        raise InputError(f"no {what} given")
    if len({c.size for c in cols}) != 1:
        raise InputError(f"{what} have inconsistent lengths")
    return np.column_stack(cols)


def read_table(path):
    """Read a headed CSV with ``#`` comments.

    Returns ``(header, rows)`` where each row is ``(line_number, fields)``.
    """
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    header, rows = None, []
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            header = cells
            continue
        if len(cells) != len(header):
            raise InputError(f"{path}:{lineno}: expected {len(header)} fields, found {len(cells)}")
        rows.append((lineno, cells))
    if header is None:
        raise InputError(f"{path}: missing header row")
    return header, rows


def numeric_block(path, header, rows, names):
    """Float matrix of the named columns; errors name the missing header or bad line."""
    missing = [n for n in names if n not in header]
    if missing:
        raise InputError(f"{path}: missing column(s) {', '.join(missing)} in header")
    idx = [header.index(n) for n in names]
    out = np.empty((len(rows), len(names)))
    for r, (lineno, cells) in enumerate(rows):
        for c, j in enumerate(idx):
            try:
                out[r, c] = float(cells[j])
            except ValueError:
                raise InputError(f"{path}:{lineno}: cannot parse {cells[j]!r} in column {names[c]}") from None
    return out


def row_ids(header, rows):
    if "id" in header:
        j = header.index("id")
        return [cells[j] for _, cells in rows]
    return [str(i) for i in range(len(rows))]


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if path is None or path == "-":
        return text
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj
