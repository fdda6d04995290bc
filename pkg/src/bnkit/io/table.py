"""CSV datasets.

A header row is required. An empty cell or a literal ``?`` is a missing
value. An optional ``__weight__`` column holds nonnegative row weights.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from bnkit.core.data import MISSING, DataTable
from bnkit.core.network import VariableMeta
from bnkit.exceptions import (
    InvalidModel,
    NegativeWeight,
    ParseDiagnostic,
    ParseError,
    RaggedRow,
    UnknownState,
)
from bnkit.io.common import decode

WEIGHT_COLUMN = "__weight__"
MISSING_TOKENS = ("", "?")


def _schema_map(schema):
    if schema is None:
        return {}
    if isinstance(schema, dict):
        return {k: v if isinstance(v, VariableMeta) else VariableMeta(k, tuple(v)) for k, v in schema.items()}
    return {m.name: m for m in schema}


def read_csv(text, schema=None) -> DataTable:
    """Parse CSV text (str or UTF-8 bytes) into a DataTable.

    Parameters
    ----------
    text : str or bytes
    schema : sequence of VariableMeta or dict, optional
        Declared states per column. Undeclared columns get the sorted set of
        their observed labels.

    Raises
    ------
    RaggedRow
        A row has the wrong number of cells.
    UnknownState
        A value is not a declared state (schema mode).
    NegativeWeight
        A weight is negative, non-finite or not a number.
    """
    text = decode(text)
    declared = _schema_map(schema)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(ParseDiagnostic(1, 1, "empty input: a header row is required")) from None
    except csv.Error as exc:
        raise ParseError(ParseDiagnostic(1, 1, f"malformed CSV: {exc}")) from None
    header = [h.strip() for h in header]
    if not header or any(not h for h in header):
        raise ParseError(ParseDiagnostic(1, 1, "header has an empty column name"))
    if len(set(header)) != len(header):
        raise ParseError(ParseDiagnostic(1, 1, "header repeats a column name"))
    w_col = header.index(WEIGHT_COLUMN) if WEIGHT_COLUMN in header else None
    columns = [h for h in header if h != WEIGHT_COLUMN]
    value_idx = [j for j, h in enumerate(header) if h != WEIGHT_COLUMN]

    rows, weights, lines = [], [], []
    try:
        for cells in reader:
            line = reader.line_num
            if not cells or (len(cells) == 1 and not cells[0].strip() and len(header) > 1):
                continue
            if len(cells) != len(header):
                raise RaggedRow(f"expected {len(header)} cells, found {len(cells)}", line)
            cells = [c.strip() for c in cells]
            if w_col is not None:
                try:
                    w = float(cells[w_col])
                except ValueError:
                    raise NegativeWeight(f"weight {cells[w_col]!r} is not a number", line) from None
                if not math.isfinite(w) or w < 0:
                    raise NegativeWeight(f"weight must be finite and nonnegative, got {cells[w_col]!r}", line)
                weights.append(w)
            rows.append([None if cells[j] in MISSING_TOKENS else cells[j] for j in value_idx])
            lines.append(line)
    except csv.Error as exc:
        raise ParseError(ParseDiagnostic(reader.line_num, 1, f"malformed CSV: {exc}")) from None

    codes = np.full((len(rows), len(columns)), MISSING, dtype=np.int64)
    metas = []
    for j, name in enumerate(columns):
        meta = declared.get(name)
        if meta is None:
            seen = sorted({r[j] for r in rows if r[j] is not None})
            if len(seen) < 2:
                raise InvalidModel(
                    f"column {name!r} has {len(seen)} observed state(s); declare its states in a schema"
                )
            meta = VariableMeta(name, tuple(seen))
        lookup = {s: k for k, s in enumerate(meta.states)}
        for i, r in enumerate(rows):
            v = r[j]
            if v is None:
                continue
            if v not in lookup:
                raise UnknownState(f"{v!r} is not a state of {name!r} (states: {list(meta.states)})", lines[i])
            codes[i, j] = lookup[v]
        metas.append(meta)
    return DataTable(metas, codes, weights if w_col is not None else None)


def write_csv(table: DataTable) -> str:
    """CSV text with ``?`` for missing cells and a ``__weight__`` column
    when the table carries weights. LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(table.columns)
    if table.weights is not None:
        header.append(WEIGHT_COLUMN)
    writer.writerow(header)
    weights = table.weights
    for i, row in enumerate(table.labels()):
        cells = ["?" if v is None else v for v in row]
        if weights is not None:
            cells.append(repr(float(weights[i])))
        writer.writerow(cells)
    return buf.getvalue()


def load_csv(path, schema=None) -> DataTable:
    with open(path, "rb") as fh:
        return read_csv(fh.read(), schema)


def save_csv(table: DataTable, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(write_csv(table))
