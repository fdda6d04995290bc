"""Helpers shared by the model-file readers and writers."""

from __future__ import annotations

import math

from bnkit.exceptions import ParseDiagnostic, ParseError

# rows whose sum is off by more than this are rejected; closer rows are rescaled
NORMALIZATION_TOL = 1e-6
# product of family cardinalities above which a table is refused
MAX_TABLE_ENTRIES = 10**7


def decode(text) -> str:
    """UTF-8 bytes or str to str with LF line endings and no BOM."""
    if isinstance(text, (bytes, bytearray, memoryview)):
        raw = bytes(text)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            before = raw[: exc.start]
            line = before.count(b"\n") + 1
            column = exc.start - (before.rfind(b"\n") + 1) + 1
            raise ParseError(ParseDiagnostic(line, column, "input is not valid UTF-8")) from None
    if not isinstance(text, str):
        raise TypeError(f"expected str or bytes, got {type(text).__name__}")
    if text.startswith("﻿"):
        text = text[1:]
    return text.replace("\r\n", "\n").replace("\r", "\n")


def format_row(values) -> list:
    """Probabilities as 6-significant-digit strings.

    If rounding would push the row sum further than half the reader's
    tolerance from 1, the row is written with shortest round-trip digits.
    """
    short = [f"{float(v):.6g}" for v in values]
    if abs(math.fsum(float(s) for s in short) - 1.0) <= NORMALIZATION_TOL / 2:
        return short
    return [repr(float(v)) for v in values]


def position(text: str, offset: int):
    """1-based (line, column) of ``offset`` in ``text``."""
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column
