"""Model interchange (BIF, UAI), CSV datasets and edge lists."""

from __future__ import annotations

import os

from bnkit.io.bif import parse_bif, read_bif, serialize_bif, write_bif
from bnkit.io.edgelist import parse_edgelist, serialize_edgelist
from bnkit.io.table import WEIGHT_COLUMN, load_csv, read_csv, save_csv, write_csv
from bnkit.io.uai import parse_uai, read_uai, serialize_uai, write_uai

_PARSERS = {".bif": parse_bif, ".uai": parse_uai}
_WRITERS = {".bif": serialize_bif, ".uai": serialize_uai}


def model_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in _PARSERS:
        raise ValueError(f"unknown model format {ext!r}; use .bif or .uai")
    return ext


def load_model(path, warnings=None):
    """Read a ``.bif`` or ``.uai`` file."""
    parse = _PARSERS[model_format(path)]
    with open(path, "rb") as fh:
        return parse(fh.read(), warnings)


def dump_model(bn, path) -> str:
    """Model text in the format implied by ``path``'s extension."""
    return _WRITERS[model_format(path)](bn)


def save_model(bn, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_model(bn, path))


__all__ = [
    "WEIGHT_COLUMN",
    "dump_model",
    "load_csv",
    "load_model",
    "model_format",
    "parse_bif",
    "parse_edgelist",
    "parse_uai",
    "read_bif",
    "read_csv",
    "read_uai",
    "save_csv",
    "save_model",
    "serialize_bif",
    "serialize_edgelist",
    "serialize_uai",
    "write_bif",
    "write_csv",
    "write_uai",
]
