"""Byte-level mutation fuzzing of the model parsers."""

from pathlib import Path

import numpy as np

from bnkit.exceptions import ParseError
from bnkit.io import parse_bif, parse_uai, serialize_uai

NETWORKS = Path(__file__).parent / "data" / "networks"

TOKENS = [
    b"{", b"}", b"(", b")", b"[", b"]", b";", b",", b"|", b'"', b"/*", b"*/", b"//", b"\n", b"\r\n",
    b"network", b"variable", b"probability", b"table", b"default", b"property", b"type", b"discrete",
    b"-1", b"0", b"1", b"2", b"1e309", b"nan", b"inf", b"1e-400", b"99999999999", b"BAYES", b"MARKOV",
    b"# name 0 ", b"# state 0 0 ", b"\xef\xbb\xbf", b"\xff", b"\x00",
]


def corpus():
    """(parser, seed bytes) for every fixture in both formats."""
    out = []
    for path in sorted(NETWORKS.glob("*.bif")):
        raw = path.read_bytes()
        out.append((parse_bif, raw))
        out.append((parse_uai, serialize_uai(parse_bif(raw)).encode()))
    return out


def mutate(raw: bytes, rng) -> bytes:
    """One to three random edits: flip, insert, delete, duplicate, token, truncate."""
    buf = bytearray(raw)
    for _ in range(int(rng.integers(1, 4))):
        n = len(buf)
        op = int(rng.integers(6))
        i = int(rng.integers(n + 1))
        if op == 0 and n:
            buf[min(i, n - 1)] = int(rng.integers(256))
        elif op == 1:
            buf[i:i] = bytes([int(rng.integers(256))])
        elif op == 2 and n:
            j = min(n, i + int(rng.integers(1, 16)))
            del buf[i:j]
        elif op == 3 and n:
            j = min(n, i + int(rng.integers(1, 32)))
            buf[i:i] = buf[i:j]
        elif op == 4:
            buf[i:i] = TOKENS[int(rng.integers(len(TOKENS)))]
        else:
            del buf[i:]
    return bytes(buf)


def fuzz(n_mutations: int, seed: int = 0):
    """Run ``n_mutations`` parses; returns (n_accepted, n_rejected, failures).

    A failure is any exception other than ParseError, or a ParseError whose
    position is not a valid 1-based location in the mutated text.
    """
    rng = np.random.default_rng(seed)
    seeds = corpus()
    accepted = rejected = 0
    failures = []
    for k in range(n_mutations):
        parse, raw = seeds[k % len(seeds)]
        text = mutate(raw, rng)
        try:
            parse(text)
            accepted += 1
        except ParseError as exc:
            rejected += 1
            n_lines = text.count(b"\n") + text.count(b"\r") + 1
            if not (isinstance(exc.line, int) and isinstance(exc.column, int)) or not (
                1 <= exc.line <= n_lines and exc.column >= 1
            ):
                failures.append((parse.__name__, text, f"bad position {exc.line}:{exc.column}"))
        except Exception as exc:  # noqa: BLE001 - the point is to catch everything
            failures.append((parse.__name__, text, f"{type(exc).__name__}: {exc}"))
    return accepted, rejected, failures
