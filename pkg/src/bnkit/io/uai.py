"""UAI ``BAYES`` reader and writer.

UAI files carry only indices and cardinalities. Names and state labels
travel in trailing comment lines that other readers ignore::

    # name <i> <variable name>
    # state <i> <j> <state label>

Without them, variables are called ``X0``, ``X1``, ... (zero-padded so that
name order matches index order) and states ``"0"``, ``"1"``, ...
"""

from __future__ import annotations

import math
import re

import numpy as np

from bnkit.core.graph import Dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd, VariableMeta
from bnkit.exceptions import CycleDetected, NotBayes, ParseDiagnostic, ParseError, SemanticError
from bnkit.io.common import MAX_TABLE_ENTRIES, NORMALIZATION_TOL, decode, format_row, position

_WORD = re.compile(r"[^\s#]+|#[^\n]*")
_NAME = re.compile(r"#\s*name\s+(\S+)\s+(\S.*?)\s*$")
_STATE = re.compile(r"#\s*state\s+(\S+)\s+(\S+)\s+(\S.*?)\s*$")


class _Reader:
    def __init__(self, text):
        self.text = text
        self.words = []
        self.names = []
        self.states = []
        for m in _WORD.finditer(text):
            w = m.group()
            if w.startswith("#"):
                if (nm := _NAME.match(w)) is not None:
                    self.names.append((m.start(), nm.group(1), nm.group(2)))
                elif (sm := _STATE.match(w)) is not None:
                    self.states.append((m.start(), sm.group(1), sm.group(2), sm.group(3)))
                continue
            self.words.append((m.start(), w))
        self.i = 0

    def error(self, offset, message, cls=ParseError):
        line, col = position(self.text, offset)
        return cls(ParseDiagnostic(line, col, message))

    def offset(self):
        return self.words[self.i][0] if self.i < len(self.words) else len(self.text)

    def next(self, what):
        if self.i >= len(self.words):
            raise self.error(len(self.text), f"expected {what}, found end of input")
        tok = self.words[self.i]
        self.i += 1
        return tok

    def integer(self, what, low=0):
        off, w = self.next(what)
        if not _is_count(w):
            raise self.error(off, f"expected {what}, found {w!r}")
        v = int(w)
        if v < low:
            raise self.error(off, f"{what} must be at least {low}, got {v}", SemanticError)
        return off, v

    def probability(self):
        off, w = self.next("a probability")
        try:
            v = float(w)
        except ValueError:
            raise self.error(off, f"expected a probability, found {w!r}") from None
        if not math.isfinite(v) or v < 0:
            raise self.error(off, f"probability must be finite and nonnegative, got {w}", SemanticError)
        return v


def _is_count(word) -> bool:
    return word.isascii() and word.isdigit() and len(word) <= 12


def _default_names(n):
    width = len(str(n - 1))
    return [f"X{i:0{width}d}" for i in range(n)]


def parse_uai(text, warnings=None) -> DiscreteBayesianNetwork:
    """Read a UAI ``BAYES`` document (str or UTF-8 bytes).

    Function ``i`` holds ``P(child | parents)`` with the child last in its
    scope and entries in last-variable-fastest order.

    Raises
    ------
    NotBayes
        The preamble is ``MARKOV``.
    ParseError, SemanticError
        With line and column of the offending token.
    """
    r = _Reader(decode(text))
    off, kind = r.next("the BAYES preamble")
    if kind.upper() == "MARKOV":
        raise r.error(off, "MARKOV networks are not supported; expected BAYES", NotBayes)
    if kind != "BAYES":
        raise r.error(off, f"expected the BAYES preamble, found {kind!r}")
    _, n = r.integer("a variable count", low=1)
    cards = [r.integer("a cardinality", low=2)[1] for _ in range(n)]
    f_off, n_funcs = r.integer("a function count")
    if n_funcs != n:
        raise r.error(f_off, f"a Bayesian network needs {n} functions, found {n_funcs}", SemanticError)
    scopes = []
    owner = {}
    for _ in range(n_funcs):
        s_off, k = r.integer("a scope size", low=1)
        scope = []
        for _ in range(k):
            v_off, v = r.integer("a variable index")
            if v >= n:
                raise r.error(v_off, f"variable index {v} out of range (n = {n})", SemanticError)
            if v in scope:
                raise r.error(v_off, f"variable {v} repeated in one scope", SemanticError)
            scope.append(v)
        child = scope[-1]
        if child in owner:
            raise r.error(s_off, f"variable {child} is the child of two functions", SemanticError)
        owner[child] = len(scopes)
        scopes.append((s_off, scope))
    tables = []
    for s_off, scope in scopes:
        size = math.prod(cards[v] for v in scope)
        c_off, count = r.integer("an entry count")
        if size > MAX_TABLE_ENTRIES:
            raise r.error(s_off, f"function over {scope} has {size} entries, over the limit", SemanticError)
        if count != size:
            raise r.error(c_off, f"function over {scope} needs {size} entries, found count {count}", SemanticError)
        rows = np.array([r.probability() for _ in range(count)]).reshape(-1, cards[scope[-1]])
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > NORMALIZATION_TOL)
        if bad.size:
            raise r.error(c_off, f"a row of the function over {scope} sums to {sums[bad[0]]:.9g}, not 1", SemanticError)
        off_rows = np.abs(sums - 1.0) > 1e-12
        rows[off_rows] /= sums[off_rows, None]
        if warnings is not None and np.any(np.abs(sums - 1.0) > 1e-9):
            line, col = position(r.text, c_off)
            warnings.append(ParseDiagnostic(line, col, f"rescaled rows of function over {scope}", "warning"))
        tables.append(rows)
    if r.i < len(r.words):
        off, w = r.words[r.i]
        raise r.error(off, f"unexpected trailing token {w!r}")

    names = _default_names(n)
    seen = {}
    for off, idx, name in r.names:
        if not _is_count(idx) or int(idx) >= n:
            raise r.error(off, f"name line refers to unknown variable {idx!r}", SemanticError)
        if name in seen and seen[name] != int(idx):
            raise r.error(off, f"duplicate variable name {name!r}", SemanticError)
        seen[name] = int(idx)
        names[int(idx)] = name
    if len(set(names)) != n:
        raise r.error(0, "variable names are not unique", SemanticError)
    labels = [[str(j) for j in range(c)] for c in cards]
    for off, idx, sj, label in r.states:
        if not (_is_count(idx) and _is_count(sj)) or int(idx) >= n or int(sj) >= cards[int(idx)]:
            raise r.error(off, f"state line refers to unknown state {idx} {sj}", SemanticError)
        labels[int(idx)][int(sj)] = label
    for i, ls in enumerate(labels):
        if len(set(ls)) != len(ls):
            raise r.error(0, f"state labels of {names[i]!r} are not unique", SemanticError)

    cpds = []
    for (s_off, scope), rows in zip(scopes, tables):
        parents = [names[v] for v in scope[:-1]]
        cpds.append(TabularCpd(names[scope[-1]], cards[scope[-1]], rows, parents, [cards[v] for v in scope[:-1]]))
    try:
        Dag([(p, c.child) for c in cpds for p in c.parents], nodes=names)
    except CycleDetected as exc:
        first = names.index(exc.nodes[0])
        raise r.error(scopes[owner[first]][0], f"functions form a directed cycle: {exc}", SemanticError) from None
    metas = [VariableMeta(names[i], labels[i]) for i in range(n)]
    return DiscreteBayesianNetwork(cpds, metas=metas)


def serialize_uai(bn: DiscreteBayesianNetwork) -> str:
    """UAI text with variables indexed in lexicographic name order and a
    trailing name/state sidecar."""
    nodes = list(bn.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    lines = ["BAYES", str(len(nodes)), " ".join(str(bn.card(v)) for v in nodes), str(len(nodes))]
    for v in nodes:
        scope = [*bn.cpd(v).parents, v]
        lines.append(" ".join([str(len(scope))] + [str(index[u]) for u in scope]))
    for v in nodes:
        cpd = bn.cpd(v)
        lines.append("")
        lines.append(str(cpd.table().size))
        lines += [" " + " ".join(format_row(row)) for row in cpd.table()]
    lines.append("")
    for v in nodes:
        lines.append(f"# name {index[v]} {v}")
    for v in nodes:
        for j, s in enumerate(bn.states(v)):
            lines.append(f"# state {index[v]} {j} {s}")
    return "\n".join(lines) + "\n"


def read_uai(path, warnings=None) -> DiscreteBayesianNetwork:
    with open(path, "rb") as fh:
        return parse_uai(fh.read(), warnings)


def write_uai(bn, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_uai(bn))
