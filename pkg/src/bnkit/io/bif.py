"""Textual BIF (0.15 dialect) reader and canonical writer.

Grammar accepted::

    network <name> { property ...; }
    variable <name> { type discrete [ k ] { s1, s2, ... }; property ...; }
    probability ( child | p1, p2 ) {
        table v1, v2, ...;            // parent-major, child-fastest
        ( ps1, ps2 ) v1, v2, ...;     // one row per parent configuration
        default v1, v2, ...;          // rows not listed explicitly
        property ...;
    }

Commas between list items are optional. ``//`` and ``/* */`` comments are
skipped. Property text is kept verbatim and written back unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from bnkit.core.graph import Dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd, VariableMeta
from bnkit.exceptions import BnError, CycleDetected, ParseDiagnostic, ParseError, SemanticError
from bnkit.io.common import MAX_TABLE_ENTRIES, NORMALIZATION_TOL, decode, format_row, position

_PUNCT = set("{}()[]|,;")
_BREAK = _PUNCT | {'"'}


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "string", "punct" or "eof"
    text: str
    start: int
    end: int


class _Lexer:
    def __init__(self, text):
        self.text = text

    def error(self, offset, message, cls=ParseError):
        line, col = position(self.text, offset)
        return cls(ParseDiagnostic(line, col, message))

    def tokens(self):
        text, i, n = self.text, 0, len(self.text)
        out = []
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
            elif text.startswith("//", i):
                j = text.find("\n", i)
                i = n if j < 0 else j + 1
            elif text.startswith("/*", i):
                j = text.find("*/", i + 2)
                if j < 0:
                    raise self.error(i, "unterminated comment")
                i = j + 2
            elif c == '"':
                j = i + 1
                while j < n and text[j] != '"':
                    j += 2 if text[j] == "\\" else 1
                if j >= n:
                    raise self.error(i, "unterminated string")
                out.append(Token("string", text[i + 1 : j].replace('\\"', '"'), i, j + 1))
                i = j + 1
            elif c in _PUNCT:
                out.append(Token("punct", c, i, i + 1))
                i += 1
            else:
                j = i
                while j < n and not text[j].isspace() and text[j] not in _BREAK:
                    if text.startswith("//", j) or text.startswith("/*", j):
                        break
                    j += 1
                out.append(Token("word", text[i:j], i, j))
                i = j
        out.append(Token("eof", "", n, n))
        return out


@dataclass
class _Variable:
    name: str
    token: Token
    states: tuple = None
    properties: list = None


@dataclass
class _Probability:
    child: Token
    parents: list
    start: Token
    table: list = None
    table_token: Token = None
    entries: list = None
    default: list = None
    default_token: Token = None
    properties: list = None


class _Parser:
    def __init__(self, text):
        self.text = text
        self.lexer = _Lexer(text)
        self.toks = self.lexer.tokens()
        self.i = 0
        self.warnings = []

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, token, message, cls=ParseError):
        return self.lexer.error(token.start, message, cls)

    def describe(self, t):
        return "end of input" if t.kind == "eof" else repr(t.text)

    def expect(self, text):
        t = self.tok
        if t.kind == "punct" and t.text == text:
            return self.advance()
        if text == ";" and self.i > 0:
            # report where the semicolon belongs, not where the next token is
            prev = self.toks[self.i - 1]
            raise self.lexer.error(prev.end, f"expected ';' after {prev.text!r}")
        raise self.error(t, f"expected {text!r}, found {self.describe(t)}")

    def keyword(self, word):
        t = self.tok
        if t.kind == "word" and t.text == word:
            return self.advance()
        raise self.error(t, f"expected {word!r}, found {self.describe(t)}")

    def at(self, text):
        t = self.tok
        return t.kind in ("punct", "word") and t.text == text

    def name(self, what):
        t = self.tok
        if t.kind in ("word", "string") and t.text:
            return self.advance()
        raise self.error(t, f"expected {what}, found {self.describe(t)}")

    def number(self):
        t = self.tok
        if t.kind != "word":
            raise self.error(t, f"expected a number, found {self.describe(t)}")
        try:
            v = float(t.text)
        except ValueError:
            raise self.error(t, f"expected a number, found {t.text!r}") from None
        if not math.isfinite(v) or v < 0:
            raise self.error(t, f"probability must be finite and nonnegative, got {t.text}", SemanticError)
        self.advance()
        return v

    def numbers(self):
        values = [self.number()]
        while not self.at(";"):
            if self.at(","):
                self.advance()
            values.append(self.number())
        self.expect(";")
        return values

    def name_list(self, closer, what):
        names = [self.name(what)]
        while not self.at(closer):
            if self.at(","):
                self.advance()
            names.append(self.name(what))
        self.expect(closer)
        return names

    def property(self):
        kw = self.keyword("property")
        start = self.tok.start
        while not self.at(";"):
            if self.tok.kind == "eof":
                raise self.error(kw, "property is missing its ';'")
            self.advance()
        raw = self.text[start : self.tok.start].strip()
        self.expect(";")
        return raw

    # -- grammar ---------------------------------------------------------

    def parse(self):
        self.network_name = None
        self.network_properties = []
        self.variables = {}
        self.probabilities = {}
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "word" and t.text == "network":
                self.network_block()
            elif t.kind == "word" and t.text == "variable":
                self.variable_block()
            elif t.kind == "word" and t.text == "probability":
                self.probability_block()
            else:
                raise self.error(t, f"expected 'network', 'variable' or 'probability', found {self.describe(t)}")
        return self.build()

    def network_block(self):
        kw = self.keyword("network")
        if self.network_name is not None:
            raise self.error(kw, "more than one network block", SemanticError)
        self.network_name = self.name("a network name").text
        self.expect("{")
        while not self.at("}"):
            self.network_properties.append(self.property())
        self.expect("}")

    def variable_block(self):
        self.keyword("variable")
        nt = self.name("a variable name")
        if nt.text in self.variables:
            raise self.error(nt, f"variable {nt.text!r} declared twice", SemanticError)
        var = _Variable(nt.text, nt, properties=[])
        self.expect("{")
        while not self.at("}"):
            if self.at("property"):
                var.properties.append(self.property())
                continue
            tt = self.keyword("type")
            if var.states is not None:
                raise self.error(tt, f"second type declaration for {nt.text!r}", SemanticError)
            self.keyword("discrete")
            self.expect("[")
            kt = self.tok
            if kt.kind != "word" or not (kt.text.isascii() and kt.text.isdigit() and len(kt.text) <= 12):
                raise self.error(kt, f"expected a state count, found {self.describe(kt)}")
            self.advance()
            self.expect("]")
            self.expect("{")
            state_toks = self.name_list("}", "a state name")
            self.expect(";")
            states = tuple(s.text for s in state_toks)
            if int(kt.text) != len(states):
                raise self.error(kt, f"{nt.text!r} declares {kt.text} states but lists {len(states)}", SemanticError)
            if len(states) < 2:
                raise self.error(kt, f"{nt.text!r} needs at least 2 states", SemanticError)
            seen = set()
            for s in state_toks:
                if s.text in seen:
                    raise self.error(s, f"duplicate state {s.text!r} of {nt.text!r}", SemanticError)
                seen.add(s.text)
            var.states = states
        close = self.expect("}")
        if var.states is None:
            raise self.error(close, f"variable {nt.text!r} has no type declaration", SemanticError)
        self.variables[nt.text] = var

    def probability_block(self):
        start = self.keyword("probability")
        self.expect("(")
        child = self.name("a variable name")
        parents = []
        if self.at("|"):
            self.advance()
            parents = self.name_list(")", "a parent name")
        else:
            self.expect(")")
        if child.text in self.probabilities:
            raise self.error(child, f"second probability block for {child.text!r}", SemanticError)
        block = _Probability(child, parents, start, entries=[], properties=[])
        self.expect("{")
        while not self.at("}"):
            t = self.tok
            if self.at("property"):
                block.properties.append(self.property())
            elif self.at("table"):
                self.advance()
                if block.table is not None:
                    raise self.error(t, "second table in one probability block", SemanticError)
                block.table_token = t
                block.table = self.numbers()
            elif self.at("default"):
                self.advance()
                if block.default is not None:
                    raise self.error(t, "second default in one probability block", SemanticError)
                block.default_token = t
                block.default = self.numbers()
            elif self.at("("):
                self.advance()
                states = self.name_list(")", "a parent state")
                block.entries.append((t, states, self.numbers()))
            else:
                raise self.error(t, f"expected 'table', 'default', 'property' or '(', found {self.describe(t)}")
        self.expect("}")
        self.probabilities[child.text] = block

    # -- semantics -------------------------------------------------------

    def build(self):
        for name, block in self.probabilities.items():
            for t in [block.child, *block.parents]:
                if t.text not in self.variables:
                    raise self.error(t, f"undeclared variable {t.text!r}", SemanticError)
            seen = {name}
            for t in block.parents:
                if t.text in seen:
                    raise self.error(t, f"{t.text!r} repeated in the family of {name!r}", SemanticError)
                seen.add(t.text)
        for name, var in self.variables.items():
            if name not in self.probabilities:
                raise self.error(var.token, f"no probability block for {name!r}", SemanticError)
        cpds = [self.cpd(self.probabilities[name]) for name in sorted(self.variables)]
        edges = [(p, c.child) for c in cpds for p in c.parents]
        try:
            Dag(edges, nodes=self.variables)
        except CycleDetected as exc:
            where = self.probabilities[exc.nodes[0]].start
            raise self.error(where, f"probability blocks form a directed cycle: {exc}", SemanticError) from None
        metadata = {
            "name": self.network_name,
            "properties": self.network_properties,
            "variable_properties": {n: v.properties for n, v in self.variables.items() if v.properties},
            "probability_properties": {
                n: b.properties for n, b in self.probabilities.items() if b.properties
            },
        }
        metas = [VariableMeta(n, v.states) for n, v in sorted(self.variables.items())]
        try:
            return DiscreteBayesianNetwork(cpds, metas=metas, metadata=metadata)
        except BnError as exc:  # pragma: no cover - checks above should catch everything
            raise self.error(self.toks[0], str(exc), SemanticError) from None

    def cpd(self, block: _Probability) -> TabularCpd:
        child = block.child.text
        parents = [t.text for t in block.parents]
        r = len(self.variables[child].states)
        pstates = [self.variables[p].states for p in parents]
        q = math.prod(len(s) for s in pstates)
        if q * r > MAX_TABLE_ENTRIES:
            raise self.error(block.start, f"table for {child!r} has {q * r} entries, over the limit", SemanticError)
        if block.table is not None and (block.entries or block.default is not None):
            raise self.error(block.table_token, "'table' cannot be mixed with entries or 'default'", SemanticError)
        rows = np.full((q, r), np.nan)
        where = [block.start] * q
        if block.table is not None:
            if len(block.table) != q * r:
                raise self.error(
                    block.table_token, f"table for {child!r} needs {q * r} values, got {len(block.table)}", SemanticError
                )
            rows[:] = np.asarray(block.table).reshape(q, r)
            where = [block.table_token] * q
        else:
            index = {cfg: k for k, cfg in enumerate(product(*pstates))}
            for t, states, values in block.entries:
                key = tuple(s.text for s in states)
                if len(key) != len(parents):
                    raise self.error(t, f"entry lists {len(key)} parent states, {child!r} has {len(parents)} parents", SemanticError)
                for s, allowed, p in zip(states, pstates, parents):
                    if s.text not in allowed:
                        raise self.error(s, f"{s.text!r} is not a state of {p!r}", SemanticError)
                k = index[key]
                if not np.isnan(rows[k, 0]):
                    raise self.error(t, f"parent configuration {key} listed twice", SemanticError)
                if len(values) != r:
                    raise self.error(t, f"entry needs {r} values, got {len(values)}", SemanticError)
                rows[k] = values
                where[k] = t
            unset = np.isnan(rows[:, 0])
            if unset.any():
                if block.default is None:
                    missing = list(product(*pstates))[int(np.flatnonzero(unset)[0])]
                    raise self.error(block.start, f"no values for {child!r} given {missing}", SemanticError)
                if len(block.default) != r:
                    raise self.error(block.default_token, f"default needs {r} values, got {len(block.default)}", SemanticError)
                rows[unset] = block.default
                for k in np.flatnonzero(unset):
                    where[k] = block.default_token
        sums = rows.sum(axis=1)
        for k in range(q):
            if abs(sums[k] - 1.0) > NORMALIZATION_TOL:
                raise self.error(where[k], f"values for {child!r} sum to {sums[k]:.9g}, not 1", SemanticError)
        off = np.abs(sums - 1.0) > 1e-12
        rows[off] /= sums[off, None]
        if np.any(np.abs(sums - 1.0) > 1e-9):
            line, col = position(self.text, block.start.start)
            self.warnings.append(ParseDiagnostic(line, col, f"rescaled rows of {child!r} to sum to 1", "warning"))
        return TabularCpd(child, r, rows, parents, [len(s) for s in pstates])


def parse_bif(text, warnings=None) -> DiscreteBayesianNetwork:
    """Read a BIF document (str or UTF-8 bytes).

    Parameters
    ----------
    text : str or bytes
    warnings : list, optional
        Receives :class:`ParseDiagnostic` warnings, e.g. rescaled rows.

    Raises
    ------
    ParseError
        Grammar violation, with line and column.
    SemanticError
        Undeclared variables, wrong value counts, rows off by more than
        1e-6 from summing to 1, cycles.
    """
    parser = _Parser(decode(text))
    bn = parser.parse()
    if warnings is not None:
        warnings.extend(parser.warnings)
    return bn


def _quote(name) -> str:
    """Bare word when the lexer would read it back unchanged, else a string."""
    if name and all(not c.isspace() and c not in _BREAK for c in name) and "//" not in name and "/*" not in name:
        return name
    return '"' + name.replace('"', '\\"') + '"'


def serialize_bif(bn: DiscreteBayesianNetwork) -> str:
    """Canonical BIF: lexicographic variable order, ``table`` form only,
    6 significant digits, LF line endings."""
    meta = bn.metadata or {}
    name = meta.get("name") or "unknown"
    lines = [f"network {_quote(name)} {{"]
    lines += [f"  property {p};" for p in meta.get("properties", [])]
    lines.append("}")
    var_props = meta.get("variable_properties", {})
    for v in bn.nodes:
        states = ", ".join(_quote(s) for s in bn.states(v))
        lines.append(f"variable {_quote(v)} {{")
        lines.append(f"  type discrete [ {bn.card(v)} ] {{ {states} }};")
        lines += [f"  property {p};" for p in var_props.get(v, [])]
        lines.append("}")
    prob_props = meta.get("probability_properties", {})
    for v in bn.nodes:
        cpd = bn.cpd(v)
        head = _quote(v)
        if cpd.parents:
            head += " | " + ", ".join(_quote(p) for p in cpd.parents)
        values = [x for row in cpd.table() for x in format_row(row)]
        lines.append(f"probability ( {head} ) {{")
        lines.append(f"  table {', '.join(values)};")
        lines += [f"  property {p};" for p in prob_props.get(v, [])]
        lines.append("}")
    return "\n".join(lines) + "\n"


def read_bif(path, warnings=None) -> DiscreteBayesianNetwork:
    with open(path, "rb") as fh:
        return parse_bif(fh.read(), warnings)


def write_bif(bn, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_bif(bn))
