"""Plain-text graph listing.

One item per line::

    A            # a node (needed for isolated nodes)
    A -> B       # directed edge
    B -- C       # undirected edge (CPDAG output)

``#`` starts a comment. Node names cannot contain whitespace.
"""

from __future__ import annotations

from bnkit.core.graph import Dag, Pdag
from bnkit.exceptions import BnError, ParseDiagnostic, ParseError
from bnkit.io.common import decode


def parse_edgelist(text):
    """Read a graph; returns a Dag, or a Pdag when undirected edges appear."""
    text = decode(text)
    nodes, directed, undirected = [], [], []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        parts = line.split()
        if not parts:
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        if len(parts) == 1:
            nodes.append(parts[0])
        elif len(parts) == 3 and parts[1] in ("->", "--"):
            u, op, v = parts
            (directed if op == "->" else undirected).append((u, v))
            nodes += [u, v]
        else:
            raise ParseError(ParseDiagnostic(lineno, col, f"expected 'A', 'A -> B' or 'A -- B', found {line.strip()!r}"))
    try:
        if undirected:
            return Pdag(directed, undirected, nodes=nodes)
        return Dag(directed, nodes=nodes)
    except BnError as exc:
        raise ParseError(ParseDiagnostic(1, 1, str(exc))) from None


def serialize_edgelist(graph) -> str:
    """Nodes (sorted), then directed edges, then undirected edges."""
    lines = sorted(graph.nodes)
    if isinstance(graph, Pdag):
        lines += [f"{u} -> {v}" for u, v in sorted(graph.directed)]
        lines += [f"{u} -- {v}" for u, v in graph.sorted_undirected()]
    else:
        lines += [f"{u} -> {v}" for u, v in graph.sorted_edges()]
    return "\n".join(lines) + "\n"
