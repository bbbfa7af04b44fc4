"""Graph serialization: DOT, GraphML and a JSON edge list."""

from __future__ import annotations

import json
from xml.sax.saxutils import escape

from .exceptions import ParseError, ValidationError
from .graph import Mark, PartialDAG

FORMATS = ("dot", "graphml", "json")


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: PartialDAG) -> str:
    # '--' is illegal inside a digraph, so undirected edges carry dir=none
    lines = ["digraph G {"]
    for name in g.labels:
        lines.append(f"  {_dot_id(name)};")
    for i, j, mark in g.edges():
        a, b = _dot_id(g.labels[i]), _dot_id(g.labels[j])
        if mark is Mark.DIRECTED:
            lines.append(f"  {a} -> {b};")
        else:
            lines.append(f"  {a} -> {b} [dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_graphml(g: PartialDAG) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="label" for="node" attr.name="label" attr.type="string"/>',
        '  <graph id="G" edgedefault="undirected">',
    ]
    for k, name in enumerate(g.labels):
        lines.append(f'    <node id="n{k}"><data key="label">{escape(name)}</data></node>')
    for i, j, mark in g.edges():
        directed = "true" if mark is Mark.DIRECTED else "false"
        lines.append(f'    <edge source="n{i}" target="n{j}" directed="{directed}"/>')
    lines += ["  </graph>", "</graphml>"]
    return "\n".join(lines) + "\n"


def to_json(g: PartialDAG) -> str:
    doc = {
        "nodes": list(g.labels),
        "edges": [{"source": g.labels[i], "target": g.labels[j], "mark": mark.value}
                  for i, j, mark in g.edges()],
    }
    return json.dumps(doc, indent=2) + "\n"


def export_graph(g: PartialDAG, fmt: str = "dot") -> bytes:
    """Serialize ``g``; output is byte-stable for a fixed graph."""
    writers = {"dot": to_dot, "graphml": to_graphml, "json": to_json}
    if fmt not in writers:
        raise ValidationError(f"unknown graph format {fmt!r}; choose from {FORMATS}")
    return writers[fmt](g).encode("utf-8")


def graph_from_json(data) -> PartialDAG:
    """Inverse of the JSON export."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data) if isinstance(data, str) else data
        nodes = doc["nodes"]
        index = {name: k for k, name in enumerate(nodes)}
        g = PartialDAG(len(nodes), nodes)
        for e in doc["edges"]:
            i, j = index[e["source"]], index[e["target"]]
            g.add_edge(i, j, directed=Mark(e["mark"]) is Mark.DIRECTED)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"malformed graph JSON: {exc}") from exc
    return g

