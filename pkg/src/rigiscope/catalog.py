"""Framework file format and the bundled example frameworks.

Files are JSON objects::

    {"dimension": 2, "nodes": [[0, 0], [1, 0], [0, 1]], "edges": [[1, 2], [2, 3], [1, 3]]}

Edges use 1-based node labels.
"""
from __future__ import annotations

import json
from importlib import resources

from .errors import ParseError, ValidationError
from .framework import Framework

BUNDLED = ("triangle", "slingshot", "slingshot_flexible", "prism3", "fourbar")


def parse_framework(text: str, name: str | None = None) -> Framework:
    """Parse and validate a framework document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    for key in ("dimension", "nodes", "edges"):
        if key not in doc:
            raise ParseError(f"missing field '{key}'")
    d = doc["dimension"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError("field 'dimension' must be a positive integer")
    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise ParseError("field 'nodes' must be a non-empty list")
    for k, p in enumerate(nodes):
        if not isinstance(p, list) or len(p) != d or \
                not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p):
            raise ParseError(f"nodes[{k}] must be a list of {d} numbers")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise ParseError("field 'edges' must be a list")
    pairs = []
    seen = set()
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2 or \
                not all(isinstance(i, int) and not isinstance(i, bool) for i in e):
            raise ParseError(f"edges[{k}] must be a pair of integer node labels")
        i, j = e
        if not (1 <= i <= len(nodes) and 1 <= j <= len(nodes)):
            raise ValidationError(f"edge {{{i},{j}}} references a node outside 1..{len(nodes)}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValidationError(f"repeated edge {{{i},{j}}}")
        seen.add(key)
        pairs.append((i - 1, j - 1))
    return Framework([[float(c) for c in p] for p in nodes], pairs, name=name)


def framework_to_json(fw: Framework) -> str:
    return json.dumps({
        "dimension": fw.d,
        "nodes": fw.nodes.tolist(),
        "edges": [[i + 1, j + 1] for i, j in fw.edges],
    }, indent=1)


def load(name: str) -> Framework:
    """One of the bundled frameworks, by name."""
    if name not in BUNDLED:
        raise KeyError(f"unknown framework {name!r}; choose from {', '.join(BUNDLED)}")
    text = resources.files("rigiscope.data").joinpath(f"{name}.json").read_text()
    return parse_framework(text, name=name)


def read_framework(path: str) -> Framework:
    """Read a framework file, or a bundled framework when ``path`` names one."""
    if path in BUNDLED:
        return load(path)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_framework(text, name=path)
