"""Canonical text form of a document (used for round-trip checks)."""

from __future__ import annotations

import re

from .model import ModelDocument, NetworkClass, NodeDecl, Transmit
from .parser import KEYWORDS

_BARE = re.compile(r"[^\W\d]\w*\Z", re.UNICODE)


def _label(s: str) -> str:
    return s if _BARE.match(s) and s not in KEYWORDS else f'"{s}"'


def _num(x: float) -> str:
    return repr(float(x))


def _node(n: NodeDecl) -> str:
    head = {"input": "input node", "output": "output node", "node": "node"}[n.kind]
    if n.alias is not None:
        return f"  {head} {n.name} = {n.alias};"
    labels = "[" + ", ".join(_label(s) for s in n.states) + "]"
    if n.is_input:
        return f"  {head} {n.name} : {labels};"
    parts = [f"  {head} {n.name} : {labels} |"]
    if n.parents:
        parts.append("parents (" + ", ".join(str(p) for p in n.parents) + ")")
    if isinstance(n.cpt, Transmit):
        parts.append(f"cpt transmit({_num(n.cpt.rate)});")
    else:
        rows = "; ".join(", ".join(_num(x) for x in row) for row in n.cpt)
        parts.append("cpt { " + rows + " };")
    return " ".join(parts)


def _class(cls: NetworkClass) -> str:
    lines = [f"class {cls.name} {{"]
    lines += [_node(n) for n in cls.nodes]
    for inst in cls.instances:
        binds = ", ".join(f"{b.input} = {b.target}" for b in inst.bindings)
        lines.append(f"  instance {inst.name} : {inst.class_name} ({binds});")
    lines.append("}")
    return "\n".join(lines)


def format_document(doc: ModelDocument) -> str:
    blocks = [_class(c) for c in doc.classes]
    blocks.append(f"network {doc.root};")
    return "\n\n".join(blocks) + "\n"
