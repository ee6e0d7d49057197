"""Static checks on parsed documents.

``resolution_diagnostics`` covers the name-level problems reported at parse
time (duplicates, unknown classes); :func:`validate` runs everything.
"""

from __future__ import annotations

import math

from ..diagnostics import ERROR, WARNING, Diagnostic, sort_diagnostics
from .model import ModelDocument, NetworkClass, NodeDecl, Ref, Transmit

MAX_DEPTH = 16
LITERAL_TOLERANCE = 1e-6


def resolution_diagnostics(doc: ModelDocument) -> list[Diagnostic]:
    diags = []
    seen: dict[str, NetworkClass] = {}
    for cls in doc.classes:
        if cls.name in seen:
            diags.append(Diagnostic(*cls.loc, "E_DUPLICATE_NAME", f"class {cls.name!r} declared twice"))
        else:
            seen[cls.name] = cls
        names: set[str] = set()
        for item in list(cls.nodes) + list(cls.instances):
            if item.name in names:
                diags.append(Diagnostic(*item.loc, "E_DUPLICATE_NAME",
                                        f"name {item.name!r} declared twice in class {cls.name!r}"))
            names.add(item.name)
        for inst in cls.instances:
            if inst.class_name not in {c.name for c in doc.classes}:
                diags.append(Diagnostic(*inst.loc, "E_UNKNOWN_CLASS",
                                        f"instance {inst.name!r} refers to undeclared class {inst.class_name!r}"))
    if doc.get(doc.root) is None:
        diags.append(Diagnostic(*doc.root_loc, "E_UNKNOWN_CLASS", f"root class {doc.root!r} is not declared"))
    return sort_diagnostics(diags)


def _class_cycle(doc: ModelDocument) -> list[Diagnostic]:
    graph = {c.name: [i.class_name for i in c.instances if doc.get(i.class_name)] for c in doc.classes}
    state: dict[str, int] = {}
    diags = []

    def visit(name: str, stack: list[str]):
        state[name] = 1
        for child in graph.get(name, []):
            if state.get(child) == 1:
                cycle = stack[stack.index(child):] + [child] if child in stack else [name, child]
                cls = doc.get(child)
                diags.append(Diagnostic(*cls.loc, "E_CLASS_CYCLE",
                                        "class instantiation cycle: " + " -> ".join(cycle)))
            elif child not in state:
                visit(child, stack + [child])
        state[name] = 2

    for c in doc.classes:
        if c.name not in state:
            visit(c.name, [c.name])
    return diags


def _depth(doc: ModelDocument, name: str, memo: dict[str, int]) -> int:
    if name not in memo:
        cls = doc.get(name)
        memo[name] = 1 + max((_depth(doc, i.class_name, memo) for i in cls.instances), default=0)
    return memo[name]


class _Resolver:
    def __init__(self, doc: ModelDocument):
        self.doc = doc

    def node_card(self, cls: NetworkClass, name: str, seen=frozenset()) -> int | None:
        node = cls.node(name)
        if node is None:
            return None
        if node.alias is not None:
            key = (cls.name, name)
            if key in seen:
                return None
            return self.ref_card(cls, node.alias, seen | {key})
        return len(node.states)

    def ref_card(self, cls: NetworkClass, ref: Ref, seen=frozenset()) -> int | None:
        if ref.instance is None:
            return self.node_card(cls, ref.name, seen)
        inst = cls.instance(ref.instance)
        if inst is None:
            return None
        sub = self.doc.get(inst.class_name)
        node = sub.node(ref.name) if sub else None
        if node is None or not node.is_output:
            return None
        return self.node_card(sub, ref.name, seen)

    def ref_problem(self, cls: NetworkClass, ref: Ref) -> Diagnostic | None:
        if ref.instance is None:
            if cls.node(ref.name) is None:
                return Diagnostic(*ref.loc, "E_UNKNOWN_NODE", f"unknown node {ref.name!r} in class {cls.name!r}")
            return None
        inst = cls.instance(ref.instance)
        if inst is None:
            return Diagnostic(*ref.loc, "E_UNKNOWN_NODE", f"unknown instance {ref.instance!r} in class {cls.name!r}")
        sub = self.doc.get(inst.class_name)
        node = sub.node(ref.name)
        if node is None or not node.is_output:
            return Diagnostic(*ref.loc, "E_NOT_AN_OUTPUT",
                              f"{ref} is not an output node of class {sub.name!r}")
        return None


def _check_node(res: _Resolver, cls: NetworkClass, node: NodeDecl) -> list[Diagnostic]:
    diags = []
    if node.alias is not None:
        if node.alias.instance is None:
            diags.append(Diagnostic(*node.loc, "E_BAD_ALIAS",
                                    f"alias {node.name!r} must name an instance output (instance.node)"))
        else:
            problem = res.ref_problem(cls, node.alias)
            if problem:
                diags.append(problem)
        return diags
    if len(node.states) < 2:
        diags.append(Diagnostic(*node.loc, "E_STATES", f"node {node.name!r} needs at least 2 states"))
    if len(set(node.states)) != len(node.states):
        diags.append(Diagnostic(*node.loc, "E_STATES", f"node {node.name!r} repeats a state label"))
    if node.is_input:
        return diags
    parent_cards = []
    for p in node.parents:
        problem = res.ref_problem(cls, p)
        if problem:
            diags.append(problem)
            parent_cards.append(None)
        else:
            parent_cards.append(res.ref_card(cls, p))
    if len({str(p) for p in node.parents}) != len(node.parents):
        diags.append(Diagnostic(*node.loc, "E_DUPLICATE_NAME", f"node {node.name!r} lists a parent twice"))
    if any(str(p) == node.name for p in node.parents):
        diags.append(Diagnostic(*node.loc, "E_NODE_CYCLE", f"node {node.name!r} is its own parent"))
    k = len(node.states)
    if isinstance(node.cpt, Transmit):
        if len(node.parents) != 1 or parent_cards[0] not in (None, k):
            diags.append(Diagnostic(*node.loc, "E_TRANSMIT",
                                    f"transmit() on {node.name!r} needs one parent with {k} states"))
        if not 0.0 <= node.cpt.rate < 1.0:
            diags.append(Diagnostic(*node.loc, "E_TRANSMIT", f"mutation rate {node.cpt.rate} outside [0, 1)"))
        return diags
    if None in parent_cards:
        return diags
    n_rows = math.prod(parent_cards)
    rows = node.cpt
    if len(rows) != n_rows or any(len(r) != k for r in rows):
        diags.append(Diagnostic(*node.loc, "E_CPT_SHAPE",
                                f"CPT of {node.name!r} needs {n_rows} row(s) of {k} entries"))
        return diags
    for i, row in enumerate(rows):
        if any(x < 0 or not math.isfinite(x) for x in row):
            diags.append(Diagnostic(*node.loc, "E_CPT_NEGATIVE",
                                    f"CPT of {node.name!r} row {i + 1} has a negative or non-finite entry"))
        elif abs(sum(row) - 1.0) > LITERAL_TOLERANCE:
            diags.append(Diagnostic(*node.loc, "E_CPT_NOT_NORMALIZED",
                                    f"CPT of {node.name!r} row {i + 1} sums to {sum(row):.6g}"))
    return diags


def _check_instances(res: _Resolver, cls: NetworkClass) -> list[Diagnostic]:
    diags = []
    for inst in cls.instances:
        sub = res.doc.get(inst.class_name)
        inputs = {n.name: n for n in sub.inputs}
        bound: set[str] = set()
        for b in inst.bindings:
            if b.input not in inputs:
                diags.append(Diagnostic(*b.loc, "E_UNKNOWN_INPUT",
                                        f"class {sub.name!r} has no input {b.input!r}"))
                continue
            if b.input in bound:
                diags.append(Diagnostic(*b.loc, "E_DUPLICATE_BINDING", f"input {b.input!r} bound twice"))
            bound.add(b.input)
            problem = res.ref_problem(cls, b.target)
            if problem:
                diags.append(problem)
                continue
            outer = res.ref_card(cls, b.target)
            inner = len(inputs[b.input].states)
            if outer is not None and outer != inner:
                diags.append(Diagnostic(*b.loc, "E_CARDINALITY_MISMATCH",
                                        f"{b.target} has {outer} states but input {b.input!r} expects {inner}"))
        for name in inputs:
            if name not in bound:
                diags.append(Diagnostic(*inst.loc, "E_UNBOUND_INPUT",
                                        f"instance {inst.name!r} leaves input {name!r} unbound"))
    return diags


def _local_cycles(cls: NetworkClass) -> list[Diagnostic]:
    deps = {n.name: [p.name for p in n.parents if p.instance is None] for n in cls.nodes}
    state: dict[str, int] = {}
    diags = []

    def visit(name):
        state[name] = 1
        for p in deps.get(name, []):
            if state.get(p) == 1:
                node = cls.node(name)
                diags.append(Diagnostic(*node.loc, "E_NODE_CYCLE",
                                        f"parent cycle through {name!r} and {p!r} in class {cls.name!r}"))
            elif p not in state:
                visit(p)
        state[name] = 2

    for n in deps:
        if n not in state:
            visit(n)
    return diags


def validate(doc: ModelDocument) -> list[Diagnostic]:
    """All diagnostics for a parsed document, in stable order; empty iff valid."""
    diags = resolution_diagnostics(doc)
    if diags:
        return diags
    diags = _class_cycle(doc)
    if diags:
        return sort_diagnostics(diags)
    memo: dict[str, int] = {}
    if _depth(doc, doc.root, memo) > MAX_DEPTH:
        diags.append(Diagnostic(*doc.root_loc, "E_DEPTH_EXCEEDED",
                                f"instantiation depth exceeds {MAX_DEPTH}"))
        return diags
    root = doc.root_class
    for n in root.inputs:
        diags.append(Diagnostic(*n.loc, "E_ROOT_INPUT",
                                f"root class {root.name!r} cannot declare input {n.name!r}"))
    res = _Resolver(doc)
    for cls in doc.classes:
        for node in cls.nodes:
            diags.extend(_check_node(res, cls, node))
        diags.extend(_check_instances(res, cls))
        diags.extend(_local_cycles(cls))
    reachable = set(memo)
    for cls in doc.classes:
        if cls.name not in reachable:
            diags.append(Diagnostic(*cls.loc, "W_UNUSED_CLASS",
                                    f"class {cls.name!r} is never instantiated", WARNING))
    if not any(d.severity == ERROR for d in diags):
        from .flatten import dependency_cycle

        cycle = dependency_cycle(doc)
        if cycle:
            diags.append(Diagnostic(*doc.root_loc, "E_NODE_CYCLE",
                                    "flattened network is cyclic: " + " -> ".join(cycle)))
    return sort_diagnostics(diags)
