"""Compile a document of network classes into one flat :class:`Network`.

Variables are named by their instance path, dot-joined (``dna.mother``); the
root class contributes bare names.  An input node never becomes a variable of
its own: every use of it refers to the bound outer variable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diagnostics import has_errors
from ..factors import DiscreteVariable, Factor, Network
from ..pedigree import transmit_cpt
from .model import ModelDocument, NetworkClass, Ref, Transmit


def qualify(path: str, name: str) -> str:
    return f"{path}.{name}" if path else name


@dataclass
class _Pending:
    vid: str
    states: tuple[str, ...]
    parents: list[str]
    cpt: object


class _Flattener:
    def __init__(self, doc: ModelDocument):
        self.doc = doc
        self.pending: list[_Pending] = []
        self.aliases: dict[str, str] = {}

    def resolve(self, cls: NetworkClass, path: str, env: dict[str, str], ref: Ref) -> str:
        if ref.instance is None:
            node = cls.node(ref.name)
            if node.is_input:
                return env[ref.name]
            if node.alias is not None:
                return self.resolve(cls, path, env, node.alias)
            return qualify(path, ref.name)
        inst = cls.instance(ref.instance)
        sub = self.doc.get(inst.class_name)
        sub_env = {b.input: self.resolve(cls, path, env, b.target) for b in inst.bindings}
        return self.resolve(sub, qualify(path, inst.name), sub_env, Ref(ref.name))

    def instantiate(self, cls: NetworkClass, path: str, env: dict[str, str]):
        for node in cls.nodes:
            if node.alias is not None:
                self.aliases[qualify(path, node.name)] = self.resolve(cls, path, env, node.alias)
            if node.is_input or node.alias is not None:
                continue
            parents = [self.resolve(cls, path, env, p) for p in node.parents]
            self.pending.append(_Pending(qualify(path, node.name), node.states, parents, node.cpt))
        for inst in cls.instances:
            sub = self.doc.get(inst.class_name)
            sub_env = {b.input: self.resolve(cls, path, env, b.target) for b in inst.bindings}
            self.instantiate(sub, qualify(path, inst.name), sub_env)


def _collect(doc: ModelDocument) -> _Flattener:
    fl = _Flattener(doc)
    fl.instantiate(doc.root_class, "", {})
    return fl


def dependency_cycle(doc: ModelDocument) -> list[str]:
    """A parent cycle in the flattened graph, or an empty list."""
    deps = {p.vid: p.parents for p in _collect(doc).pending}
    state: dict[str, int] = {}

    def visit(v, stack):
        state[v] = 1
        for p in deps.get(v, []):
            if state.get(p) == 1:
                return stack[stack.index(p):] + [p]
            if p not in state:
                found = visit(p, stack + [p])
                if found:
                    return found
        state[v] = 2
        return []

    for v in deps:
        if v not in state:
            found = visit(v, [v])
            if found:
                return found
    return []


def flatten(doc: ModelDocument) -> Network:
    """Flatten a validated document into a factor-core network.

    Alias nodes (``node x = inst.out;``) are not variables; their qualified
    names are kept in ``Network.aliases`` so evidence can use either name.

    Literal CPT rows are renormalized exactly (they are typed decimals and
    only need to sum to one within 1e-6).
    """
    from .checks import validate

    if has_errors(validate(doc)):
        raise ValueError("document has validation errors; run validate() first")
    fl = _collect(doc)
    pending = fl.pending
    states = {p.vid: p.states for p in pending}
    variables = [DiscreteVariable(p.vid, p.states) for p in pending]
    cpts = {}
    for p in pending:
        k = len(p.states)
        shape = [len(states[u]) for u in p.parents] + [k]
        if isinstance(p.cpt, Transmit):
            table = transmit_cpt(p.cpt.rate, k)
        else:
            table = np.array(p.cpt, dtype=float).reshape(shape)
            table = table / table.sum(axis=-1, keepdims=True)
        cpts[p.vid] = Factor(p.parents + [p.vid], table.reshape(shape))
    return Network(variables, cpts, aliases=fl.aliases)
