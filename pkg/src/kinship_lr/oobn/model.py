"""Syntax tree of a network-fragment document.

Locations are carried for diagnostics but excluded from equality, so two
documents compare equal when they are structurally the same.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

Loc = tuple[int, int]


@dataclass(frozen=True)
class Ref:
    """A node reference: ``name`` or ``instance.output``."""

    name: str
    instance: Optional[str] = None
    loc: Loc = field(default=(0, 0), compare=False)

    def __str__(self):
        return f"{self.instance}.{self.name}" if self.instance else self.name


@dataclass(frozen=True)
class Transmit:
    """Built-in CPT generator: unchanged copy of the parent with uniform mutation."""

    rate: float


@dataclass(frozen=True)
class NodeDecl:
    name: str
    kind: str  # "input", "node" or "output"
    states: tuple[str, ...] = ()
    parents: tuple[Ref, ...] = ()
    cpt: tuple[tuple[float, ...], ...] | Transmit | None = None
    alias: Optional[Ref] = None
    loc: Loc = field(default=(0, 0), compare=False)

    @property
    def is_input(self) -> bool:
        return self.kind == "input"

    @property
    def is_output(self) -> bool:
        return self.kind == "output"


@dataclass(frozen=True)
class Binding:
    input: str
    target: Ref
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class InstanceDecl:
    name: str
    class_name: str
    bindings: tuple[Binding, ...] = ()
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class NetworkClass:
    name: str
    nodes: tuple[NodeDecl, ...] = ()
    instances: tuple[InstanceDecl, ...] = ()
    loc: Loc = field(default=(0, 0), compare=False)

    @property
    def inputs(self) -> list[NodeDecl]:
        return [n for n in self.nodes if n.is_input]

    @property
    def outputs(self) -> list[NodeDecl]:
        return [n for n in self.nodes if n.is_output]

    @property
    def internals(self) -> list[NodeDecl]:
        return [n for n in self.nodes if n.kind == "node"]

    def node(self, name: str) -> NodeDecl | None:
        for n in self.nodes:
            if n.name == name:
                return n
        return None

    def instance(self, name: str) -> InstanceDecl | None:
        for inst in self.instances:
            if inst.name == name:
                return inst
        return None


@dataclass(frozen=True)
class ModelDocument:
    classes: tuple[NetworkClass, ...]
    root: str
    root_loc: Loc = field(default=(0, 0), compare=False)

    def get(self, name: str) -> NetworkClass | None:
        for c in self.classes:
            if c.name == name:
                return c
        return None

    @property
    def root_class(self) -> NetworkClass:
        cls = self.get(self.root)
        if cls is None:
            raise KeyError(f"root class {self.root!r} is not declared")
        return cls
