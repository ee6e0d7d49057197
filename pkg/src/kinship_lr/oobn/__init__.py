"""Object-oriented network fragments: parse, validate, flatten."""

from .checks import MAX_DEPTH, validate
from .flatten import flatten, qualify
from .model import Binding, InstanceDecl, ModelDocument, NetworkClass, NodeDecl, Ref, Transmit
from .parser import OOBNParseError, parse, parse_file, tokenize
from .printer import format_document

__all__ = [
    "Binding",
    "InstanceDecl",
    "MAX_DEPTH",
    "ModelDocument",
    "NetworkClass",
    "NodeDecl",
    "OOBNParseError",
    "Ref",
    "Transmit",
    "flatten",
    "format_document",
    "parse",
    "parse_file",
    "qualify",
    "tokenize",
    "validate",
]
