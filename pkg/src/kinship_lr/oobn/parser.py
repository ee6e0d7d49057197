"""Lexer and recursive-descent parser for ``.oobn`` documents.

See ``docs/oobn-grammar.md`` for the grammar.  :func:`parse` either returns a
:class:`ModelDocument` or raises :class:`OOBNParseError` carrying located
diagnostics; it never lets a malformed document escape as another exception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..diagnostics import Diagnostic, sort_diagnostics
from .model import Binding, InstanceDecl, ModelDocument, NetworkClass, NodeDecl, Ref, Transmit

KEYWORDS = {"class", "input", "node", "output", "parents", "cpt", "transmit", "instance", "network"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<string>"[^"\n]*")
  | (?P<punct>[{}\[\]();:,.=|])
    """,
    re.VERBOSE | re.UNICODE,
)


class OOBNParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sort_diagnostics(diagnostics)
        super().__init__("; ".join(f"{d.line}:{d.column} {d.code} {d.message}" for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, number, string, punct, eof
    text: str
    line: int
    column: int

    @property
    def loc(self):
        return (self.line, self.column)


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    pos, line, line_start = 0, 1, 0
    source = source.replace("\r\n", "\n").replace("\r", "\n")
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            ch = source[pos]
            if ch == '"':
                diags.append(Diagnostic(line, col, "E_LEX", "unterminated string"))
                end = source.find("\n", pos)
                pos = len(source) if end < 0 else end
            else:
                diags.append(Diagnostic(line, col, "E_LEX", f"unexpected character {ch!r}"))
                pos += 1
            continue
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, line, col))
        elif kind == "string":
            tokens.append(Token("string", text[1:-1], line, col))
        elif kind in ("number", "punct"):
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens, diags


class _SyntaxError(Exception):
    def __init__(self, token: Token, message: str):
        self.diagnostic = Diagnostic(token.line, token.column, "E_SYNTAX", message)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def accept(self, text: str) -> Token | None:
        tok = self.tok
        if tok.kind in ("punct", "keyword") and tok.text == text:
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise _SyntaxError(self.tok, f"expected {text!r}, found {self._describe(self.tok)}")
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise _SyntaxError(tok, f"expected {what}, found {self._describe(tok)}")
        self.i += 1
        return tok

    def number(self) -> float:
        tok = self.tok
        if tok.kind != "number":
            raise _SyntaxError(tok, f"expected a number, found {self._describe(tok)}")
        self.i += 1
        return float(tok.text)

    def document(self) -> ModelDocument:
        classes = []
        while self.tok.kind == "keyword" and self.tok.text == "class":
            classes.append(self.class_decl())
        net = self.expect("network")
        root = self.ident("root class name")
        self.expect(";")
        if self.tok.kind != "eof":
            raise _SyntaxError(self.tok, f"unexpected {self._describe(self.tok)} after network declaration")
        del net
        return ModelDocument(tuple(classes), root.text, root.loc)

    def class_decl(self) -> NetworkClass:
        kw = self.expect("class")
        name = self.ident("class name")
        self.expect("{")
        nodes, instances = [], []
        while not self.accept("}"):
            tok = self.tok
            if tok.kind == "eof":
                raise _SyntaxError(tok, f"unterminated class {name.text!r}")
            if self.accept("instance"):
                instances.append(self.instance_decl(tok))
            elif tok.text in ("input", "output", "node") and tok.kind == "keyword":
                nodes.append(self.node_decl())
            else:
                raise _SyntaxError(tok, f"expected a node or instance declaration, found {self._describe(tok)}")
        return NetworkClass(name.text, tuple(nodes), tuple(instances), kw.loc)

    def labels(self) -> tuple[str, ...]:
        self.expect("[")
        out = [self.label()]
        while self.accept(","):
            out.append(self.label())
        self.expect("]")
        return tuple(out)

    def label(self) -> str:
        tok = self.tok
        if tok.kind in ("ident", "string", "number", "keyword"):
            self.i += 1
            return tok.text
        raise _SyntaxError(tok, f"expected a state label, found {self._describe(tok)}")

    def ref(self) -> Ref:
        first = self.ident("node name")
        if self.accept("."):
            second = self.ident("output node name")
            return Ref(second.text, first.text, first.loc)
        return Ref(first.text, None, first.loc)

    def node_decl(self) -> NodeDecl:
        start = self.tok
        kind = "node"
        if self.accept("input"):
            kind = "input"
        elif self.accept("output"):
            kind = "output"
        self.expect("node")
        name = self.ident("node name")
        if kind != "input" and self.accept("="):
            alias = self.ref()
            self.expect(";")
            return NodeDecl(name.text, kind, alias=alias, loc=start.loc)
        self.expect(":")
        states = self.labels()
        if kind == "input":
            self.expect(";")
            return NodeDecl(name.text, kind, states, loc=start.loc)
        self.accept("|")
        parents: list[Ref] = []
        if self.accept("parents"):
            self.expect("(")
            parents.append(self.ref())
            while self.accept(","):
                parents.append(self.ref())
            self.expect(")")
        self.expect("cpt")
        if self.accept("transmit"):
            self.expect("(")
            cpt = Transmit(self.number())
            self.expect(")")
        else:
            cpt = self.table()
        self.expect(";")
        return NodeDecl(name.text, kind, states, tuple(parents), cpt, loc=start.loc)

    def table(self) -> tuple[tuple[float, ...], ...]:
        self.expect("{")
        rows: list[tuple[float, ...]] = []
        row: list[float] = []
        while True:
            if self.accept("}"):
                break
            if self.accept(";"):
                if not row:
                    raise _SyntaxError(self.tokens[self.i - 1], "empty CPT row")
                rows.append(tuple(row))
                row = []
                continue
            if row and self.accept(","):
                pass
            row.append(self.number())
        if row:
            rows.append(tuple(row))
        if not rows:
            raise _SyntaxError(self.tokens[self.i - 1], "empty CPT")
        return tuple(rows)

    def instance_decl(self, kw: Token) -> InstanceDecl:
        name = self.ident("instance name")
        self.expect(":")
        cls = self.ident("class name")
        self.expect("(")
        bindings = []
        if not self.accept(")"):
            while True:
                inp = self.ident("input name")
                self.expect("=")
                bindings.append(Binding(inp.text, self.ref(), inp.loc))
                if self.accept(")"):
                    break
                self.expect(",")
        self.expect(";")
        return InstanceDecl(name.text, cls.text, tuple(bindings), kw.loc)


def parse(source: str) -> ModelDocument:
    """Parse and name-resolve a document, raising :class:`OOBNParseError` on failure."""
    from .checks import resolution_diagnostics

    tokens, diags = tokenize(source)
    if diags:
        raise OOBNParseError(diags)
    try:
        doc = _Parser(tokens).document()
    except _SyntaxError as exc:
        raise OOBNParseError([exc.diagnostic]) from None
    errors = [d for d in resolution_diagnostics(doc) if d.is_error]
    if errors:
        raise OOBNParseError(errors)
    return doc


def parse_file(path) -> ModelDocument:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
