"""Minimal s-expression reader shared by the expression, knowledge-base,
lexicon and construction-file parsers."""

from __future__ import annotations

import re
from fractions import Fraction


class SexprError(Exception):
    """Malformed s-expression input."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


class Symbol(str):
    """Bare identifier token. Compares as its string value; carries a
    source position for error reporting."""

    line = 0
    col = 0

    def __new__(cls, value, line=0, col=0):
        obj = super().__new__(cls, value)
        obj.line = line
        obj.col = col
        return obj


class SexprList(list):
    """Parenthesized form. A plain list with a source position."""

    line = 0
    col = 0


_NUMBER_RE = re.compile(r"^[+-]?\d+(/\d+)?$|^[+-]?\d+\.\d+$")
_DELIMS = set('()";')


def _tokenize(text: str, source: str):
    line, col = 1, 0
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 0
            i += 1
            continue
        col += 1
        if ch.isspace():
            i += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield (ch, None, line, col)
            i += 1
            continue
        if ch == "¬":  # negation sign, accepted as a prefix alias
            yield ("neg", None, line, col)
            i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            buf = []
            while i < n and text[i] != '"':
                c = text[i]
                if c == "\\" and i + 1 < n:
                    i += 1
                    c = {"n": "\n", "t": "\t"}.get(text[i], text[i])
                if c == "\n":
                    line += 1
                    col = 0
                buf.append(c)
                i += 1
                col += 1
            if i >= n:
                raise SexprError("unterminated string", start_line, start_col)
            i += 1
            col += 1
            yield ("str", "".join(buf), start_line, start_col)
            continue
        start_line, start_col = line, col
        j = i
        while j < n and not text[j].isspace() and text[j] not in _DELIMS and text[j] != "¬":
            j += 1
        tok = text[i:j]
        col += len(tok) - 1
        i = j
        yield ("atom", tok, start_line, start_col)


def _atom(tok: str, line: int, col: int):
    if _NUMBER_RE.match(tok):
        return Fraction(tok)
    return Symbol(tok, line, col)


class _Reader:
    def __init__(self, text: str, source: str):
        self.tokens = list(_tokenize(text, source))
        self.pos = 0
        self.source = source

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def read(self):
        tok = self._peek()
        if tok is None:
            return None
        kind, value, line, col = tok
        self.pos += 1
        if kind == "atom":
            return _atom(value, line, col)
        if kind == "str":
            return value
        if kind == "neg":
            inner = self.read()
            if inner is None:
                raise SexprError("dangling negation sign", line, col)
            form = SexprList([Symbol("not", line, col), inner])
            form.line, form.col = line, col
            return form
        if kind == "(":
            items = SexprList()
            items.line, items.col = line, col
            while True:
                nxt = self._peek()
                if nxt is None:
                    raise SexprError("unbalanced parenthesis", line, col)
                if nxt[0] == ")":
                    self.pos += 1
                    return items
                items.append(self.read())
        raise SexprError("unexpected ')'", line, col)


def parse_all(text: str, source: str = "<string>") -> list:
    """Read every top-level form in *text*."""
    reader = _Reader(text, source)
    forms = []
    while True:
        form = reader.read()
        if form is None:
            return forms
        forms.append(form)


def parse_one(text: str, source: str = "<string>"):
    """Read exactly one form; trailing content is an error."""
    forms = parse_all(text, source)
    if len(forms) != 1:
        raise SexprError(f"expected exactly one form, found {len(forms)}", 1, 1)
    return forms[0]
