"""Lexicon-driven concept tagging.

Input text is tokenized on whitespace, with hyphens, brackets and common
punctuation kept as boundary tokens.  Tokens the lexicon knows nothing
about are split into sub-word segments when every segment has a reading
(so "G12V" can become G / 12 / V), and hyphen-adjacent tokens are joined
back together when the joined surface is a lexicon entry ("K-Ras").
Digit runs always read as their numeric value.  All ambiguity is kept:
one span may carry many candidate concepts, and spans may overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from . import sexpr
from .logic import Constant, Expr, Nat, Numeral, from_sexpr, print_expr

_BOUNDARY_CHARS = set("-()[]{}.,;:!?")
_MAX_SEGMENT_LEN = 64


@dataclass(frozen=True)
class Token:
    surface: str
    start: int                       # character offsets into the原 text
    end: int
    parent: "Token | None" = None    # set on sub-word tokens

    def __repr__(self):
        return f"Token({self.surface!r}, {self.start}, {self.end})"


@dataclass(frozen=True)
class TagSpan:
    start: int                       # token indexes, [start, end)
    end: int
    concepts: tuple


@dataclass
class TagChart:
    text: str
    tokens: list
    spans: list

    def concepts_at(self, start: int, end: int) -> tuple:
        for span in self.spans:
            if span.start == start and span.end == end:
                return span.concepts
        return ()

    def token_concepts(self, i: int) -> tuple:
        return self.concepts_at(i, i + 1)


@dataclass(frozen=True)
class _Entry:
    surface: str
    exact_case: bool
    readings: tuple


class Lexicon:
    """Surface-form to concept map.  Single-character entries only match
    with their exact case; longer entries are case-insensitive unless
    flagged otherwise."""

    def __init__(self):
        self._exact: dict[str, list] = {}
        self._folded: dict[str, list] = {}
        self._multiword_lens: set[int] = set()

    def add(self, surface: str, readings: Iterable[Expr], exact_case: bool = False):
        if not surface:
            raise ValueError("empty lexicon surface")
        readings = tuple(readings)
        if not readings:
            raise ValueError(f"no readings for lexicon entry {surface!r}")
        if exact_case or len(surface) == 1:
            self._exact.setdefault(surface, []).extend(readings)
        else:
            self._folded.setdefault(surface.casefold(), []).extend(readings)
        if " " in surface:
            self._multiword_lens.add(surface.count(" ") + 1)

    def lookup(self, surface: str) -> tuple:
        """All readings for a surface form, deterministically ordered."""
        readings = list(self._exact.get(surface, ()))
        readings.extend(self._folded.get(surface.casefold(), ()))
        seen, out = set(), []
        for r in readings:
            if r not in seen:
                seen.add(r)
                out.append(r)
        return tuple(sorted(out, key=print_expr))

    @property
    def multiword_lengths(self) -> tuple:
        return tuple(sorted(self._multiword_lens))


class LexiconLoadError(Exception):
    def __init__(self, findings):
        super().__init__("; ".join(f.message for f in findings))
        self.findings = findings


def load_lexicon_lenient(paths: Iterable | None = None, *,
                         text: str | None = None) -> tuple:
    from .kb import Finding  # shared diagnostic record

    lex = Lexicon()
    findings: list = []
    sources = []
    if text is not None:
        sources.append(("<string>", text))
    for p in paths or ():
        p = Path(p)
        sources.append((str(p), p.read_text(encoding="utf-8")))
    for name, content in sources:
        try:
            forms = sexpr.parse_all(content, name)
        except sexpr.SexprError as err:
            findings.append(Finding("lex-syntax", f"{name}: {err}"))
            continue
        for form in forms:
            if not isinstance(form, sexpr.SexprList) or not form:
                findings.append(Finding("lex-form", f"stray atom {form!r}"))
                continue
            head = str(form[0]) if isinstance(form[0], sexpr.Symbol) else None
            if head == "lex":
                if len(form) < 3 or not isinstance(form[1], str) or isinstance(form[1], sexpr.Symbol):
                    findings.append(Finding("lex-form",
                                            '(lex "surface" Term ...) expected'))
                    continue
                exact = False
                symbols = []
                for item in form[2:]:
                    if isinstance(item, sexpr.Symbol) and str(item) == ":exact-case":
                        exact = True
                    elif isinstance(item, sexpr.Symbol):
                        symbols.append(Constant(str(item)))
                    else:
                        findings.append(Finding("lex-form",
                                                f"bad reading {item!r} for "
                                                f"{form[1]!r}"))
                if symbols:
                    lex.add(form[1], symbols, exact_case=exact)
            elif head == "lex-nat":
                if len(form) != 3 or not isinstance(form[1], str) or isinstance(form[1], sexpr.Symbol):
                    findings.append(Finding("lex-form",
                                            '(lex-nat "surface" EXPR) expected'))
                    continue
                try:
                    reading = from_sexpr(form[2])
                except Exception as err:
                    findings.append(Finding("lex-syntax", f"lex-nat: {err}"))
                    continue
                if not isinstance(reading, Nat):
                    findings.append(Finding("lex-form",
                                            f"lex-nat reading must be a function "
                                            f"term: {print_expr(reading)}"))
                    continue
                lex.add(form[1], (reading,))
            else:
                findings.append(Finding("lex-form", f"unknown form ({head} ...)"))
    return lex, findings


def load_lexicon(paths: Iterable | None = None, *, text: str | None = None) -> Lexicon:
    lex, findings = load_lexicon_lenient(paths, text=text)
    if findings:
        raise LexiconLoadError(findings)
    return lex


# ---------------------------------------------------------------------------
# Tokenization

def tokenize(text: str) -> list:
    """Whitespace split, then boundary characters become their own tokens."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        if text[i] in _BOUNDARY_CHARS:
            tokens.append(Token(text[i], i, i + 1))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in _BOUNDARY_CHARS:
            j += 1
        tokens.append(Token(text[i:j], i, j))
        i = j
    return tokens


def _is_digits(s: str) -> bool:
    return s.isascii() and s.isdigit()


def segment(surface: str, lexicon: Lexicon) -> list:
    """Decompositions of *surface* into consecutive segments where every
    segment is a lexicon hit or a maximal digit run.  Longest matches are
    preferred; decompositions with fewer pieces come first.  The trivial
    one-piece decomposition is never returned."""
    n = len(surface)
    if n < 2 or n > _MAX_SEGMENT_LEN:
        return []

    results: list = []

    def options(pos: int) -> list:
        opts = []
        if _is_digits(surface[pos]):
            j = pos
            while j < n and _is_digits(surface[j]):
                j += 1
            opts.append(surface[pos:j])
        for j in range(n, pos, -1):  # longest lexicon match first
            piece = surface[pos:j]
            if piece not in opts and lexicon.lookup(piece):
                opts.append(piece)
        opts.sort(key=len, reverse=True)
        return opts

    def rec(pos: int, acc: list):
        if pos == n:
            if len(acc) >= 2:
                results.append(list(acc))
            return
        for piece in options(pos):
            acc.append(piece)
            rec(pos + len(piece), acc)
            acc.pop()

    rec(0, [])
    results.sort(key=len)
    return results


def _readings(token: Token, lexicon: Lexicon) -> tuple:
    found = list(lexicon.lookup(token.surface))
    if _is_digits(token.surface):
        found.append(Numeral(Fraction(int(token.surface))))
    return tuple(found)


def _join_hyphenated(tokens: list, lexicon: Lexicon) -> list:
    """Reassemble hyphen-separated runs whose joined surface the lexicon
    knows, longest first."""
    out = []
    i = 0
    while i < len(tokens):
        joined = None
        # a run looks like word (- word)+ with adjacent character spans
        limit = i
        while (limit + 2 < len(tokens)
               and tokens[limit + 1].surface == "-"
               and tokens[limit].end == tokens[limit + 1].start
               and tokens[limit + 1].end == tokens[limit + 2].start):
            limit += 2
        for j in range(limit, i, -2):
            surface = "".join(t.surface for t in tokens[i:j + 1])
            if lexicon.lookup(surface):
                joined = Token(surface, tokens[i].start, tokens[j].end)
                i = j + 1
                break
        if joined is not None:
            out.append(joined)
        else:
            out.append(tokens[i])
            i += 1
    return out


def _split_unknown(tokens: list, lexicon: Lexicon) -> list:
    """Replace tokens without any reading by their preferred sub-word
    decomposition, when one exists."""
    out = []
    for tok in tokens:
        if lexicon.lookup(tok.surface) or _is_digits(tok.surface):
            out.append(tok)
            continue
        decompositions = segment(tok.surface, lexicon)
        usable = None
        for pieces in decompositions:
            if all(lexicon.lookup(p) or _is_digits(p) for p in pieces):
                usable = pieces
                break
        if usable is None:
            out.append(tok)
            continue
        offset = tok.start
        for piece in usable:
            out.append(Token(piece, offset, offset + len(piece), parent=tok))
            offset += len(piece)
    return out


def tag(text: str, lexicon: Lexicon) -> TagChart:
    """Tag *text* with every candidate concept the lexicon offers.  No
    consolidation: every reading of every span is kept."""
    tokens = tokenize(text)
    tokens = _join_hyphenated(tokens, lexicon)
    tokens = _split_unknown(tokens, lexicon)

    spans = []
    for i, tok in enumerate(tokens):
        readings = _readings(tok, lexicon)
        if readings:
            spans.append(TagSpan(i, i + 1, readings))
    for length in lexicon.multiword_lengths:
        for i in range(0, len(tokens) - length + 1):
            surface = " ".join(t.surface for t in tokens[i:i + length])
            readings = lexicon.lookup(surface)
            if readings:
                spans.append(TagSpan(i, i + length, tuple(readings)))
    spans.sort(key=lambda s: (s.start, s.end))
    return TagChart(text, tokens, spans)
