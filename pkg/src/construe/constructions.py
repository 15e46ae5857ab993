"""Construction data model, the construction-definition DSL, template
variant expansion, and the three-tier exact-match repository index.

A construction pairs one or more natural-language templates with exactly
one logic template, plus optional anaphoric slots, an output variable and
type, and positive/negative semantic tests:

    (construction :id color-of-thing
      :lang en
      :nl "$Color#0 $PartiallyTangible#1"
      :logic (SubcollectionOfWithRelationToFn $PartiallyTangible#1
                                              mainColorOfObject $Color#0)
      :output-type (slot 1))

Template strings are tokenized with the same rules as input text.  Square
brackets give alternatives: ``[a|b]`` matches "a" or "b", and ``{}`` (or a
trailing ``|``) adds an empty alternative, so ``[the{}]`` makes "the"
optional.  Alternatives may attach to a word ("place[d|]") or contain
several tokens.  The cross product of all alternatives is stored as
variants; each variant also gets a skeleton key (typed slots collapsed to
untyped placeholders) and a lexical key (the literal strings only).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import sexpr, tagger
from .kb import Finding, KnowledgeBase
from .logic import Constant, Expr, QueryVar, TypedVar, free_vars, from_sexpr


class ConstructionLoadError(Exception):
    def __init__(self, findings):
        super().__init__("; ".join(f"{f.code}: {f.message}" for f in findings))
        self.findings = findings


@dataclass(frozen=True)
class Literal:
    text: str

    @property
    def folded(self) -> str:
        return self.text.casefold()


@dataclass(frozen=True)
class TypedSlot:
    type: str
    index: int

    def __str__(self):
        return f"${self.type}#{self.index}"


@dataclass(frozen=True)
class Alternation:
    alternatives: tuple  # tuple of element sequences; a sequence may be empty


@dataclass(frozen=True)
class NlTemplate:
    language: str
    elements: tuple


@dataclass(frozen=True)
class TemplateVariant:
    construction_id: str
    language: str
    elements: tuple  # Literal | TypedSlot only

    @property
    def slots(self) -> tuple:
        return tuple(e for e in self.elements if isinstance(e, TypedSlot))


SKELETON_SLOT = None  # placeholder marking a collapsed typed variable


def derive_keys(variant: TemplateVariant) -> tuple:
    """(skeleton key, lexical key) for a variant.  Typed variables collapse
    to untyped placeholders in the skeleton and disappear from the lexical
    key; literals are case-folded."""
    skeleton = tuple(SKELETON_SLOT if isinstance(e, TypedSlot) else e.folded
                     for e in variant.elements)
    lexical = tuple(e.folded for e in variant.elements if isinstance(e, Literal))
    return skeleton, lexical


def typed_key(variant: TemplateVariant) -> tuple:
    return tuple(("type", e.type) if isinstance(e, TypedSlot) else ("lit", e.folded)
                 for e in variant.elements)


@dataclass(frozen=True)
class Construction:
    id: str
    nl_templates: tuple
    logic_template: Expr
    anaphoric_refs: tuple = ()
    output_var: QueryVar | None = None
    output_type: object = None          # TermId string, ("slot", k), or None
    tests_positive: tuple = ()
    tests_negative: tuple = ()

    def nl_slots(self) -> set:
        found: set = set()

        def walk(elements):
            for e in elements:
                if isinstance(e, TypedSlot):
                    found.add(e)
                elif isinstance(e, Alternation):
                    for alt in e.alternatives:
                        walk(alt)

        for t in self.nl_templates:
            walk(t.elements)
        return found

    def all_slots(self) -> set:
        return self.nl_slots() | set(self.anaphoric_refs)


# ---------------------------------------------------------------------------
# Template string parsing

_SLOT_RE = re.compile(r"\$([A-Za-z][A-Za-z0-9_'-]*)#(\d+)")


class _TemplateError(Exception):
    pass


def _split_chunks(s: str) -> list:
    chunks, buf, depth = [], [], 0
    for ch in s:
        if ch == "[":
            depth += 1
            buf.append(ch)
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise _TemplateError("unbalanced ']' in template")
            buf.append(ch)
        elif ch.isspace() and depth == 0:
            if buf:
                chunks.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    if depth != 0:
        raise _TemplateError("unbalanced '[' in template")
    if buf:
        chunks.append("".join(buf))
    return chunks


def _parse_plain(piece: str) -> list:
    """Elements of bracket-free template text: typed slots and literal
    tokens, segmented exactly like input text."""
    elements: list = []
    pos = 0

    def literal_run(text):
        if "$" in text:
            raise _TemplateError(f"unreadable typed variable in {piece!r}")
        return [Literal(t.surface) for t in tagger.tokenize(text)]

    for m in _SLOT_RE.finditer(piece):
        elements.extend(literal_run(piece[pos:m.start()]))
        elements.append(TypedSlot(m.group(1), int(m.group(2))))
        pos = m.end()
    elements.extend(literal_run(piece[pos:]))
    return elements


def _chunk_alternative_strings(chunk: str) -> list | None:
    """Expand the bracket groups of one whitespace-delimited chunk into the
    full list of alternative strings, or None when the chunk has none."""
    if "[" not in chunk:
        return None
    parts = []
    i = 0
    while i < len(chunk):
        if chunk[i] == "[":
            j = chunk.index("]", i)
            if "[" in chunk[i + 1:j]:
                raise _TemplateError(f"nested alternation in {chunk!r}")
            body = chunk[i + 1:j].replace("{}", "|")
            alts = [a.strip() for a in body.split("|")]
            seen, uniq = set(), []
            for a in alts:
                if a not in seen:
                    seen.add(a)
                    uniq.append(a)
            parts.append(uniq)
            i = j + 1
        else:
            j = i
            while j < len(chunk) and chunk[j] != "[":
                j += 1
            parts.append([chunk[i:j]])
            i = j
    return ["".join(combo) for combo in itertools.product(*parts)]


def parse_template(text: str, language: str) -> NlTemplate:
    elements: list = []
    for chunk in _split_chunks(text):
        alt_strings = _chunk_alternative_strings(chunk)
        if alt_strings is None:
            elements.extend(_parse_plain(chunk))
        else:
            alternatives = tuple(tuple(_parse_plain(a)) for a in alt_strings)
            elements.append(Alternation(alternatives))
    if not elements:
        raise _TemplateError("empty template")
    return NlTemplate(language, tuple(elements))


def expand_variants(c: Construction) -> list:
    """All stored variants of a construction: the cross product of every
    alternation, for every language template."""
    out = []
    for template in c.nl_templates:
        choice_sets = []
        for e in template.elements:
            if isinstance(e, Alternation):
                choice_sets.append(list(e.alternatives))
            else:
                choice_sets.append([(e,)])
        for combo in itertools.product(*choice_sets):
            elements = tuple(itertools.chain.from_iterable(combo))
            out.append(TemplateVariant(c.id, template.language, elements))
    return out


# ---------------------------------------------------------------------------
# DSL loading

def _slot_occurrences(e: Expr) -> set:
    return {TypedSlot(v.type, v.index) for v in free_vars(e)
            if isinstance(v, TypedVar)}


def _validate(c: Construction, sink: list) -> bool:
    ok = True

    def err(code, msg):
        nonlocal ok
        ok = False
        sink.append(Finding(code, f"construction {c.id}: {msg}"))

    nl = c.nl_slots()
    anaphoric = set(c.anaphoric_refs)
    bound = nl | anaphoric
    # one unifying integer names one slot
    by_index: dict = {}
    for s in bound | _slot_occurrences(c.logic_template):
        prior = by_index.setdefault(s.index, s)
        if prior != s:
            err("cons-slot-index",
                f"unifying integer {s.index} names both {prior} and {s}")
    if anaphoric & nl:
        overlap = ", ".join(str(s) for s in sorted(anaphoric & nl, key=str))
        err("cons-anaphoric", f"anaphoric slots also occur in a template: {overlap}")
    for s in sorted(_slot_occurrences(c.logic_template), key=str):
        if s not in bound:
            err("cons-unbound-slot",
                f"{s} in the logic template is neither a template slot nor "
                "an anaphoric reference")
    for label, tests in (("test+", c.tests_positive), ("test-", c.tests_negative)):
        for t in tests:
            for s in sorted(_slot_occurrences(t), key=str):
                if s not in bound:
                    err("cons-unbound-slot", f"{s} in a {label} is unbound")
    if c.output_var is not None:
        if c.output_var not in free_vars(c.logic_template):
            err("cons-output-var",
                f"output variable ?{c.output_var.name} does not occur free in "
                "the logic template")
    if isinstance(c.output_type, tuple):
        k = c.output_type[1]
        if k not in {s.index for s in bound}:
            err("cons-output-type", f"output type refers to unknown slot #{k}")
    for v in expand_variants(c):
        if not v.elements:
            err("cons-empty-variant", "an alternation choice leaves a variant empty")
            break
        slots = [e for e in v.elements if isinstance(e, TypedSlot)]
        if len(slots) != len(set(slots)):
            err("cons-duplicate-slot", "a variant uses the same slot twice")
            break
    return ok


def _parse_form(form, sink: list) -> Construction | None:
    def err(code, msg):
        sink.append(Finding(code, msg))

    if not isinstance(form, sexpr.SexprList) or not form \
            or str(form[0]) != "construction":
        err("cons-form", "expected a (construction ...) form")
        return None
    items = list(form[1:])
    cid = None
    lang = "en"
    templates: list = []
    logic_template = None
    logic_count = 0
    anaphoric: list = []
    output_var = None
    output_type = None
    tests_pos: list = []
    tests_neg: list = []
    i = 0
    while i < len(items):
        key = items[i]
        if not (isinstance(key, sexpr.Symbol) and str(key).startswith(":")):
            err("cons-form", f"expected a :keyword, got {key!r}")
            return None
        if i + 1 >= len(items):
            err("cons-form", f"{key} is missing its value")
            return None
        value = items[i + 1]
        i += 2
        k = str(key)
        if k == ":id":
            cid = str(value)
        elif k == ":lang":
            lang = str(value)
        elif k == ":nl":
            if isinstance(value, sexpr.Symbol) or not isinstance(value, str):
                err("cons-form", ":nl takes a quoted template string")
                return None
            try:
                templates.append(parse_template(value, lang))
            except _TemplateError as terr:
                err("cons-template", f"{cid or '?'}: {terr}")
                return None
        elif k == ":logic":
            logic_count += 1
            try:
                logic_template = from_sexpr(value)
            except Exception as lerr:
                err("cons-syntax", f"{cid or '?'}: bad logic template: {lerr}")
                return None
        elif k == ":anaphoric":
            if not isinstance(value, sexpr.SexprList):
                err("cons-form", ":anaphoric takes a list of typed variables")
                return None
            for item in value:
                try:
                    v = from_sexpr(item)
                except Exception as aerr:
                    err("cons-syntax", f"{cid or '?'}: {aerr}")
                    return None
                if not isinstance(v, TypedVar):
                    err("cons-form", f"{cid or '?'}: anaphoric entries must be "
                                     "typed variables")
                    return None
                anaphoric.append(TypedSlot(v.type, v.index))
        elif k == ":output-var":
            v = from_sexpr(value)
            if not isinstance(v, QueryVar):
                err("cons-form", f"{cid or '?'}: :output-var takes a query variable")
                return None
            output_var = v
        elif k == ":output-type":
            if isinstance(value, sexpr.SexprList):
                if (len(value) == 2 and str(value[0]) == "slot"
                        and not isinstance(value[1], sexpr.Symbol)):
                    output_type = ("slot", int(value[1]))
                else:
                    err("cons-form", f"{cid or '?'}: :output-type takes a term "
                                     "or (slot k)")
                    return None
            elif isinstance(value, sexpr.Symbol):
                output_type = str(value)
            else:
                err("cons-form", f"{cid or '?'}: bad :output-type")
                return None
        elif k in (":test+", ":test-"):
            try:
                t = from_sexpr(value)
            except Exception as terr:
                err("cons-syntax", f"{cid or '?'}: bad {k}: {terr}")
                return None
            (tests_pos if k == ":test+" else tests_neg).append(t)
        else:
            err("cons-form", f"unknown key {k}")
            return None
    if cid is None:
        err("cons-form", "construction without :id")
        return None
    if not templates:
        err("cons-form", f"construction {cid}: at least one :nl template required")
        return None
    if logic_count == 0:
        err("cons-no-logic", f"construction {cid}: missing logic template")
        return None
    if logic_count > 1:
        err("cons-two-logic",
            f"construction {cid}: exactly one logic template is allowed, "
            f"found {logic_count}")
        return None
    c = Construction(cid, tuple(templates), logic_template, tuple(anaphoric),
                     output_var, output_type, tuple(tests_pos), tuple(tests_neg))
    if not _validate(c, sink):
        return None
    return c


def parse_construction(dsl_text: str) -> Construction:
    """Parse one (construction ...) form, enforcing every invariant."""
    sink: list = []
    try:
        form = sexpr.parse_one(dsl_text)
    except sexpr.SexprError as err:
        raise ConstructionLoadError([Finding("cons-syntax", str(err))]) from err
    c = _parse_form(form, sink)
    if c is None:
        raise ConstructionLoadError(sink)
    return c


class Repository:
    """Constructions plus the lexical / skeleton / typed lookup tiers.
    Immutable once loaded; lookups are safe for concurrent use."""

    def __init__(self):
        self.constructions: dict[str, Construction] = {}
        self.variants: list[TemplateVariant] = []
        self._lexical: dict = {}
        self._skeleton: dict = {}
        self._typed: dict = {}
        self._used_types: set = set()

    @property
    def used_types(self) -> frozenset:
        return frozenset(self._used_types)

    def add(self, c: Construction):
        if c.id in self.constructions:
            raise ConstructionLoadError(
                [Finding("cons-duplicate-id", f"construction {c.id} defined twice")])
        self.constructions[c.id] = c
        for s in c.all_slots():
            self._used_types.add(s.type)
        for v in expand_variants(c):
            self.variants.append(v)
            skeleton, lexical = derive_keys(v)
            self._lexical.setdefault((v.language, lexical), []).append(v)
            self._skeleton.setdefault((v.language, skeleton), []).append(v)
            self._typed.setdefault((v.language, typed_key(v)), []).append(v)

    def lookup(self, tier: str, key: tuple, language: str = "en") -> frozenset:
        """Exact-match retrieval on one tier; empty set when nothing
        matches."""
        index = {"lexical": self._lexical, "skeleton": self._skeleton,
                 "typed": self._typed}[tier]
        return frozenset(index.get((language, tuple(key)), ()))

    def languages(self) -> frozenset:
        return frozenset(v.language for v in self.variants)


def load_constructions_lenient(paths: Iterable | None = None, *,
                               text: str | None = None) -> tuple:
    repo = Repository()
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
            findings.append(Finding("cons-syntax", f"{name}: {err}"))
            continue
        for form in forms:
            c = _parse_form(form, findings)
            if c is None:
                continue
            try:
                repo.add(c)
            except ConstructionLoadError as err:
                findings.extend(err.findings)
    return repo, findings


def load_constructions(paths: Iterable | None = None, *,
                       text: str | None = None) -> Repository:
    repo, findings = load_constructions_lenient(paths, text=text)
    if findings:
        raise ConstructionLoadError(findings)
    return repo


def lint_constructions(repo: Repository, kb: KnowledgeBase) -> list:
    """Checks that need the KB: every slot type must resolve to a known
    term, or no text can ever satisfy the slot."""
    findings = []
    for cid in sorted(repo.constructions):
        c = repo.constructions[cid]
        for s in sorted(c.all_slots(), key=str):
            if not kb.known(Constant(s.type)):
                findings.append(Finding(
                    "cons-unknown-type",
                    f"construction {cid}: slot type {s.type} is not in the KB"))
    return findings
