"""Miniature knowledge base: taxonomy queries over isa/genls links,
ground-fact lookup with subsumption, function result typing, and the
argument/inter-argument/disjointness constraint machinery used by semantic
tests and plausibility checks.

The KB file format is an s-expression file.  Top-level forms:

    (isa specific general)
    (genls specific general)
    (fact CTX (pred arg ...))
    (fn Functor ARITY (resultIsa C) | (resultGenls C) | (resultGenlsArg n))
    (argIsa pred-or-functor N C)
    (argGenls pred-or-functor N C)
    (interArgGenls pred N1 C1 N2 C2)
    (disjoint C1 C2)
    (individual t)
    (collection t)

Comments start with ';'.  A KB is immutable once loaded; every query is
safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from . import sexpr
from .logic import (App, And, Constant, Exists, Expr, Kappa, Nat, Not,
                    Numeral, Text, TheSetOf, TypedVar, QueryVar, free_vars,
                    from_sexpr, print_expr)

TermLike = (Constant, Nat)


class UnknownTermError(Exception):
    pass


class UntypedTermError(Exception):
    pass


class KbLoadError(Exception):
    def __init__(self, findings):
        super().__init__("; ".join(f"{f.code}: {f.message}" for f in findings))
        self.findings = findings


@dataclass(frozen=True)
class Finding:
    """One diagnostic from loading or linting."""

    code: str
    message: str


@dataclass(frozen=True)
class FunctionSignature:
    functor: str
    arity: int
    rule_kind: str          # resultIsa | resultGenls | resultGenlsArg
    rule_value: object      # collection name, or 1-based argument index


@dataclass(frozen=True)
class ArgConstraint:
    owner: str
    position: int
    kind: str               # argIsa | argGenls
    required: str


@dataclass(frozen=True)
class InterArgConstraint:
    owner: str
    if_position: int
    if_type: str
    then_position: int
    then_type: str


@dataclass(frozen=True)
class ContextStack:
    """Base assertion context plus an optional application overlay that
    inherits everything in the base."""

    base: str = "base"
    overlay: str | None = None

    def stack(self) -> tuple:
        return (self.overlay, self.base) if self.overlay else (self.base,)


DEFAULT_CONTEXT = ContextStack()

_ISA = Constant("isa")
_GENLS = Constant("genls")
_EQUALS = Constant("equals")


@dataclass(frozen=True)
class Violation:
    kind: str               # structural | arg-isa | arg-genls |
                            # instance-vs-specialization | inter-arg | known-false
    path: tuple
    message: str


def _is_term(e: Expr) -> bool:
    return isinstance(e, TermLike)


class KnowledgeBase:
    def __init__(self):
        self._declared: dict[str, str] = {}
        self._collection_evidence: set[str] = set()
        self._individual_evidence: set[str] = set()
        self._terms: set[str] = set()
        self._isa: dict[Expr, list] = {}
        self._genls: dict[Expr, list] = {}
        self._facts: dict[str, list] = {}
        self._signatures: dict[str, FunctionSignature] = {}
        self._arg_constraints: dict[str, list] = {}
        self._inter_arg: dict[str, list] = {}
        self._disjoint: set[frozenset] = set()
        self._nats_seen: set[Nat] = set()
        self._genls_memo: dict[Expr, frozenset] = {}
        self._match_memo: dict[Expr, frozenset] = {}

    # -- introspection -----------------------------------------------------

    @property
    def term_names(self) -> frozenset:
        return frozenset(self._terms)

    @property
    def disjoint_pairs(self) -> frozenset:
        return frozenset(self._disjoint)

    def signature(self, functor: str) -> FunctionSignature | None:
        return self._signatures.get(functor)

    def known(self, t: Expr) -> bool:
        if isinstance(t, Constant):
            return t.name in self._terms
        if isinstance(t, Nat):
            if not isinstance(t.functor, Constant):
                return False
            declared = (t.functor.name in self._signatures
                        or t in self._isa or t in self._genls)
            return declared and all(
                self.known(a) or isinstance(a, (Numeral, Text)) for a in t.args)
        return False

    def _require_known(self, t: Expr):
        if not self.known(t):
            raise UnknownTermError(f"unknown term: {print_expr(t)}")

    def kindedness(self, t: Expr) -> str:
        """'individual' or 'collection'; declarations win over inference."""
        if isinstance(t, Constant):
            if t.name in self._declared:
                return self._declared[t.name]
            if t.name in self._collection_evidence:
                return "collection"
            if t.name in self._individual_evidence:
                return "individual"
            return "collection"
        if isinstance(t, Nat):
            if t in self._genls:
                return "collection"
            if t in self._isa:
                return "individual"
            sig = self._signatures.get(t.functor.name) if isinstance(t.functor, Constant) else None
            if sig and sig.rule_kind == "resultIsa":
                return "individual"
            return "collection"
        return "individual"

    # -- taxonomy ----------------------------------------------------------

    def _has_explicit_links(self, t: Expr) -> bool:
        return t in self._isa or t in self._genls

    def _virtual_parents(self, t: Expr, kinds: tuple) -> list:
        """Signature-derived links for a NAT with no explicit links."""
        if not isinstance(t, Nat) or self._has_explicit_links(t):
            return []
        sig = self._signatures.get(t.functor.name) if isinstance(t.functor, Constant) else None
        if sig is None or sig.rule_kind not in kinds:
            return []
        if sig.rule_kind in ("resultIsa", "resultGenls"):
            return [Constant(sig.rule_value)]
        idx = sig.rule_value - 1
        if idx < len(t.args) and _is_term(t.args[idx]):
            return [t.args[idx]]
        return []

    def genls_parents(self, t: Expr) -> list:
        out = list(self._genls.get(t, ()))
        out.extend(self._virtual_parents(t, ("resultGenls", "resultGenlsArg")))
        return out

    def isa_parents(self, t: Expr) -> list:
        out = list(self._isa.get(t, ()))
        out.extend(self._virtual_parents(t, ("resultIsa",)))
        return out

    def genls_closure(self, t: Expr) -> frozenset:
        """Reflexive-transitive closure over genls links only."""
        cached = self._genls_memo.get(t)
        if cached is not None:
            return cached
        seen: set = set()
        stack = [t]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(p for p in self.genls_parents(x) if p not in seen)
        result = frozenset(seen)
        self._genls_memo[t] = result
        return result

    def generalizations(self, t: Expr) -> frozenset:
        """Reflexive-transitive upward closure over both isa and genls."""
        self._require_known(t)
        seen: set = set()
        stack = [t]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            for p in self.genls_parents(x):
                if p not in seen:
                    stack.append(p)
            for p in self.isa_parents(x):
                if p not in seen:
                    stack.append(p)
        return frozenset(seen)

    def subsumes(self, general: Expr, specific: Expr, mode: str = "auto") -> bool:
        """True when *general* covers *specific*.  genls mode asks for a
        specialization; isa mode for an instance (one isa hop, then genls
        closure); auto picks by what *specific* is declared to be."""
        self._require_known(general)
        self._require_known(specific)
        if mode == "auto":
            mode = "isa" if self.kindedness(specific) == "individual" else "genls"
        if mode == "genls":
            return general in self.genls_closure(specific)
        if mode == "isa":
            return any(general in self.genls_closure(p)
                       for p in self.isa_parents(specific))
        raise ValueError(f"bad subsumption mode: {mode}")

    def match_types(self, t: Expr) -> frozenset:
        """Exactly the terms g with subsumes(g, t, auto): the candidate
        slot types an interpretation of type *t* can fill."""
        cached = self._match_memo.get(t)
        if cached is not None:
            return cached
        self._require_known(t)
        if self.kindedness(t) == "collection":
            result = self.genls_closure(t)
        else:
            acc: set = set()
            for p in self.isa_parents(t):
                acc |= self.genls_closure(p)
            result = frozenset(acc)
        self._match_memo[t] = result
        return result

    # -- numerals ----------------------------------------------------------

    def numeral_type_name(self, value: Fraction) -> str:
        if value.denominator == 1:
            return "PositiveInteger" if value > 0 else "Integer"
        return "RationalNumber"

    def numeral_instance_types(self, value: Fraction) -> frozenset:
        seeds = []
        if value.denominator == 1:
            if value > 0:
                seeds.append("PositiveInteger")
            seeds.append("Integer")
        seeds.append("RationalNumber")
        acc: set = set()
        for name in seeds:
            if name in self._terms:
                acc |= self.genls_closure(Constant(name))
        return frozenset(acc)

    # -- facts -------------------------------------------------------------

    def _arg_match(self, fact_arg: Expr, query_arg: Expr) -> bool:
        if fact_arg == query_arg:
            return True
        if _is_term(fact_arg) and _is_term(query_arg):
            try:
                return self.subsumes(fact_arg, query_arg, "auto")
            except UnknownTermError:
                return False
        if isinstance(fact_arg, Constant) and isinstance(query_arg, Numeral):
            return fact_arg in self.numeral_instance_types(query_arg.value)
        return False

    def holds(self, atom: Expr, ctx: ContextStack = DEFAULT_CONTEXT) -> bool:
        """Evaluate a ground test expression.  Conjunctions go atom by
        atom; a negated atom holds iff its atom does not (negation as
        failure); isa/genls atoms consult the taxonomy; everything else is
        matched against asserted facts with per-argument subsumption."""
        if isinstance(atom, And):
            return all(self.holds(a, ctx) for a in atom.args)
        if isinstance(atom, Not):
            return not self.holds(atom.arg, ctx)
        if not isinstance(atom, App):
            return False
        pred, args = atom.predicate, atom.args
        if pred == _EQUALS and len(args) == 2:
            return args[0] == args[1]
        if pred in (_ISA, _GENLS) and len(args) == 2:
            specific, general = args
            if isinstance(specific, Numeral) and isinstance(general, Constant):
                return general in self.numeral_instance_types(specific.value)
            if not (_is_term(specific) and _is_term(general)):
                return False
            mode = "isa" if pred == _ISA else "genls"
            try:
                return self.subsumes(general, specific, mode)
            except UnknownTermError:
                return False
        key = print_expr(pred)
        contexts = ctx.stack()
        for fctx, fargs in self._facts.get(key, ()):
            if fctx not in contexts or len(fargs) != len(args):
                continue
            if all(self._arg_match(fa, qa) for fa, qa in zip(fargs, args)):
                return True
        return False

    # -- result typing -----------------------------------------------------

    def result_type(self, t: Nat) -> Expr:
        """Type of the concept a function term denotes, per the functor's
        declared result rule."""
        if not isinstance(t.functor, Constant):
            raise UntypedTermError(f"non-constant functor: {print_expr(t)}")
        sig = self._signatures.get(t.functor.name)
        if sig is None:
            raise UntypedTermError(f"no function signature for {t.functor.name}")
        if sig.rule_kind in ("resultIsa", "resultGenls"):
            return Constant(sig.rule_value)
        idx = sig.rule_value - 1
        if idx >= len(t.args):
            raise UntypedTermError(
                f"{t.functor.name} result rule points past its arguments")
        arg = t.args[idx]
        if _is_term(arg):
            return arg
        if isinstance(arg, Numeral):
            return Constant(self.numeral_type_name(arg.value))
        if isinstance(arg, TypedVar):
            return Constant(arg.type)
        raise UntypedTermError(f"argument {sig.rule_value} of {print_expr(t)} "
                               "has no interpreted type")

    # -- plausibility ------------------------------------------------------

    def disjoint_known(self, a: Expr, b: Expr) -> bool:
        if not (_is_term(a) and _is_term(b)):
            return False
        try:
            ca, cb = self.genls_closure(a), self.genls_closure(b)
        except UnknownTermError:
            return False
        for pair in self._disjoint:
            x, y = tuple(pair)
            if (x in ca and y in cb) or (y in ca and x in cb):
                return True
        return False

    def _check_owner_args(self, owner: str, args: tuple, path: tuple, out: list):
        for c in self._arg_constraints.get(owner, ()):
            if c.position > len(args):
                out.append(Violation("structural", path,
                                     f"{owner} needs at least {c.position} arguments"))
                continue
            arg = args[c.position - 1]
            if free_vars(arg):
                continue
            required = Constant(c.required)
            apath = path + (c.position,)
            if isinstance(arg, Numeral):
                if c.kind == "argIsa":
                    if required in self.numeral_instance_types(arg.value):
                        continue
                out.append(Violation("arg-isa" if c.kind == "argIsa" else "arg-genls",
                                     apath,
                                     f"argument {c.position} of {owner} must be "
                                     f"{'an instance' if c.kind == 'argIsa' else 'a specialization'} "
                                     f"of {c.required}, got the number {arg.value}"))
                continue
            if not _is_term(arg):
                out.append(Violation("structural", apath,
                                     f"argument {c.position} of {owner} is not a term"))
                continue
            if not self.known(arg):
                continue
            if c.kind == "argIsa":
                if not self.subsumes(required, arg, "isa"):
                    out.append(Violation("arg-isa", apath,
                                         f"argument {c.position} of {owner} must be "
                                         f"an instance of {c.required}, got {print_expr(arg)}"))
            else:
                if self.subsumes(required, arg, "genls"):
                    continue
                if self.subsumes(required, arg, "isa"):
                    out.append(Violation(
                        "instance-vs-specialization", apath,
                        f"argument {c.position} of {owner} must be a specialization "
                        f"of {c.required}; {print_expr(arg)} is an instance of it"))
                else:
                    out.append(Violation("arg-genls", apath,
                                         f"argument {c.position} of {owner} must be "
                                         f"a specialization of {c.required}, "
                                         f"got {print_expr(arg)}"))
        for c in self._inter_arg.get(owner, ()):
            if c.if_position > len(args) or c.then_position > len(args):
                out.append(Violation("structural", path,
                                     f"{owner} is missing arguments required by an "
                                     "inter-argument constraint"))
                continue
            if_arg = args[c.if_position - 1]
            then_arg = args[c.then_position - 1]
            if free_vars(if_arg) or free_vars(then_arg):
                continue
            if not (_is_term(if_arg) and self.known(if_arg)):
                continue
            if not self.subsumes(Constant(c.if_type), if_arg, "genls"):
                continue
            if (_is_term(then_arg) and self.known(then_arg)
                    and self.subsumes(Constant(c.then_type), then_arg, "genls")):
                continue
            out.append(Violation(
                "inter-arg", path + (c.then_position,),
                f"{owner}: argument {c.if_position} specializes {c.if_type}, "
                f"so argument {c.then_position} must specialize {c.then_type}; "
                f"got {print_expr(then_arg)}"))

    def _walk_plausibility(self, e: Expr, path: tuple, positive: bool, out: list):
        if isinstance(e, (Constant, Numeral, Text, TypedVar, QueryVar)):
            return
        if isinstance(e, And):
            for i, a in enumerate(e.args):
                if isinstance(a, (Numeral, Text)):
                    out.append(Violation("structural", path + (i,),
                                         "conjunct is not a sentence"))
                    continue
                self._walk_plausibility(a, path + (i,), positive, out)
            return
        if isinstance(e, Not):
            self._walk_plausibility(e.arg, path + (0,), not positive, out)
            return
        if isinstance(e, (Kappa, TheSetOf, Exists)):
            self._walk_plausibility(e.body, path + (0,), positive, out)
            return
        if isinstance(e, App):
            pred = e.predicate
            if isinstance(pred, Nat):
                self._walk_plausibility(pred, path + (0,), positive, out)
            elif not isinstance(pred, Constant):
                out.append(Violation("structural", path + (0,),
                                     "predicate must be a constant or function term"))
            if positive and isinstance(pred, Constant) and len(e.args) == 2:
                a, b = e.args
                if pred == _GENLS and self.disjoint_known(a, b):
                    out.append(Violation("known-false", path,
                                         f"{print_expr(e)} contradicts a disjointness "
                                         "declaration"))
                elif pred == _ISA and _is_term(a) and self.known(a):
                    if any(self.disjoint_known(p, b) for p in self.isa_parents(a)):
                        out.append(Violation("known-false", path,
                                             f"{print_expr(e)} contradicts a "
                                             "disjointness declaration"))
            if isinstance(pred, Constant):
                self._check_owner_args(pred.name, e.args, path, out)
            for i, a in enumerate(e.args, start=1):
                self._walk_plausibility(a, path + (i,), positive, out)
            return
        if isinstance(e, Nat):
            if not isinstance(e.functor, Constant):
                out.append(Violation("structural", path + (0,),
                                     "function term head must be a constant"))
            else:
                sig = self._signatures.get(e.functor.name)
                if sig is not None and sig.arity != len(e.args):
                    out.append(Violation("structural", path,
                                         f"{e.functor.name} takes {sig.arity} "
                                         f"arguments, got {len(e.args)}"))
                self._check_owner_args(e.functor.name, e.args, path, out)
            for i, a in enumerate(e.args, start=1):
                self._walk_plausibility(a, path + (i,), positive, out)
            return
        out.append(Violation("structural", path, f"unexpected node {e!r}"))

    def check_plausibility(self, e: Expr,
                           ctx: ContextStack = DEFAULT_CONTEXT) -> list:
        """Collect every constraint violation in *e*.  An empty list means
        the expression is plausible."""
        out: list = []
        self._walk_plausibility(e, (), True, out)
        return out


# ---------------------------------------------------------------------------
# Loading

class _Loader:
    def __init__(self):
        self.kb = KnowledgeBase()
        self.findings: list[Finding] = []

    def error(self, code: str, message: str):
        self.findings.append(Finding(code, message))

    def register(self, e: Expr, evidence: str | None = None):
        kb = self.kb
        if isinstance(e, Constant):
            kb._terms.add(e.name)
            if evidence == "collection":
                kb._collection_evidence.add(e.name)
            elif evidence == "individual":
                kb._individual_evidence.add(e.name)
        elif isinstance(e, Nat):
            kb._nats_seen.add(e)
            self.register(e.functor)
            for a in e.args:
                self.register(a)
        elif isinstance(e, App):
            self.register(e.predicate)
            for a in e.args:
                self.register(a)
        elif isinstance(e, (And, Not, Kappa, TheSetOf, Exists)):
            for child in ((e.args) if isinstance(e, And)
                          else (e.arg,) if isinstance(e, Not) else (e.body,)):
                self.register(child)

    def _term_from(self, node, what: str) -> Expr | None:
        try:
            e = from_sexpr(node)
        except Exception as err:
            self.error("kb-syntax", f"{what}: {err}")
            return None
        if not _is_term(e):
            self.error("kb-form", f"{what} must be a term, got {print_expr(e)}")
            return None
        return e

    def _load_link(self, form, kind: str):
        if len(form) != 3:
            self.error("kb-form", f"({kind} ...) takes two terms")
            return
        s = self._term_from(form[1], f"{kind} specific")
        g = self._term_from(form[2], f"{kind} general")
        if s is None or g is None:
            return
        if s == g:
            self.error("kb-self-link",
                       f"({kind} {print_expr(s)} {print_expr(g)}) relates a term "
                       "to itself")
            return
        kb = self.kb
        if kind == "isa":
            self.register(s, "individual" if isinstance(s, Constant) else None)
            self.register(g, "collection")
            kb._isa.setdefault(s, []).append(g)
        else:
            self.register(s, "collection" if isinstance(s, Constant) else None)
            self.register(g, "collection")
            kb._genls.setdefault(s, []).append(g)

    def load_form(self, form):
        if not isinstance(form, sexpr.SexprList) or not form:
            self.error("kb-form", f"stray atom {form!r} at top level")
            return
        head = str(form[0]) if isinstance(form[0], sexpr.Symbol) else None
        kb = self.kb
        if head in ("isa", "genls"):
            self._load_link(form, head)
        elif head == "fact":
            if len(form) != 3 or not isinstance(form[1], sexpr.Symbol):
                self.error("kb-form", "(fact CTX (pred args...)) expected")
                return
            try:
                atom = from_sexpr(form[2])
            except Exception as err:
                self.error("kb-syntax", f"fact: {err}")
                return
            if not isinstance(atom, App):
                self.error("kb-form",
                           f"fact body must be a predicate application, got "
                           f"{print_expr(atom)}")
                return
            if free_vars(atom):
                self.error("kb-form", f"fact must be ground: {print_expr(atom)}")
                return
            self.register(atom)
            key = print_expr(atom.predicate)
            kb._facts.setdefault(key, []).append((str(form[1]), atom.args))
        elif head == "fn":
            if (len(form) != 4 or not isinstance(form[1], sexpr.Symbol)
                    or not isinstance(form[2], Fraction)
                    or not isinstance(form[3], sexpr.SexprList)):
                self.error("kb-form", "(fn Functor ARITY (RULE ...)) expected")
                return
            name = str(form[1])
            arity = int(form[2])
            rule = form[3]
            if arity < 1:
                self.error("kb-form", f"fn {name}: arity must be positive")
                return
            kinds = {"resultIsa", "resultGenls", "resultGenlsArg"}
            if (len(rule) != 2 or str(rule[0]) not in kinds):
                self.error("kb-form", f"fn {name}: bad result rule")
                return
            rk = str(rule[0])
            if rk == "resultGenlsArg":
                if not isinstance(rule[1], Fraction):
                    self.error("kb-form", f"fn {name}: resultGenlsArg needs an index")
                    return
                rv: object = int(rule[1])
                if not (1 <= rv <= arity):
                    self.error("kb-form",
                               f"fn {name}: result argument index {rv} exceeds "
                               f"arity {arity}")
                    return
            else:
                rv = str(rule[1])
                self.register(Constant(rv), "collection")
            if name in kb._signatures and kb._signatures[name] != FunctionSignature(name, arity, rk, rv):
                self.error("kb-conflict", f"fn {name} declared twice with "
                                          "different signatures")
                return
            self.register(Constant(name))
            kb._signatures[name] = FunctionSignature(name, arity, rk, rv)
        elif head in ("argIsa", "argGenls"):
            if (len(form) != 4 or not isinstance(form[1], sexpr.Symbol)
                    or not isinstance(form[2], Fraction)
                    or not isinstance(form[3], sexpr.Symbol)):
                self.error("kb-form", f"({head} pred N C) expected")
                return
            owner, pos, req = str(form[1]), int(form[2]), str(form[3])
            if pos < 1:
                self.error("kb-form", f"{head} {owner}: position must be positive")
                return
            self.register(Constant(owner))
            self.register(Constant(req), "collection")
            kb._arg_constraints.setdefault(owner, []).append(
                ArgConstraint(owner, pos, head, req))
        elif head == "interArgGenls":
            if (len(form) != 6 or not isinstance(form[1], sexpr.Symbol)
                    or not isinstance(form[2], Fraction)
                    or not isinstance(form[4], Fraction)):
                self.error("kb-form", "(interArgGenls pred N1 C1 N2 C2) expected")
                return
            owner = str(form[1])
            p1, c1 = int(form[2]), str(form[3])
            p2, c2 = int(form[4]), str(form[5])
            if p1 == p2:
                self.error("kb-form",
                           f"interArgGenls {owner}: positions must be distinct")
                return
            self.register(Constant(owner))
            self.register(Constant(c1), "collection")
            self.register(Constant(c2), "collection")
            kb._inter_arg.setdefault(owner, []).append(
                InterArgConstraint(owner, p1, c1, p2, c2))
        elif head == "disjoint":
            if len(form) != 3:
                self.error("kb-form", "(disjoint C1 C2) expected")
                return
            a = self._term_from(form[1], "disjoint")
            b = self._term_from(form[2], "disjoint")
            if a is None or b is None:
                return
            if a == b:
                self.error("kb-form", "a collection cannot be disjoint with itself")
                return
            self.register(a, "collection")
            self.register(b, "collection")
            kb._disjoint.add(frozenset((a, b)))
        elif head in ("individual", "collection"):
            if len(form) != 2 or not isinstance(form[1], sexpr.Symbol):
                self.error("kb-form", f"({head} Term) expected")
                return
            name = str(form[1])
            prior = kb._declared.get(name)
            if prior is not None and prior != head:
                self.error("kb-conflict",
                           f"{name} declared both individual and collection")
                return
            self.register(Constant(name))
            kb._declared[name] = head
        else:
            self.error("kb-form", f"unknown form ({head} ...)")

    def validate(self):
        kb = self.kb
        # genls cycles would make closure queries diverge
        for cycle in _find_cycles(kb._genls):
            names = " -> ".join(print_expr(t) for t in cycle)
            self.error("kb-genls-cycle", f"genls cycle: {names}")
        # declared arities must match every use
        for nat in sorted(kb._nats_seen, key=print_expr):
            if not isinstance(nat.functor, Constant):
                continue
            sig = kb._signatures.get(nat.functor.name)
            if sig is not None and sig.arity != len(nat.args):
                self.error("kb-arity",
                           f"{print_expr(nat)} has {len(nat.args)} arguments; "
                           f"{nat.functor.name} is declared with arity {sig.arity}")
        # constraints must fit declared arities
        for owner, constraints in kb._arg_constraints.items():
            sig = kb._signatures.get(owner)
            if sig is None:
                continue
            for c in constraints:
                if c.position > sig.arity:
                    self.error("kb-arity",
                               f"{c.kind} on {owner} position {c.position} exceeds "
                               f"declared arity {sig.arity}")


def _find_cycles(graph: dict) -> list:
    """Cycles in a successor map, each reported once as a node path."""
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict = {}
    cycles = []

    def visit(node, stack):
        color[node] = GREY
        stack.append(node)
        for succ in graph.get(node, ()):
            c = color.get(succ, WHITE)
            if c == GREY:
                idx = stack.index(succ)
                cycles.append(tuple(stack[idx:]) + (succ,))
            elif c == WHITE:
                visit(succ, stack)
        stack.pop()
        color[node] = BLACK

    for node in list(graph):
        if color.get(node, WHITE) == WHITE:
            visit(node, [])
    return cycles


def _read_sources(paths: Iterable | None, text: str | None):
    sources = []
    if text is not None:
        sources.append(("<string>", text))
    for p in paths or ():
        p = Path(p)
        sources.append((str(p), p.read_text(encoding="utf-8")))
    return sources


def load_kb_lenient(paths: Iterable | None = None, *,
                    text: str | None = None) -> tuple:
    """Load and return (kb, findings) without raising on bad input."""
    loader = _Loader()
    for name, content in _read_sources(paths, text):
        try:
            forms = sexpr.parse_all(content, name)
        except sexpr.SexprError as err:
            loader.error("kb-syntax", f"{name}: {err}")
            continue
        for form in forms:
            loader.load_form(form)
    loader.validate()
    return loader.kb, loader.findings


def load_kb(paths: Iterable | None = None, *, text: str | None = None) -> KnowledgeBase:
    """Load a KB, rejecting any malformed input or genls cycle."""
    kb, findings = load_kb_lenient(paths, text=text)
    if findings:
        raise KbLoadError(findings)
    return kb


def lint_kb(kb: KnowledgeBase) -> list:
    """Consistency checks beyond load validation: no declared disjointness
    may contradict the subsumption order."""
    findings = []
    for pair in sorted(kb.disjoint_pairs, key=lambda p: sorted(print_expr(t) for t in p)):
        a, b = sorted(pair, key=print_expr)
        if (kb.subsumes(a, b, "genls") or kb.subsumes(b, a, "genls")):
            findings.append(Finding(
                "kb-disjoint-subsumption",
                f"{print_expr(a)} and {print_expr(b)} are declared disjoint but "
                "one specializes the other"))
    return findings
