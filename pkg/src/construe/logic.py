"""CycL-style logical expressions: parsing, printing, substitution,
renaming, simplification and existential closure.

Concrete syntax is parenthesized s-expressions.  Sigils: ``$Name#k`` is a
typed variable, ``?NAME`` a query variable, a ``#$`` prefix on constants is
accepted and stripped, strings are double-quoted, and negation may be
written ``(not ...)`` or with a prefixed negation sign.  A compound whose
head constant starts with an uppercase letter denotes a function term
(non-atomic term); a lowercase head is a predicate application.  ``and``,
``not``, ``exists``, ``Kappa`` and ``TheSetOf`` are structural forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import sexpr
from .sexpr import SexprError, SexprList, Symbol


class ExprSyntaxError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Expr:
    """Base class for all expression nodes."""


@dataclass(frozen=True)
class Constant(Expr):
    name: str


@dataclass(frozen=True)
class Numeral(Expr):
    value: Fraction


@dataclass(frozen=True)
class Text(Expr):
    value: str


@dataclass(frozen=True)
class TypedVar(Expr):
    type: str
    index: int


@dataclass(frozen=True)
class QueryVar(Expr):
    name: str


@dataclass(frozen=True)
class Nat(Expr):
    """Non-atomic term: a function application denoting a concept."""

    functor: Expr
    args: tuple


@dataclass(frozen=True)
class App(Expr):
    """Predicate application (an atomic sentence)."""

    predicate: Expr
    args: tuple


@dataclass(frozen=True)
class And(Expr):
    args: tuple


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr


@dataclass(frozen=True)
class Kappa(Expr):
    """Binder forming a predicate from an open sentence."""

    vars: tuple
    body: Expr


@dataclass(frozen=True)
class TheSetOf(Expr):
    var: QueryVar
    body: Expr


@dataclass(frozen=True)
class Exists(Expr):
    vars: tuple
    body: Expr


_TYPED_VAR_RE = re.compile(r"^\$([A-Za-z][A-Za-z0-9_'-]*)#(\d+)$")

EQUALS = Constant("equals")


def is_sentence(e: Expr) -> bool:
    return isinstance(e, (App, And, Not, Exists))


def _binder_vars(node, what: str) -> tuple:
    if not isinstance(node, SexprList):
        raise ExprSyntaxError(f"{what} needs a variable list",
                              getattr(node, "line", 0), getattr(node, "col", 0))
    out = []
    for item in node:
        v = _convert(item)
        if not isinstance(v, QueryVar):
            raise ExprSyntaxError(f"{what} binds query variables only",
                                  node.line, node.col)
        out.append(v)
    return tuple(out)


def _convert(node) -> Expr:
    if isinstance(node, Symbol):
        name = str(node)
        if name.startswith("#$"):
            name = name[2:]
            if not name:
                raise ExprSyntaxError("empty constant after #$", node.line, node.col)
            return Constant(name)
        if name.startswith("?"):
            if len(name) < 2:
                raise ExprSyntaxError("empty query-variable name", node.line, node.col)
            return QueryVar(name[1:])
        if name.startswith("$"):
            m = _TYPED_VAR_RE.match(name)
            if not m:
                raise ExprSyntaxError(f"unknown sigil in {name!r} "
                                      "(typed variables are written $Type#k)",
                                      node.line, node.col)
            return TypedVar(m.group(1), int(m.group(2)))
        return Constant(name)
    if isinstance(node, Fraction):
        return Numeral(node)
    if isinstance(node, str):
        return Text(node)
    if isinstance(node, SexprList):
        if not node:
            raise ExprSyntaxError("empty form", node.line, node.col)
        head = node[0]
        if isinstance(head, Symbol):
            h = str(head)
            if h == "and":
                if len(node) < 2:
                    raise ExprSyntaxError("and needs at least one conjunct",
                                          node.line, node.col)
                return And(tuple(_convert(x) for x in node[1:]))
            if h == "not":
                if len(node) != 2:
                    raise ExprSyntaxError("not takes exactly one argument",
                                          node.line, node.col)
                return Not(_convert(node[1]))
            if h == "exists":
                if len(node) != 3:
                    raise ExprSyntaxError("exists takes a variable list and a body",
                                          node.line, node.col)
                return Exists(_binder_vars(node[1], "exists"), _convert(node[2]))
            if h == "Kappa":
                if len(node) != 3:
                    raise ExprSyntaxError("Kappa takes a variable list and a body",
                                          node.line, node.col)
                return Kappa(_binder_vars(node[1], "Kappa"), _convert(node[2]))
            if h == "TheSetOf":
                if len(node) != 3:
                    raise ExprSyntaxError("TheSetOf takes one variable and a body",
                                          node.line, node.col)
                var = _convert(node[1])
                if not isinstance(var, QueryVar):
                    raise ExprSyntaxError("TheSetOf binds a query variable",
                                          node.line, node.col)
                return TheSetOf(var, _convert(node[2]))
        head_expr = _convert(head)
        args = tuple(_convert(x) for x in node[1:])
        if isinstance(head_expr, Constant):
            if head_expr.name[0].isupper():
                return Nat(head_expr, args)
            return App(head_expr, args)
        if isinstance(head_expr, Nat):
            return App(head_expr, args)
        raise ExprSyntaxError("application head must be a constant or function term",
                              node.line, node.col)
    raise ExprSyntaxError(f"cannot interpret {node!r}")


def from_sexpr(node) -> Expr:
    return _convert(node)


def parse_expr(text: str) -> Expr:
    try:
        return _convert(sexpr.parse_one(text))
    except SexprError as err:
        raise ExprSyntaxError(err.message, err.line, err.col) from err


def parse_exprs(text: str, source: str = "<string>") -> list:
    return [_convert(node) for node in sexpr.parse_all(text, source)]


def print_expr(e: Expr) -> str:
    if isinstance(e, Constant):
        return e.name
    if isinstance(e, Numeral):
        return str(e.value)
    if isinstance(e, Text):
        return '"%s"' % e.value.replace("\\", "\\\\").replace('"', '\\"')
    if isinstance(e, TypedVar):
        return f"${e.type}#{e.index}"
    if isinstance(e, QueryVar):
        return f"?{e.name}"
    if isinstance(e, Nat):
        return "(%s)" % " ".join([print_expr(e.functor)] + [print_expr(a) for a in e.args])
    if isinstance(e, App):
        return "(%s)" % " ".join([print_expr(e.predicate)] + [print_expr(a) for a in e.args])
    if isinstance(e, And):
        return "(and %s)" % " ".join(print_expr(a) for a in e.args)
    if isinstance(e, Not):
        return "(not %s)" % print_expr(e.arg)
    if isinstance(e, Kappa):
        return "(Kappa (%s) %s)" % (" ".join(print_expr(v) for v in e.vars),
                                    print_expr(e.body))
    if isinstance(e, TheSetOf):
        return "(TheSetOf %s %s)" % (print_expr(e.var), print_expr(e.body))
    if isinstance(e, Exists):
        return "(exists (%s) %s)" % (" ".join(print_expr(v) for v in e.vars),
                                     print_expr(e.body))
    raise TypeError(f"not an expression: {e!r}")


def _children(e: Expr):
    if isinstance(e, Nat):
        return (e.functor, *e.args)
    if isinstance(e, App):
        return (e.predicate, *e.args)
    if isinstance(e, And):
        return e.args
    if isinstance(e, Not):
        return (e.arg,)
    return ()


def free_vars(e: Expr, bound: frozenset = frozenset()) -> set:
    """Free variables of *e*: query variables not captured by a binder,
    plus every typed variable (template holes are never bound)."""
    if isinstance(e, QueryVar):
        return set() if e in bound else {e}
    if isinstance(e, TypedVar):
        return {e}
    if isinstance(e, Kappa):
        return free_vars(e.body, bound | frozenset(e.vars))
    if isinstance(e, TheSetOf):
        return free_vars(e.body, bound | frozenset((e.var,)))
    if isinstance(e, Exists):
        return free_vars(e.body, bound | frozenset(e.vars))
    out: set = set()
    for child in _children(e):
        out |= free_vars(child, bound)
    return out


def free_query_vars(e: Expr) -> set:
    return {v for v in free_vars(e) if isinstance(v, QueryVar)}


def _fresh_name(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def _subst_binder(e, binding, make):
    bvars = e.vars if not isinstance(e, TheSetOf) else (e.var,)
    live = {k: v for k, v in binding.items() if k not in bvars}
    if not live:
        return e
    # rename bound variables that would capture a free variable of a
    # replacement term; fresh names must also avoid everything already
    # free in the body
    incoming = set()
    for v in live.values():
        incoming |= {x.name for x in free_query_vars(v)}
    renames = {}
    taken = incoming | {b.name for b in bvars}
    taken |= {x.name for x in free_query_vars(e.body)}
    for b in bvars:
        if b.name in incoming:
            renames[b] = QueryVar(_fresh_name(b.name, taken))
            taken.add(renames[b].name)
    body = e.body
    if renames:
        body = substitute(body, renames)
        bvars = tuple(renames.get(b, b) for b in bvars)
    return make(bvars, substitute(body, live))


def substitute(e: Expr, binding: Mapping[Expr, Expr]) -> Expr:
    """Replace free occurrences of bound variables; capture-avoiding."""
    if not binding:
        return e
    if isinstance(e, (QueryVar, TypedVar)):
        return binding.get(e, e)
    if isinstance(e, (Constant, Numeral, Text)):
        return e
    if isinstance(e, Nat):
        return Nat(substitute(e.functor, binding),
                   tuple(substitute(a, binding) for a in e.args))
    if isinstance(e, App):
        return App(substitute(e.predicate, binding),
                   tuple(substitute(a, binding) for a in e.args))
    if isinstance(e, And):
        return And(tuple(substitute(a, binding) for a in e.args))
    if isinstance(e, Not):
        return Not(substitute(e.arg, binding))
    if isinstance(e, Kappa):
        return _subst_binder(e, binding, lambda vs, b: Kappa(vs, b))
    if isinstance(e, TheSetOf):
        return _subst_binder(e, binding, lambda vs, b: TheSetOf(vs[0], b))
    if isinstance(e, Exists):
        return _subst_binder(e, binding, lambda vs, b: Exists(vs, b))
    raise TypeError(f"not an expression: {e!r}")


def rename_query_vars(e: Expr, suffix: int) -> Expr:
    """Append ``_suffix`` to every free query variable. Injective on names;
    bound variables are left alone."""
    mapping = {v: QueryVar(f"{v.name}_{suffix}") for v in free_query_vars(e)}
    return substitute(e, mapping)


def _is_equals(e: Expr) -> bool:
    return (isinstance(e, App) and e.predicate == EQUALS and len(e.args) == 2)


def _structural(e: Expr) -> Expr:
    """Flatten nested conjunctions, drop duplicate conjuncts, collapse
    single-conjunct ``and`` nodes.  Applied recursively."""
    if isinstance(e, And):
        flat = []
        for a in e.args:
            a = _structural(a)
            if isinstance(a, And):
                flat.extend(a.args)
            else:
                flat.append(a)
        seen, out = set(), []
        for a in flat:
            if a not in seen:
                seen.add(a)
                out.append(a)
        if len(out) == 1:
            return out[0]
        return And(tuple(out))
    if isinstance(e, Not):
        return Not(_structural(e.arg))
    if isinstance(e, Nat):
        return Nat(e.functor, tuple(_structural(a) for a in e.args))
    if isinstance(e, App):
        return App(e.predicate, tuple(_structural(a) for a in e.args))
    if isinstance(e, Kappa):
        return Kappa(e.vars, _structural(e.body))
    if isinstance(e, TheSetOf):
        return TheSetOf(e.var, _structural(e.body))
    if isinstance(e, Exists):
        return Exists(e.vars, _structural(e.body))
    return e


def _variable_free(e: Expr) -> bool:
    return not free_vars(e)


def _eliminate_equals(e: Expr):
    """Find a top-level ``(equals ?V t)`` conjunct whose variable can be
    replaced by *t*; return the rewritten conjunction or None."""
    if not isinstance(e, And):
        return None
    for i, conj in enumerate(e.args):
        if not _is_equals(conj):
            continue
        lhs, rhs = conj.args
        var, term = None, None
        if isinstance(lhs, QueryVar) and isinstance(rhs, QueryVar):
            if lhs == rhs:
                rest = e.args[:i] + e.args[i + 1:]
                return And(rest) if rest else None
            # keep the lexicographically smaller name
            var, term = (lhs, rhs) if rhs.name < lhs.name else (rhs, lhs)
        elif isinstance(lhs, QueryVar) and _variable_free(rhs):
            var, term = lhs, rhs
        elif isinstance(rhs, QueryVar) and _variable_free(lhs):
            var, term = rhs, lhs
        if var is None:
            continue
        rest = e.args[:i] + e.args[i + 1:]
        if not rest:
            continue  # nothing would remain; keep the bare equality
        return And(tuple(substitute(c, {var: term}) for c in rest))
    return None


def simplify(e: Expr) -> Expr:
    """Substitute terms for variables they equal and clean up redundant
    conjunctive structure.  The result is a fixed point."""
    while True:
        e2 = _structural(e)
        reduced = _eliminate_equals(e2)
        if reduced is not None:
            e = reduced
            continue
        if e2 == e:
            return e
        e = e2


def quantify_existential(e: Expr) -> Expr:
    """Existentially close the free query variables of *e*."""
    fv = sorted(free_query_vars(e), key=lambda v: v.name)
    if not fv:
        return e
    return Exists(tuple(fv), e)


def conjunct_count(e: Expr) -> int:
    return len(e.args) if isinstance(e, And) else 1


def canonical_form(e: Expr) -> str:
    """Print with query variables renamed by first occurrence, respecting
    binder scopes.  Two expressions are alpha-equivalent iff their
    canonical forms coincide."""
    free_map: dict = {}
    counter = [0]

    def name_for(v: QueryVar, scopes) -> str:
        for scope in reversed(scopes):
            if v in scope:
                return scope[v]
        if v not in free_map:
            free_map[v] = f"v{counter[0]}"
            counter[0] += 1
        return free_map[v]

    def rec(x: Expr, scopes) -> str:
        if isinstance(x, QueryVar):
            return "?" + name_for(x, scopes)
        if isinstance(x, (Kappa, Exists, TheSetOf)):
            bvars = (x.var,) if isinstance(x, TheSetOf) else x.vars
            scope = {}
            for b in bvars:
                scope[b] = f"v{counter[0]}"
                counter[0] += 1
            inner = rec(x.body, scopes + [scope])
            names = " ".join("?" + scope[b] for b in bvars)
            tag = type(x).__name__
            if isinstance(x, TheSetOf):
                return f"({tag} {names} {inner})"
            return f"({tag} ({names}) {inner})"
        if isinstance(x, Nat):
            return "(%s)" % " ".join([rec(x.functor, scopes)] + [rec(a, scopes) for a in x.args])
        if isinstance(x, App):
            return "(%s)" % " ".join([rec(x.predicate, scopes)] + [rec(a, scopes) for a in x.args])
        if isinstance(x, And):
            return "(and %s)" % " ".join(rec(a, scopes) for a in x.args)
        if isinstance(x, Not):
            return "(not %s)" % rec(x.arg, scopes)
        return print_expr(x)

    return rec(e, [])


def equal_modulo_renaming(a: Expr, b: Expr) -> bool:
    return canonical_form(a) == canonical_form(b)


# ---------------------------------------------------------------------------
# JSON encoding: constants are plain strings, numerals are numbers (or
# "p/q" strings when non-integral), text is {"text": ...}, compounds are
# arrays headed by the operator.

def expr_to_json(e: Expr):
    if isinstance(e, Constant):
        return e.name
    if isinstance(e, Numeral):
        if e.value.denominator == 1:
            return int(e.value)
        return str(e.value)
    if isinstance(e, Text):
        return {"text": e.value}
    if isinstance(e, TypedVar):
        return f"${e.type}#{e.index}"
    if isinstance(e, QueryVar):
        return f"?{e.name}"
    if isinstance(e, Nat):
        return [expr_to_json(e.functor)] + [expr_to_json(a) for a in e.args]
    if isinstance(e, App):
        return [expr_to_json(e.predicate)] + [expr_to_json(a) for a in e.args]
    if isinstance(e, And):
        return ["and"] + [expr_to_json(a) for a in e.args]
    if isinstance(e, Not):
        return ["not", expr_to_json(e.arg)]
    if isinstance(e, Kappa):
        return ["Kappa", [expr_to_json(v) for v in e.vars], expr_to_json(e.body)]
    if isinstance(e, TheSetOf):
        return ["TheSetOf", expr_to_json(e.var), expr_to_json(e.body)]
    if isinstance(e, Exists):
        return ["exists", [expr_to_json(v) for v in e.vars], expr_to_json(e.body)]
    raise TypeError(f"not an expression: {e!r}")


_JSON_NUM_RE = re.compile(r"^-?\d+(/\d+)?$")


def expr_from_json(obj) -> Expr:
    if isinstance(obj, bool):
        raise ExprSyntaxError("booleans have no expression reading")
    if isinstance(obj, int):
        return Numeral(Fraction(obj))
    if isinstance(obj, float):
        return Numeral(Fraction(obj).limit_denominator(10**12))
    if isinstance(obj, str):
        if obj.startswith("?"):
            return QueryVar(obj[1:])
        if obj.startswith("$"):
            m = _TYPED_VAR_RE.match(obj)
            if not m:
                raise ExprSyntaxError(f"unknown sigil in {obj!r}")
            return TypedVar(m.group(1), int(m.group(2)))
        if _JSON_NUM_RE.match(obj):
            return Numeral(Fraction(obj))
        return Constant(obj)
    if isinstance(obj, dict):
        if set(obj) == {"text"}:
            return Text(obj["text"])
        raise ExprSyntaxError(f"unknown object node {obj!r}")
    if isinstance(obj, list):
        if not obj:
            raise ExprSyntaxError("empty array node")
        head = obj[0]
        if head == "and":
            return And(tuple(expr_from_json(a) for a in obj[1:]))
        if head == "not":
            return Not(expr_from_json(obj[1]))
        if head in ("exists", "Kappa"):
            vars_ = tuple(expr_from_json(v) for v in obj[1])
            node = Exists if head == "exists" else Kappa
            return node(vars_, expr_from_json(obj[2]))
        if head == "TheSetOf":
            return TheSetOf(expr_from_json(obj[1]), expr_from_json(obj[2]))
        head_expr = expr_from_json(head)
        args = tuple(expr_from_json(a) for a in obj[1:])
        if isinstance(head_expr, Constant) and head_expr.name[0].isupper():
            return Nat(head_expr, args)
        return App(head_expr, args)
    raise ExprSyntaxError(f"cannot decode {obj!r}")
