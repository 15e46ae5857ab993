"""The interpretation engine: sliding-window construction retrieval over
the tag chart, semantic testing, plausibility checking, recursive
composition on a parse graph, and anaphor resolution.

The window starts at each token position at its maximum size and shrinks
until one or more constructions apply, then the anchor advances one token.
Every new edge re-enters the windows until the graph reaches a fixpoint.
Candidate constructions are found by chaining three exact-match tiers:
lexical keys, then skeletons, then fully typed variants built from the
(pruned) upward type closures of the candidate filler edges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .constructions import (Construction, Repository, TypedSlot,
                            SKELETON_SLOT)
from .kb import (ContextStack, DEFAULT_CONTEXT, KnowledgeBase,
                 UnknownTermError)
from .logic import (And, App, Constant, EQUALS, Expr, Nat, Numeral, QueryVar,
                    Text, TypedVar, canonical_form, conjunct_count,
                    free_query_vars, free_vars, is_sentence, print_expr,
                    quantify_existential, rename_query_vars, simplify,
                    substitute)
from .tagger import Lexicon, TagChart, tag


class CompositionError(Exception):
    pass


_POLICIES = ("statement", "question", "check")


@dataclass(frozen=True)
class EngineConfig:
    max_window: int = 12
    language: str = "en"
    max_anaphor_candidates: int = 5
    outermost_policy: str = "statement"
    max_edges: int = 50_000
    context: ContextStack = DEFAULT_CONTEXT

    def __post_init__(self):
        if self.max_window < 1:
            raise ValueError("max_window must be at least 1")
        if self.outermost_policy not in _POLICIES:
            raise ValueError(f"outermost_policy must be one of {_POLICIES}")


@dataclass(frozen=True)
class Edge:
    id: int
    start: int
    end: int
    source: str                      # "lex" or a construction id
    logic: Expr
    output_var: QueryVar | None
    output_type: Expr | None
    kind: str                        # instance | collection | sentential
    children: tuple = ()             # (slot index, child edge id) pairs

    @property
    def span(self) -> tuple:
        return (self.start, self.end)


@dataclass(frozen=True)
class TraceEvent:
    kind: str                        # discard reason class
    construction: str
    span: tuple
    detail: str


@dataclass(frozen=True)
class Retrieval:
    construction: Construction
    binding: dict


class ParseGraph:
    """Chart of interpretation edges over token spans.  Edges are only
    ever added; duplicates (same span, source and logic up to query-
    variable renaming) are suppressed."""

    def __init__(self, text: str, chart: TagChart, kb: KnowledgeBase,
                 repo: Repository, config: EngineConfig):
        self.text = text
        self.chart = chart
        self.kb = kb
        self.repo = repo
        self.config = config
        self.tokens = chart.tokens
        self.edges: list[Edge] = []
        self._by_span: dict[tuple, list] = {}
        self._ends_at: dict[int, set] = {}
        self._dedup: dict[tuple, Edge] = {}
        self._tried: set = set()
        self._applied: dict[tuple, Edge] = {}
        self.trace: list[TraceEvent] = []
        self.pattern_counts: dict[tuple, int] = {}
        self.truncated = False
        self._fresh = itertools.count(1)

    def fresh(self) -> int:
        return next(self._fresh)

    def edges_at(self, start: int, end: int) -> list:
        return self._by_span.get((start, end), [])

    def slot_span_ends(self, start: int, limit: int) -> list:
        return sorted(e for e in self._ends_at.get(start, ()) if e <= limit)

    def trace_discard(self, kind: str, construction: str, span: tuple, detail: str):
        self.trace.append(TraceEvent(kind, construction, span, detail))

    def add_edge(self, span: tuple, source: str, logic: Expr,
                 output_var: QueryVar | None, output_type: Expr | None,
                 kind: str, children: tuple = ()) -> tuple:
        marker = App(Constant("edge"),
                     (logic, output_var if output_var is not None else Constant("-")))
        key = (span, source, canonical_form(marker),
               print_expr(output_type) if output_type is not None else "")
        existing = self._dedup.get(key)
        if existing is not None:
            return existing, False
        if len(self.edges) >= self.config.max_edges:
            self.truncated = True
            return None, False
        edge = Edge(len(self.edges), span[0], span[1], source, logic,
                    output_var, output_type, kind, children)
        self.edges.append(edge)
        self._by_span.setdefault(span, []).append(edge)
        self._ends_at.setdefault(span[0], set()).add(span[1])
        self._dedup[key] = edge
        return edge, True


def _edge_kind(kb: KnowledgeBase, logic: Expr) -> str:
    if is_sentence(logic):
        return "sentential"
    if isinstance(logic, (Numeral, Text)):
        return "instance"
    if isinstance(logic, (Constant, Nat)):
        return "instance" if kb.kindedness(logic) == "individual" else "collection"
    return "collection"


def _seed_tag_edges(graph: ParseGraph):
    kb = graph.kb
    for span in graph.chart.spans:
        for concept in span.concepts:
            if isinstance(concept, Numeral):
                output_type: Expr = Constant(kb.numeral_type_name(concept.value))
            else:
                output_type = concept
            violations = kb.check_plausibility(concept, graph.config.context)
            if violations:
                graph.trace_discard("plausibility", "lex", (span.start, span.end),
                                    "; ".join(v.message for v in violations))
                continue
            graph.add_edge((span.start, span.end), "lex", concept, None,
                           output_type, _edge_kind(kb, concept))


# ---------------------------------------------------------------------------
# Retrieval

def _shapes(graph: ParseGraph, start: int, end: int):
    """Tile the window with literal tokens and slot sub-spans.  A token may
    always play a literal role; a slot sub-span needs at least one edge
    spanning it exactly."""

    def rec(pos):
        if pos == end:
            yield ()
            return
        for rest in rec(pos + 1):
            yield (("lit", pos),) + rest
        for span_end in graph.slot_span_ends(pos, end):
            for rest in rec(span_end):
                yield (("slot", (pos, span_end)),) + rest

    yield from rec(start)


def retrieve(graph: ParseGraph, start: int, end: int) -> list:
    """Constructions applicable to the window, with their slot bindings,
    found by lexical -> skeleton -> typed tier chaining.  Also records the
    window's typed-pattern candidate count (the product over tokens of
    readings plus the surface form itself)."""
    kb, repo, config = graph.kb, graph.repo, graph.config
    lang = config.language

    count = 1
    for i in range(start, end):
        count *= len(graph.chart.token_concepts(i)) + 1
    graph.pattern_counts[(start, end)] = count

    used = repo.used_types
    results: list = []
    seen: set = set()
    for shape in _shapes(graph, start, end):
        lex_key = tuple(graph.tokens[i].surface.casefold()
                        for role, payload in shape if role == "lit"
                        for i in (payload,))
        if not repo.lookup("lexical", lex_key, lang):
            continue
        skel_key = tuple(SKELETON_SLOT if role == "slot"
                         else graph.tokens[payload].surface.casefold()
                         for role, payload in shape)
        if not repo.lookup("skeleton", skel_key, lang):
            continue
        slot_spans = [payload for role, payload in shape if role == "slot"]
        per_slot: list = []
        for span in slot_spans:
            type_map: dict = {}
            for edge in graph.edges_at(*span):
                if edge.output_type is None:
                    continue
                try:
                    gens = kb.match_types(edge.output_type)
                except UnknownTermError:
                    continue
                for g in gens:
                    if isinstance(g, Constant) and g.name in used:
                        type_map.setdefault(g.name, []).append(edge)
            if not type_map:
                per_slot = None
                break
            per_slot.append(type_map)
        if per_slot is None:
            continue
        for combo in itertools.product(*[sorted(m) for m in per_slot]):
            it = iter(combo)
            tkey = tuple(("type", next(it)) if role == "slot"
                         else ("lit", graph.tokens[payload].surface.casefold())
                         for role, payload in shape)
            variants = repo.lookup("typed", tkey, lang)
            if not variants:
                continue
            edge_lists = [per_slot[j][combo[j]] for j in range(len(combo))]
            for variant in sorted(variants, key=lambda v: (v.construction_id,
                                                           tuple(map(str, v.elements)))):
                slots = variant.slots
                for edges in itertools.product(*edge_lists):
                    binding = {slots[j]: edges[j] for j in range(len(slots))}
                    sig = (variant.construction_id,
                           tuple(sorted((s.index, e.id) for s, e in binding.items())))
                    if sig in seen:
                        continue
                    seen.add(sig)
                    results.append(Retrieval(
                        graph.repo.constructions[variant.construction_id], binding))
    results.sort(key=lambda r: (r.construction.id,
                                tuple(sorted((s.index, e.id)
                                             for s, e in r.binding.items()))))
    return results


# ---------------------------------------------------------------------------
# Application

def resolve_anaphora(graph: ParseGraph, slot: TypedSlot, window_start: int) -> list:
    """Antecedent candidates for an anaphoric slot: edges entirely left of
    the window whose type satisfies the slot, nearest first, capped at the
    configured maximum."""
    kb, config = graph.kb, graph.config
    slot_type = Constant(slot.type)
    candidates: list = []
    pool = [e for e in graph.edges
            if e.end <= window_start and e.output_type is not None]
    pool.sort(key=lambda e: (-e.end, -e.start, e.id))
    for edge in pool:
        try:
            if kb.subsumes(slot_type, edge.output_type, "auto"):
                candidates.append(edge)
        except UnknownTermError:
            continue
        if len(candidates) >= config.max_anaphor_candidates:
            break
    return candidates


def _test_value(edge: Edge) -> Expr | None:
    """What a semantic test sees for a filled slot: the interpretation
    itself for term edges, the interpreted type for sentential ones."""
    if edge.kind == "sentential":
        return edge.output_type
    return edge.logic


def compose(matrix: Construction, binding: dict, fresh) -> tuple:
    """Build the matrix construction's logic from its filled slots.  Term
    children substitute directly; sentential children have their query
    variables freshened, their output variable substituted into the slot,
    and their sentence conjoined.  A term-denoting matrix that absorbs a
    sentential child is given a fresh output variable equated with the
    term.  Returns (logic, output_var, output_type)."""
    subst_map: dict = {}
    collected: list = []
    for slot in sorted(binding, key=lambda s: s.index):
        edge = binding[slot]
        hole = TypedVar(slot.type, slot.index)
        if edge.kind == "sentential":
            if edge.output_var is None:
                raise CompositionError(
                    f"sentential edge without an output variable cannot fill {slot}")
            n = fresh()
            collected.append(rename_query_vars(edge.logic, n))
            subst_map[hole] = QueryVar(f"{edge.output_var.name}_{n}")
        else:
            subst_map[hole] = edge.logic
    needed = {TypedSlot(v.type, v.index)
              for v in free_vars(matrix.logic_template) if isinstance(v, TypedVar)}
    missing = needed - set(binding)
    if missing:
        names = ", ".join(str(s) for s in sorted(missing, key=str))
        raise CompositionError(f"unfilled logic-template slots: {names}")
    result = substitute(matrix.logic_template, subst_map)
    output_var = matrix.output_var
    if collected:
        if is_sentence(result):
            result = And((result, *collected))
        else:
            fresh_var = QueryVar(f"V{fresh()}")
            collected.append(App(EQUALS, (fresh_var, result)))
            result = And(tuple(collected))
            output_var = fresh_var
    result = simplify(result)
    if output_var is not None and output_var not in free_query_vars(result):
        raise CompositionError(
            f"output variable ?{output_var.name} was simplified away")
    if isinstance(matrix.output_type, tuple):
        ref = matrix.output_type[1]
        ref_slot = next(s for s in binding if s.index == ref)
        output_type = binding[ref_slot].output_type
    elif isinstance(matrix.output_type, str):
        output_type = Constant(matrix.output_type)
    else:
        output_type = None
    return result, output_var, output_type


def apply_construction(graph: ParseGraph, c: Construction, binding: dict,
                       span: tuple) -> list:
    """Resolve anaphora, run the semantic tests, compose, and check
    plausibility.  Survivors become edges; failures are traced."""
    kb, config = graph.kb, graph.config
    bindings = [dict(binding)]
    for slot in sorted(c.anaphoric_refs, key=lambda s: s.index):
        candidates = resolve_anaphora(graph, slot, span[0])
        if not candidates:
            key = (c.id, span, "anaphora", slot.index)
            if key not in graph._tried:
                graph._tried.add(key)
                graph.trace_discard("anaphora", c.id, span,
                                    f"no antecedent for {slot}")
            return []
        bindings = [{**b, slot: cand}
                    for b in bindings for cand in candidates]

    out: list = []
    for b in bindings:
        sig = (c.id, span, tuple(sorted((s.index, e.id) for s, e in b.items())))
        if sig in graph._tried:
            # a previously surviving binding still counts as an application
            prior = graph._applied.get(sig)
            if prior is not None:
                out.append(prior)
            continue
        graph._tried.add(sig)
        test_sub = {}
        for s, e in b.items():
            value = _test_value(e)
            if value is not None:
                test_sub[TypedVar(s.type, s.index)] = value
        discarded = False
        for idx, t in enumerate(c.tests_positive, 1):
            atom = substitute(t, test_sub)
            if not kb.holds(atom, config.context):
                graph.trace_discard("positive-test", c.id, span,
                                    f"{c.id}/pos{idx} failed: {print_expr(atom)}")
                discarded = True
                break
        if discarded:
            continue
        for idx, t in enumerate(c.tests_negative, 1):
            atom = substitute(t, test_sub)
            if kb.holds(atom, config.context):
                graph.trace_discard("negative-test", c.id, span,
                                    f"{c.id}/neg{idx} held: {print_expr(atom)}")
                discarded = True
                break
        if discarded:
            continue
        try:
            logic, output_var, output_type = compose(c, b, graph.fresh)
        except CompositionError as err:
            graph.trace_discard("composition", c.id, span, str(err))
            continue
        violations = kb.check_plausibility(logic, config.context)
        if violations:
            graph.trace_discard("plausibility", c.id, span,
                                "; ".join(f"{v.kind}: {v.message}" for v in violations))
            continue
        children = tuple(sorted((s.index, e.id) for s, e in b.items()))
        edge, _ = graph.add_edge(span, c.id, logic, output_var, output_type,
                                 _edge_kind(kb, logic) if output_var is None
                                 else "sentential", children)
        if edge is not None:
            out.append(edge)
            graph._applied[sig] = edge
    return out


def window_loop(graph: ParseGraph):
    """Run windows to fixpoint.  For each anchor the window shrinks until
    something applies; any application advances the anchor one token; the
    whole sweep repeats while new edges keep appearing."""
    config = graph.config
    n = len(graph.tokens)
    while True:
        before = len(graph.edges)
        for start in range(n):
            if graph.truncated:
                return
            for size in range(min(config.max_window, n - start), 0, -1):
                applied = False
                for r in retrieve(graph, start, start + size):
                    edges = apply_construction(graph, r.construction, r.binding,
                                               (start, start + size))
                    applied = applied or bool(edges)
                if applied:
                    break
        if len(graph.edges) == before or graph.truncated:
            return


def interpret(text: str, kb: KnowledgeBase, repo: Repository, lexicon: Lexicon,
              config: EngineConfig | None = None) -> ParseGraph:
    """Tag, seed lexical edges, and run the window loop to fixpoint."""
    config = config or EngineConfig()
    chart = tag(text, lexicon)
    graph = ParseGraph(text, chart, kb, repo, config)
    _seed_tag_edges(graph)
    window_loop(graph)
    return graph


# ---------------------------------------------------------------------------
# Finalization

@dataclass(frozen=True)
class Interpretation:
    edge_id: int
    start: int
    end: int
    logic: Expr
    output_type: Expr | None
    source: str
    text: str

    @property
    def span(self) -> tuple:
        return (self.start, self.end)

    @property
    def token_length(self) -> int:
        return self.end - self.start


def _span_text(graph: ParseGraph, start: int, end: int) -> str:
    if start >= end or not graph.tokens:
        return ""
    return graph.text[graph.tokens[start].start:graph.tokens[end - 1].end]


def finalize(graph: ParseGraph, config: EngineConfig | None = None,
             maximal_only: bool = True) -> list:
    """Ranked interpretations: construction edges, largest span first,
    then fewer conjuncts, then lexicographic logic text.  Statement and
    check modes close free query variables existentially; question mode
    leaves them free."""
    config = config or graph.config
    edges = [e for e in graph.edges if e.source != "lex"]
    if maximal_only:
        spans = {(e.start, e.end) for e in edges}
        def covered(e):
            return any(s <= e.start and e.end <= t and (s, t) != (e.start, e.end)
                       for (s, t) in spans)
        edges = [e for e in edges if not covered(e)]
    out = []
    for e in edges:
        logic = e.logic
        if config.outermost_policy in ("statement", "check"):
            logic = quantify_existential(logic)
        out.append(Interpretation(e.id, e.start, e.end, logic, e.output_type,
                                  e.source, _span_text(graph, e.start, e.end)))
    out.sort(key=lambda it: (-(it.end - it.start),
                             conjunct_count(graph.edges[it.edge_id].logic),
                             print_expr(it.logic)))
    return out
