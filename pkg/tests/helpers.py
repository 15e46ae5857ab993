"""Shared oracles and random-instance generators for the property suites.

The oracles here stay deliberately independent of the engine paths they
check: the brute-force matcher walks every stored variant directly, and
the ground evaluator models truth over a tiny explicit universe.
"""

import random

from construe.constructions import Literal, load_constructions
from construe.interpreter import EngineConfig, ParseGraph
from construe.kb import UnknownTermError, load_kb
from construe.logic import (And, App, Constant, EQUALS, Not, QueryVar,
                            free_query_vars)
from construe.tagger import TagChart, Token


# ---------------------------------------------------------------------------
# Brute-force variant matching (retrieval oracle)

def brute_force_matches(graph, start, end):
    """Every (construction id, binding signature) whose variant tiles the
    window, matching literals against token surfaces and typed slots
    against edges under auto-mode subsumption."""
    kb, repo = graph.kb, graph.repo
    language = graph.config.language
    out = set()
    for variant in repo.variants:
        if variant.language != language:
            continue

        def match(ei, pos, acc):
            if ei == len(variant.elements):
                if pos == end:
                    out.add((variant.construction_id, frozenset(acc)))
                return
            el = variant.elements[ei]
            if isinstance(el, Literal):
                if pos < end and graph.tokens[pos].surface.casefold() == el.folded:
                    match(ei + 1, pos + 1, acc)
                return
            for span_end in range(pos + 1, end + 1):
                for edge in graph.edges_at(pos, span_end):
                    if edge.output_type is None:
                        continue
                    try:
                        ok = kb.subsumes(Constant(el.type), edge.output_type,
                                         "auto")
                    except UnknownTermError:
                        ok = False
                    if ok:
                        match(ei + 1, span_end, acc + [(el.index, edge.id)])

        match(0, start, [])
    return out


def retrieval_signatures(retrievals):
    return {(r.construction.id,
             frozenset((s.index, e.id) for s, e in r.binding.items()))
            for r in retrievals}


# ---------------------------------------------------------------------------
# Random (repository, window) instances

_VOCAB = ["the", "red", "of", "on", "vast", "near"]


def random_instance(rng: random.Random):
    """A small random taxonomy, construction set, and pre-seeded window."""
    n_types = rng.randint(5, 10)
    types = [f"Type{i}" for i in range(n_types)]
    kb_lines = [f"(collection {t})" for t in types]
    for i in range(1, n_types):
        kb_lines.append(f"(genls {types[i]} {types[rng.randrange(i)]})")
        if i >= 2 and rng.random() < 0.3:
            other = types[rng.randrange(i)]
            if other != types[i]:
                kb_lines.append(f"(genls {types[i]} {other})")
    individuals = [f"Item{i}" for i in range(rng.randint(0, 3))]
    for ind in individuals:
        kb_lines.append(f"(individual {ind})")
        kb_lines.append(f"(isa {ind} {rng.choice(types)})")
    kb = load_kb(text="\n".join(kb_lines))

    cons_forms = []
    for ci in range(rng.randint(3, 8)):
        parts = []
        for ei in range(rng.randint(1, 4)):
            roll = rng.random()
            if roll < 0.40:
                parts.append(rng.choice(_VOCAB))
            elif roll < 0.55:
                parts.append(f"[{rng.choice(_VOCAB)}|{rng.choice(_VOCAB)}]")
            else:
                parts.append(f"${rng.choice(types)}#{ei}")
        nl = " ".join(parts)
        slots = [p for p in parts if p.startswith("$")]
        logic = f"(TupleFn {' '.join(slots)})" if slots else "Marker"
        cons_forms.append(f'(construction :id c{ci} :lang en :nl "{nl}" '
                          f":logic {logic} :output-type Marker)")
    repo = load_constructions(text="\n".join(cons_forms))

    def add_edge(graph, span, name):
        t = Constant(name)
        kind = "instance" if kb.kindedness(t) == "individual" else "collection"
        graph.add_edge(span, "lex" if span[1] - span[0] == 1 else "syn",
                       t, None, t, kind)

    def specializations_of(slot_type):
        out = [t for t in types
               if kb.subsumes(Constant(slot_type), Constant(t), "auto")]
        out += [i for i in individuals
                if kb.subsumes(Constant(slot_type), Constant(i), "auto")]
        return out

    # most windows are laid out from a stored variant so that retrieval has
    # genuine matches to find; the rest are noise
    planted = repo.variants and rng.random() < 0.6
    surfaces, planted_slots = [], []
    if planted:
        variant = rng.choice(repo.variants)
        for el in variant.elements:
            if isinstance(el, Literal):
                surfaces.append(el.text if rng.random() < 0.8
                                else rng.choice(_VOCAB))
            else:
                fillers = specializations_of(el.type)
                width = rng.choice((1, 1, 2))
                start = len(surfaces)
                surfaces.extend(rng.choice(_VOCAB + ["unseen"])
                                for _ in range(width))
                if fillers:
                    planted_slots.append(((start, start + width),
                                          rng.choice(fillers)))
    else:
        surfaces = [rng.choice(_VOCAB + ["unseen"])
                    for _ in range(rng.randint(1, 6))]
    n_tok = max(1, len(surfaces))
    surfaces = surfaces or ["unseen"]

    tokens = []
    offset = 0
    for s in surfaces:
        tokens.append(Token(s, offset, offset + len(s)))
        offset += len(s) + 1
    chart = TagChart(" ".join(surfaces), tokens, [])
    graph = ParseGraph(chart.text, chart, kb, repo, EngineConfig())
    pool = types + individuals
    for span, name in planted_slots:
        add_edge(graph, span, name)
    for i in range(n_tok):
        for _ in range(rng.randint(0, 2)):
            add_edge(graph, (i, i + 1), rng.choice(pool))
    for _ in range(rng.randint(0, 2)):
        if n_tok >= 2:
            s = rng.randrange(n_tok - 1)
            e = rng.randint(s + 2, n_tok)
            add_edge(graph, (s, e), rng.choice(types))
    return graph, (0, n_tok)


# ---------------------------------------------------------------------------
# Random ground-evaluable sentences and the exhaustive evaluator

UNIVERSE = tuple(Constant(f"C{i}") for i in range(1, 6))
_PREDS = (("p", 1), ("q", 2), ("r", 2))
_VARS = (QueryVar("A"), QueryVar("B"), QueryVar("C"))


def random_sentence(rng: random.Random, depth: int = 3):
    # terms stay inside UNIVERSE so enumeration over it is exhaustive
    def term():
        if rng.random() < 0.45:
            return rng.choice(_VARS)
        return rng.choice(UNIVERSE)

    def atom():
        if rng.random() < 0.3:
            return App(EQUALS, (term(), term()))
        name, arity = rng.choice(_PREDS)
        return App(Constant(name), tuple(term() for _ in range(arity)))

    def node(d):
        roll = rng.random()
        if d <= 0 or roll < 0.4:
            return atom()
        if roll < 0.55:
            return Not(node(d - 1))
        return And(tuple(node(d - 1) for _ in range(rng.randint(1, 3))))

    return node(depth)


def random_facts(rng: random.Random):
    facts = set()
    for name, arity in _PREDS:
        for _ in range(rng.randint(0, 6)):
            facts.add((name, tuple(rng.choice(UNIVERSE) for _ in range(arity))))
    return facts


def eval_ground(e, assignment, facts):
    if isinstance(e, And):
        return all(eval_ground(a, assignment, facts) for a in e.args)
    if isinstance(e, Not):
        return not eval_ground(e.arg, assignment, facts)
    if isinstance(e, App):
        args = tuple(assignment.get(a, a) for a in e.args)
        if e.predicate == EQUALS:
            return args[0] == args[1]
        return (e.predicate.name, args) in facts
    raise TypeError(f"cannot evaluate {e!r}")


def satisfying_projection(expr, onto_vars, facts):
    """Assignments (projected onto *onto_vars*) under which *expr* holds,
    enumerating the full universe for each free variable."""
    import itertools

    expr_vars = sorted(free_query_vars(expr), key=lambda v: v.name)
    result = set()
    for values in itertools.product(UNIVERSE, repeat=len(expr_vars)):
        assignment = dict(zip(expr_vars, values))
        if eval_ground(expr, assignment, facts):
            result.add(tuple(assignment.get(v) for v in onto_vars))
    return result
