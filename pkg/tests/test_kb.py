import itertools

import pytest

from conftest import BIO_KB_FILES, DEMO_KB_FILES
from construe import sexpr
from construe.kb import (ContextStack, KbLoadError, UnknownTermError,
                         UntypedTermError, lint_kb, load_kb, load_kb_lenient)
from construe.logic import Constant, Nat, from_sexpr, parse_expr


# ---------------------------------------------------------------------------
# Independent BFS oracle over the raw link files

def link_graph(paths):
    graph = {}
    for path in paths:
        for form in sexpr.parse_all(path.read_text(encoding="utf-8"), str(path)):
            if isinstance(form, sexpr.SexprList) and len(form) == 3 \
                    and str(form[0]) in ("isa", "genls"):
                s, g = from_sexpr(form[1]), from_sexpr(form[2])
                graph.setdefault(s, set()).add(g)
                graph.setdefault(g, set())
    return graph


def bfs_closure(graph, start):
    seen, queue = set(), [start]
    while queue:
        node = queue.pop()
        if node in seen:
            continue
        seen.add(node)
        queue.extend(graph.get(node, ()))
    return seen


@pytest.mark.parametrize("files", [DEMO_KB_FILES, BIO_KB_FILES],
                         ids=["demo", "bio"])
def test_generalizations_match_bfs_oracle_everywhere(files):
    kb = load_kb(files)
    graph = link_graph(files)
    assert graph
    for term in graph:
        assert kb.generalizations(term) == frozenset(bfs_closure(graph, term))


def test_generalizations_of_glycine_counted_by_oracle(bio_kb):
    graph = link_graph(BIO_KB_FILES)
    expected = bfs_closure(graph, Constant("Glycine"))
    got = bio_kb.generalizations(Constant("Glycine"))
    assert len(got) == len(expected)
    assert got == frozenset(expected)


def test_generalizations_reflexive(demo_kb):
    for name in ("Building", "BlueColor", "Candle", "toLocation"):
        assert Constant(name) in demo_kb.generalizations(Constant(name))


def test_generalizations_of_building(demo_kb):
    gens = demo_kb.generalizations(Constant("Building"))
    assert {Constant("Building"), Constant("PositiveDimensionalThing"),
            Constant("PartiallyTangible")} <= gens


def test_generalizations_unknown_term(demo_kb):
    with pytest.raises(UnknownTermError):
        demo_kb.generalizations(Constant("NoSuchTerm"))


def test_nat_closure_seeded_from_result_rule(demo_kb):
    nat = parse_expr("(GroupFn Sandwich)")
    gens = demo_kb.generalizations(nat)
    assert Constant("Group") in gens
    assert Constant("SomethingExisting") in gens


def test_nat_explicit_links_win_over_signature(bio_kb):
    nat = parse_expr("(AminoAcidResidueTypeFn Glycine)")
    gens = bio_kb.generalizations(nat)
    assert Constant("Glycine") in gens
    assert Constant("AminoAcid") in gens
    assert Constant("AminoAcidResidueType") in gens


# ---------------------------------------------------------------------------
# Subsumption

def test_subsumes_genls_building(demo_kb):
    assert demo_kb.subsumes(Constant("PartiallyTangible"), Constant("Building"),
                            "genls")


def test_subsumes_instance_vs_specialization(demo_kb):
    white_house = Constant("TheWhiteHouse")
    assert demo_kb.subsumes(Constant("PartiallyTangible"), white_house, "isa")
    assert not demo_kb.subsumes(Constant("PartiallyTangible"), white_house,
                                "genls")


def test_subsumes_reflexive_on_collections(demo_kb):
    for name in ("Building", "Candle", "MovementEvent"):
        assert demo_kb.subsumes(Constant(name), Constant(name), "genls")


def test_subsumes_auto_uses_declarations(demo_kb):
    # individuals go through isa, collections through genls
    assert demo_kb.subsumes(Constant("Color"), Constant("BlueColor"), "auto")
    assert demo_kb.subsumes(Constant("Food"), Constant("Sandwich"), "auto")
    assert not demo_kb.subsumes(Constant("Sandwich"), Constant("BlueColor"),
                                "auto")


def test_subsumption_partial_order_on_collections(demo_kb):
    collections = sorted(n for n in demo_kb.term_names
                         if demo_kb.kindedness(Constant(n)) == "collection"
                         and demo_kb.known(Constant(n)))
    terms = [Constant(n) for n in collections]
    closure = {t: demo_kb.genls_closure(t) for t in terms}
    for t in terms:
        assert t in closure[t]
    for a, b in itertools.product(terms, repeat=2):
        if b in closure[a] and a in closure[b]:
            assert a == b  # antisymmetry
    for a in terms:
        for b in closure[a]:
            assert closure[b] <= closure[a]  # transitivity


# ---------------------------------------------------------------------------
# Facts

CANDLE_TEST = ("((TypeCapableFn behaviorCapable) BlowingOutAFlame "
               "objectActedOn Candle)")


def test_holds_candle_fact(demo_kb):
    assert demo_kb.holds(parse_expr(CANDLE_TEST))


def test_holds_uses_subsumption_on_arguments():
    kb = load_kb(text="""
      (collection Candle) (collection TaperCandle)
      (genls TaperCandle Candle)
      (collection BlowingOutAFlame)
      (fact base ((TypeCapableFn behaviorCapable) BlowingOutAFlame
                  objectActedOn Candle))
      (fn TypeCapableFn 1 (resultIsa BinaryPredicate))
      (collection BinaryPredicate)
    """)
    specific = parse_expr("((TypeCapableFn behaviorCapable) BlowingOutAFlame "
                          "objectActedOn TaperCandle)")
    assert kb.holds(specific)


def test_holds_genls_atom_consults_taxonomy(demo_kb):
    assert not demo_kb.holds(parse_expr("(genls Bank-Topographical Business)"))
    assert demo_kb.holds(parse_expr("(genls Electron SubAtomicParticle)"))
    assert demo_kb.holds(parse_expr("(isa TheWhiteHouse PartiallyTangible)"))


def test_holds_conjunction_and_negation(demo_kb):
    e = parse_expr("(and (genls Electron SubAtomicParticle) "
                   "(not (genls Candle SubAtomicParticle)))")
    assert demo_kb.holds(e)


def test_holds_on_empty_kb_is_false():
    kb = load_kb(text="")
    assert not kb.holds(parse_expr("(p a b)"))
    assert not kb.holds(parse_expr("(genls A B)"))


def test_holds_is_monotone():
    base = """
      (collection A) (collection B) (collection C)
      (fact base (p A B))
    """
    extra = base + "\n(fact base (p B C))\n(fact base (q A))"
    kb1 = load_kb(text=base)
    kb2 = load_kb(text=extra)
    atoms = [parse_expr(t) for t in ("(p A B)", "(p B C)", "(q A)", "(p C A)")]
    for atom in atoms:
        if kb1.holds(atom):
            assert kb2.holds(atom)


def test_context_overlay_inherits_base():
    kb = load_kb(text="""
      (collection Tire) (collection BlowingOutAFlame)
      (fact base (capable BlowingOutAFlame Candle))
      (fact garage-app (capable BlowingOutAFlame Tire))
      (collection Candle)
    """)
    base_only = ContextStack()
    with_overlay = ContextStack(overlay="garage-app")
    tire_atom = parse_expr("(capable BlowingOutAFlame Tire)")
    candle_atom = parse_expr("(capable BlowingOutAFlame Candle)")
    assert not kb.holds(tire_atom, base_only)
    assert kb.holds(tire_atom, with_overlay)
    assert kb.holds(candle_atom, with_overlay)  # overlay inherits the base


# ---------------------------------------------------------------------------
# Plausibility

def test_plausibility_instance_vs_specialization(demo_kb):
    e = parse_expr("(SitTypeSpecWithTypeRestrictionOnRolePlayerFn "
                   "DancingMovement toLocation TheWhiteHouse)")
    violations = demo_kb.check_plausibility(e)
    assert any(v.kind == "instance-vs-specialization" for v in violations)


def test_plausibility_inter_argument(demo_kb):
    bad = parse_expr("(properPartTypeCount MusicalComposition Note-Document 6)")
    good = parse_expr("(properPartTypeCount MusicalComposition MusicalNote 6)")
    assert any(v.kind == "inter-arg" for v in demo_kb.check_plausibility(bad))
    assert demo_kb.check_plausibility(good) == []


def test_plausibility_known_false_by_disjointness(demo_kb):
    e = parse_expr("(genls Bank-Topographical Business)")
    assert any(v.kind == "known-false" for v in demo_kb.check_plausibility(e))
    ok = parse_expr("(genls Bank-FinancialOrganization Business)")
    assert demo_kb.check_plausibility(ok) == []


def test_plausibility_ok_on_well_typed_expression(demo_kb):
    e = parse_expr("(SubcollectionOfWithRelationToFn Building "
                   "mainColorOfObject BlueColor)")
    assert demo_kb.check_plausibility(e) == []


def test_plausibility_structural_error_has_path(demo_kb):
    e = parse_expr('(and (isa ?X Dog) 7)')
    violations = demo_kb.check_plausibility(e)
    assert violations and violations[0].kind == "structural"
    assert violations[0].path == (1,)


def test_plausibility_arity_mismatch(demo_kb):
    e = parse_expr("(LargeFn Building Candle)")
    assert any(v.kind == "structural" for v in demo_kb.check_plausibility(e))


def test_plausibility_skips_negated_contexts(demo_kb):
    e = parse_expr("(not (genls Bank-Topographical Business))")
    assert demo_kb.check_plausibility(e) == []


# ---------------------------------------------------------------------------
# Result typing

def test_result_type_first_argument(demo_kb):
    e = parse_expr("(SubcollectionOfWithRelationToFn Building "
                   "mainColorOfObject BlueColor)")
    assert demo_kb.result_type(e) == Constant("Building")


def test_result_type_via_argument_type(demo_kb):
    e = parse_expr("(LargeFn $PositiveDimensionalThing#0)")
    assert demo_kb.result_type(e) == Constant("PositiveDimensionalThing")
    nested = parse_expr("(LargeFn (SubcollectionOfWithRelationToFn Building "
                        "mainColorOfObject BlueColor))")
    inner = parse_expr("(SubcollectionOfWithRelationToFn Building "
                       "mainColorOfObject BlueColor)")
    assert demo_kb.result_type(nested) == inner


def test_result_type_constant_rule(demo_kb):
    assert demo_kb.result_type(parse_expr("(YearFn 2015)")) == \
        Constant("CalendarYear")
    assert demo_kb.result_type(parse_expr("(GroupFn Sandwich)")) == \
        Constant("Group")


def test_result_type_missing_signature(demo_kb):
    with pytest.raises(UntypedTermError):
        demo_kb.result_type(Nat(Constant("MysteryFn"), (Constant("Candle"),)))


# ---------------------------------------------------------------------------
# Loading and linting

def test_loader_rejects_genls_cycle():
    with pytest.raises(KbLoadError) as exc:
        load_kb(text="(genls A B)\n(genls B A)")
    message = str(exc.value)
    assert "cycle" in message and "A" in message and "B" in message


def test_loader_rejects_self_link():
    with pytest.raises(KbLoadError):
        load_kb(text="(genls A A)")


def test_loader_rejects_arity_mismatch():
    with pytest.raises(KbLoadError):
        load_kb(text="(fn F 2 (resultIsa C))\n(fact base (p (F A)))")


def test_lenient_load_collects_findings():
    kb, findings = load_kb_lenient(text="(genls A B)\n(genls B A)\n(isa X X)")
    codes = {f.code for f in findings}
    assert "kb-genls-cycle" in codes
    assert "kb-self-link" in codes


def test_disjointness_is_symmetric(demo_kb):
    a, b = Constant("Bank-Topographical"), Constant("Business")
    assert demo_kb.disjoint_known(a, b)
    assert demo_kb.disjoint_known(b, a)


def test_lint_flags_disjoint_with_generalization():
    kb = load_kb(text="""
      (collection A) (collection B)
      (genls A B)
      (disjoint A B)
    """)
    findings = lint_kb(kb)
    assert any(f.code == "kb-disjoint-subsumption" for f in findings)


def test_bundled_kbs_lint_clean(demo_kb, bio_kb):
    assert lint_kb(demo_kb) == []
    assert lint_kb(bio_kb) == []
