import pytest

from planloop.actions import Action, ActionSequence, load_schemas, parse_plan
from planloop.knowledge import Mismatch, load_knowledge_base
from planloop.refine import (
    LexiconCycleError,
    MalformedLexiconError,
    detect_mismatches,
    load_lexicon,
    parse_lexicon,
    propose_replacement,
    refine_sequence,
)
from planloop.resources import data_path
from planloop.triples import serialize_turtle


@pytest.fixture(scope="module")
def kb():
    return load_knowledge_base(
        data_path("cooking", "state.ttl"),
        data_path("cooking", "attributes.ttl"),
        data_path("cooking", "capabilities.map"),
    )


@pytest.fixture(scope="module")
def schemas():
    return load_schemas(data_path("cooking", "actions.schema"))


@pytest.fixture(scope="module")
def lexicon():
    return load_lexicon(data_path("cooking", "lexicon.txt"))


def test_lexicon_loads_with_categories(lexicon):
    assert "skillet" in lexicon
    assert "receptacle" in lexicon.categories_of("pan")
    assert "pan" in lexicon.siblings("skillet")


def test_lexicon_rejects_cycle():
    with pytest.raises(LexiconCycleError):
        parse_lexicon("a object b\nb object a\n")


def test_lexicon_rejects_bad_category():
    with pytest.raises(MalformedLexiconError):
        parse_lexicon("a gadget -\n")


def test_lexicon_rejects_dangling_hypernym():
    with pytest.raises(MalformedLexiconError):
        parse_lexicon("a object ghost\n")


def test_detect_feasible_plan_is_clean(kb, schemas):
    seq = parse_plan("1. pick_up(egg)\n2. crack(egg, pan)")
    assert detect_mismatches(seq, kb, schemas) == []


def test_detect_unknown_object_with_step(kb, schemas):
    seq = parse_plan("1. pick_up(egg)\n2. crack(egg, skillet)")
    found = detect_mismatches(seq, kb, schemas)
    assert found == [Mismatch("unknown_object", "skillet", 2, arg_index=1)]


def test_detect_orders_action_before_object(kb, schemas):
    seq = parse_plan("1. zap(skillet)")
    kinds = [m.kind for m in detect_mismatches(seq, kb, schemas)]
    assert kinds == ["unknown_action", "unknown_object"]


def test_propose_sibling_replacement(kb, schemas, lexicon):
    m = Mismatch("unknown_object", "skillet", 1, arg_index=0)
    assert propose_replacement(m, kb, lexicon, schemas) == "pan"


def test_propose_exact_match_returns_token(kb, schemas, lexicon):
    m = Mismatch("unknown_object", "pan", 1, arg_index=0)
    assert propose_replacement(m, kb, lexicon, schemas) == "pan"


def test_propose_none_without_lexicon_entry(kb, schemas, lexicon):
    m = Mismatch("unknown_object", "mopping_cloth", 1, arg_index=0)
    assert propose_replacement(m, kb, lexicon, schemas) is None


def test_propose_action_replacement_from_schema_verbs(kb, schemas, lexicon):
    m = Mismatch("unknown_action", "chop", 1)
    assert propose_replacement(m, kb, lexicon, schemas) == "slice"
    m = Mismatch("unknown_action", "saute", 1)
    # boil and fry tie as siblings of saute; lexicographic tie-break
    assert propose_replacement(m, kb, lexicon, schemas) == "boil"


def test_propose_capability_violation_replacement(kb, schemas, lexicon):
    # yogurt is not sliceable; its dairy siblings are milk, butter, cheese and
    # only cheese carries IsSliceable
    m = Mismatch("capability_violation", "yogurt", 1, arg_index=0, capability="IsSliceable")
    assert propose_replacement(m, kb, lexicon, schemas) == "cheese"


def test_refine_identity_on_feasible_plan(kb, schemas, lexicon):
    seq = parse_plan("1. pick_up(egg)\n2. crack(egg, pan)")
    result = refine_sequence(seq, kb, lexicon, schemas)
    assert result.refined.steps == seq.steps
    assert result.unresolved == ()
    assert result.rewrites == ()


def test_refine_rewrites_skillet_to_pan(kb, schemas, lexicon):
    seq = parse_plan("1. pick_up(egg)\n2. crack(egg, skillet)")
    result = refine_sequence(seq, kb, lexicon, schemas)
    assert result.rewrites == (("skillet", "pan"),)
    assert result.unresolved == ()
    assert result.refined.steps[1] == Action("crack", ("egg", "pan"))
    assert result.refined.source == "refined"


def test_refine_leaves_unrepairable_mismatch(kb, schemas, lexicon):
    seq = parse_plan("1. mop(mopping_cloth)")
    result = refine_sequence(seq, kb, lexicon, schemas)
    assert result.refined.steps == seq.steps
    assert len(result.unresolved) == 1
    assert result.unresolved[0].kind == "unknown_object"
    assert result.unresolved[0].token == "mopping_cloth"


def test_refine_idempotent(kb, schemas, lexicon):
    seq = parse_plan("1. chop(skillet)\n2. pick_up(wok)")
    first = refine_sequence(seq, kb, lexicon, schemas)
    second = refine_sequence(first.refined, kb, lexicon, schemas)
    assert second.refined.steps == first.refined.steps
    assert second.unresolved == first.unresolved
    assert second.rewrites == ()


def test_refine_replacements_resolve_in_kb(kb, schemas, lexicon):
    from planloop.knowledge import entity_exists

    seq = parse_plan("1. slice(skillet)\n2. chop(cheese)")
    result = refine_sequence(seq, kb, lexicon, schemas)
    verbs = {s.verb for s in schemas}
    for _, to in result.rewrites:
        assert to in verbs or entity_exists(kb, to) is not None


def test_refine_does_not_touch_kb(kb, schemas, lexicon):
    before = (serialize_turtle(kb.state), serialize_turtle(kb.attributes))
    refine_sequence(parse_plan("1. chop(skillet)"), kb, lexicon, schemas)
    assert (serialize_turtle(kb.state), serialize_turtle(kb.attributes)) == before


def test_refine_unresolved_empty_implies_clean(kb, schemas, lexicon):
    seq = parse_plan("1. slice(skillet)")
    result = refine_sequence(seq, kb, lexicon, schemas)
    if not result.unresolved:
        assert detect_mismatches(result.refined, kb, schemas) == []
