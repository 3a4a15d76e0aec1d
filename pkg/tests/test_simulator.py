import pytest

from planloop.actions import load_schemas, parse_plan
from planloop.knowledge import AGENT, HOLDING, Expansion, apply_expansion, load_knowledge_base
from planloop.resources import data_dir, data_path
from planloop.simulator import (
    GoalSpec,
    check_goal,
    execute,
    missing_goal_triples,
    render_progress,
)
from planloop.triples import BoolLiteral, Graph, Triple, ex, stats


def make_kb():
    return load_knowledge_base(
        data_path("cooking", "state.ttl"),
        data_path("cooking", "attributes.ttl"),
        data_path("cooking", "capabilities.map"),
    )


@pytest.fixture(scope="module")
def schemas():
    return load_schemas(data_path("cooking", "actions.schema"))


def add_onion(kb):
    apply_expansion(
        kb,
        Expansion(
            entity=ex("onion"),
            location=ex("fridge"),
            class_attributes=(("IsSliceable", True), ("Fryable", True), ("NeedsToBeCleaned", True)),
            state_flags=(("sliced", False), ("IsFried", False), ("IsCleaned", False)),
        ),
    )


def test_pick_up_and_slice_with_knife_held(schemas):
    kb = make_kb()
    add_onion(kb)
    kb.state.insert(Triple(AGENT, HOLDING, ex("knife")))
    trace, err = execute(parse_plan("1. pick_up(onion)\n2. slice(onion)"), kb, schemas)
    assert err is None
    assert [s.status for s in trace.steps] == ["applied", "applied"]
    assert kb.state.ask(Triple(ex("onion"), ex("sliced"), BoolLiteral(True)))


def test_move_applies_from_any_state(schemas):
    kb = make_kb()
    trace, err = execute(parse_plan("1. move(kitchen)"), kb, schemas)
    assert err is None
    assert kb.state.value(AGENT, ex("obj_location")) == ex("kitchen")


def test_slice_without_knife_fails_preconditions(schemas):
    kb = make_kb()
    trace, err = execute(parse_plan("1. slice(tomato)"), kb, schemas)
    assert err is not None
    assert err.kind == "precondition_failed"
    assert err.step_index == 1
    assert "knife" in err.detail


def test_missing_instance_error(schemas):
    kb = make_kb()
    trace, err = execute(parse_plan("1. pick_up(skillet)"), kb, schemas)
    assert err is not None and err.kind == "missing_instance" and err.detail == "skillet"


def test_unknown_verb_at_execution(schemas):
    kb = make_kb()
    _, err = execute(parse_plan("1. juggle(egg)"), kb, schemas)
    assert err is not None and err.kind == "unknown_verb_at_execution"


def test_failure_rolls_back_kb_but_trace_keeps_halt_state(schemas):
    kb = make_kb()
    before = kb.state.copy()
    trace, err = execute(parse_plan("1. toggle_on(stove)\n2. slice(tomato)"), kb, schemas)
    assert err is not None and err.step_index == 2
    assert kb.state == before  # nothing committed
    assert trace.final_state.ask(Triple(ex("stove"), ex("IsOn"), BoolLiteral(True)))
    assert [s.status for s in trace.steps] == ["applied", "failed"]


def test_injected_fault_hook(schemas):
    kb = make_kb()
    trace, err = execute(parse_plan("1. move(kitchen)\n2. move(fridge)"), kb, schemas, fail_step=2)
    assert err is not None
    assert err.step_index == 2 and "injected" in err.detail


def test_capacity_limits_holding(schemas):
    kb = make_kb()
    plan = parse_plan("1. pick_up(egg)\n2. pick_up(knife)\n3. pick_up(spoon)")
    trace, err = execute(plan, kb, schemas)
    assert err is not None and err.step_index == 3 and err.kind == "precondition_failed"
    _, err = execute(plan, make_kb(), schemas, holding_capacity=3)
    assert err is None


def test_node_count_invariant_under_execution(schemas):
    kb = make_kb()
    empty = Graph()
    before = stats(kb.state, empty)[0]
    plan_text = data_path("cooking", "plans", "omelette.plan").read_text()
    _, err = execute(parse_plan(plan_text), kb, schemas)
    assert err is None
    assert stats(kb.state, empty)[0] == before


def test_check_goal_empty_spec_true(schemas):
    kb = make_kb()
    trace, _ = execute(parse_plan("1. move(kitchen)"), kb, schemas)
    assert check_goal(trace, GoalSpec()) is True


def test_omelette_goal_reached(schemas):
    kb = make_kb()
    plan = parse_plan(data_path("cooking", "plans", "omelette.plan").read_text())
    trace, err = execute(plan, kb, schemas)
    assert err is None
    goal = GoalSpec(
        frozenset(
            {
                Triple(ex("egg"), ex("IsCooked"), BoolLiteral(True)),
                Triple(ex("egg"), ex("obj_location"), ex("plate")),
            }
        )
    )
    assert check_goal(trace, goal) is True
    assert missing_goal_triples(trace, goal) == []


def test_goal_false_on_failed_trace(schemas):
    kb = make_kb()
    trace, err = execute(parse_plan("1. slice(tomato)"), kb, schemas)
    assert err is not None
    assert check_goal(trace, GoalSpec()) is False


def test_progress_single_object_rows(schemas):
    kb = make_kb()
    trace, _ = execute(parse_plan("1. move(kitchen)\n2. move(fridge)\n3. move(pantry)"), kb, schemas)
    text = render_progress(trace)
    lines = text.splitlines()
    assert lines[0].split()[0] == "object"
    # kitchen, fridge, pantry rows, each with init + 3 step cells
    assert len(lines) == 4
    assert len(lines[1].split()) == 5


def test_progress_omelette_egg_movement(schemas):
    kb = make_kb()
    plan = parse_plan(data_path("cooking", "plans", "omelette.plan").read_text())
    trace, err = execute(plan, kb, schemas)
    assert err is None
    egg_row = next(line for line in render_progress(trace).splitlines() if line.startswith("egg "))
    cells = egg_row.split()[1:]
    locations = []
    for c in cells:
        loc = c.split("+", 1)[0]
        if not locations or locations[-1] != loc:
            locations.append(loc)
    assert locations == ["fridge", "counter", "pan", "plate"]


def test_progress_rendering_deterministic(schemas):
    plan = parse_plan(data_path("cooking", "plans", "toast.plan").read_text())
    renders = []
    for _ in range(2):
        kb = make_kb()
        trace, err = execute(plan, kb, schemas)
        assert err is None
        renders.append(render_progress(trace))
    assert renders[0] == renders[1]


def test_all_bundled_recipe_plans_execute(schemas):
    plans = sorted((data_dir() / "cooking" / "plans").glob("*.plan"))
    assert len(plans) == 30
    for path in plans:
        kb = make_kb()
        trace, err = execute(parse_plan(path.read_text()), kb, schemas)
        assert err is None, f"{path.name}: {err}"
        assert all(s.status == "applied" for s in trace.steps)
