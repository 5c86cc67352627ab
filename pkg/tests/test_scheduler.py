import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brickplan.connectivity import connectivity_graph
from brickplan.ldraw import parse_ldraw
from brickplan.planner import PlannerConfig, Strategy, make_plan
from brickplan.scheduler import (
    _build,
    Compose,
    Leaf,
    Tensor,
    diagram_to_expression,
    leaves,
    linearize,
    par,
    schedule_from_json,
    schedule_to_json,
    seq,
    to_sexpr,
    validate_schedule,
)
from brickplan.wiring import JoinBox, Plan, PlanStructureError, flatten

from helpers import FGHK, fghk_plan, is_linear_extension_bruteforce, random_stack_model

f, g, h, k = (Leaf(i) for i in (1, 2, 3, 4))


def test_two_strand_plan_expression_and_schedule():
    expr = diagram_to_expression(fghk_plan())
    assert expr == Tensor((Compose((f, g)), Compose((h, k))))
    assert to_sexpr(expr, FGHK) == "(par (seq f g) (seq h k))"
    assert [FGHK[b] for b in linearize(expr)] == ["f", "h", "g", "k"]


def test_two_expressions_same_schedule():
    assert linearize(par(seq(f, g), seq(h, k))) == [1, 3, 2, 4]
    assert linearize(seq(par(f, h), par(g, k))) == [1, 3, 2, 4]


def test_tensor_order_matters():
    assert linearize(par(g, f)) == [2, 1]
    assert linearize(par(f, g)) == [1, 2]


def test_single_box_is_a_leaf():
    plan = Plan((JoinBox.make(7, {1}, {2}, [(1, 2)]),), (frozenset({1}), frozenset({2})),
                (frozenset({1, 2}),))
    assert diagram_to_expression(plan) == Leaf(7)


def test_diamond_dependencies():
    # a -> {b, c} -> d cannot come from join boxes (a wire is consumed once),
    # so exercise the decomposition on the raw dependency map
    deps = {1: (), 2: (1,), 3: (1,), 4: (2, 3)}
    assert _build([1, 2, 3, 4], deps) == Compose((Leaf(1), Tensor((Leaf(2), Leaf(3))), Leaf(4)))


def test_source_layers_are_peeled():
    plan = Plan.assembly([
        JoinBox.make(1, {1}, {2}, [(1, 2)]),
        JoinBox.make(2, {1, 2}, {3}, [(2, 3)]),
        JoinBox.make(3, {4}, {5}, [(4, 5)]),
        JoinBox.make(4, {4, 5}, {6}, [(5, 6)]),
        JoinBox.make(5, {1, 2, 3}, {4, 5, 6}, [(3, 4)]),
    ], range(1, 7))
    assert diagram_to_expression(plan) == Compose(
        (Tensor((Leaf(1), Leaf(3))), Tensor((Leaf(2), Leaf(4))), Leaf(5)))


def test_nary_constructors_flatten():
    assert seq(f) == f
    assert seq(seq(f, g), h) == Compose((f, g, h))
    assert par(par(f, g), h) == Tensor((f, g, h))


def test_round_robin_is_fair():
    expr = par(seq(Leaf(1), Leaf(2), Leaf(3)), Leaf(4), seq(Leaf(5), Leaf(6)))
    assert linearize(expr) == [1, 4, 5, 2, 6, 3]


def test_reversed_chain_is_invalid():
    plan = Plan((JoinBox.make(1, {1}, {2}, [(1, 2)]), JoinBox.make(2, {1, 2}, {3}, [(2, 3)])),
                tuple(frozenset({i}) for i in (1, 2, 3)), (frozenset({1, 2, 3}),))
    assert validate_schedule([1, 2], plan)
    assert not validate_schedule([2, 1], plan)
    assert not validate_schedule([1], plan)
    assert not validate_schedule([1, 1], plan)


def test_antichain_accepts_every_order():
    plan = Plan(tuple(JoinBox.make(i, {2 * i - 1}, {2 * i}, [(2 * i - 1, 2 * i)]) for i in (1, 2, 3)),
                tuple(frozenset({i}) for i in range(1, 7)),
                tuple(frozenset({2 * i - 1, 2 * i}) for i in (1, 2, 3)))
    perms = list(itertools.permutations([1, 2, 3]))
    assert len(perms) == 6
    assert all(validate_schedule(p, plan) for p in perms)
    assert diagram_to_expression(plan) == Tensor((Leaf(1), Leaf(2), Leaf(3)))


def test_cycle_and_empty_plan_raise():
    with pytest.raises(PlanStructureError):
        diagram_to_expression(Plan((), (), ()))
    a = JoinBox(1, (frozenset({1}), frozenset({2, 3})), frozenset({1, 2, 3}))
    b = JoinBox(2, (frozenset({1, 2, 3}), frozenset({4})), frozenset({2, 3}))
    with pytest.raises(PlanStructureError):
        diagram_to_expression(Plan((a, b), (frozenset({1}), frozenset({4})), ()))


def test_black_boxes_are_leaves():
    plan, _, _ = make_plan(_model(5, 12), PlannerConfig(Strategy.PARALLEL))
    expr = diagram_to_expression(plan)
    assert sorted(leaves(expr)) == sorted(plan.box_ids)


def test_schedule_json_round_trip():
    text = schedule_to_json([1, 3, 2, 4], "fghk")
    assert schedule_from_json(text) == [1, 3, 2, 4]
    assert '"plan_id": "fghk"' in text


def _model(seed: int, n: int):
    return connectivity_graph(parse_ldraw(random_stack_model(random.Random(seed), n)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 10), st.sampled_from(list(Strategy)))
def test_schedules_are_linear_extensions(seed, n, strategy):
    plan, _, _ = make_plan(_model(seed, n), PlannerConfig(strategy, seed=seed))
    for p in (plan, flatten(plan)):
        expr = diagram_to_expression(p)
        order = linearize(expr)
        assert sorted(leaves(expr)) == sorted(p.box_ids)
        assert validate_schedule(order, p)
        assert order == linearize(diagram_to_expression(p))
        if len(p.boxes) <= 8:
            assert is_linear_extension_bruteforce(order, p)
