import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brickplan.connectivity import (
    ConnectivityGraph,
    NodeKind,
    add_ground_nodes,
    build_graph,
    connectivity_graph,
    vertical_contact,
)
from brickplan.ldraw import faces, parse_ldraw

from helpers import TURN, bundled, bundled_graph, ldraw_line, oracle_edges, random_loose_model, random_stack_model


def pair(lower: tuple, upper: tuple):
    text = ldraw_line(*lower) + "\n" + ldraw_line(*upper)
    return parse_ldraw(text).objects


def test_brick_directly_on_top_connects():
    a, b = pair(("3003.dat", 0, 0, 0), ("3003.dat", 0, -24, 0))
    assert vertical_contact(a, b)
    assert not vertical_contact(b, a)


def test_side_by_side_does_not_connect():
    a, b = pair(("3003.dat", 0, 0, 0), ("3003.dat", 40, 0, 0))
    assert not vertical_contact(a, b) and not vertical_contact(b, a)


@pytest.mark.parametrize("dx, dz", [(40, 0), (0, 40), (40, 40), (-40, -40)])
def test_edge_and_corner_touch_is_not_a_connection(dx, dz):
    a, b = pair(("3003.dat", 0, 0, 0), ("3003.dat", dx, -24, dz))
    assert not vertical_contact(a, b)


def test_half_stud_overlap_connects():
    a, b = pair(("3003.dat", 0, 0, 0), ("3003.dat", 30, -24, 30))
    assert vertical_contact(a, b)


def test_rotation_changes_the_overlap():
    # 2x4 along z reaches 40 LDU in z, so a 2x2 at dz=50 touches only when turned
    plain = pair(("3001.dat", 0, 0, 0), ("3003.dat", 0, -24, 50))
    turned = pair(("3001.dat", 0, 0, 0, TURN), ("3003.dat", 0, -24, 50))
    assert not vertical_contact(*plain)
    assert vertical_contact(*turned)


def test_three_brick_tower():
    bom = parse_ldraw("\n".join(ldraw_line("3003.dat", 0, -24 * k, 0) for k in range(3)))
    g = build_graph(bom)
    assert g.edges == ((1, 2), (2, 3))
    grounded = add_ground_nodes(g)
    assert grounded.grounds == (4,)
    assert (4, 1) in grounded.edges


def test_single_brick():
    g = build_graph(parse_ldraw(ldraw_line("3001.dat", 0, 0, 0)))
    assert g.nodes == (1,) and g.edges == ()


def test_pipeline_grounds():
    g = bundled_graph("pipeline")
    assert g.bricks == tuple(range(1, 8))
    assert len(g.nodes) == 9
    assert g.grounds == (8, 9)
    assert g.ground_of(8) == 1 and g.ground_of(9) == 6


def test_pipeline_edges():
    g = bundled_graph("pipeline")
    assert set(build_graph(bundled("pipeline")).edges) == {
        (1, 2), (1, 3), (2, 4), (3, 5), (6, 3), (6, 7), (7, 5)}
    assert g.kind(8) is NodeKind.GROUND and g.kind(1) is NodeKind.BRICK


def test_one_parentless_brick_gets_one_ground():
    g = ConnectivityGraph("g", (1, 2, 3), ((1, 2), (1, 3)))
    assert add_ground_nodes(g).grounds == (4,)


def test_brick_held_only_from_above_is_grounded():
    # brick 2 hangs under brick 3, which sits on brick 1
    text = "\n".join([
        ldraw_line("3001.dat", 0, -24, 0),
        ldraw_line("3003.dat", 60, -24, 0),
        ldraw_line("3001.dat", 40, -48, 0),
    ])
    g = connectivity_graph(parse_ldraw(text))
    assert {g.ground_of(x) for x in g.grounds} == {1, 2}


def test_edges_go_upward_and_roots_are_grounds():
    g = bundled_graph("house")
    bom = bundled("house")
    for a, b in g.edges:
        if not g.is_ground(a):
            assert faces(bom.by_id(a))[0] == faces(bom.by_id(b))[1]
    roots = {n for n in g.nodes if not g.predecessors[n]}
    assert roots == set(g.grounds)
    assert all(len(g.successors[x]) == 1 for x in g.grounds)


def test_json_round_trip_and_dot():
    g = bundled_graph("pipeline")
    assert ConnectivityGraph.from_json(g.to_json()) == g
    dot = g.to_dot()
    assert dot.startswith("digraph")
    assert dot.count("->") == len(g.edges)


def test_permuting_file_order_gives_isomorphic_graph():
    rng = random.Random(7)
    text = random_stack_model(rng, 12)
    lines = text.strip().splitlines()
    order = list(range(len(lines)))
    rng.shuffle(order)
    g1 = build_graph(parse_ldraw(text))
    g2 = build_graph(parse_ldraw("\n".join(lines[i] for i in order)))
    relabel = {old + 1: new + 1 for new, old in enumerate(order)}
    assert {(relabel[a], relabel[b]) for a, b in g1.edges} == set(g2.edges)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 10))
def test_build_graph_matches_bruteforce_on_loose_models(seed, n):
    bom = parse_ldraw(random_loose_model(random.Random(seed), n))
    assert set(build_graph(bom).edges) == oracle_edges(bom)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 10))
def test_build_graph_matches_bruteforce_on_stacks(seed, n):
    bom = parse_ldraw(random_stack_model(random.Random(seed), n))
    assert set(build_graph(bom).edges) == oracle_edges(bom)
