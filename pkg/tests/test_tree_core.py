import json
import random

import pytest

from treescatter.tree_core import (
    RootedTree,
    canonical_code,
    count_rooted_trees,
    degree,
    delete_root,
    enumerate_rooted_trees,
    path_tree,
    random_tree,
    snowflake,
)

from _oracles import rooted_tree_count


def test_degree_single_edge():
    t = path_tree(2)
    assert degree(t, 0) == 1
    assert degree(t, 1) == 1


def test_degree_star_center():
    t = snowflake(3, [1, 1, 1])
    assert degree(t, 0) == 3
    assert all(degree(t, v) == 1 for v in range(1, 4))


def test_degree_fig2_root():
    assert degree(snowflake(3, [3, 3, 4]), 0) == 3


def test_degree_out_of_range():
    with pytest.raises(IndexError):
        degree(path_tree(2), 5)


def test_degree_sum_is_twice_edges():
    for p in range(1, 9):
        for t in enumerate_rooted_trees(p):
            assert sum(t.degrees()) == 2 * (p - 1)


def test_delete_root_single_edge():
    f = delete_root(path_tree(2))
    assert len(f.components) == 1
    assert f.components[0].p == 1
    assert f.original_degree == ((1,),)


def test_delete_root_star():
    f = delete_root(snowflake(3, [1, 1, 1]))
    assert len(f.components) == 3
    assert all(c.p == 1 for c in f.components)
    assert f.original_degree == ((1,), (1,), (1,))


def test_delete_root_caterpillar():
    # pendant-rooted chain: one component of 8 vertices
    cat = RootedTree((None, 0, 1, 1, 3, 3, 3, 6, 6))
    f = delete_root(cat)
    assert len(f.components) == 1
    assert f.components[0].p == 8
    # original degrees exceed in-component degree by one exactly at the new root
    comp = f.components[0]
    for v in range(comp.p):
        excess = f.original_degree[0][v] - comp.degrees()[v]
        assert excess == (1 if v == 0 else 0)


def test_delete_root_single_vertex_fails():
    with pytest.raises(ValueError):
        delete_root(RootedTree((None,)))


def test_canonical_code_relabel_invariance():
    a = snowflake(3, [1, 1, 1])
    # same star with children attached through a chain of indices
    b = RootedTree((None, 0, 0, 0))
    assert canonical_code(a) == canonical_code(b)


def test_canonical_code_depends_on_root():
    center = snowflake(3, [1, 1, 1])
    leaf_rooted = RootedTree((None, 0, 1, 1, 1))  # star rooted at a leaf
    assert canonical_code(center) != canonical_code(leaf_rooted)


def test_canonical_code_separates_figures():
    fig2 = snowflake(3, [3, 3, 4])
    fig3 = RootedTree((None, 0, 1, 1, 3, 3, 3, 6, 6))
    assert canonical_code(fig2) != canonical_code(fig3)


@pytest.mark.parametrize("p,count", [(1, 1), (2, 1), (3, 2), (4, 4), (7, 48)])
def test_enumeration_counts(p, count):
    assert count_rooted_trees(p) == count
    assert rooted_tree_count(p) == count


def test_enumeration_matches_recurrence_up_to_10():
    for p in range(1, 11):
        assert count_rooted_trees(p) == rooted_tree_count(p)


def test_enumeration_codes_distinct():
    for p in range(1, 9):
        codes = [canonical_code(t) for t in enumerate_rooted_trees(p)]
        assert len(codes) == len(set(codes))


def test_random_trees_land_in_enumeration():
    rng = random.Random(7)
    for trial in range(40):
        p = rng.randint(1, 9)
        t = random_tree(p, seed=trial)
        codes = {canonical_code(u) for u in enumerate_rooted_trees(p)}
        assert canonical_code(t) in codes


def test_snowflake_star():
    assert canonical_code(snowflake(3, [1, 1, 1])) == canonical_code(
        RootedTree((None, 0, 0, 0))
    )


def test_snowflake_fig2_has_11_vertices():
    t = snowflake(3, [3, 3, 4])
    assert t.p == 11
    assert sorted((degree(t, v) for v in range(t.p)), reverse=True) == [
        4, 3, 3, 3, 1, 1, 1, 1, 1, 1, 1,
    ]


def test_snowflake_path():
    t = snowflake(2, [2, 2])
    assert t.p == 5
    assert canonical_code(t) == canonical_code(
        RootedTree((None, 0, 0, 1, 2))
    )


def test_snowflake_validates_lengths():
    with pytest.raises(ValueError):
        snowflake(3, [1, 1])


def test_parent_array_validation():
    with pytest.raises(ValueError):
        RootedTree((None, 2, 1))
    with pytest.raises(ValueError):
        RootedTree((0, 0))


def test_json_roundtrip():
    t = snowflake(3, [3, 3, 4])
    blob = json.dumps(t.to_json())
    assert RootedTree.from_json(json.loads(blob)) == t
    assert t.to_json()["parent"][0] is None


def test_dot_export_mentions_all_edges():
    t = path_tree(3)
    dot = t.to_dot()
    assert "0 -> 1" in dot and "1 -> 2" in dot and dot.startswith("digraph")


def test_delete_then_reattach_reproduces_tree():
    rng = random.Random(3)
    for trial in range(20):
        p = rng.randint(2, 9)
        t = random_tree(p, seed=200 + trial)
        f = delete_root(t)
        parent = [None]
        for comp in f.components:
            offset = len(parent)
            parent.append(0)
            for pa in comp.parent[1:]:
                parent.append(pa + offset)
        rebuilt = RootedTree(tuple(parent))
        assert canonical_code(rebuilt) == canonical_code(t)
