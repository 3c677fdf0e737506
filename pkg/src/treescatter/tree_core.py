"""Rooted combinatorial trees: construction, canonical codes, enumeration.

Vertices are indexed 0..p-1 with the root at 0 and parent[i] < i, which keeps
the degree/adjacency matrix ordering deterministic (first row is the root)
and makes the parent array itself a topological order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree given by a parent array with parent[0] = None, parent[i] < i."""

    parent: tuple[Optional[int], ...]

    def __post_init__(self) -> None:
        if not self.parent:
            raise ValueError("a tree has at least one vertex")
        if self.parent[0] is not None:
            raise ValueError("root (index 0) must have parent None")
        for i, pa in enumerate(self.parent[1:], start=1):
            if not isinstance(pa, int) or not 0 <= pa < i:
                raise ValueError(f"parent[{i}] = {pa!r} violates parent[i] < i")

    @property
    def p(self) -> int:
        return len(self.parent)

    def children(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.p)]
        for i, pa in enumerate(self.parent[1:], start=1):
            out[pa].append(i)
        return tuple(tuple(c) for c in out)

    def degrees(self) -> tuple[int, ...]:
        deg = [0 if v == 0 else 1 for v in range(self.p)]
        for pa in self.parent[1:]:
            deg[pa] += 1
        return tuple(deg)

    def to_json(self) -> dict:
        return {"p": self.p, "parent": list(self.parent)}

    @staticmethod
    def from_json(obj: dict) -> "RootedTree":
        parent = obj["parent"]
        if obj.get("p", len(parent)) != len(parent):
            raise ValueError("inconsistent vertex count in tree JSON")
        return RootedTree(tuple(parent))

    def to_dot(self) -> str:
        lines = ["digraph tree {"]
        lines.append('  0 [label="root", shape=doublecircle];')
        for v in range(1, self.p):
            lines.append(f"  {v} [shape=circle];")
        for v, pa in enumerate(self.parent[1:], start=1):
            lines.append(f"  {pa} -> {v};")
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Forest:
    """Components left after deleting a root, each rooted at a former child.

    ``original_degree[i][v]`` is the degree vertex ``v`` of component ``i``
    had in the parent tree.  Deleting the root drops one edge at each
    component root, but the spectral determinants downstream need the
    original degrees, so they are carried explicitly.
    """

    components: tuple[RootedTree, ...]
    original_degree: tuple[tuple[int, ...], ...]


def degree(t: RootedTree, v: int) -> int:
    """Degree of vertex v: parent edge (root has none) plus children."""
    if not 0 <= v < t.p:
        raise IndexError(f"vertex {v} out of range for tree on {t.p} vertices")
    return t.degrees()[v]


def delete_root(t: RootedTree) -> Forest:
    """Remove the root and its incident edges, keeping original degrees."""
    if t.p < 2:
        raise ValueError("deleting the root of a single-vertex tree leaves nothing")
    deg = t.degrees()
    children = t.children()
    comps = []
    degs = []
    for c in children[0]:
        # preorder relabel of the subtree hanging at child c
        order = [c]
        stack = [c]
        while stack:
            v = stack.pop()
            for w in children[v]:
                order.append(w)
                stack.append(w)
        index = {v: i for i, v in enumerate(order)}
        parent: list[Optional[int]] = [None] * len(order)
        for v in order[1:]:
            parent[index[v]] = index[t.parent[v]]
        comps.append(RootedTree(tuple(parent)))
        degs.append(tuple(deg[v] for v in order))
    return Forest(tuple(comps), tuple(degs))


def canonical_code(t: RootedTree) -> str:
    """AHU canonical string: equal iff rooted-isomorphic."""
    children = t.children()
    code: list[Optional[str]] = [None] * t.p
    for v in range(t.p - 1, -1, -1):
        code[v] = "(" + "".join(sorted(code[c] for c in children[v])) + ")"
    return code[0]


def snowflake(root_degree: int, child_degrees: Sequence[int]) -> RootedTree:
    """A root joined to star centres: child k gets child_degrees[k]-1 pendants."""
    if root_degree < 1:
        raise ValueError("root degree must be positive")
    if len(child_degrees) != root_degree:
        raise ValueError(
            f"need exactly {root_degree} child degrees, got {len(child_degrees)}"
        )
    if any(d < 1 for d in child_degrees):
        raise ValueError("child degrees must be positive")
    parent: list[Optional[int]] = [None]
    for d in child_degrees:
        c = len(parent)
        parent.append(0)
        parent.extend([c] * (d - 1))
    return RootedTree(tuple(parent))


def path_tree(p: int) -> RootedTree:
    """Path on p vertices rooted at one end."""
    if p < 1:
        raise ValueError("need at least one vertex")
    return RootedTree((None,) + tuple(range(p - 1)))


def random_tree(p: int, seed: int) -> RootedTree:
    """Deterministic pseudo-random rooted tree on p labelled vertices."""
    if p < 1:
        raise ValueError("need at least one vertex")
    rng = random.Random(seed)
    return RootedTree((None,) + tuple(rng.randrange(i) for i in range(1, p)))


@lru_cache(maxsize=None)
def _canonical_parent_tuples(n: int) -> tuple[tuple[Optional[int], ...], ...]:
    """One parent tuple per rooted-isomorphism class on n vertices.

    A canonical tree is the root plus a multiset of canonical subtrees; the
    recursion enumerates multisets with a non-increasing (size, index) key so
    each class appears exactly once.
    """
    if n == 1:
        return ((None,),)
    out: list[tuple[Optional[int], ...]] = []

    def attach(parent: list[Optional[int]], sub: tuple[Optional[int], ...]) -> None:
        offset = len(parent)
        parent.append(0)
        for pa in sub[1:]:
            parent.append(pa + offset)

    def rec(budget: int, max_key: tuple[int, int], chosen: list[tuple[int, int]]) -> None:
        if budget == 0:
            parent: list[Optional[int]] = [None]
            for size, idx in chosen:
                attach(parent, _canonical_parent_tuples(size)[idx])
            out.append(tuple(parent))
            return
        max_size = min(budget, max_key[0])
        for size in range(max_size, 0, -1):
            subs = _canonical_parent_tuples(size)
            start = min(max_key[1], len(subs) - 1) if size == max_key[0] else len(subs) - 1
            for idx in range(start, -1, -1):
                chosen.append((size, idx))
                rec(budget - size, (size, idx), chosen)
                chosen.pop()

    rec(n - 1, (n - 1, 10**9), [])
    return tuple(out)


def enumerate_rooted_trees(p: int) -> Iterator[RootedTree]:
    """Yield one representative per rooted-isomorphism class on p vertices."""
    if p < 1:
        raise ValueError("need at least one vertex")
    for parent in _canonical_parent_tuples(p):
        yield RootedTree(parent)


def count_rooted_trees(p: int) -> int:
    return len(_canonical_parent_tuples(p))
