"""Shape recovery from a reduced rational function F = psi/psi_hat.

The branched-continued-fraction structure behind F: every vertex v carries

    F_v = -d(v) z - sum over children c of 1/F_c,

with F = F_root and F_leaf = -z.  Peeling the root off F exposes the root
degree as a leading-coefficient ratio; the proper remainder is a sum of
child branches.  Candidate child-degree multisets are constrained by a
unit-fraction Diophantine equation on the remainder's leading behaviour, and
every completed candidate is verified by exact re-composition, which is the
final arbiter for all sign and splitting choices.

Embedded-eigenvalue factors may cancel between psi and psi_hat, so the tree
can have more vertices than deg(num); the search therefore ranges over a
vertex budget rather than trusting degrees, and an exhaustive-enumeration
inverter provides an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .polyalg import Poly, RatFunc, ratfunc_x
from .tree_core import RootedTree, canonical_code, enumerate_rooted_trees
from .characteristic import shape_fraction


class NotShapeFractionError(ValueError):
    """The input cannot be the psi/psi_hat fraction of any rooted tree."""


# A shape is the parity-free skeleton of a branch: (pendant count, children),
# children sorted descending so equal shapes are equal tuples.
Shape = tuple[int, tuple]


def _shape_size(s: Shape) -> int:
    return 1 + s[0] + sum(_shape_size(c) for c in s[1])


def _shape_key(s: Shape) -> tuple[int, Shape]:
    return (_shape_size(s), s)


@lru_cache(maxsize=None)
def _branch_fraction(s: Shape) -> RatFunc:
    """F-value of a non-root vertex whose subtree has shape s.

    The vertex degree is 1 (parent edge) + pendants + internal children.
    """
    pendants, children = s
    d = 1 + pendants + len(children)
    f = ratfunc_x(-d)
    if pendants:
        f = f + RatFunc.make(Poly.constant(pendants), Poly.x())
    for c in children:
        f = f - _branch_fraction(c).reciprocal()
    return f


@lru_cache(maxsize=None)
def _shapes_by_size(size: int) -> dict[int, tuple[Shape, ...]]:
    """All branch shapes on `size` vertices, grouped by child count."""
    by_count: dict[int, list[Shape]] = {}
    for t in enumerate_rooted_trees(size):
        s = _tree_to_shape(t)
        by_count.setdefault(s[0] + len(s[1]), []).append(s)
    return {k: tuple(sorted(v, key=_shape_key, reverse=True)) for k, v in by_count.items()}


def _tree_to_shape(t: RootedTree) -> Shape:
    children = t.children()

    def rec(v: int) -> Shape:
        pend = 0
        internal = []
        for c in children[v]:
            if children[c]:
                internal.append(rec(c))
            else:
                pend += 1
        internal.sort(key=_shape_key, reverse=True)
        return (pend, tuple(internal))

    return rec(0)


def peel_root(f: RatFunc) -> tuple[int, RatFunc]:
    """Read the root degree off F and return the proper remainder F + m0*z."""
    if f.is_zero or f.num.degree != f.den.degree + 1:
        raise NotShapeFractionError(
            "numerator degree must exceed denominator degree by exactly 1"
        )
    ratio = -f.num.leading / f.den.leading
    if ratio.denominator != 1 or ratio <= 0:
        raise NotShapeFractionError(
            f"leading-coefficient ratio -{f.num.leading}/{f.den.leading} "
            "is not a positive integer"
        )
    m0 = int(ratio)
    return m0, f + ratfunc_x(m0)


def solve_reciprocal_diophantine(
    k: int, r: Union[Fraction, int], cap: int
) -> list[tuple[int, ...]]:
    """All multisets {n_1..n_k} of positive integers <= cap with sum 1/n_i = r.

    Returned as sorted (non-decreasing) tuples, lexicographically ordered.
    """
    if k < 1:
        raise ValueError("need at least one term")
    if cap < 1:
        raise ValueError("cap must be positive")
    r = Fraction(r)
    out: list[tuple[int, ...]] = []

    def rec(terms_left: int, rem: Fraction, lo: int, acc: list[int]) -> None:
        if terms_left == 0:
            if rem == 0:
                out.append(tuple(acc))
            return
        if rem <= 0:
            return
        # 1/n <= rem and terms_left/n >= rem bound n on both sides
        n_min = max(lo, -(-rem.denominator // rem.numerator))  # ceil(1/rem)
        n_max = min(cap, int(terms_left / rem))
        for n in range(n_min, n_max + 1):
            acc.append(n)
            rec(terms_left - 1, rem - Fraction(1, n), n, acc)
            acc.pop()

    rec(k, r, 1, [])
    return out


def _leading_ratio(r: RatFunc) -> Optional[Fraction]:
    """lim z*R(z) for a proper R whose degree gap is exactly one, else None."""
    if r.is_zero or r.num.degree + 1 != r.den.degree:
        return None
    return r.num.leading / r.den.leading


def _split(r: RatFunc, count: int, budget: int) -> list[tuple[int, tuple[Shape, ...]]]:
    """Decompose R = -sum of 1/F over `count` children within a vertex budget.

    Returns (pendant count, internal child shapes) pairs; pendants contribute
    +1/z each, internal children are recovered recursively.
    """
    if count == 0:
        return [(0, ())] if r.is_zero else []
    if budget < count:
        return []
    ratio = _leading_ratio(r)
    if ratio is None or ratio <= 0:
        return []
    out = []
    cap = budget - (count - 1)
    for degs in solve_reciprocal_diophantine(count, ratio, cap):
        if sum(degs) > budget:
            continue
        m1 = sum(1 for n in degs if n == 1)
        internal = tuple(n for n in reversed(degs) if n >= 2)
        r2 = r
        if m1:
            r2 = r - RatFunc.make(Poly.constant(m1), Poly.x())
        for shapes in _split_internal(r2, internal, budget - m1, None):
            out.append((m1, shapes))
    return out


def _split_internal(
    r: RatFunc,
    degs: tuple[int, ...],
    budget: int,
    key_limit: Optional[tuple[int, Shape]],
) -> list[tuple[Shape, ...]]:
    """Split R into branches with the given (descending) internal degrees.

    `key_limit` enforces non-increasing shape keys across equal-degree
    siblings so each multiset is produced exactly once.
    """
    if not degs:
        return [()] if r.is_zero else []
    if r.is_zero:
        return []
    d = degs[0]
    rest = degs[1:]
    if not rest:
        # single branch: R = -1/F determines the child fraction exactly
        ratio = _leading_ratio(r)
        if ratio != Fraction(1, d):
            return []
        r_child = ratfunc_x(d) - r.reciprocal()
        if r_child.num.degree >= r_child.den.degree:
            return []
        out = []
        for pend, kids in _split(r_child, d - 1, budget - 1):
            shape: Shape = (pend, kids)
            if key_limit is not None and _shape_key(shape) > key_limit:
                continue
            out.append((shape,))
        return out
    min_rest = sum(rest)
    out = []
    for size in range(d, budget - min_rest + 1):
        for shape in _shapes_by_size(size).get(d - 1, ()):
            key = _shape_key(shape)
            if key_limit is not None and key > key_limit:
                continue
            r_next = r + _branch_fraction(shape).reciprocal()
            limit = key if rest[0] == d else None
            for tail in _split_internal(r_next, rest, budget - size, limit):
                out.append((shape,) + tail)
    return out


@dataclass(frozen=True)
class BranchExpansion:
    """One node of the branched continued fraction of a shape fraction.

    `depth_parity` is +1 where the fragment opens with -degree*z and -1 where
    the displayed sign alternates to +degree*z; it is presentation only and
    carries no information beyond the node depth.
    """

    node_degree: int
    pendant_children: int
    internal_children: tuple["BranchExpansion", ...]
    depth_parity: int = 1
    is_root: bool = False

    def __post_init__(self) -> None:
        expected = self.node_degree - (0 if self.is_root else 1)
        if self.pendant_children + len(self.internal_children) != expected:
            raise ValueError("child counts inconsistent with node degree")
        if self.depth_parity not in (-1, 1):
            raise ValueError("depth parity must be +1 or -1")

    @property
    def size(self) -> int:
        return 1 + self.pendant_children + sum(c.size for c in self.internal_children)


def _shape_to_expansion(s: Shape, parity: int, is_root: bool) -> BranchExpansion:
    pend, kids = s
    degree = pend + len(kids) + (0 if is_root else 1)
    return BranchExpansion(
        node_degree=degree,
        pendant_children=pend,
        internal_children=tuple(
            _shape_to_expansion(c, -parity, False) for c in kids
        ),
        depth_parity=parity,
        is_root=is_root,
    )


def to_rooted_tree(exp: BranchExpansion) -> RootedTree:
    """Materialise an expansion as a parent-array tree (preorder indexing)."""
    parent: list[Optional[int]] = [None]

    def rec(node: BranchExpansion, at: int) -> None:
        for _ in range(node.pendant_children):
            parent.append(at)
        for child in node.internal_children:
            idx = len(parent)
            parent.append(at)
            rec(child, idx)

    rec(exp, 0)
    return RootedTree(tuple(parent))


def branch_expansion_of(t: RootedTree) -> BranchExpansion:
    """The branched-continued-fraction record of a tree's shape fraction."""
    if t.p < 2:
        raise ValueError("expansion needs at least one edge")
    return _shape_to_expansion(_tree_to_shape(t), 1, True)


def expand_branched_cf(
    f: RatFunc, p_hint: Union[int, tuple[int, int]]
) -> list[BranchExpansion]:
    """All branched-continued-fraction expansions of F within the size hint.

    Raises NotShapeFractionError when F cannot open with a -m0*z fragment;
    returns an empty list when the fragment grammar admits no completion
    within the budget.
    """
    if isinstance(p_hint, int):
        p_lo, p_hi = 2, p_hint
    else:
        p_lo, p_hi = p_hint
    m0, r = peel_root(f)
    results = []
    for pend, kids in _split(r, m0, p_hi - 1):
        root_shape: Shape = (pend, tuple(sorted(kids, key=_shape_key, reverse=True)))
        size = _shape_size(root_shape)
        if not p_lo <= size <= p_hi:
            continue
        results.append(root_shape)
    results.sort(key=_shape_key)
    return [_shape_to_expansion(s, 1, True) for s in results]


@dataclass(frozen=True)
class ReconstructionResult:
    """Shapes consistent with an input fraction, with per-match metadata."""

    matches: tuple[RootedTree, ...]
    cancelled_degrees: tuple[int, ...]
    searched_p_range: tuple[int, int]
    diagnostic: Optional[str] = None

    def codes(self) -> tuple[str, ...]:
        return tuple(canonical_code(t) for t in self.matches)

    def to_json(self) -> dict:
        return {
            "matches": [
                {
                    "tree": t.to_json(),
                    "cancelled_factor_degree": d,
                }
                for t, d in zip(self.matches, self.cancelled_degrees)
            ],
            "searched_p_range": list(self.searched_p_range),
            "diagnostic": self.diagnostic,
        }


@lru_cache(maxsize=None)
def _fraction_index(p: int) -> dict[RatFunc, tuple[RootedTree, ...]]:
    """shape_fraction -> trees, over all rooted-isomorphism classes on p vertices."""
    index: dict[RatFunc, list[RootedTree]] = {}
    for t in enumerate_rooted_trees(p):
        index.setdefault(shape_fraction(t), []).append(t)
    return {k: tuple(v) for k, v in index.items()}


def _sorted_result(
    trees: Iterable[RootedTree],
    num_degree: int,
    p_range: tuple[int, int],
    diagnostic: Optional[str] = None,
) -> ReconstructionResult:
    uniq: dict[str, RootedTree] = {}
    for t in trees:
        uniq.setdefault(canonical_code(t), t)
    ordered = sorted(uniq.items(), key=lambda kv: (kv[1].p, kv[0]))
    matches = tuple(t for _, t in ordered)
    return ReconstructionResult(
        matches=matches,
        cancelled_degrees=tuple(t.p - num_degree for t in matches),
        searched_p_range=p_range,
        diagnostic=diagnostic,
    )


def invert_by_enumeration(f: RatFunc, p_max: int) -> ReconstructionResult:
    """Exhaustive inverse: keep every tree whose reduced fraction equals F."""
    if f.is_zero or f.num.degree < 1:
        return ReconstructionResult((), (), (2, p_max), "not a shape fraction")
    p_lo = max(2, f.num.degree)
    found = []
    for p in range(p_lo, p_max + 1):
        found.extend(_fraction_index(p).get(f, ()))
    res = _sorted_result(found, f.num.degree, (p_lo, p_max))
    if not res.matches:
        return ReconstructionResult((), (), (p_lo, p_max), f"no tree within p_max={p_max}")
    return res


def invert(f: RatFunc, p_max: int = 12) -> ReconstructionResult:
    """Branched-continued-fraction inversion with an enumeration cross-check.

    The expansion search runs first; its findings at the smallest matching
    vertex count are cross-checked against the exhaustive enumeration.  When
    the expansion finds nothing the enumeration runs over the full range as
    a fallback.  Both global sign conventions of the input are accepted.
    """
    diagnostic = None
    for cand, note in ((f, None), (-f, "input sign flipped to match -d(root)z convention")):
        try:
            exps = expand_branched_cf(cand, (2, p_max))
        except NotShapeFractionError as exc:
            diagnostic = str(exc)
            continue
        trees = [to_rooted_tree(e) for e in exps]
        for t in trees:
            if shape_fraction(t) != cand:
                raise RuntimeError(
                    "internal error: expansion re-composition mismatch for "
                    f"{canonical_code(t)}"
                )
        p_lo = max(2, cand.num.degree)
        if trees:
            p_star = min(t.p for t in trees)
            expansion_at_star = {
                canonical_code(t) for t in trees if t.p == p_star
            }
            enumerated_at_star = {
                canonical_code(t)
                for t in _fraction_index(p_star).get(cand, ())
            }
            if expansion_at_star != enumerated_at_star:
                raise RuntimeError(
                    "internal error: expansion and enumeration disagree at "
                    f"p={p_star}"
                )
            return _sorted_result(trees, cand.num.degree, (p_lo, p_max), note)
        res = invert_by_enumeration(cand, p_max)
        if res.matches:
            raise RuntimeError(
                "internal error: enumeration found trees the expansion missed"
            )
        return ReconstructionResult(
            (), (), (p_lo, p_max), f"no tree within p_max={p_max}"
        )
    return ReconstructionResult((), (), (2, p_max), diagnostic or "not a shape fraction")
