"""Independent oracles used by the tests.

Everything here deliberately avoids the library's own algorithms: naive
cofactor determinants, the classic rooted-tree counting recurrence,
finite-difference eigenvalue solvers, and direct transcendental-equation
solves.  Expected values in the tests come from these, never from the code
under test.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from treescatter.polyalg import Poly


def det_cofactor(m) -> Poly:
    """Naive Laplace expansion along the first row."""
    n = len(m)
    if n == 0:
        return Poly.one()
    if n == 1:
        return m[0][0]
    total = Poly.zero()
    for j in range(n):
        if m[0][j].is_zero:
            continue
        minor = [[row[k] for k in range(n) if k != j] for row in m[1:]]
        term = m[0][j] * det_cofactor(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def tree_matrix(parent, degrees=None):
    """-zD + A as a Poly matrix from a parent array."""
    p = len(parent)
    if degrees is None:
        degrees = [0] * p
        for i, pa in enumerate(parent):
            if pa is not None:
                degrees[i] += 1
                degrees[pa] += 1
    z = Poly.x()
    m = [[Poly.zero() for _ in range(p)] for _ in range(p)]
    for i in range(p):
        m[i][i] = (-z).scale(degrees[i])
    for i, pa in enumerate(parent):
        if pa is not None:
            m[i][pa] = Poly.one()
            m[pa][i] = Poly.one()
    return m


@lru_cache(maxsize=None)
def rooted_tree_count(n: int) -> int:
    """Unlabelled rooted trees on n vertices via the classic divisor-sum
    recurrence: (n-1) a(n) = sum_{j<n} (sum_{d|j} d a(d)) a(n-j)."""
    if n <= 1:
        return n
    total = 0
    for j in range(1, n):
        s = sum(d * rooted_tree_count(d) for d in range(1, j + 1) if j % d == 0)
        total += s * rooted_tree_count(n - j)
    return total // (n - 1)


def interval_neumann_eigenvalues(q_fn, length: float, count: int, n: int = 4000):
    """Finite-difference Neumann-Neumann eigenvalues of -y'' + q y on [0, L]."""
    from scipy.linalg import eigh_tridiagonal

    h = length / n
    xs = np.linspace(0.0, length, n + 1)
    qs = np.array([q_fn(x) for x in xs])
    main = 2.0 / h**2 + qs
    main[0] = 1.0 / h**2 * 2 + qs[0]
    main[-1] = 1.0 / h**2 * 2 + qs[-1]
    off = np.full(n, -1.0 / h**2)
    # Neumann by reflection: ghost point folding doubles the first/last off entry
    off[0] *= math.sqrt(2)
    off[-1] *= math.sqrt(2)
    vals = eigh_tridiagonal(main, off, select="i", select_range=(0, count - 1))[0]
    return vals


def zeros_on_interval(fn, lo: float, hi: float, n: int = 4000):
    """Simple sign-change + bisection root scan of a real function."""
    from scipy.optimize import brentq

    xs = np.linspace(lo, hi, n)
    vals = np.array([fn(x) for x in xs])
    roots = []
    for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
        if np.isnan(fa) or np.isnan(fb):
            continue
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(fn, a, b, xtol=1e-13))
    return np.array(roots)


def zeros_from_grid(xs, vals, refine_fn):
    """Bracket sign changes on precomputed values, refine with brentq."""
    from scipy.optimize import brentq

    roots = []
    for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
        if np.isnan(fa) or np.isnan(fb):
            continue
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(refine_fn, a, b, xtol=1e-12))
    return np.array(roots)


def contracted_edge_gcd(tree) -> int:
    """gcd of the chain lengths after contracting non-root degree-2 vertices.

    A value m >= 2 means the tree is the uniform m-subdivision of a smaller
    tree, so its scattering data equals that of the smaller tree with edge
    length scaled by m (interior degree-2 vertices impose no conditions).
    """
    children = tree.children()
    lengths = []

    def walk(v: int, dist: int) -> None:
        cs = children[v]
        if len(cs) == 1 and v != 0:
            walk(cs[0], dist + 1)
            return
        lengths.append(dist)
        for c in cs:
            walk(c, 1)

    for c in children[0]:
        walk(c, 1)
    return math.gcd(*lengths) if lengths else 0


def subdivide_tree(tree, m: int):
    """Replace every edge by a path of m edges."""
    from treescatter.tree_core import RootedTree

    parent = list(tree.parent)
    new_parent = [None]
    index_map = {0: 0}
    order = list(range(1, len(parent)))
    for v in order:
        pa = index_map[parent[v]]
        for _ in range(m - 1):
            new_parent.append(pa)
            pa = len(new_parent) - 1
        new_parent.append(pa)
        index_map[v] = len(new_parent) - 1
    return RootedTree(tuple(new_parent))
