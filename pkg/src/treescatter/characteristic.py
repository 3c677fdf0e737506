"""Characteristic polynomials of a rooted tree and the zero-potential
characteristic, Jost and S-functions they generate.

For a rooted combinatorial tree with degree matrix D and adjacency matrix A
(root first), the normalized-Laplacian polynomial is psi(z) = det(-zD + A);
psi_hat(z) is the same determinant over the root-deleted forest, keeping the
degrees the vertices had in the whole tree.  Both are computed by a
leaf-peeling recursion (O(p) polynomial operations) rather than elimination;
`polyalg.det_polymatrix` provides the independent second route.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .polyalg import Poly, RatFunc
from .tree_core import RootedTree


class SPoleError(ZeroDivisionError):
    """The S-function was evaluated exactly at a pole."""


def _peel(t: RootedTree) -> tuple[Poly, Poly]:
    """Return (f_root, g_root) of the leaf-peeling recursion.

    For vertex v with children c1..ck, f_v is the determinant of the
    -zD+A block of the subtree at v (original degrees) and g_v the same with
    v's row and column removed, i.e. the product of the children's f.  The
    recurrence is

        f_v = -z d(v) * prod_i f_ci - sum_i g_ci * prod_{j != i} f_cj
        g_v = prod_i f_ci
    """
    children = t.children()
    deg = t.degrees()
    z = Poly.x()
    f: list[Poly] = [Poly.zero()] * t.p
    g: list[Poly] = [Poly.zero()] * t.p
    for v in range(t.p - 1, -1, -1):
        cs = children[v]
        # prefix/suffix products for the leave-one-out terms
        pre = [Poly.one()]
        for c in cs:
            pre.append(pre[-1] * f[c])
        suf = [Poly.one()]
        for c in reversed(cs):
            suf.append(suf[-1] * f[c])
        suf.reverse()
        prod = pre[-1]
        acc = (-z).scale(deg[v]) * prod
        for i, c in enumerate(cs):
            acc = acc - g[c] * (pre[i] * suf[i + 1])
        f[v] = acc
        g[v] = prod
    return f[0], g[0]


def psi_of_tree(t: RootedTree) -> Poly:
    """det(-zD + A) of the tree, degree p, leading coeff (-1)^p * prod d(v)."""
    return _peel(t)[0]


def psi_hat_of_tree(t: RootedTree) -> Poly:
    """det(-zD̂ + Â) over the root-deleted forest with original degrees.

    Equals the product of the per-branch determinants, so it is exactly the
    g-value of the root in the peeling recursion.
    """
    if t.p < 2:
        raise ValueError("root deletion needs at least two vertices")
    return _peel(t)[1]


def psi_pair_of_tree(t: RootedTree) -> tuple[Poly, Poly]:
    return _peel(t)


def psi_tilde(psi: Poly) -> Poly:
    """psi / (1 - z^2); exact because psi(1) = psi(-1) = 0."""
    one_minus_z2 = Poly.make([1, 0, -1])
    return psi.exact_div(one_minus_z2)


def shape_fraction(t: RootedTree) -> RatFunc:
    """Reduced psi/psi_hat; behaves like -d(root) * z at infinity."""
    if t.p < 2:
        raise ValueError("the shape fraction needs at least one edge")
    psi, psi_hat = _peel(t)
    return RatFunc.make(psi, psi_hat)


@dataclass(frozen=True)
class JostData:
    """The pair (psi, psi_hat) plus the common edge length.

    This fully determines the zero-potential characteristic functions, the
    Jost function and the S-function.  A reduced shape fraction is accepted
    in place of the full tree pair: the removed common factor is even and
    real, so every derived S-value is unchanged.
    """

    psi: Poly
    psi_hat: Poly
    edge_length: Fraction

    def __post_init__(self) -> None:
        if self.psi.is_zero or self.psi_hat.is_zero:
            raise ValueError("psi and psi_hat must be nonzero")
        if self.edge_length <= 0:
            raise ValueError("edge length must be positive")
        if self.psi.degree != self.psi_hat.degree + 1:
            raise ValueError("deg psi must exceed deg psi_hat by exactly 1")
        if self.psi.eval_exact(1) != 0 or self.psi.eval_exact(-1) != 0:
            raise ValueError("psi must vanish at z = 1 and z = -1")

    @property
    def l(self) -> float:
        return float(self.edge_length)

    def to_json(self) -> dict:
        return {
            "psi": self.psi.to_json(),
            "psi_hat": self.psi_hat.to_json(),
            "l": f"{self.edge_length.numerator}/{self.edge_length.denominator}",
        }

    @staticmethod
    def from_json(obj: dict) -> "JostData":
        return JostData(
            Poly.from_json(obj["psi"]),
            Poly.from_json(obj["psi_hat"]),
            Fraction(obj["l"]),
        )


def jost_data_of_tree(t: RootedTree, edge_length) -> JostData:
    psi, psi_hat = _peel(t)
    return JostData(psi, psi_hat, Fraction(edge_length))


def jost_data_from_fraction(f: RatFunc, edge_length) -> JostData:
    """Jost data from a (possibly reduced) shape fraction."""
    return JostData(f.num, f.den, Fraction(edge_length))


@lru_cache(maxsize=None)
def _psi_tilde_cached(psi: Poly) -> Poly:
    return psi_tilde(psi)


def _sinc(w: complex) -> complex:
    """sin(w)/w, stable near w = 0."""
    if abs(w) < 1e-4:
        w2 = w * w
        return 1 - w2 / 6 * (1 - w2 / 20)
    return cmath.sin(w) / w


def phi_N_check(d: JostData, lam: complex) -> complex:
    """Zero-potential Neumann characteristic function.

    psi(cos kl) / (k sin kl) with k = sqrt(lam); evaluated through the entire
    form (sin kl / k) * psi_tilde(cos kl) near the sine zeros, where the
    direct quotient is 0/0.
    """
    k = cmath.sqrt(lam)
    l = d.l
    w = k * l
    sin_w = cmath.sin(w)
    cos_w = cmath.cos(w)
    if abs(sin_w) < 1e-6 or abs(k) < 1e-9:
        s = l * _sinc(w)
        return s * _psi_tilde_cached(d.psi).eval(cos_w)
    return d.psi.eval(cos_w) / (k * sin_w)


def phi_D_check(d: JostData, lam: complex) -> complex:
    """Zero-potential Dirichlet characteristic function psi_hat(cos kl)."""
    k = cmath.sqrt(lam)
    return d.psi_hat.eval(cmath.cos(k * d.l))


def jost_E(d: JostData, sqrt_lam: complex) -> complex:
    """Jost function of the tree with a zero-potential lead at the root.

    E(k) = -psi(cos kl) + i sin(kl) psi_hat(cos kl).

    This is the outgoing-coefficient form obtained from the vertex-value
    system of the lead-attached graph: the restriction of a solution to the
    lead has boundary data (value, derivative) proportional to
    (sin(kl)/k * psi_hat(cos kl), -psi(cos kl)).  Its zeros lie in the closed
    upper half-plane for zero potentials, plus bound-state zeros on the
    negative imaginary axis when potentials create negative eigenvalues.
    """
    w = sqrt_lam * d.l
    c = cmath.cos(w)
    return -d.psi.eval(c) + 1j * cmath.sin(w) * d.psi_hat.eval(c)


def s_function(d: JostData, sqrt_lam: complex) -> complex:
    """S(k) = E(k)/E(-k); unimodular for real k away from the real zeros."""
    den = jost_E(d, -sqrt_lam)
    if den == 0:
        raise SPoleError(f"S-function pole at sqrt_lam = {sqrt_lam}")
    return jost_E(d, sqrt_lam) / den


def jost_E_array(d: JostData, ks):
    """Vectorised jost_E on a numpy array of k values."""
    import numpy as np

    w = np.asarray(ks, dtype=complex) * d.l
    c = np.cos(w)
    return -d.psi.eval_array(c) + 1j * np.sin(w) * d.psi_hat.eval_array(c)


def s_function_array(d: JostData, ks):
    import numpy as np

    ks = np.asarray(ks, dtype=complex)
    return jost_E_array(d, ks) / jost_E_array(d, -ks)
