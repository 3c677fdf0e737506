import cmath
import math
import random

import numpy as np
import pytest

from treescatter.characteristic import jost_E, jost_data_of_tree, phi_D_check, phi_N_check
from treescatter.scattering_numeric import (
    AsymmetricPotentialError,
    Potential,
    find_jost_zeros,
    integrate_sc,
    integrate_sc_grid,
    jost_E_with_potential,
    phi_D_with_potential,
    phi_N_with_potential,
    verify_asymptotics,
    zero_scan,
)
from treescatter.tree_core import RootedTree, enumerate_rooted_trees, path_tree, snowflake

from _oracles import interval_neumann_eigenvalues, zeros_on_interval

EDGE = path_tree(2)
TWO_STAR = snowflake(2, [1, 1])


def test_integrate_zero_potential_closed_form():
    q = Potential.zero(1.0, 64)
    for k in (0.5, 2.0, 7.3, 1.1 + 0.4j):
        pair = integrate_sc(q, k)
        w = complex(k)
        assert abs(pair.s_val - cmath.sin(w) / w) < 1e-8
        assert abs(pair.c_val - cmath.cos(w)) < 1e-8
        assert abs(pair.s_deriv - cmath.cos(w)) < 1e-8
        assert abs(pair.c_deriv - (-w * cmath.sin(w))) < 1e-8


def test_integrate_constant_potential_closed_form():
    kappa = 3.7
    q = Potential.constant(kappa, 1.0, 64)
    for k in (1.0, 2.5, 6.0):
        lam = k * k
        shifted = cmath.sqrt(lam - kappa)
        pair = integrate_sc(q, k)
        assert abs(pair.s_val - cmath.sin(shifted) / shifted) < 1e-8
        assert abs(pair.c_val - cmath.cos(shifted)) < 1e-8


def test_wronskian_conservation_random():
    rng = random.Random(5)
    for trial in range(100):
        amp = rng.uniform(-3, 3)
        freq = rng.randint(1, 4)
        l = rng.choice([0.5, 1.0, 1.5])
        q = Potential.from_function(
            lambda x: amp * math.cos(2 * math.pi * freq * x / l), l, 257
        )
        k = rng.uniform(0.2, 12.0) + 1j * rng.uniform(-0.5, 0.5)
        pair = integrate_sc(q, k)
        assert abs(pair.wronskian - 1) < 1e-8


def test_wronskian_oscillatory_high_energy():
    q = Potential.from_function(lambda x: math.cos(2 * math.pi * x), 1.0, 513)
    pair = integrate_sc(q, 10.0)  # lambda = 100
    assert abs(pair.wronskian - 1) < 1e-8


def test_fourth_order_convergence():
    kappa = -4.0
    q = Potential.constant(kappa, 1.0, 64)
    k = 3.0
    exact = cmath.sin(cmath.sqrt(9 - kappa)) / cmath.sqrt(9 - kappa)
    e1 = abs(integrate_sc_grid(q, np.array([k]), n=64)[0][0] - exact)
    e2 = abs(integrate_sc_grid(q, np.array([k]), n=128)[0][0] - exact)
    assert e1 / e2 == pytest.approx(16, abs=3)


def test_phi_n_with_potential_reduces_to_exact():
    q = Potential.zero(1.0, 64)
    d = jost_data_of_tree(EDGE, 1)
    for lam in (0.3, 2.0, 11.0):
        assert abs(phi_N_with_potential(EDGE, q, lam) - phi_N_check(d, lam)) < 1e-8
    d2 = jost_data_of_tree(TWO_STAR, 1)
    for lam in (0.3, 2.0, 11.0):
        assert abs(phi_D_with_potential(TWO_STAR, q, lam) - phi_D_check(d2, lam)) < 1e-8


def test_phi_rejects_asymmetric_potential():
    q = Potential.from_function(lambda x: x, 1.0, 65)
    with pytest.raises(AsymmetricPotentialError):
        phi_N_with_potential(EDGE, q, 1.0)
    with pytest.raises(AsymmetricPotentialError):
        phi_D_with_potential(EDGE, q, 1.0)


def _phi_grid(tree, q, lams, kind):
    from treescatter.characteristic import jost_data_of_tree, psi_tilde
    from fractions import Fraction

    ks = np.sqrt(np.asarray(lams, dtype=complex))
    n = max(512, int(48 * float(np.max(np.abs(ks))) * q.l))
    s, sd, c, cd = integrate_sc_grid(q, ks, n)
    d = jost_data_of_tree(tree, Fraction(q.l).limit_denominator(10**9))
    if kind == "N":
        return (s * psi_tilde(d.psi).eval_array(c)).real
    return d.psi_hat.eval_array(c).real


def test_phi_n_zero_set_single_edge_q0():
    # with zero potential the zero set is {(n pi / l)^2 : n >= 1}, which is
    # the Neumann interval spectrum apart from the constant mode at 0
    from _oracles import zeros_from_grid

    q = Potential.zero(1.0, 64)
    lams = np.linspace(0.5, 100.0, 1500)
    vals = _phi_grid(EDGE, q, lams, "N")
    zs = zeros_from_grid(
        lams, vals, lambda lam: phi_N_with_potential(EDGE, q, lam).real
    )
    expected = [(n * math.pi) ** 2 for n in (1, 2, 3)]
    assert len(zs) == len(expected)
    for a, b in zip(zs, expected):
        assert a == pytest.approx(b, rel=1e-6)
    fd = interval_neumann_eigenvalues(lambda x: 0.0, 1.0, 4)
    for a, b in zip(zs, fd[1:]):
        assert a == pytest.approx(b, rel=1e-3)


def test_phi_d_zero_set_single_edge_symmetric_q():
    # Dirichlet-at-root spectrum: psi_hat(c) = -c(k, l); for symmetric q the
    # zero set of c(k, l) is exactly the mixed Dirichlet-Neumann spectrum
    from _oracles import zeros_from_grid

    q = Potential.from_function(lambda x: 2 * math.cos(2 * math.pi * x), 1.0, 513)
    lams = np.linspace(0.2, 120.0, 1500)
    vals = _phi_grid(EDGE, q, lams, "D")
    zs = zeros_from_grid(
        lams, vals, lambda lam: phi_D_with_potential(EDGE, q, lam).real
    )
    # oracle: FD for -y'' + q y with y(0) = 0, y'(1) = 0
    from scipy.linalg import eigh_tridiagonal

    n = 4000
    h = 1.0 / n
    xs = np.linspace(h, 1.0, n)
    main = 2.0 / h**2 + np.array([2 * math.cos(2 * math.pi * x) for x in xs])
    off = np.full(n - 1, -1.0 / h**2)
    main[-1] -= 1.0 / h**2  # Neumann at x = 1 by one-sided folding
    fd = eigh_tridiagonal(main, off, select="i", select_range=(0, 4))[0]
    assert len(zs) >= 3
    for a, b in zip(zs[:3], fd[:3]):
        assert a == pytest.approx(b, rel=2e-3)


def test_phi_n_c_part_zeros_are_neumann_eigenvalues_two_star():
    # the polynomial factor of phi_N (here psi_tilde(c) = 2 c(k, l)) vanishes
    # exactly on true Neumann eigenvalues of the doubled interval, any
    # symmetric potential
    from _oracles import zeros_from_grid

    q_fn = lambda x: 1.5 * math.cos(2 * math.pi * x)  # noqa: E731
    q = Potential.from_function(q_fn, 1.0, 513)
    lams = np.linspace(0.2, 80.0, 1200)
    ks = np.sqrt(lams.astype(complex))
    _, _, cvals, _ = integrate_sc_grid(q, ks, 2048)
    zs = zeros_from_grid(
        lams, cvals.real,
        lambda lam: integrate_sc(q, cmath.sqrt(lam)).c_val.real,
    )
    big_q = lambda x: q_fn(x if x <= 1.0 else x - 1.0)  # noqa: E731
    fd = interval_neumann_eigenvalues(big_q, 2.0, 10)
    assert len(zs) >= 2
    for z in zs:
        assert min(abs(z - v) for v in fd) < 5e-3 * max(1.0, abs(z))


def test_jost_with_potential_reduces_to_exact():
    q = Potential.zero(1.0, 64)
    d = jost_data_of_tree(TWO_STAR, 1)
    for k in (0.7, 2.0 + 0.3j, 5.0):
        a = jost_E_with_potential(TWO_STAR, q, k)
        b = jost_E(d, k)
        assert abs(a - b) < 1e-8 * max(1.0, abs(b))


def test_asymptotics_zero_potential_residuals_vanish():
    q = Potential.zero(1.0, 64)
    lams = list(np.linspace(5.0, 400.0, 120))
    rep = verify_asymptotics(EDGE, q, lams)
    assert max(rep.phi_n_max) < 1e-8
    assert max(rep.phi_d_max) < 1e-8


def test_asymptotics_trend_cosine_potential():
    q = Potential.from_function(lambda x: math.cos(2 * math.pi * x), 1.0, 513)
    lams = []
    for big in (1e2, 1e3, 1e4):
        lams.extend(np.linspace(big, 4 * big, 120))
    rep = verify_asymptotics(
        EDGE, q, lams, windows=[(1e2, 4e2), (1e3, 4e3), (1e4, 4e4)]
    )
    assert rep.phi_n_decreasing
    assert rep.phi_d_decreasing
    assert rep.s_ratio_decreasing


def test_find_zeros_single_edge_q0():
    # closed-form oracle: E = -i sin(k l) e^{ikl}, zeros at k = n pi / l
    d = jost_data_of_tree(EDGE, 1)
    zs = find_jost_zeros(d, (-10.0, 10.0, -2.0, 2.0))
    expected = sorted(n * math.pi for n in range(-3, 4))
    assert len(zs) == len(expected)
    for z, e in zip(zs, expected):
        assert abs(z - e) < 1e-9
        assert z.imag >= -1e-8


def test_find_zeros_two_star_q0():
    # sin cos (2 sin - i cos) structure: real zeros at n pi/2 and a line of
    # complex zeros at n pi + i ln(3)/2
    d = jost_data_of_tree(TWO_STAR, 1)
    zs = find_jost_zeros(d, (-7.0, 7.0, -2.0, 2.0))
    ups = [z for z in zs if z.imag > 0.1]
    for z in ups:
        assert z.imag == pytest.approx(math.log(3) / 2, abs=1e-9)
    reals = sorted(z.real for z in zs if abs(z.imag) < 1e-9)
    expected = sorted(n * math.pi / 2 for n in range(-4, 5))
    assert reals == pytest.approx(expected, abs=1e-9)


def test_zero_locations_all_trees_p_le_5_q0():
    for p in range(2, 6):
        for t in enumerate_rooted_trees(p):
            d = jost_data_of_tree(t, 1)
            zs = find_jost_zeros(d, (-10.0, 10.0, -2.0, 2.0))
            assert zs, "scan rectangle always contains k = 0"
            assert all(z.imag >= -1e-8 for z in zs)


def test_bound_state_single_edge_constant_well():
    # q = -4 on the edge gives one negative Neumann eigenvalue (-4, constant
    # mode); the Jost function picks up exactly one zero on the negative
    # imaginary axis, at the genuine bound state of the lead-attached system
    from scipy.optimize import brentq

    c = 2.0
    q = Potential.constant(-c * c, 1.0, 64)

    def e_vec(ks):
        return np.array([jost_E_with_potential(EDGE, q, complex(k)) for k in ks])

    scan = zero_scan(e_vec, (-0.7, 0.7, -1.95, -0.02), per_side=48)
    neg_axis = [z for z in scan.zeros if abs(z.real) < 1e-7 and z.imag < 0]
    assert len(neg_axis) == 1
    # oracle: matching condition tan(kap) = mu/kap, mu = sqrt(c^2 - kap^2)
    kap = brentq(lambda x: math.tan(x) - math.sqrt(c * c - x * x) / x, 0.3, math.pi / 2 - 1e-9)
    mu = math.sqrt(c * c - kap * kap)
    assert neg_axis[0].imag == pytest.approx(-mu, abs=1e-7)
    # oracle count: negative Neumann eigenvalues of the interval problem
    fd = interval_neumann_eigenvalues(lambda x: -c * c, 1.0, 3)
    assert sum(1 for v in fd if v < 0) == 1


def test_zero_scan_reports_residuals():
    d = jost_data_of_tree(EDGE, 1)
    scan = zero_scan(d, (-4.0, 4.0, -1.0, 1.0))
    assert len(scan.zeros) == len(scan.residuals)
    assert all(r < 1e-10 for r in scan.residuals)
    blob = scan.to_json()
    assert all(set(e) == {"re", "im", "residual"} for e in blob)


def test_potential_csv_roundtrip():
    q = Potential.from_function(lambda x: math.sin(3 * x), 0.75, 33)
    back = Potential.from_csv(q.to_csv())
    assert back.l == pytest.approx(0.75)
    assert np.allclose(back.samples, q.samples)


def test_potential_symmetry_detection():
    sym = Potential.from_function(lambda x: math.cos(2 * math.pi * x), 1.0, 129)
    asym = Potential.from_function(lambda x: x * x, 1.0, 129)
    assert sym.is_symmetric()
    assert not asym.is_symmetric()
