"""Oscillatory integrals: quadrature vs oracles, eigenvalue residuals,
q -> 0 factorisation, and the projective-line example."""

import math

import numpy as np
import pytest
import scipy.special as sp

from todamirror import integrals as ig
from todamirror import mirror as mi


def chart(n, kseq):
    return mi.make_chart(mi.build_graph(n), kseq)


def task(n, lam, q, hbar=-1.0, kseq=None, **kw):
    kseq = kseq if kseq is not None else (0,) * n
    return ig.IntegralTask(n=n, lam=lam, hbar=hbar, chart=chart(n, kseq), q=q, **kw)


def test_bessel_oracle_against_scipy():
    for nu, z in ((0.0, 2.0), (0.5, 2.0), (1.0, 3.0), (0.25, 0.5), (2.0, 1.0)):
        assert abs(ig.bessel_k_cosh(nu, z) - sp.kv(nu, z)) < 1e-12 * sp.kv(nu, z)


def test_value_matches_bessel_k_zero_weight():
    r = ig.evaluate(task(1, (0.0, 0.0), (1.0,)))
    assert abs(r.value - 2 * ig.bessel_k_cosh(0.0, 2.0)) < 1e-10 * r.value
    assert abs(r.value - 0.2278) < 1e-4
    assert r.converged and r.value > 0


def test_value_matches_bessel_k_half():
    r = ig.evaluate(task(1, (0.25, -0.25), (1.0,)))
    assert abs(r.value - 2 * ig.bessel_k_cosh(0.5, 2.0)) < 1e-10 * r.value


def test_value_is_chart_independent():
    a = ig.evaluate(task(1, (0.25, -0.25), (1.0,), kseq=(0,))).value
    b = ig.evaluate(task(1, (0.25, -0.25), (1.0,), kseq=(1,))).value
    assert abs(a - b) < 1e-10 * a


def test_positive_contour_positive_value():
    for lam0 in (0.0, 0.5):
        for q in (0.5, 2.0):
            assert ig.evaluate(task(1, (lam0, -lam0), (q,))).value > 0


def test_error_estimate_within_tolerance():
    r = ig.evaluate(task(1, (0.5, -0.5), (1.0,), rel_tol=1e-9))
    assert r.error <= max(1e-9 * abs(r.value), 1e-300)


def test_eigen_residuals_n1_grid():
    # D_1 telescopes to zero on functions of t_1 - t_0; D_2 via quadrature
    for lam0 in (0.0, 0.25, 0.5):
        for q in (0.5, 1.0, 2.0):
            t = (-math.log(q) / 2, math.log(q) / 2)
            rep = ig.eigen_residual(1, (lam0, -lam0), -1.0, t)
            assert rep.residuals[0] == 0.0
            assert rep.residuals[1] < 1e-6
            oracle = ig.whittaker_closed_form(lam0, q, -1.0)
            assert abs(rep.base_value - oracle) < 1e-8 * oracle


def test_eigen_residuals_n2_generic_point():
    rep = ig.eigen_residual(2, (0.25, 0.125, -0.375), -1.0, (0.0, 0.0, 0.0))
    assert all(r < 1e-3 for r in rep.residuals)


def test_one_variable_factors():
    assert abs(ig.one_variable_factor(1.0, -1.0) - 1.0) < 1e-12
    assert abs(ig.one_variable_factor(0.5, -1.0) - math.sqrt(math.pi)) < 1e-12
    # quadrature cross-check of the Gamma value on one axis
    val = ig.evaluate(task(1, (0.25, -0.25), (1e-9,), kseq=(0,),
                           include_prefactor=False)).value
    # at tiny q the integral is the one-variable factor with c = sigma(1,0)
    ch = chart(1, (0,))
    c = float(ch.sigma[(1, 0)].evaluate((0.25, -0.25)))
    assert c / -1.0 == 0.5
    assert abs(val - ig.one_variable_factor(c / -1.0, -1.0)) < 1e-4 * val


def test_admissible_charts():
    g1 = mi.build_graph(1)
    assert ig.admissible_charts(g1, (0.6, -0.6), -1.0) == [(0,)]
    assert ig.admissible_charts(g1, (-0.6, 0.6), -1.0) == [(1,)]
    g2 = mi.build_graph(2)
    assert (0, 0) in ig.admissible_charts(g2, (1.2, 0.0, -1.2), -1.0)


def test_factorization_n1():
    lam = (0.6, -0.6)
    ch = chart(1, (0,))
    m4, _, _ = ig.q_to_zero_factorization(1, lam, -1.0, ch, 1e-4)
    m6, _, _ = ig.q_to_zero_factorization(1, lam, -1.0, ch, 1e-6)
    assert m4 < 1e-3
    assert m6 < m4


def test_factorization_rejects_inadmissible_chart():
    with pytest.raises(ValueError):
        ig.q_to_zero_factorization(1, (0.6, -0.6), -1.0, chart(1, (1,)), 1e-4)


@pytest.mark.slow
def test_factorization_n2():
    lam = (1.2, 0.0, -1.2)
    ch = chart(2, (0, 0))
    m4, _, _ = ig.q_to_zero_factorization(2, lam, -1.0, ch, 1e-4)
    m5, _, _ = ig.q_to_zero_factorization(2, lam, -1.0, ch, 1e-5)
    assert m4 < 1e-3
    assert m5 < m4


def test_cp1_example():
    rep = ig.cp1_example_check(0.5, (0.5, 1.0, 2.0))
    assert rep.derivative_match < 1e-8
    assert rep.momentum_match < 1e-8
    assert rep.eigenvector_residual < 1e-8
    assert rep.pairing_residual < 1e-12


def test_cp1_momentum_branch_algebra():
    lam0, q = 0.5, 1.3
    p_plus = math.sqrt(lam0 ** 2 + q)
    p_minus = -p_plus
    assert abs(p_plus + p_minus) == 0
    assert abs(p_plus * p_minus - (-lam0 ** 2 - q)) < 1e-12


def test_task_validation():
    with pytest.raises(ValueError):
        ig.IntegralTask(n=1, lam=(0.5, -0.5), hbar=1.0, chart=chart(1, (0,)), q=(1.0,))
    with pytest.raises(ValueError):
        ig.IntegralTask(n=1, lam=(0.5, -0.4), hbar=-1.0, chart=chart(1, (0,)), q=(1.0,))
    with pytest.raises(ValueError):
        ig.IntegralTask(n=1, lam=(0.5, -0.5), hbar=-1.0, chart=chart(1, (0,)), q=(-1.0,))
    t = ig.IntegralTask(n=1, lam=(0.5, -0.5), hbar=-1.0, chart=chart(1, (0,)),
                        t=(-0.5, 0.5))
    assert abs(t.q[0] - math.e) < 1e-12


def test_quadrature_nonconvergence_reported():
    with pytest.raises(ig.QuadratureError, match="doubling"):
        ig.evaluate(task(2, (0.25, 0.125, -0.375), (1.0, 1.0), max_doublings=1))


def test_decay_check_reports_offending_face():
    import numpy as np
    from todamirror.integrals import _decay_check, QuadratureError

    class FakePhase:
        # one exponential on axis 0 only; axis 1 has a runaway linear term
        dim = 2
        A = np.array([[1.0, 0.0]])
        B = np.zeros((1, 0))
        sigma = np.array([0.5, -1.0])

    with pytest.raises(QuadratureError, match="boundary face"):
        _decay_check(FakePhase(), np.zeros(0), np.zeros(2), 1.0)


def test_dimension_guards():
    with pytest.raises(ValueError, match="desk scale"):
        ig.eigen_residual(3, (0.4, 0.1, -0.2, -0.3), -1.0, (0.0, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError, match="desk scale"):
        ig.IntegralTask(n=3, lam=(0.4, 0.1, -0.2, -0.3), hbar=-1.0,
                        chart=chart(2, (0, 0)), q=(1.0, 1.0, 1.0))
