"""Critical-point continuation, spectral identity, Lagrangian map, UV identity."""

import cmath
import math

import numpy as np
import pytest

from todamirror import critical as cr
from todamirror import mirror as mi

LAM1 = (0.5, -0.5)


def chart(n, kseq):
    return mi.make_chart(mi.build_graph(n), kseq)


def test_start_point_one_variable():
    # x + c ln x has its critical point at x = -c; c = -1 gives x = 1
    ch = chart(1, (0,))
    s = cr.start_point(ch, (-0.5, 0.5))   # sigma(1,0) = -2*lam0 = 1 -> w = -1
    assert np.allclose(np.exp(s), [-1.0])
    s2 = cr.start_point(ch, LAM1)         # sigma = -1 -> w = 1
    assert np.allclose(np.exp(s2), [1.0])


def test_start_point_rejects_degenerate_lambda():
    ch = chart(1, (0,))
    with pytest.raises(cr.DegenerateParameterError):
        cr.start_point(ch, (0.0, 0.0))


def test_n1_critical_roots_and_hessian():
    # u-chart: critical u solves u^2 + 2 lam0 u - q = 0
    rec = cr.continue_to(chart(1, (1,)), LAM1, (1.0,))
    u = rec.coordinates[0]
    assert abs(u - (-0.5 - math.sqrt(5) / 2)) < 1e-10
    assert abs(rec.hessian[0, 0] - (2 / u ** 3 - 1.0 / u ** 2)) < 1e-10
    rec_v = cr.continue_to(chart(1, (0,)), LAM1, (1.0,))
    v = rec_v.coordinates[0]
    assert abs(v - (0.5 + math.sqrt(5) / 2)) < 1e-10
    # same point of the torus seen from both charts: u * v = q
    assert abs(rec_v.edge_values["u[1,0]"] * v - 1.0) < 1e-10


def test_q_to_zero_limit_of_critical_value():
    ch = chart(1, (1,))
    sig = float(ch.sigma[(1, 0)].evaluate(LAM1))
    expect = -sig + sig * cmath.log(complex(-sig))
    for qs in (1e-3, 1e-5):
        rec = cr.continue_to(ch, LAM1, (qs,))
        shifted = rec.u_sigma - float(ch.rho[(1, 0)].evaluate(LAM1)) * math.log(qs)
        assert abs(shifted - expect) < 5 * qs


def test_spectral_identity_n1_hand_values():
    for kseq in ((0,), (1,)):
        rec = cr.continue_to(chart(1, kseq), LAM1, (1.0,))
        m = cr.row_matrix(rec, 1) - 0.5 * np.eye(2)
        assert abs(np.trace(m)) < 1e-10
        assert abs(np.linalg.det(m) - (-0.25)) < 1e-10
        assert cr.spectral_check(rec) < 1e-10


def test_lagrangian_hand_values():
    rec = cr.continue_to(chart(1, (1,)), LAM1, (1.0,))
    lp = cr.to_lagrangian(rec)
    assert abs(lp.p[0] + lp.p[1]) < 1e-10
    assert abs(lp.p[0] * lp.p[1] + lp.q[0] - (-0.25)) < 1e-10
    assert lp.max_residual < 1e-10


def test_census_counts():
    for n, lam, q in ((1, LAM1, (1.0,)),
                      (2, (0.25, 0.125, -0.375), (1.0, 1.0)),
                      (3, (0.4, 0.1, -0.2, -0.3), (0.7, 1.1, 0.9))):
        c = cr.census(n, lam, q)
        assert c.count == c.expected == math.factorial(n + 1)
        assert c.all_nondegenerate
        assert c.min_pairwise_distance > 1e-6
        assert c.max_spectral_residual < 1e-8
        assert c.max_lagrangian_residual < 1e-8


def test_fiber_cardinality_matches_projection_degree():
    # distinct p-vectors over a fixed q: the fiber has (n+1)! points
    records = cr.all_critical_points(2, (0.25, 0.125, -0.375), (0.8, 1.3))
    ps = [tuple(np.round(cr.to_lagrangian(r).p, 8)) for r in records]
    assert len(set(ps)) == 6


def test_nonequivariant_point_satisfies_unshifted_relations():
    # at lam -> 0 the p-values satisfy D_i(p, q) = 0
    records = cr.all_critical_points(1, (1e-7, -1e-7), (1.0,))
    for rec in records:
        lp = cr.to_lagrangian(rec)
        toda = np.array([[lp.p[0], lp.q[0]], [-1.0, lp.p[1]]])
        coeffs = np.poly(-toda)[1:]
        assert np.max(np.abs(coeffs)) < 1e-5


def test_scaling_law():
    for c in (2.0, 1.0 / 3.0):
        assert cr.scaling_residual(1, LAM1, (1.0,), c) < 1e-8
        assert cr.scaling_residual(2, (0.25, 0.125, -0.375), (1.0, 1.0), c) < 1e-8


def test_rejects_bad_q():
    with pytest.raises(cr.DegenerateParameterError):
        cr.continue_to(chart(1, (0,)), LAM1, (-1.0,))
    with pytest.raises(cr.DegenerateParameterError):
        cr.continue_to(chart(1, (0,)), (0.3, -0.2), (1.0,))


def test_uv_factorization_presubstitution():
    for n in (1, 2, 3):
        assert cr.uv_factorization_exact(n)


def test_uv_identity_exact():
    for n in (1, 2, 3):
        assert cr.uv_identity_check(n)


def test_uv_identity_alternate_chart():
    assert cr.uv_identity_check(2, kseq=(0, 0))


def test_record_report_is_json_friendly():
    import json
    rec = cr.continue_to(chart(1, (0,)), LAM1, (1.0,))
    json.dumps(rec.report())


def test_uv_identity_cost_guard():
    with pytest.raises(ValueError):
        cr.uv_identity_check(5)
