"""Stationary phase and the exact classical-limit identities."""

import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from todamirror import critical as cr
from todamirror import integrals as ig
from todamirror import mirror as mi
from todamirror import semiclassical as sc
from todamirror.exact import HbarSeries

LAM1 = (0.5, -0.5)


def test_stirling_tail_frozen_coefficients():
    # B_2/(2*1) = 1/12, B_4/(4*3) = -1/360, B_6/(6*5) = 1/1260
    assert sc.gamma_stirling_tail(3) == [F(1, 12), F(-1, 360), F(1, 1260)]


def test_fixed_point_weights():
    fp = sc.FixedPointData.from_permutation(1, (0, 1))
    assert len(fp.weights) == 1
    assert fp.weights[0] == mi.LambdaForm([F(-1), F(1)])  # lam_1 - lam_0
    fp3 = sc.FixedPointData.from_permutation(3, (0, 1, 2, 3))
    assert len(fp3.weights) == 6


def test_single_weight_b_series():
    # one weight: b = sum_k B_2k/(2k(2k-1)) (hbar/chi)^{2k-1}
    fp = sc.FixedPointData.from_permutation(1, (0, 1))
    b = sc.classical_limit_b(fp, 3)
    tail = sc.gamma_stirling_tail(3)
    for i, c in enumerate(tail, start=1):
        coeff = b.coefficient(2 * i - 1)
        assert coeff.terms == {(-(2 * i - 1),): c}


def test_b_is_odd_and_degree_graded():
    fp = sc.FixedPointData.from_permutation(2, (1, 0, 2))
    b = sc.classical_limit_b(fp, 4)
    assert (b + b.negate_hbar()).is_zero()
    for k in range(1, 5):
        coeff = b.coefficient(2 * k - 1)
        for exps in coeff.terms:
            assert sum(exps) == -(2 * k - 1)


def test_classical_limit_exact_all_permutations():
    for n in (1, 2, 3):
        for perm in itertools.permutations(range(n + 1)):
            rep = sc.verify_classical_limit(n, perm, 4)
            assert rep.match and rep.orthogonal, (n, perm)
            assert rep.first_mismatch is None


def test_numeric_n_l():
    fp = sc.FixedPointData.from_permutation(1, (0, 1))
    lam = [F(-1, 4), F(1, 4)]   # weight lam_1 - lam_0 = 1/2
    assert fp.n_l_numeric(1, lam) == 2
    assert fp.n_l_numeric(3, lam) == 8
    with pytest.raises(sc.SemiclassicalError):
        fp.n_l_numeric(1, [F(0), F(0)])


def test_stirling_numeric_sanity():
    for z in (5.0, 10.0):
        err, bound = sc.stirling_numeric_residual(4, z)
        assert err <= bound
        assert err < 1e-9


def test_stationary_leading_scalar_case():
    rec = cr.continue_to(mi.make_chart(mi.build_graph(1), (0,)), LAM1, (1.0,))
    lead = sc.stationary_leading(rec, sc.amplitude_one)
    # log-Hessian here is v + q/v at the real positive critical point
    v = rec.coordinates[0].real
    assert abs(lead - 1.0 / math.sqrt(v + 1.0 / v)) < 1e-10


def test_laplace_consistency_small_hbar():
    ch = mi.make_chart(mi.build_graph(1), (0,))
    rec = cr.continue_to(ch, LAM1, (1.0,))
    val = ig.evaluate(ig.IntegralTask(n=1, lam=LAM1, hbar=-0.125, chart=ch,
                                      q=(1.0,))).value
    assert sc.laplace_consistency(rec, val, -0.125) < 5e-2


def test_psi_osc_matrix_shape_and_gram():
    psi = sc.psi_osc(1, LAM1, (1.0,), [sc.amplitude_one, sc.amplitude_p(0)])
    assert psi.entries.shape == (2, 2)
    assert psi.gram_variation is not None
    assert psi.gram_pairing == "identity-surrogate"
    assert np.all(np.isfinite(psi.entries))


def test_psi_osc_scaling_of_columns():
    c = 2.0
    base = sc.psi_osc(1, LAM1, (1.0,), [sc.amplitude_one, sc.amplitude_p(0)],
                      gram_q_factor=None)
    scaled = sc.psi_osc(1, [c * x for x in LAM1], (c * c,),
                        [sc.amplitude_one, sc.amplitude_p(0)], gram_q_factor=None)
    # amplitude of homogeneity degree m scales by c^{m - d/2}, d = 1
    ratio0 = scaled.entries[0] / base.entries[0]
    ratio1 = scaled.entries[1] / base.entries[1]
    assert np.allclose(ratio0, c ** -0.5)
    assert np.allclose(ratio1, c ** 0.5)


def test_psi_osc_nonequivariant_limit_finite():
    vals = []
    for eps in (1e-2, 5e-3):
        psi = sc.psi_osc(1, (eps, -eps), (1.0,), [sc.amplitude_one],
                         gram_q_factor=None)
        vals.append(psi.entries[0])
        assert np.all(np.isfinite(psi.entries))
    assert np.max(np.abs(np.abs(vals[0]) - np.abs(vals[1]))) < 1e-3


def test_degenerate_record_rejected():
    rec = cr.continue_to(mi.make_chart(mi.build_graph(1), (0,)), LAM1, (1.0,))
    object.__setattr__ if False else setattr(rec, "nondegenerate", False)
    with pytest.raises(sc.SemiclassicalError):
        sc.stationary_leading(rec, sc.amplitude_one)


def test_zero_series_helpers():
    z = HbarSeries.zero(5)
    assert (z + z).is_zero()
