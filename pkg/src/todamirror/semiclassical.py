"""Stationary-phase leading asymptotics and the exact classical-limit checks.

The q -> 0 limit of the rescaled oscillatory integrals is a product of Gamma
factors over the cotangent weights of a torus-fixed point; its Stirling
expansion must reproduce, coefficient by coefficient, the Bernoulli series
that defines the diagonal of the asymptotic fundamental solution at q = 0.
Each weight is modelled as an independent Laurent symbol, so the identity is
checked exactly, with no rational-function arithmetic and no tolerance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exact import HbarSeries, LaurentPolynomial, bernoulli
from .mirror import LambdaForm
from . import critical as crit


class SemiclassicalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Fixed-point weight data.
# ---------------------------------------------------------------------------

@dataclass
class FixedPointData:
    """Cotangent weights at the fixed point labelled by a permutation.

    The weights are lam_{sigma(i)} - lam_{sigma(j)} over pairs i > j; there
    are n(n+1)/2 of them and N_l is the sum of their (-l)-th powers.
    """

    n: int
    permutation: Tuple[int, ...]
    weights: List[LambdaForm]

    @classmethod
    def from_permutation(cls, n: int, permutation: Sequence[int]) -> "FixedPointData":
        perm = tuple(permutation)
        if sorted(perm) != list(range(n + 1)):
            raise SemiclassicalError(f"not a permutation of 0..{n}: {perm}")
        weights = [LambdaForm.unit(n, perm[i]) - LambdaForm.unit(n, perm[j])
                   for i in range(n + 1) for j in range(i)]
        return cls(n=n, permutation=perm, weights=weights)

    def weight_symbols(self) -> List[LaurentPolynomial]:
        return [LaurentPolynomial.variable(f"chi{k}") for k in range(len(self.weights))]

    def n_l_symbolic(self, l: int) -> LaurentPolynomial:
        """N_l = sum_j chi_j^{-l} over formal weight symbols."""
        out = LaurentPolynomial.zero()
        for k in range(len(self.weights)):
            out = out + LaurentPolynomial.monomial({f"chi{k}": -l})
        return out

    def n_l_numeric(self, l: int, lam: Sequence[Fraction]) -> Fraction:
        vals = [w.evaluate(lam) for w in self.weights]
        if any(v == 0 for v in vals):
            raise SemiclassicalError("repeated lambda values: zero weight")
        return sum(Fraction(1) / Fraction(v) ** l for v in vals)


# ---------------------------------------------------------------------------
# Stirling tail and the Bernoulli diagonal series.
# ---------------------------------------------------------------------------

def gamma_stirling_tail(K: int) -> List[Fraction]:
    """Coefficients c_i of the asymptotic tail sum_i c_i z^{1-2i} of ln Gamma.

    c_i = B_{2i} / (2i (2i-1)); the rest of the expansion
    (z - 1/2) ln z - z + ln(2 pi)/2 is elementary and not tabulated here.
    """
    if K < 1:
        raise SemiclassicalError("K must be >= 1")
    return [bernoulli(2 * i) / Fraction(2 * i * (2 * i - 1)) for i in range(1, K + 1)]


def stirling_tail_series(weights: Sequence[LaurentPolynomial], K: int) -> HbarSeries:
    """sum over weights of the Stirling tail at z = weight/hbar, through hbar^{2K-1}."""
    order = 2 * K - 1
    coeffs = gamma_stirling_tail(K)
    out = HbarSeries.zero(order)
    for w in weights:
        for i, c in enumerate(coeffs, start=1):
            out = out + HbarSeries.hbar_term(w ** (-(2 * i - 1)) * c, 2 * i - 1, order)
    return out


def classical_limit_b(fp: FixedPointData, K: int,
                      lam: Optional[Sequence[Fraction]] = None) -> HbarSeries:
    """The diagonal entry b(hbar) = sum_k N_{2k-1} (B_{2k}/2k) hbar^{2k-1}/(2k-1).

    Symbolic over the weight symbols when lam is None, exact rational
    otherwise; in both cases computed through hbar^{2K-1}.
    """
    order = 2 * K - 1
    out = HbarSeries.zero(order)
    for k in range(1, K + 1):
        factor = bernoulli(2 * k) / Fraction(2 * k) / Fraction(2 * k - 1)
        if lam is None:
            n_l = fp.n_l_symbolic(2 * k - 1)
        else:
            n_l = LaurentPolynomial.constant(fp.n_l_numeric(2 * k - 1, lam))
        out = out + HbarSeries.hbar_term(n_l * factor, 2 * k - 1, order)
    return out


@dataclass
class ClassicalLimitReport:
    permutation: Tuple[int, ...]
    order: int
    match: bool
    orthogonal: bool
    first_mismatch: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.match and self.orthogonal


def verify_classical_limit(n: int, permutation: Sequence[int], K: int) -> ClassicalLimitReport:
    """Exact test of the q = 0 diagonal against the Gamma-product Stirling tail.

    Also verifies b(hbar) + b(-hbar) = 0, which makes exp(b) orthogonal at
    q = 0: exp(b(hbar)) exp(b(-hbar)) = 1 through the truncation order.
    """
    fp = FixedPointData.from_permutation(n, permutation)
    b = classical_limit_b(fp, K)
    tail = stirling_tail_series(fp.weight_symbols(), K)
    match = (b == tail)
    first = None
    if not match:
        for e in range(1, 2 * K):
            if b.coefficient(e) != tail.coefficient(e):
                first = e
                break
    orth = (b + b.negate_hbar()).is_zero()
    if orth and len(fp.weights) <= 3:
        # spot-check the exponentiated statement where it is cheap; oddness
        # of b already forces exp(b(hbar)) exp(b(-hbar)) = 1
        orth = (b.exp() * b.negate_hbar().exp()) == HbarSeries.constant(1, 2 * K - 1)
    return ClassicalLimitReport(permutation=fp.permutation, order=2 * K - 1,
                                match=match, orthogonal=orth, first_mismatch=first)


def stirling_numeric_residual(K: int, z: float) -> Tuple[float, float]:
    """|ln Gamma(z) - truncated Stirling sum| and the next-term bound."""
    from scipy.special import gammaln
    coeffs = gamma_stirling_tail(K + 1)
    partial = (z - 0.5) * math.log(z) - z + 0.5 * math.log(2 * math.pi)
    partial += sum(float(c) * z ** (1 - 2 * i) for i, c in enumerate(coeffs[:K], start=1))
    next_term = abs(float(coeffs[K])) * z ** (1 - 2 * (K + 1))
    return abs(float(gammaln(z)) - partial), next_term


# ---------------------------------------------------------------------------
# Stationary-phase leading terms.
# ---------------------------------------------------------------------------

Amplitude = Callable[[crit.CriticalPointRecord], complex]


def amplitude_one(record: crit.CriticalPointRecord) -> complex:
    return 1.0 + 0.0j


def amplitude_p(i: int) -> Amplitude:
    def amp(record: crit.CriticalPointRecord) -> complex:
        return crit.to_lagrangian(record).p[i]
    amp.__name__ = f"p{i}"
    return amp


def stationary_leading(record: crit.CriticalPointRecord, amplitude: Amplitude) -> complex:
    """amplitude(crit) / sqrt(det Hessian), branch continued from q -> 0.

    The Hessian is taken in the log coordinates in which the volume form is
    translation-invariant; that is the determinant entering the stationary
    phase expansion of the integral.
    """
    if not record.nondegenerate:
        raise SemiclassicalError("record is degenerate")
    return complex(amplitude(record)) / record.sqrt_log_hessian_det


def laplace_consistency(record: crit.CriticalPointRecord, value: float, hbar: float,
                        amplitude: Amplitude = amplitude_one) -> float:
    """Relative gap between the quadrature value and the one-term expansion
    leading * e^{u/hbar} * (2 pi |hbar|)^{d/2}."""
    d = len(record.coordinates)
    leading = stationary_leading(record, amplitude)
    predicted = leading * cmath.exp(record.u_sigma / hbar) * (2 * math.pi * abs(hbar)) ** (d / 2)
    return abs(predicted - value) / abs(value)


@dataclass
class PsiOscMatrix:
    n: int
    lam: Tuple[float, ...]
    q: Tuple[float, ...]
    amplitude_names: List[str]
    charts: List[Tuple[int, ...]]
    permutations: List[Tuple[int, ...]]
    entries: np.ndarray                 # (amplitude, chart)
    gram_variation: Optional[float]    # sup |Gram(q1) - Gram(q0)|, surrogate pairing
    gram_pairing: str = "identity-surrogate"

    def report(self) -> dict:
        return {
            "amplitudes": self.amplitude_names,
            "charts": [list(k) for k in self.charts],
            "entries": [[[z.real, z.imag] for z in row] for row in self.entries.tolist()],
            "gram_variation": self.gram_variation,
            "gram_pairing": self.gram_pairing,
        }


def psi_osc(n: int, lam: Sequence[float], q: Sequence[float],
            amplitudes: Sequence[Amplitude],
            gram_q_factor: Optional[float] = 1.1) -> PsiOscMatrix:
    """Matrix of stationary-phase leading terms (amplitude x chart).

    The Gram variation reported here uses the identity pairing on the
    amplitude side as a computable surrogate; the geometric pairing needs
    two-point invariants that are out of scope, so the number is reported,
    not asserted constant.
    """
    def matrix_at(qv: Sequence[float]) -> Tuple[np.ndarray, List[Tuple[int, ...]], List[Tuple[int, ...]]]:
        records = crit.all_critical_points(n, lam, qv)
        cols = []
        charts, perms = [], []
        for rec in records:
            cols.append([stationary_leading(rec, amp) for amp in amplitudes])
            charts.append(rec.chart.kseq)
            perms.append(rec.chart.permutation)
        return np.array(cols).T, charts, perms

    entries, charts, perms = matrix_at(q)
    variation = None
    if gram_q_factor is not None:
        entries2, _, _ = matrix_at([x * gram_q_factor for x in q])
        g1 = entries.T @ entries
        g2 = entries2.T @ entries2
        variation = float(np.max(np.abs(g2 - g1)))
    names = [getattr(a, "__name__", f"amp{i}") for i, a in enumerate(amplitudes)]
    return PsiOscMatrix(n=n, lam=tuple(float(x) for x in lam),
                        q=tuple(float(x) for x in q),
                        amplitude_names=names, charts=charts, permutations=perms,
                        entries=entries, gram_variation=variation)
