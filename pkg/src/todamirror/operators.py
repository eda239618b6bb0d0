"""Quantum Toda operators and normal-ordered differential-operator algebra.

Operators act on functions of t_0..t_n.  Coefficients live in the Laurent
ring generated by hbar and q_i = e^{t_i - t_{i-1}}; the derivation rule
``hbar d/dt_i (q_j) = hbar (delta_{ij} - delta_{i,j-1}) q_j`` is all the
noncommutativity there is.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from .exact import ExactAlgebraError, LaurentPolynomial

HBAR = "hbar"


def q_name(i: int) -> str:
    return f"q{i}"


def p_name(i: int) -> str:
    return f"p{i}"


def _dt_coefficient(coeff: LaurentPolynomial, axis: int, n: int) -> LaurentPolynomial:
    """d/dt_axis applied to a coefficient polynomial in q_1..q_n.

    A monomial with q-exponents m_1..m_n picks up the factor
    m_axis - m_{axis+1} (indices outside 1..n read as 0).
    """
    pos = {}
    for idx, v in enumerate(coeff.variables):
        pos[v] = idx
    out: Dict[Tuple[int, ...], Fraction] = {}
    ia = pos.get(q_name(axis))
    ib = pos.get(q_name(axis + 1))
    for e, c in coeff.terms.items():
        factor = (e[ia] if ia is not None else 0) - (e[ib] if ib is not None else 0)
        if factor == 0:
            continue
        s = out.get(e, Fraction(0)) + c * factor
        if s == 0:
            out.pop(e, None)
        else:
            out[e] = s
    return LaurentPolynomial(coeff.variables, out)


def _derive_coeff(coeff: LaurentPolynomial, alpha: Sequence[int], n: int) -> LaurentPolynomial:
    """(hbar d/dt)^alpha applied to a pure coefficient."""
    total = sum(alpha)
    if total == 0:
        return coeff
    out = coeff
    for axis, k in enumerate(alpha):
        for _ in range(k):
            out = _dt_coefficient(out, axis, n)
            if out.is_zero():
                return out
    return out * LaurentPolynomial.monomial({HBAR: total})


def _multibinom(kappa: Sequence[int], nu: Sequence[int]) -> int:
    b = 1
    for k, v in zip(kappa, nu):
        b *= math.comb(k, v)
    return b


def _sub_multi_indices(kappa: Tuple[int, ...]):
    """All nu with 0 <= nu <= kappa componentwise."""
    if not kappa:
        yield ()
        return
    head, rest = kappa[0], kappa[1:]
    for tail in _sub_multi_indices(rest):
        for v in range(head + 1):
            yield (v,) + tail


class DifferentialOperator:
    """Normal-ordered operator sum_kappa c_kappa(q, hbar) (hbar d/dt)^kappa.

    Coefficients sit strictly to the left of the derivatives; composition
    re-normal-orders exactly via the Leibniz rule.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Tuple[int, ...], LaurentPolynomial]):
        clean: Dict[Tuple[int, ...], LaurentPolynomial] = {}
        for kappa, c in terms.items():
            if len(kappa) != n + 1 or any(k < 0 for k in kappa):
                raise ExactAlgebraError(f"bad derivative exponent vector {kappa}")
            if isinstance(c, (int, Fraction)):
                c = LaurentPolynomial.constant(c)
            if not c.is_zero():
                clean[tuple(kappa)] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("DifferentialOperator is immutable")

    @classmethod
    def identity(cls, n: int) -> "DifferentialOperator":
        return cls(n, {(0,) * (n + 1): LaurentPolynomial.constant(1)})

    @classmethod
    def zero(cls, n: int) -> "DifferentialOperator":
        return cls(n, {})

    @classmethod
    def partial(cls, n: int, i: int) -> "DifferentialOperator":
        """The operator hbar d/dt_i."""
        kappa = [0] * (n + 1)
        kappa[i] = 1
        return cls(n, {tuple(kappa): LaurentPolynomial.constant(1)})

    @classmethod
    def multiplication(cls, n: int, coeff: LaurentPolynomial) -> "DifferentialOperator":
        return cls(n, {(0,) * (n + 1): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "DifferentialOperator") -> "DifferentialOperator":
        if self.n != other.n:
            raise ExactAlgebraError("operator size mismatch")
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, LaurentPolynomial.zero()) + c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return DifferentialOperator(self.n, out)

    def __neg__(self) -> "DifferentialOperator":
        return DifferentialOperator(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "DifferentialOperator") -> "DifferentialOperator":
        return self + (-other)

    def __mul__(self, scalar) -> "DifferentialOperator":
        return DifferentialOperator(self.n, {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, DifferentialOperator) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        raise TypeError("DifferentialOperator is unhashable")

    def canonical_str(self) -> str:
        if not self.terms:
            return "0"
        def key(k):
            return (sum(k), k)
        parts = []
        for kappa in sorted(self.terms, key=key, reverse=True):
            mono = " ".join(f"d{i}^{k}" for i, k in enumerate(kappa) if k)
            c = self.terms[kappa].canonical_str()
            parts.append(f"({c}) {mono}".strip())
        return " + ".join(parts)

    def __repr__(self):
        return f"DifferentialOperator({self.canonical_str()})"


def compose(a: DifferentialOperator, b: DifferentialOperator) -> DifferentialOperator:
    """Normal-ordered product a . b."""
    if a.n != b.n:
        raise ExactAlgebraError("operator size mismatch")
    n = a.n
    acc: Dict[Tuple[int, ...], LaurentPolynomial] = {}
    for kappa, ca in a.terms.items():
        for mu, cb in b.terms.items():
            for nu in _sub_multi_indices(kappa):
                alpha = tuple(k - v for k, v in zip(kappa, nu))
                derived = _derive_coeff(cb, alpha, n)
                if derived.is_zero():
                    continue
                coeff = ca * derived * _multibinom(kappa, nu)
                key = tuple(x + y for x, y in zip(nu, mu))
                s = acc.get(key, LaurentPolynomial.zero()) + coeff
                if s.is_zero():
                    acc.pop(key, None)
                else:
                    acc[key] = s
    return DifferentialOperator(n, acc)


def commutator(a: DifferentialOperator, b: DifferentialOperator) -> DifferentialOperator:
    return compose(a, b) - compose(b, a)


# ---------------------------------------------------------------------------
# The Toda matrix, its characteristic coefficients, and the operators D_i.
# ---------------------------------------------------------------------------

def build_toda_matrix(n: int) -> List[List[LaurentPolynomial]]:
    """Tridiagonal matrix with p_i diagonal, q_i superdiagonal, -1 subdiagonal."""
    if n < 1:
        raise ExactAlgebraError("n must be >= 1")
    size = n + 1
    zero = LaurentPolynomial.zero()
    mat = [[zero for _ in range(size)] for _ in range(size)]
    for i in range(size):
        mat[i][i] = LaurentPolynomial.variable(p_name(i))
        if i + 1 < size:
            mat[i][i + 1] = LaurentPolynomial.variable(q_name(i + 1))
            mat[i + 1][i] = LaurentPolynomial.constant(-1)
    return mat


def charpoly_det(n: int) -> LaurentPolynomial:
    """det(A + xI) as a polynomial in p, q and x (tridiagonal recurrence)."""
    x = LaurentPolynomial.variable("x")
    d_prev = LaurentPolynomial.constant(1)
    d_cur = LaurentPolynomial.variable(p_name(0)) + x
    for k in range(2, n + 2):
        diag = LaurentPolynomial.variable(p_name(k - 1)) + x
        q = LaurentPolynomial.variable(q_name(k - 1))
        d_next = diag * d_cur + q * d_prev
        d_prev, d_cur = d_cur, d_next
    return d_cur


def toda_polynomials(n: int) -> List[Dict[Tuple[int, ...], LaurentPolynomial]]:
    """The commutative polynomials D_1..D_{n+1}.

    Each entry maps a p-exponent vector (always 0/1 here) to its coefficient,
    a polynomial in q_1..q_n.
    """
    det = charpoly_det(n)
    pvars = [p_name(i) for i in range(n + 1)]
    by_i: List[Dict[Tuple[int, ...], LaurentPolynomial]] = [dict() for _ in range(n + 1)]
    var_index = {v: i for i, v in enumerate(det.variables)}
    x_pos = var_index.get("x")
    p_pos = [var_index.get(v) for v in pvars]
    for e, c in det.terms.items():
        xdeg = e[x_pos] if x_pos is not None else 0
        i = (n + 1) - xdeg  # D_i multiplies x^{n+1-i}
        if i == 0:
            continue  # leading x^{n+1}
        kappa = tuple(e[pos] if pos is not None else 0 for pos in p_pos)
        qexps = {det.variables[j]: e[j] for j in range(len(e))
                 if det.variables[j].startswith("q") and e[j] != 0}
        mono = LaurentPolynomial.monomial(qexps, c) if qexps else LaurentPolynomial.constant(c)
        bucket = by_i[i - 1]
        bucket[kappa] = bucket.get(kappa, LaurentPolynomial.zero()) + mono
    return by_i


def toda_operators(n: int) -> List[DifferentialOperator]:
    """D_1..D_{n+1} with p_i replaced by hbar d/dt_i, coefficients on the left."""
    ops = []
    for poly in toda_polynomials(n):
        terms = {kappa: coeff for kappa, coeff in poly.items()}
        ops.append(DifferentialOperator(n, terms))
    return ops


def build_hamiltonian(n: int) -> DifferentialOperator:
    """H = (hbar^2/2) sum_i d^2/dt_i^2 - sum_i q_i."""
    terms: Dict[Tuple[int, ...], LaurentPolynomial] = {}
    for i in range(n + 1):
        kappa = [0] * (n + 1)
        kappa[i] = 2
        terms[tuple(kappa)] = LaurentPolynomial.constant(Fraction(1, 2))
    const = LaurentPolynomial.zero()
    for i in range(1, n + 1):
        const = const - LaurentPolynomial.variable(q_name(i))
    terms[(0,) * (n + 1)] = const
    return DifferentialOperator(n, terms)


# ---------------------------------------------------------------------------
# Generic exact matrix helpers (used by the UV identity check).
# ---------------------------------------------------------------------------

Matrix = List[List[LaurentPolynomial]]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            s = LaurentPolynomial.zero()
            for k in range(inner):
                s = s + a[i][k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_is_zero(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def mat_scalar_diag(size: int, scalar: LaurentPolynomial) -> Matrix:
    zero = LaurentPolynomial.zero()
    return [[scalar if i == j else zero for j in range(size)] for i in range(size)]
