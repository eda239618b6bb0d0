"""Toda operators: matrix build, substitution, composition, commutativity."""

import random
from fractions import Fraction as F

from todamirror import operators as ops
from todamirror.exact import LaurentPolynomial as LP


def test_toda_matrix_small():
    m = ops.build_toda_matrix(1)
    assert m[0][0] == LP.variable("p0")
    assert m[0][1] == LP.variable("q1")
    assert m[1][0] == LP.constant(-1)
    assert m[1][1] == LP.variable("p1")
    m2 = ops.build_toda_matrix(2)
    assert [m2[i][i] for i in range(3)] == [LP.variable(f"p{i}") for i in range(3)]
    assert m2[0][1] == LP.variable("q1") and m2[1][2] == LP.variable("q2")
    assert m2[1][0] == m2[2][1] == LP.constant(-1)


def test_charpoly_n1_hand_expansion():
    det = ops.charpoly_det(1)
    p0, p1, q1, x = (LP.variable(v) for v in ("p0", "p1", "q1", "x"))
    assert det == x ** 2 + (p0 + p1) * x + (p0 * p1 + q1)


def test_toda_operator_closed_forms():
    d = ops.toda_operators(1)
    n = 1
    assert d[0].terms == {(1, 0): LP.constant(1), (0, 1): LP.constant(1)}
    assert d[1].terms == {(1, 1): LP.constant(1), (0, 0): LP.variable("q1")}

    d2 = ops.toda_operators(2)
    assert d2[1].terms == {
        (1, 1, 0): LP.constant(1), (1, 0, 1): LP.constant(1),
        (0, 1, 1): LP.constant(1),
        (0, 0, 0): LP.variable("q1") + LP.variable("q2"),
    }


def test_first_operator_is_trace():
    for n in (1, 2, 3):
        d1 = ops.toda_operators(n)[0]
        expect = {}
        for i in range(n + 1):
            k = [0] * (n + 1)
            k[i] = 1
            expect[tuple(k)] = LP.constant(1)
        assert d1.terms == expect


def test_top_operator_at_q_zero_is_derivative_product():
    for n in (1, 2, 3):
        top = ops.toda_operators(n)[n]
        at_zero = {}
        for kappa, coeff in top.terms.items():
            c = coeff
            for i in range(1, n + 1):
                c = c.subs(f"q{i}", 0)
            if not c.is_zero():
                at_zero[kappa] = c
        assert at_zero == {(1,) * (n + 1): LP.constant(1)}


def test_hamiltonian_closed_form_and_relation():
    h = ops.build_hamiltonian(1)
    assert h.terms[(2, 0)] == LP.constant(F(1, 2))
    assert h.terms[(0, 2)] == LP.constant(F(1, 2))
    assert h.terms[(0, 0)] == -LP.variable("q1")

    d = ops.toda_operators(1)
    assert ops.compose(d[0], d[0]) * F(1, 2) - d[1] == h

    h2 = ops.build_hamiltonian(2)
    assert h2.terms[(0, 0, 0)] == -(LP.variable("q1") + LP.variable("q2"))


def test_leibniz_examples():
    q1 = ops.DifferentialOperator.multiplication(1, LP.variable("q1"))
    d1 = ops.DifferentialOperator.partial(1, 1)
    d0 = ops.DifferentialOperator.partial(1, 0)
    hq = LP.variable("q1") * LP.variable("hbar")

    prod = ops.compose(d1, q1)
    assert prod.terms == {(0, 1): LP.variable("q1"), (0, 0): hq}
    prod0 = ops.compose(d0, q1)
    assert prod0.terms == {(1, 0): LP.variable("q1"), (0, 0): -hq}

    ident = ops.DifferentialOperator.identity(1)
    assert ops.compose(ident, prod) == prod
    assert ops.commutator(d1, q1).terms == {(0, 0): hq}


def random_operator(rng, n, nterms=5):
    terms = {}
    for _ in range(nterms):
        kappa = tuple(rng.randint(0, 2) for _ in range(n + 1))
        exps = {f"q{i}": rng.randint(0, 2) for i in range(1, n + 1)}
        exps["hbar"] = rng.randint(0, 1)
        coeff = LP.monomial(exps, F(rng.randint(-5, 5), rng.randint(1, 4)))
        terms[kappa] = terms.get(kappa, LP.zero()) + coeff
    return ops.DifferentialOperator(n, terms)


def test_compose_associative_random():
    rng = random.Random(99)
    for _ in range(12):
        n = rng.choice((1, 2))
        a, b, c = (random_operator(rng, n) for _ in range(3))
        assert ops.compose(ops.compose(a, b), c) == ops.compose(a, ops.compose(b, c))


def test_commutativity_exact_n123():
    for n in (1, 2, 3):
        d = ops.toda_operators(n)
        ham = ops.build_hamiltonian(n)
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                assert ops.commutator(d[i], d[j]).is_zero()
            assert ops.commutator(ham, d[i]).is_zero()


def test_operator_serialization():
    d2 = ops.toda_operators(1)[1]
    text = d2.canonical_str()
    assert "d0^1 d1^1" in text and "q1" in text
