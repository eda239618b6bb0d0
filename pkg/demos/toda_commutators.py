"""Build the quantum Toda operators symbolically and watch them commute.

The operators D_1..D_{n+1} are the coefficients of det(A + xI) for the
tridiagonal matrix with momenta on the diagonal, with each p_i replaced by
hbar d/dt_i and all coefficients in q_i = e^{t_i - t_{i-1}} ordered to the
left.  Every commutator below must come out as the empty operator.
"""

from todamirror import build_hamiltonian, commutator, compose, toda_operators

for n in (1, 2):
    print(f"=== n = {n} ===")
    d = toda_operators(n)
    for i, op in enumerate(d, start=1):
        print(f"D_{i} =", op.canonical_str())
    ham = build_hamiltonian(n)
    print("H   =", ham.canonical_str())

    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            c = commutator(d[i], d[j])
            print(f"[D_{i+1}, D_{j+1}] term count: {len(c.terms)}")
        c = commutator(ham, d[i])
        print(f"[H, D_{i+1}]    term count: {len(c.terms)}")

    from fractions import Fraction
    relation = compose(d[0], d[0]) * Fraction(1, 2) - d[1]
    print("H == D_1^2/2 - D_2:", relation == ham)
    print()
