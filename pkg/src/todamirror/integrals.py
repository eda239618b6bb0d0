"""Numerical evaluation of the mirror oscillatory integrals and the
eigenvalue-equation residuals.

The contour is the positive real subtorus in chart coordinates; after the
substitution w = e^s each axis becomes the whole real line and the integrand
e^{f/hbar} (hbar < 0) is a positive, log-concave bump: f is convex in s, so
there is a unique real peak and trapezoid sums on nested grids converge
geometrically.  Everything is deterministic; no Monte Carlo anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exact import LaurentPolynomial
from .mirror import (
    MirrorGraph,
    NumericChartPhase,
    SigmaChart,
    all_k_sequences,
    make_chart,
    phase_in_chart,
)
from . import operators as ops
from . import critical as crit


class QuadratureError(RuntimeError):
    """Non-convergence or integrand divergence at a boundary face."""


@dataclass
class IntegralTask:
    n: int
    lam: Tuple[float, ...]
    hbar: float
    chart: SigmaChart
    t: Optional[Tuple[float, ...]] = None      # t_0..t_n with sum 0
    q: Optional[Tuple[float, ...]] = None      # alternative to t
    abs_tol: float = 1e-300
    rel_tol: float = 1e-10
    max_doublings: int = 12
    include_prefactor: bool = True             # multiply by prod q_i^{rho/hbar}

    def __post_init__(self):
        if self.n > 2:
            raise ValueError("iterated quadrature is desk scale; n <= 2")
        self.lam = tuple(float(x) for x in self.lam)
        if abs(sum(self.lam)) > 1e-9:
            raise ValueError("lambda must sum to zero")
        if self.hbar >= 0:
            raise ValueError("hbar must be negative")
        if self.q is None:
            if self.t is None:
                raise ValueError("provide t or q")
            t = tuple(float(x) for x in self.t)
            self.q = tuple(math.exp(t[i] - t[i - 1]) for i in range(1, self.n + 1))
        self.q = tuple(float(x) for x in self.q)
        if any(x <= 0 for x in self.q):
            raise ValueError("q must be positive")


@dataclass
class QuadratureResult:
    value: float
    error: float
    evaluations: int
    converged: bool
    nodes_per_axis: int = 0
    log_scale: float = 0.0   # the factored-out exponent: value = exp(log_scale) * raw


@dataclass
class GridGeometry:
    """Frozen integration window reused across a finite-difference stencil."""
    center: np.ndarray
    halfwidth: np.ndarray
    nodes: int
    f_ref: float


def _real_peak(num: NumericChartPhase, lnq: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unique real minimum of the convex phase f(s)."""
    s = np.zeros(num.dim)
    for _ in range(200):
        vals = np.exp(num.A @ s + num.B @ lnq)
        g = num.A.T @ vals + num.sigma
        if np.max(np.abs(g)) < tol:
            return s
        h = (num.A * vals[:, None]).T @ num.A
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError as exc:
            raise QuadratureError(f"singular Hessian at the peak search: {exc}") from exc
        f0 = vals.sum() + num.sigma @ s
        t = 1.0
        while t > 1e-14:
            s_try = s + t * step
            f_try = np.exp(num.A @ s_try + num.B @ lnq).sum() + num.sigma @ s_try
            if np.isfinite(f_try) and f_try < f0:
                s = s_try
                break
            t /= 2
        else:
            # descent stalled at float resolution; the point is good enough
            # for grid centering as long as the gradient is already small
            if np.max(np.abs(g)) < 1e-6:
                return s
            raise QuadratureError("peak line search stalled (no interior minimum?)")
    raise QuadratureError("peak search did not converge")


def _decay_check(num: NumericChartPhase, lnq: np.ndarray, s_star: np.ndarray,
                 f_star: float, reach: float = 40.0) -> None:
    """Verify f grows along every boundary ray; report the offending face."""
    d = num.dim
    dirs: List[Tuple[str, np.ndarray]] = []
    for k in range(d):
        for sgn in (+1.0, -1.0):
            e = np.zeros(d)
            e[k] = sgn
            dirs.append((f"axis {k} {'+' if sgn > 0 else '-'}", e))
    rng = np.random.default_rng(1234)  # fixed probe directions, deterministic
    for i in range(4 * d):
        v = rng.standard_normal(d)
        dirs.append((f"ray {i}", v / np.linalg.norm(v)))
    for name, e in dirs:
        f_far = float(np.exp(num.A @ (s_star + reach * e) + num.B @ lnq).sum()
                      + num.sigma @ (s_star + reach * e))
        if not np.isfinite(f_far) or f_far < f_star + 1.0:
            raise QuadratureError(
                f"integrand fails to decay at boundary face ({name})")


def _axis_halfwidths(num: NumericChartPhase, lnq: np.ndarray, s_star: np.ndarray,
                     f_star: float, threshold: float) -> np.ndarray:
    """Per-axis S with f(s* +/- S e_k) - f* >= threshold (tail bound)."""
    d = num.dim
    out = np.zeros(d)

    def excess(k: int, t: float) -> float:
        s = s_star.copy()
        s[k] += t
        return float(np.exp(num.A @ s + num.B @ lnq).sum() + num.sigma @ s) - f_star

    for k in range(d):
        width = 0.0
        for sgn in (+1.0, -1.0):
            t = 1.0
            while excess(k, sgn * t) < threshold:
                t *= 1.6
                if t > 1e4:
                    raise QuadratureError(f"no decay along axis {k}")
            width = max(width, t)
        out[k] = width
    return out


def _tensor_integral(num: NumericChartPhase, lnq: np.ndarray, geom: GridGeometry,
                     hbar: float) -> Tuple[float, int]:
    """Trapezoid tensor integral of exp((f - f_ref)/hbar) on the frozen box."""
    d = num.dim
    m = geom.nodes
    axes = [np.linspace(geom.center[k] - geom.halfwidth[k],
                        geom.center[k] + geom.halfwidth[k], m) for k in range(d)]
    # accumulate f on the grid monomial by monomial (broadcasted 1-D phases)
    shape = tuple([m] * d)
    f_grid = np.zeros(shape)
    for idx in range(num.A.shape[0]):
        a = num.A[idx]
        b_ln = float(num.B[idx] @ lnq)
        phase = np.full(shape, b_ln)
        for k in range(d):
            view = [None] * d
            view[k] = slice(None)
            phase = phase + a[k] * axes[k][tuple(view)]
        np.exp(phase, out=phase)
        f_grid += phase
    for k in range(d):
        view = [None] * d
        view[k] = slice(None)
        f_grid = f_grid + num.sigma[k] * axes[k][tuple(view)]
    f_grid -= geom.f_ref
    f_grid /= hbar
    np.exp(f_grid, out=f_grid)
    # trapezoid weights: 1/2 at the two endpoints of each axis
    for k in range(d):
        sl = [slice(None)] * d
        sl[k] = 0
        f_grid[tuple(sl)] *= 0.5
        sl[k] = m - 1
        f_grid[tuple(sl)] *= 0.5
    steps = [(2.0 * geom.halfwidth[k]) / (m - 1) for k in range(d)]
    return float(f_grid.sum()) * math.prod(steps), m ** d


def _converged_geometry(num: NumericChartPhase, lnq: np.ndarray, hbar: float,
                        rel_tol: float, abs_tol: float,
                        max_doublings: int) -> Tuple[GridGeometry, float, float, int, bool]:
    s_star = _real_peak(num, lnq)
    f_star = float(np.exp(num.A @ s_star + num.B @ lnq).sum() + num.sigma @ s_star)
    _decay_check(num, lnq, s_star, f_star)
    # e^{(f - f*)/hbar} <= eps once f - f* >= |hbar| ln(1/eps)
    threshold = abs(hbar) * math.log(1e22)
    widths = _axis_halfwidths(num, lnq, s_star, f_star, threshold)
    nodes = 17
    geom = GridGeometry(center=s_star, halfwidth=widths, nodes=nodes, f_ref=f_star)
    prev, total_evals = None, 0
    for _ in range(max_doublings):
        raw, ev = _tensor_integral(num, lnq, geom, hbar)
        total_evals += ev
        if prev is not None:
            err = abs(raw - prev)
            if err <= max(abs_tol, rel_tol * abs(raw)):
                return geom, raw, err, total_evals, True
        prev = raw
        nodes = 2 * (nodes - 1) + 1
        geom = GridGeometry(center=s_star, halfwidth=widths, nodes=nodes, f_ref=f_star)
    geom = GridGeometry(center=s_star, halfwidth=widths, nodes=(nodes - 1) // 2 + 1,
                        f_ref=f_star)
    return geom, prev, float("inf"), total_evals, False


def evaluate(task: IntegralTask) -> QuadratureResult:
    """The chart integral of e^{f/hbar} over the positive subtorus.

    The returned value includes the prefactor prod q_i^{rho_{1,i-1}/hbar}
    unless include_prefactor is False (the q -> 0 factorisation check needs
    the bare integral).
    """
    phase = phase_in_chart(task.chart)
    num = phase.numeric(task.lam)
    lnq = np.log(np.array(task.q))
    geom, raw, err, evals, converged = _converged_geometry(
        num, lnq, task.hbar, task.rel_tol, task.abs_tol, task.max_doublings)
    if not converged:
        raise QuadratureError(
            f"quadrature did not converge within {task.max_doublings} doublings")
    log_scale = geom.f_ref / task.hbar
    if task.include_prefactor:
        log_scale += num.rho_log_q(lnq) / task.hbar
    value = math.exp(log_scale) * raw
    return QuadratureResult(value=value, error=err * math.exp(log_scale),
                            evaluations=evals, converged=converged,
                            nodes_per_axis=geom.nodes, log_scale=log_scale)


# ---------------------------------------------------------------------------
# Eigenvalue residuals by finite differences.
# ---------------------------------------------------------------------------

def _central_weights(order: int, h: float) -> Dict[int, float]:
    """Second-order central difference weights for d^order/dx^order."""
    if order == 0:
        return {0: 1.0}
    if order == 1:
        return {-1: -0.5 / h, 1: 0.5 / h}
    if order == 2:
        return {-1: 1.0 / h ** 2, 0: -2.0 / h ** 2, 1: 1.0 / h ** 2}
    if order == 3:
        return {-2: -0.5 / h ** 3, -1: 1.0 / h ** 3, 1: -1.0 / h ** 3, 2: 0.5 / h ** 3}
    raise ValueError(f"unsupported derivative order {order}")


def _p_to_x_expansion(kappa: Sequence[int], n: int) -> Dict[Tuple[int, ...], int]:
    """Expand prod_j (d/dx_j - d/dx_{j+1})^{kappa_j} into x-multi-indices.

    x_i = t_i - t_{i-1} for i = 1..n; d/dt_j = d/dx_j - d/dx_{j+1} with the
    out-of-range terms dropped.
    """
    acc: Dict[Tuple[int, ...], int] = {(0,) * n: 1}
    for j, k in enumerate(kappa):
        for _ in range(k):
            nxt: Dict[Tuple[int, ...], int] = {}
            for beta, c in acc.items():
                for axis, sign in ((j, +1), (j + 1, -1)):
                    if 1 <= axis <= n:
                        b = list(beta)
                        b[axis - 1] += 1
                        key = tuple(b)
                        nxt[key] = nxt.get(key, 0) + sign * c
            acc = {k2: v for k2, v in nxt.items() if v != 0}
    return acc


@dataclass
class EigenReport:
    n: int
    lam: Tuple[float, ...]
    q: Tuple[float, ...]
    hbar: float
    h_step: float
    residuals: List[float]
    base_value: float
    evaluations: int
    nodes_per_axis: int

    def max_residual(self) -> float:
        return max(self.residuals)


def eigen_residual(n: int, lam: Sequence[float], hbar: float,
                   t_base: Sequence[float], h_step: float = 1e-2,
                   rel_tol: float = 1e-11, richardson: bool = True,
                   chart: Optional[SigmaChart] = None,
                   max_doublings: int = 12) -> EigenReport:
    """Relative residuals |D_i I - sigma_i I| / |I| at t_base.

    Derivatives act through second-order central differences in the
    independent variables x_i = t_i - t_{i-1}; every stencil point is
    integrated on one frozen grid geometry so quadrature errors correlate
    and cancel in the differences.  One Richardson level (h and h/2) is
    applied when `richardson` is set.
    """
    if n > 2:
        raise ValueError("iterated quadrature is desk scale; n <= 2")
    lam = tuple(float(x) for x in lam)
    t_base = tuple(float(x) for x in t_base)
    if abs(sum(t_base)) > 1e-9:
        raise ValueError("t must sum to zero")
    graph = MirrorGraph(n)
    chart = chart or make_chart(graph, (0,) * n)
    x_base = np.array([t_base[i] - t_base[i - 1] for i in range(1, n + 1)])

    phase = phase_in_chart(chart)
    num = phase.numeric(lam)
    lnq_base = x_base.copy()

    geom, raw, err, evals, ok = _converged_geometry(
        num, lnq_base, hbar, rel_tol, 1e-300, max_doublings)
    if not ok:
        raise QuadratureError("base-point quadrature did not converge")

    cache: Dict[Tuple[int, ...], float] = {}
    total_evals = evals

    def integral_at(offsets: Tuple[int, ...], h: float) -> float:
        key = offsets
        if key in cache:
            return cache[key]
        lnq = lnq_base + h * np.array(offsets, dtype=float) / 2.0
        raw_v, ev = _tensor_integral(num, lnq, geom, hbar)
        nonlocal total_evals
        total_evals += ev
        value = math.exp(geom.f_ref / hbar + num.rho_log_q(lnq) / hbar) * raw_v
        cache[key] = value
        return value

    # offsets are measured in half-steps so the h and h/2 stencils share points
    def fd_derivative(beta: Tuple[int, ...], half_steps: int) -> float:
        """Mixed partial d^beta I at x_base with step half_steps * h/2."""
        weight_tables = [_central_weights(b, h_step * half_steps / 2.0) for b in beta]
        total = 0.0
        def rec(axis: int, offs: List[int], w: float):
            nonlocal total
            if axis == len(beta):
                total += w * integral_at(tuple(offs), h_step)
                return
            for o, wt in weight_tables[axis].items():
                offs.append(o * half_steps)
                rec(axis + 1, offs, w * wt)
                offs.pop()
        rec(0, [], 1.0)
        return total

    def apply_operator(poly: Dict[Tuple[int, ...], LaurentPolynomial],
                       half_steps: int) -> float:
        q_assign = {f"q{i}": math.exp(x_base[i - 1]) for i in range(1, n + 1)}
        out = 0.0
        for kappa, coeff in poly.items():
            c = complex(coeff.evaluate(q_assign)).real if coeff.variables \
                else float(coeff.as_constant())
            c = c * hbar ** sum(kappa)
            for beta, mult in _p_to_x_expansion(kappa, n).items():
                out += c * mult * fd_derivative(beta, half_steps)
        return out

    base_value = integral_at((0,) * n, h_step)
    sigmas = np.poly(np.array(lam))[1:]
    residuals = []
    for i, poly in enumerate(ops.toda_polynomials(n)):
        d_coarse = apply_operator(poly, 2)
        if richardson:
            d_fine = apply_operator(poly, 1)
            d_val = (4.0 * d_fine - d_coarse) / 3.0
        else:
            d_val = d_coarse
        residuals.append(abs(d_val - float(sigmas[i].real) * base_value) / abs(base_value))

    return EigenReport(n=n, lam=lam, q=tuple(math.exp(x) for x in x_base), hbar=hbar,
                       h_step=h_step, residuals=residuals, base_value=base_value,
                       evaluations=total_evals, nodes_per_axis=geom.nodes)


# ---------------------------------------------------------------------------
# Bessel oracle and the n = 1 closed form.
# ---------------------------------------------------------------------------

def bessel_k_cosh(nu: float, z: float, rel_tol: float = 1e-13) -> float:
    """K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt by doubling trapezoid."""
    if z <= 0:
        raise ValueError("z must be positive")
    nu = abs(float(nu))
    upper = 1.0
    while z * (math.cosh(upper) - 1.0) - nu * upper < 60.0:
        upper += 1.0
        if upper > 700:
            raise QuadratureError("Bessel integral tail did not close")

    def g(t: np.ndarray) -> np.ndarray:
        return np.exp(-z * np.cosh(t)) * np.cosh(nu * t)

    m = 65
    prev = None
    for _ in range(22):
        ts = np.linspace(0.0, upper, m)
        vals = g(ts)
        vals[0] *= 0.5
        vals[-1] *= 0.5
        cur = float(vals.sum()) * (upper / (m - 1))
        if prev is not None and abs(cur - prev) <= rel_tol * abs(cur):
            return cur
        prev = cur
        m = 2 * (m - 1) + 1
    raise QuadratureError("Bessel quadrature did not converge")


def whittaker_closed_form(lam0: float, q: float, hbar: float) -> float:
    """The n = 1 integral equals 2 K_{-2 lam0/hbar}(-2 sqrt(q)/hbar)."""
    return 2.0 * bessel_k_cosh(-2.0 * lam0 / hbar, -2.0 * math.sqrt(q) / hbar)


# ---------------------------------------------------------------------------
# q -> 0 factorisation against the one-variable Gamma values.
# ---------------------------------------------------------------------------

def admissible_charts(graph: MirrorGraph, lam: Sequence[float], hbar: float) -> List[Tuple[int, ...]]:
    """Charts with every exponent sigma(i,j)/hbar positive at this lambda."""
    out = []
    for k in all_k_sequences(graph.n):
        chart = make_chart(graph, k)
        vals = [float(chart.sigma[p].evaluate(lam)) / hbar for p in chart.positions]
        if all(v > 0 for v in vals):
            out.append(k)
    return out


def one_variable_factor(c_over_hbar: float, hbar: float) -> float:
    """int_0^inf e^{w/hbar} w^{c/hbar} dw/w = Gamma(c/hbar) (-hbar)^{c/hbar}."""
    from scipy.special import gamma
    return float(gamma(c_over_hbar)) * (-hbar) ** c_over_hbar


def q_to_zero_factorization(n: int, lam: Sequence[float], hbar: float,
                            chart: SigmaChart, q_small: float,
                            rel_tol: float = 1e-10) -> Tuple[float, float, float]:
    """Relative mismatch between the rescaled integral at small q and the
    product of one-variable Gamma factors.  Returns (mismatch, value, product)."""
    lam = tuple(float(x) for x in lam)
    sig = [float(chart.sigma[p].evaluate(lam)) for p in chart.positions]
    if any(s / hbar <= 0 for s in sig):
        raise ValueError("chart is not admissible at this lambda (sigma/hbar <= 0)")
    task = IntegralTask(n=n, lam=lam, hbar=hbar, chart=chart,
                        q=(q_small,) * n, include_prefactor=False, rel_tol=rel_tol)
    value = evaluate(task).value
    product = 1.0
    for s in sig:
        product *= one_variable_factor(s / hbar, hbar)
    return abs(value - product) / abs(product), value, product


# ---------------------------------------------------------------------------
# The projective-line worked example.
# ---------------------------------------------------------------------------

@dataclass
class Cp1Report:
    derivative_match: float   # max |d/dt (u_sigma - closed form)|
    momentum_match: float     # max |du/dt - p|
    eigenvector_residual: float
    pairing_residual: float


def _closed_form_value(lam0: float, p: float) -> complex:
    # complex logs: the p_- branch makes both arguments negative, and the
    # principal branch stays continuous for q > 0, so t-derivatives are safe
    import cmath
    lam1 = -lam0
    return 2.0 * p + lam0 * cmath.log(complex(lam1 + p)) \
        + lam1 * cmath.log(complex(lam0 + p))


def cp1_example_check(lam0: float, q_grid: Sequence[float],
                      fd_step: float = 1e-3) -> Cp1Report:
    """Critical values of the n = 1 phase against the closed form.

    With p = +/- sqrt(lam0^2 + q) the closed form 2p + lam0 ln(lam1 + p)
    + lam1 ln(lam0 + p) matches u_sigma up to a q-independent constant, and
    du/dt = p (t = ln q).  Derivatives are Richardson-extrapolated central
    differences on ln q.
    """
    if lam0 == 0:
        raise ValueError("lam0 must be nonzero")
    graph = MirrorGraph(1)
    lam = (lam0, -lam0)

    def u_of(kseq, q):
        return crit.continue_to(make_chart(graph, kseq), lam, (q,),
                                bump=crit.DETOUR_BUMPS[0]).u_sigma

    def ddt(fn, q):
        h = fd_step
        def at(loghshift):
            return fn(q * math.exp(loghshift))
        d_h = (at(h) - at(-h)) / (2 * h)
        d_h2 = (at(h / 2) - at(-h / 2)) / h
        return (4.0 * d_h2 - d_h) / 3.0

    derivative_match = 0.0
    momentum_match = 0.0
    # assign each chart the momentum branch that matches its du/dt
    for kseq in ((0,), (1,)):
        for q in q_grid:
            du = ddt(lambda qq: u_of(kseq, qq), q)
            branches = {+1: math.sqrt(lam0 ** 2 + q), -1: -math.sqrt(lam0 ** 2 + q)}
            sign = min(branches, key=lambda s: abs(du - branches[s]))
            p = branches[sign]
            momentum_match = max(momentum_match, abs(du - p))
            dclosed = ddt(lambda qq, s=sign: _closed_form_value(
                lam0, s * math.sqrt(lam0 ** 2 + qq)), q)
            derivative_match = max(derivative_match, abs(du - dclosed))

    # eigenvector check for the fundamental-solution matrix at each grid point
    eig_res = 0.0
    pair_res = 0.0
    for q in q_grid:
        p_plus = math.sqrt(lam0 ** 2 + q)
        v = math.sqrt(p_plus)
        conn = np.array([[0.0, p_plus ** 2], [1.0, 0.0]])
        psi = np.array([[v, -1j * v], [1.0 / v, 1j / v]]) / math.sqrt(2.0)
        eigs = (p_plus, -p_plus)
        for col, mu in enumerate(eigs):
            r = conn @ psi[:, col] - mu * psi[:, col]
            eig_res = max(eig_res, float(np.max(np.abs(r))))
        pairing = np.array([[0.0, 1.0], [1.0, 0.0]])
        gram = psi.T @ pairing @ psi
        pair_res = max(pair_res, float(np.max(np.abs(gram - np.eye(2)))))
    return Cp1Report(derivative_match=derivative_match,
                     momentum_match=momentum_match,
                     eigenvector_residual=eig_res,
                     pairing_residual=pair_res)
