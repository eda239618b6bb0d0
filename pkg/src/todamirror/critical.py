"""Critical points of the phase function.

Each chart contributes exactly one critical point, found by Newton
continuation along the ray tau * q from the explicit tau = 0 limit
w_ij = -sigma(i, j).  Records carry Hessians in both chart coordinates w and
log coordinates s = ln w (the volume form is translation-invariant in s, so
the log Hessian is the one entering stationary-phase prefactors), the
critical value, and all edge values for chart-independent comparisons.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exact import LaurentPolynomial
from .mirror import (
    Edge,
    MirrorGraph,
    NumericChartPhase,
    SigmaChart,
    all_k_sequences,
    make_chart,
    phase_in_chart,
)
from . import operators as ops


class DegenerateParameterError(ValueError):
    """lambda is too degenerate for the requested construction."""


class ContinuationError(RuntimeError):
    """Newton continuation failed (divergence or a caustic on the path)."""


class CriticalPointError(RuntimeError):
    """The computed critical-point set is defective (collision/degeneracy)."""


# Detour heights for the lifted ray tau(theta) = theta + i*b*sin(pi*theta).
# The plain real ray (b = 0) can hit a fold, a real zero of det Hessian where
# two real critical points collide and Newton tracking silently hops sheets;
# the default complex lift misses folds generically.  The order is fixed so
# results stay deterministic.
DETOUR_BUMPS: Tuple[float, ...] = (0.12, -0.12, 0.3, -0.3, 0.45, -0.45, 0.0)


@dataclass
class LagrangianPoint:
    p: List[complex]
    q: List[complex]
    residuals: List[float] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


@dataclass
class CriticalPointRecord:
    chart: SigmaChart
    lam: Tuple[float, ...]
    q: Tuple[float, ...]
    s: np.ndarray                      # log coordinates of the solution
    coordinates: np.ndarray            # chart coordinates w = exp(s)
    u_sigma: complex                   # critical value of f_q (rho ln q included)
    gradient_norm: float
    hessian: np.ndarray                # w-coordinate Hessian
    hessian_det: complex
    log_hessian: np.ndarray            # s-coordinate Hessian
    log_hessian_det: complex
    sqrt_log_hessian_det: complex      # branch continued from q -> 0
    nondegenerate: bool
    edge_values: Dict[str, complex]
    converged: bool

    def report(self) -> dict:
        return {
            "k_sequence": list(self.chart.kseq),
            "permutation": list(self.chart.permutation),
            "coordinates": [[z.real, z.imag] for z in self.coordinates.tolist()],
            "u_sigma": [self.u_sigma.real, self.u_sigma.imag],
            "hessian_det": [self.hessian_det.real, self.hessian_det.imag],
            "gradient_norm": self.gradient_norm,
            "nondegenerate": self.nondegenerate,
        }


def _check_lambda(lam: Sequence[float], n: int) -> Tuple[float, ...]:
    lam = tuple(float(x) for x in lam)
    if len(lam) != n + 1:
        raise DegenerateParameterError(f"lambda must have length {n + 1}")
    if abs(sum(lam)) > 1e-12 * max(1.0, max(abs(x) for x in lam)):
        raise DegenerateParameterError("lambda must sum to zero")
    return lam


def start_point(chart: SigmaChart, lam: Sequence[float]) -> np.ndarray:
    """Log coordinates of the q = 0 critical point: w_ij = -sigma(i, j).

    x + c ln x has its unique critical point at x = -c, so each chart factor
    starts there; a vanishing exponent makes the start degenerate.
    """
    lam = _check_lambda(lam, chart.n)
    s = np.zeros(len(chart.positions), dtype=complex)
    for k, p in enumerate(chart.positions):
        c = float(chart.sigma[p].evaluate(lam))
        if abs(c) < 1e-12:
            raise DegenerateParameterError(
                f"exponent sigma{p} vanishes at lambda={lam}; "
                "critical start point undefined (choose generic lambda)")
        s[k] = cmath.log(complex(-c))
    return s


def _newton(num: NumericChartPhase, s: np.ndarray, lnq: np.ndarray,
            tol: float, maxit: int = 100) -> Tuple[np.ndarray, float, np.ndarray]:
    """Damped Newton on the gradient of f; backtracks on the residual norm."""
    g = num.gradient(s, lnq)
    for _ in range(maxit):
        gnorm = float(np.max(np.abs(g)))
        if not np.isfinite(gnorm):
            raise ContinuationError("Newton iterate escaped to non-finite values")
        if gnorm <= tol:
            return s, gnorm, num.hessian(s, lnq)
        h = num.hessian(s, lnq)
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError as exc:
            raise ContinuationError(f"singular Hessian on the path: {exc}") from exc
        size = float(np.max(np.abs(step)))
        if size > 0.5:
            step = step * (0.5 / size)
        t = 1.0
        while True:
            s_try = s + t * step
            g_try = num.gradient(s_try, lnq)
            g_try_norm = float(np.max(np.abs(g_try)))
            if np.isfinite(g_try_norm) and (g_try_norm < gnorm or g_try_norm <= tol):
                s, g = s_try, g_try
                break
            t /= 2
            if t < 1.0 / 2 ** 20:
                raise ContinuationError("Newton line search failed")
    raise ContinuationError(f"Newton did not reach tol={tol}")


def _track_path(chart: SigmaChart, num: NumericChartPhase, lam: Sequence[float],
                lnq_target: np.ndarray, steps: int, tol: float,
                bump: float) -> Tuple[np.ndarray, float, np.ndarray, complex]:
    """Track the critical point along tau(theta) = theta + i*bump*sin(pi theta).

    Returns the endpoint solution, its gradient norm and log-Hessian, plus the
    continuously tracked log of det(log-Hessian) for branch-consistent square
    roots.
    """
    s = start_point(chart, lam)
    h0 = np.diag([-complex(chart.sigma[p].evaluate(lam)) for p in chart.positions])
    prev_det = complex(np.linalg.det(h0))
    log_det = cmath.log(prev_det)

    def tau_of(theta: float) -> complex:
        if bump == 0.0:
            return complex(theta)
        return complex(theta, bump * math.sin(math.pi * theta))

    def lnq_of(theta: float) -> np.ndarray:
        return lnq_target + cmath.log(tau_of(theta))

    def predict(s_cur: np.ndarray, theta_cur: float, dtheta: float) -> np.ndarray:
        if theta_cur <= 0.0:
            return s_cur
        tau = tau_of(theta_cur)
        dtau = 1.0 + (1j * bump * math.pi * math.cos(math.pi * theta_cur) if bump else 0.0)
        lnq_cur = lnq_of(theta_cur)
        vals = num.exponentials(s_cur, lnq_cur)
        qdeg = num.B.sum(axis=1)
        dg = num.A.T @ (vals * qdeg) * (dtau / tau)
        try:
            ds = np.linalg.solve(num.hessian(s_cur, lnq_cur), -dg)
        except np.linalg.LinAlgError:
            return s_cur
        if not np.all(np.isfinite(ds)) or np.max(np.abs(ds)) * dtheta > 1.0:
            return s_cur
        return s_cur + dtheta * ds

    theta = 0.0
    step = 1.0 / max(int(steps), 1)
    while theta < 1.0:
        theta_next = min(1.0, theta + step)
        lnq = lnq_of(theta_next)
        try:
            s_next, gnorm, h = _newton(num, predict(s, theta, theta_next - theta), lnq, tol)
        except ContinuationError:
            step /= 2
            if step < 1e-13:
                raise ContinuationError(
                    f"step halving exhausted at theta={theta} for chart {chart.kseq}")
            continue
        det = complex(np.linalg.det(h))
        if det == 0:
            raise ContinuationError(f"Hessian singular at theta={theta_next} (caustic)")
        ratio = det / prev_det
        jump = float(np.max(np.abs(s_next - s)))
        if (abs(cmath.log(ratio)) > 1.5 or jump > 1.5) and step > 1e-11:
            step /= 2
            continue
        log_det += cmath.log(ratio)
        prev_det = det
        s, theta = s_next, theta_next
        if theta < 1.0:
            step = min(step * 1.5, 1.0 - theta)

    s, gnorm, h_s = _newton(num, s, lnq_target, tol)
    det_s = complex(np.linalg.det(h_s))
    log_det += cmath.log(det_s / prev_det)
    return s, gnorm, h_s, log_det


def continue_to(chart: SigmaChart, lam: Sequence[float], q_target: Sequence[float],
                steps: int = 8, tol: float = 1e-12,
                bump: Optional[float] = None) -> CriticalPointRecord:
    """Track the chart's critical point from q = 0 to q_target.

    Follows the ray tau * q_target with adaptive step halving and Newton
    polish at each step.  When the real ray hits a fold, complex detours from
    DETOUR_BUMPS are tried in order; pass `bump` to force one specific path
    (needed when two runs must stay on corresponding branches).  The square
    root of the log-Hessian determinant is continued along the same path,
    with the positive root at the real q = 0 limit when that determinant is
    positive and the principal root otherwise.
    """
    lam = _check_lambda(lam, chart.n)
    q_target = tuple(float(x) for x in q_target)
    if len(q_target) != chart.n or any(x <= 0 for x in q_target):
        raise DegenerateParameterError("q must be a positive vector of length n")

    phase = phase_in_chart(chart)
    num = phase.numeric(lam)
    lnq_target = np.log(np.array(q_target))

    candidates = DETOUR_BUMPS if bump is None else (bump,)
    last_exc: Optional[ContinuationError] = None
    for b in candidates:
        try:
            s, gnorm, h_s, log_det = _track_path(chart, num, lam, lnq_target,
                                                 steps, tol, b)
            break
        except ContinuationError as exc:
            last_exc = exc
    else:
        raise ContinuationError(
            f"continuation failed for chart {chart.kseq}: {last_exc}")

    lnq = lnq_target
    det_s = complex(np.linalg.det(h_s))
    sqrt_det = cmath.exp(log_det / 2)

    w = np.exp(s)
    grad = num.gradient(s, lnq)
    # w-coordinate Hessian: e^{-s_k-s_l} (H_s - diag(grad_s)) at the solution
    inv_w = 1.0 / w
    h_w = (h_s - np.diag(grad)) * np.outer(inv_w, inv_w)
    det_w = complex(np.linalg.det(h_w))

    f_sigma = num.value(s, lnq)
    u_sigma = complex(f_sigma + num.rho_log_q(lnq))

    # Nondegeneracy on the row-scaled log-Hessian.  The log coordinates are
    # the translation-invariant ones (the volume form is flat there), so this
    # measure is blind to the spread of the w values themselves; a chart with
    # one tiny w would otherwise fail the threshold with a perfectly regular
    # critical point.
    scale = np.max(np.abs(h_s), axis=1)
    scale[scale == 0] = 1.0
    det_scaled = complex(np.linalg.det(h_s / scale[:, None]))
    nondeg = abs(det_scaled) > 1e-8

    edge_values: Dict[str, complex] = {}
    for p, name in chart.chart_edges.items():
        edge_values[name] = complex(w[chart.position_index[p]])
    for name, mono in chart.eliminated.items():
        val = complex(1.0)
        for pos, e in mono.w_exps:
            val *= complex(w[chart.position_index[pos]]) ** e
        for k, e in enumerate(mono.q_exps):
            if e:
                val *= q_target[k] ** e
        edge_values[name] = val

    return CriticalPointRecord(
        chart=chart, lam=lam, q=q_target, s=s, coordinates=w,
        u_sigma=u_sigma, gradient_norm=float(gnorm),
        hessian=h_w, hessian_det=det_w,
        log_hessian=h_s, log_hessian_det=det_s,
        sqrt_log_hessian_det=sqrt_det,
        nondegenerate=nondeg, edge_values=edge_values,
        converged=True,
    )


def all_critical_points(n: int, lam: Sequence[float], q: Sequence[float],
                        steps: int = 8, tol: float = 1e-12,
                        graph: Optional[MirrorGraph] = None) -> List[CriticalPointRecord]:
    """One record per chart, merged in k-sequence order.

    Records must be pairwise distinct as points of the mirror torus.  When
    the ray passes a fold, two tracks can land on the same sheet; colliding
    charts are then re-run on the next detour variant until the full fiber is
    recovered.  Exhausting the variants raises CriticalPointError.
    """
    graph = graph or MirrorGraph(n)
    kseqs = all_k_sequences(n)
    charts = {k: make_chart(graph, k) for k in kseqs}
    variant: Dict[Tuple[int, ...], int] = {}
    records: Dict[Tuple[int, ...], CriticalPointRecord] = {}

    def run(kseq: Tuple[int, ...], start_variant: int) -> None:
        last: Optional[Exception] = None
        for vi in range(start_variant, len(DETOUR_BUMPS)):
            try:
                records[kseq] = continue_to(charts[kseq], lam, q, steps=steps,
                                            tol=tol, bump=DETOUR_BUMPS[vi])
                variant[kseq] = vi
                return
            except ContinuationError as exc:
                last = exc
        raise CriticalPointError(
            f"no continuation variant succeeded for chart {kseq}: {last}")

    for kseq in kseqs:
        run(kseq, 0)

    def edge_vec(rec: CriticalPointRecord) -> np.ndarray:
        names = sorted(rec.edge_values)
        return np.array([rec.edge_values[nm] for nm in names])

    for _ in range(4 * len(kseqs)):
        vecs = {k: edge_vec(records[k]) for k in kseqs}
        pair = None
        for a in range(len(kseqs)):
            for b in range(a + 1, len(kseqs)):
                if float(np.max(np.abs(vecs[kseqs[a]] - vecs[kseqs[b]]))) < 1e-6:
                    pair = (kseqs[a], kseqs[b])
                    break
            if pair:
                break
        if pair is None:
            return [records[k] for k in kseqs]
        first, second = pair
        if variant[second] + 1 < len(DETOUR_BUMPS):
            run(second, variant[second] + 1)
        elif variant[first] + 1 < len(DETOUR_BUMPS):
            run(first, variant[first] + 1)
        else:
            raise CriticalPointError(
                f"charts {first} and {second} collide on every continuation variant")
    raise CriticalPointError("collision repair did not converge")


def pairwise_min_distance(records: Sequence[CriticalPointRecord]) -> float:
    """Minimal sup-distance between records in ambient edge coordinates."""
    names = sorted(records[0].edge_values)
    vecs = [np.array([r.edge_values[nm] for nm in names]) for r in records]
    best = math.inf
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            best = min(best, float(np.max(np.abs(vecs[i] - vecs[j]))))
    return best


@dataclass
class CensusResult:
    records: List[CriticalPointRecord]
    count: int
    expected: int
    all_nondegenerate: bool
    min_pairwise_distance: float
    max_spectral_residual: float
    max_lagrangian_residual: float

    @property
    def ok(self) -> bool:
        return (self.count == self.expected and self.all_nondegenerate
                and self.min_pairwise_distance > 1e-6)


def census(n: int, lam: Sequence[float], q: Sequence[float], steps: int = 8,
           tol: float = 1e-12) -> CensusResult:
    records = all_critical_points(n, lam, q, steps=steps, tol=tol)
    spect = max(spectral_check(r) for r in records)
    lagr = max(to_lagrangian(r).max_residual for r in records)
    return CensusResult(
        records=records,
        count=sum(1 for r in records if r.converged),
        expected=math.factorial(n + 1),
        all_nondegenerate=all(r.nondegenerate for r in records),
        min_pairwise_distance=pairwise_min_distance(records),
        max_spectral_residual=spect,
        max_lagrangian_residual=lagr,
    )


# ---------------------------------------------------------------------------
# Spectral identity and the map to the Lagrangian variety.
# ---------------------------------------------------------------------------

def row_matrix(record: CriticalPointRecord, k: int = 1) -> np.ndarray:
    """The (n-k+2)-square matrix built from row-k edge values:

    diagonal (-u_{k0}, v_{k0} - u_{k1}, ..., v_{k,n-k}),
    superdiagonal u_{kj} v_{kj}, subdiagonal -1.
    """
    n = record.chart.n
    size = n - k + 2
    u = [record.edge_values[Edge("u", k, j).name] for j in range(n - k + 1)]
    v = [record.edge_values[Edge("v", k, j).name] for j in range(n - k + 1)]
    m = np.zeros((size, size), dtype=complex)
    for i in range(size):
        if i == 0:
            m[i, i] = -u[0]
        elif i < size - 1:
            m[i, i] = v[i - 1] - u[i]
        else:
            m[i, i] = v[size - 2]
        if i + 1 < size:
            m[i, i + 1] = u[i] * v[i]
            m[i + 1, i] = -1.0
    return m


def _char_coeffs(m: np.ndarray) -> np.ndarray:
    """Coefficients c_1..c_size with det(M + xI) = x^size + sum c_i x^{size-i}."""
    return np.poly(-m)[1:]


def spectral_check(record: CriticalPointRecord) -> float:
    """Max deviation of det(A_1 - lam_0 I + xI) from prod (x - lam_i)."""
    lam0 = record.lam[0]
    m = row_matrix(record, 1) - lam0 * np.eye(record.chart.n + 1)
    coeffs = _char_coeffs(m)
    target = np.poly(np.array(record.lam))[1:]
    return float(np.max(np.abs(coeffs - target)))


def to_lagrangian(record: CriticalPointRecord) -> LagrangianPoint:
    """Image of the critical point in Spec C[p, q^{pm}] / (D_i(p,q) - sigma_i).

    The diagonal of A_1 is shifted by -lam_0 on every entry so that the
    relations D_i(p, q) = sigma_i hold on the nose.
    """
    n = record.chart.n
    m = row_matrix(record, 1)
    p = [complex(m[i, i]) - record.lam[0] for i in range(n + 1)]
    q = [record.edge_values[Edge("u", 1, j).name] * record.edge_values[Edge("v", 1, j).name]
         for j in range(n)]
    toda = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n + 1):
        toda[i, i] = p[i]
        if i + 1 <= n:
            toda[i, i + 1] = q[i]
            toda[i + 1, i] = -1.0
    coeffs = _char_coeffs(toda)
    target = np.poly(np.array(record.lam))[1:]
    residuals = [float(abs(a - b)) for a, b in zip(coeffs, target)]
    return LagrangianPoint(p=p, q=[complex(x) for x in q], residuals=residuals)


def scaling_residual(n: int, lam: Sequence[float], q: Sequence[float], c: float,
                     steps: int = 8, tol: float = 1e-12) -> float:
    """Relative failure of u_sigma(c^2 q, c lam) = c u_sigma(q, lam), all charts.

    Both runs are forced onto the same detour variant: the scaled problem has
    its folds at identical ray parameters, so matching paths stay on
    corresponding branches.
    """
    graph = MirrorGraph(n)
    worst = 0.0
    lam2 = [c * x for x in lam]
    q2 = [c * c * x for x in q]
    for k in all_k_sequences(n):
        chart = make_chart(graph, k)
        base = scaled = None
        last: Optional[Exception] = None
        for b in DETOUR_BUMPS[:-1]:  # complex variants only: fold-free paths
            try:
                base = continue_to(chart, lam, q, steps=steps, tol=tol, bump=b)
                scaled = continue_to(chart, lam2, q2, steps=steps, tol=tol, bump=b)
                break
            except ContinuationError as exc:
                last = exc
        if base is None or scaled is None:
            raise ContinuationError(f"scaling check failed for chart {k}: {last}")
        expect = c * base.u_sigma
        worst = max(worst, abs(scaled.u_sigma - expect) / max(1.0, abs(expect)))
    return worst


# ---------------------------------------------------------------------------
# The symbolic U_k V_k factorisation identity.
# ---------------------------------------------------------------------------

def _edge_poly(name: str) -> LaurentPolynomial:
    return LaurentPolynomial.variable(name)


def _lam_poly(i: int, n: int) -> LaurentPolynomial:
    """lam_i with lam_n eliminated through sum(lam) = 0."""
    if i < n:
        return LaurentPolynomial.variable(f"lam{i}")
    out = LaurentPolynomial.zero()
    for j in range(n):
        out = out - LaurentPolynomial.variable(f"lam{j}")
    return out


def _chart_substitution(chart: SigmaChart) -> Dict[str, LaurentPolynomial]:
    """Every edge as a Laurent monomial in the chart's own edge names and q."""
    out: Dict[str, LaurentPolynomial] = {}
    for p, name in chart.chart_edges.items():
        out[name] = LaurentPolynomial.variable(name)
    for name, mono in chart.eliminated.items():
        exps: Dict[str, int] = {}
        for pos, e in mono.w_exps:
            exps[chart.chart_edges[pos]] = e
        for k, e in enumerate(mono.q_exps):
            if e:
                exps[f"q{k + 1}"] = e
        out[name] = LaurentPolynomial.monomial(exps) if exps else LaurentPolynomial.constant(1)
    return out


def _u_factor(n: int, k: int, sub) -> ops.Matrix:
    size = n - k + 2
    zero = LaurentPolynomial.zero()
    m = [[zero for _ in range(size)] for _ in range(size)]
    for i in range(size):
        if i < size - 1:
            m[i][i] = sub(Edge("u", k, i).name)
        if i > 0:
            m[i][i - 1] = LaurentPolynomial.constant(1)
    return m


def _v_factor(n: int, k: int, sub) -> ops.Matrix:
    size = n - k + 2
    zero = LaurentPolynomial.zero()
    m = [[zero for _ in range(size)] for _ in range(size)]
    for i in range(size):
        m[i][i] = LaurentPolynomial.constant(-1)
        if i < size - 1:
            m[i][i + 1] = sub(Edge("v", k, i).name)
    return m


def _a_matrix(n: int, k: int, sub) -> ops.Matrix:
    """Row matrix A_k in edge symbols (A_{n+1} is the 1x1 zero matrix)."""
    if k == n + 1:
        return [[LaurentPolynomial.zero()]]
    size = n - k + 2
    zero = LaurentPolynomial.zero()
    u = [sub(Edge("u", k, j).name) for j in range(n - k + 1)]
    v = [sub(Edge("v", k, j).name) for j in range(n - k + 1)]
    m = [[zero for _ in range(size)] for _ in range(size)]
    for i in range(size):
        if i == 0:
            m[i][i] = -u[0]
        elif i < size - 1:
            m[i][i] = v[i - 1] - u[i]
        else:
            m[i][i] = v[size - 2]
        if i + 1 < size:
            m[i][i + 1] = u[i] * v[i]
            m[i + 1][i] = LaurentPolynomial.constant(-1)
    return m


def uv_factorization_exact(n: int) -> bool:
    """A_k = U_k V_k identically in the free edge symbols, for k = 1..n."""
    sub = _edge_poly
    for k in range(1, n + 1):
        lhs = _a_matrix(n, k, sub)
        rhs = ops.mat_mul(_u_factor(n, k, sub), _v_factor(n, k, sub))
        if not ops.mat_is_zero(ops.mat_sub(lhs, rhs)):
            return False
    return True


def uv_identity_check(n: int, kseq: Optional[Sequence[int]] = None) -> bool:
    """The factorisation step behind the eigenvalue equations, exactly.

    For every k: V_k U_k - lam_{k-1} I equals the bordered A_{k+1} block
    minus diag(df/dT_{k,i}, 0), as Laurent polynomials after replacing the
    eliminated edges of a chart by their monomials (so the box relations
    hold identically) and lam_n by -(lam_0 + ... + lam_{n-1}).
    """
    if n > 4:
        raise ValueError("uv_identity_check is desk scale; n <= 4")
    if not uv_factorization_exact(n):
        return False
    graph = MirrorGraph(n)
    chart = make_chart(graph, kseq if kseq is not None else tuple(
        n - i + 1 for i in range(1, n + 1)))
    table = _chart_substitution(chart)
    sub = lambda name: table[name]

    for k in range(1, n + 1):
        size = n - k + 2
        vu = ops.mat_mul(_v_factor(n, k, sub), _u_factor(n, k, sub))
        lhs = ops.mat_sub(vu, ops.mat_scalar_diag(size, _lam_poly(k - 1, n)))

        zero = LaurentPolynomial.zero()
        block = [[zero for _ in range(size)] for _ in range(size)]
        a_next = _a_matrix(n, k + 1, sub)
        lam_k = _lam_poly(k, n)
        for i in range(size - 1):
            for j in range(size - 1):
                block[i][j] = a_next[i][j] - (lam_k if i == j else zero)
        block[size - 1][size - 2] = LaurentPolynomial.constant(-1)
        block[size - 1][size - 1] = -_lam_poly(k - 1, n)

        for i in range(size - 1):
            edge_coeffs, lam_part = graph.gradient_at(k, i)
            grad = LaurentPolynomial.zero()
            for name, sign in edge_coeffs.items():
                grad = grad + sign * table[name]
            reduced = lam_part.reduce_last()
            for idx, c in enumerate(reduced.coeffs[:-1]):
                if c != 0:
                    grad = grad + LaurentPolynomial.monomial({f"lam{idx}": 1}, c)
            block[i][i] = block[i][i] - grad

        if not ops.mat_is_zero(ops.mat_sub(lhs, block)):
            return False
    return True
