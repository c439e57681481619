"""Matrix and scalar Riccati comparison machinery.

Three layers:

  - closed-form comparison envelopes for commuting coefficient pairs, built
    eigenvalue-wise and assembled through symmetric square roots so the
    results stay exactly symmetric for non-commuting boundary data;
  - an adaptive integrator for the quadratic matrix evolution driven by a
    time-dependent drift, with symmetry re-projection every step;
  - scalar tangent/rational/hyperbolic-tangent branches used by the
    entropy-bracket and Hessian-bound formulas, with explicit blow-up and
    unsupported-regime guards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .config import EXP_OVERFLOW_LIMIT, LAMBDA_BRANCH_TOL, ODE_BLOWUP_NORM
from .errors import BlowUpError, NumericsError, UnsupportedRegimeError, ValidationError
from .linalg import as_symmetric, sym_eig


# ---------------------------------------------------------------------------
# commuting coefficient pairs and their envelopes


@dataclass(frozen=True)
class CommutingPair:
    """Coefficients (A, B, gamma) for the drift primitive
    C(t) = (exp(gamma t)/gamma) A + t B, with A and B commuting."""

    a: np.ndarray
    b: np.ndarray
    gamma: float

    def __post_init__(self):
        a = as_symmetric(self.a)
        b = as_symmetric(self.b)
        if a.shape != b.shape:
            raise ValidationError("coefficient shapes differ")
        if self.gamma == 0.0:
            raise ValidationError("gamma must be nonzero")
        comm = a @ b - b @ a
        if np.max(np.abs(comm)) > 1e-10 * max(1.0, np.max(np.abs(a)) * np.max(np.abs(b))):
            raise ValidationError(f"coefficients do not commute: |[A,B]| = {np.max(np.abs(comm)):.3e}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Shared eigenbasis: returns (a_eigs, b_eigs, basis)."""
        wa, v = sym_eig(self.a)
        bd = v.T @ self.b @ v
        off = bd - np.diag(np.diag(bd))
        if np.max(np.abs(off)) > 1e-8 * max(1.0, np.max(np.abs(bd))):
            # repeated eigenvalues of A can leave B un-diagonalized; split by
            # diagonalizing B within each eigenspace of A
            wb = np.empty(self.dim)
            start = 0
            order = np.argsort(wa)
            wa = wa[order]
            v = v[:, order]
            bd = v.T @ self.b @ v
            while start < self.dim:
                end = start
                while end + 1 < self.dim and abs(wa[end + 1] - wa[start]) < 1e-10:
                    end += 1
                blk = bd[start:end + 1, start:end + 1]
                wblk, vblk = sym_eig(blk)
                v[:, start:end + 1] = v[:, start:end + 1] @ vblk
                wb[start:end + 1] = wblk
                start = end + 1
            return wa, wb, v
        return wa, np.diag(bd), v


def c_tensor(pair: CommutingPair, t: float) -> np.ndarray:
    return (math.exp(pair.gamma * t) / pair.gamma) * pair.a + t * pair.b


def _c_eigs(pair: CommutingPair, t, wa: np.ndarray, wb: np.ndarray) -> np.ndarray:
    return (np.exp(pair.gamma * t) / pair.gamma) * wa + t * wb


def exp_c(pair: CommutingPair, t: float) -> np.ndarray:
    wa, wb, v = pair.eigensystem()
    c = _c_eigs(pair, t, wa, wb)
    if np.max(c) > EXP_OVERFLOW_LIMIT:
        raise NumericsError(f"exp(C) overflow at eigenvalue {np.max(c):.3e}")
    return (v * np.exp(c)) @ v.T


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    def simp(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def rec(x0, x2, f0, f1, f2, whole, depth):
        xm = 0.5 * (x0 + x2)
        xl, xr = 0.5 * (x0 + xm), 0.5 * (xm + x2)
        fl, fr = f(xl), f(xr)
        left = simp(x0, xm, f0, fl, f1)
        right = simp(xm, x2, f1, fr, f2)
        if depth <= 0 or abs(left + right - whole) < 15.0 * tol * max(1.0, abs(left + right)):
            return left + right + (left + right - whole) / 15.0
        return (rec(x0, xm, f0, fl, f1, left, depth - 1)
                + rec(xm, x2, f1, fr, f2, right, depth - 1))

    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return rec(a, b, fa, fm, fb, simp(a, b, fa, fm, fb), 40)


def integral_e2c(pair: CommutingPair, t0: float, t1: float, shift: float | None = None) -> np.ndarray:
    """Integral of exp(2C(s) - 2C(shift)) over [t0, t1], eigenvalue-wise.

    shift defaults to t0; subtracting C at a reference time keeps exponents
    moderate and is exactly what the envelope formulas need.
    """
    if shift is None:
        shift = t0
    wa, wb, v = pair.eigensystem()
    cshift = _c_eigs(pair, shift, wa, wb)
    vals = np.empty(pair.dim)
    for i in range(pair.dim):
        def g(s, _i=i):
            expo = 2.0 * (_c_eigs(pair, s, wa, wb)[_i] - cshift[_i])
            if expo > EXP_OVERFLOW_LIMIT:
                raise NumericsError(f"exp(2C) overflow in eigendirection {_i}: exponent {expo:.3e}")
            return math.exp(expo)
        vals[i] = _adaptive_simpson(g, t0, t1, 1e-10)
    return (v * vals) @ v.T


def _exp_c_shifted(pair: CommutingPair, t: float, shift: float) -> np.ndarray:
    wa, wb, v = pair.eigensystem()
    c = _c_eigs(pair, t, wa, wb) - _c_eigs(pair, shift, wa, wb)
    if np.max(c) > EXP_OVERFLOW_LIMIT:
        raise NumericsError(f"exp(C) overflow at eigenvalue {np.max(c):.3e}")
    return (v * np.exp(c)) @ v.T


def _sqrt_psd_checked(m: np.ndarray, what: str) -> np.ndarray:
    w, v = sym_eig(m)
    if np.min(w) < -1e-12:
        raise ValidationError(f"{what} must be positive semidefinite (min eigenvalue {np.min(w):.3e})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def lower_envelope(pair: CommutingPair, v_eps: np.ndarray, eps: float, t: float) -> np.ndarray:
    """Comparison solution from initial data: supersolutions of the quadratic
    inequality stay above this for t >= eps."""
    v_eps = as_symmetric(v_eps)
    e = _exp_c_shifted(pair, t, eps)
    s = integral_e2c(pair, eps, t, shift=eps)
    m = _sqrt_psd_checked(v_eps, "initial matrix")
    inner = np.eye(pair.dim) - m @ s @ m
    wi, vi = sym_eig(inner)
    if np.min(wi) <= 0:
        raise BlowUpError(
            f"inversion factor lost definiteness (min eigenvalue {np.min(wi):.3e})",
            blow_up_time=t,
        )
    core = (vi / wi) @ vi.T
    out = e @ m @ core @ m @ e
    return as_symmetric(out, tol=1e-6)


def upper_envelope(pair: CommutingPair, v_t: np.ndarray, t_end: float, t: float) -> np.ndarray:
    """Comparison solution from terminal data: supersolutions with this
    terminal value stay below it for t <= t_end."""
    v_t = as_symmetric(v_t)
    e = _exp_c_shifted(pair, t, t_end)
    s = integral_e2c(pair, t, t_end, shift=t_end)
    m = _sqrt_psd_checked(v_t, "terminal matrix")
    inner = np.eye(pair.dim) + m @ s @ m
    wi, vi = sym_eig(inner)
    core = (vi / wi) @ vi.T
    out = e @ m @ core @ m @ e
    return as_symmetric(out, tol=1e-6)


# ---------------------------------------------------------------------------
# adaptive integration of the driven quadratic matrix evolution


@dataclass(frozen=True)
class RiccatiState:
    times: np.ndarray
    values: list
    deriv_traces: np.ndarray
    blow_up_time: float | None = None

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def trace_integral(self) -> float:
        """Integral of tr U over the stored span, corrected with endpoint
        derivatives per interval (third-order Hermite quadrature)."""
        t = self.times
        y = np.asarray([np.trace(v) for v in self.values])
        d = self.deriv_traces
        dt = np.diff(t)
        return float(np.sum(0.5 * dt * (y[:-1] + y[1:]) + dt**2 / 12.0 * (d[:-1] - d[1:])))


# Cash-Karp embedded pair (orders 4 and 5)
_CK_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [3 / 10, -9 / 10, 6 / 5],
    [-11 / 54, 5 / 2, -70 / 27, 35 / 27],
    [1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096],
]
_CK_C = [0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8]
_CK_B5 = [37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771]
_CK_B4 = [2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4]


def rk45_symmetric(f, y0: np.ndarray, t0: float, t1: float, rtol: float = 1e-9,
                   atol: float = 1e-11, max_step: float | None = None,
                   blowup_norm: float = ODE_BLOWUP_NORM):
    """Adaptive embedded Runge-Kutta for symmetric-matrix ODEs.

    Re-symmetrizes after every accepted step.  Returns (times, values,
    deriv_traces, blow_up_time); on blow-up the partial trajectory is kept.
    """
    y = as_symmetric(np.asarray(y0, dtype=float))
    t = t0
    span = t1 - t0
    h = span / 100.0
    if max_step is not None:
        h = min(h, max_step)
    times = [t0]
    values = [y.copy()]
    dtr = [float(np.trace(f(t0, y)))]
    blow_up = None
    max_iter = 1_000_000
    it = 0
    while t < t1 - 1e-15 * max(1.0, abs(t1)) and it < max_iter:
        it += 1
        h = min(h, t1 - t)
        ks = []
        for i in range(6):
            yi = y
            for j, aij in enumerate(_CK_A[i]):
                yi = yi + h * aij * ks[j]
            ks.append(f(t + _CK_C[i] * h, yi))
        y5 = y + h * sum(b * k for b, k in zip(_CK_B5, ks))
        y4 = y + h * sum(b * k for b, k in zip(_CK_B4, ks))
        err = np.max(np.abs(y5 - y4))
        scale = atol + rtol * max(np.max(np.abs(y)), np.max(np.abs(y5)))
        if err <= scale or h <= 1e-14 * span:
            t += h
            y = 0.5 * (y5 + y5.T)
            times.append(t)
            values.append(y.copy())
            dtr.append(float(np.trace(f(t, y))))
            if np.linalg.norm(y) > blowup_norm:
                blow_up = t
                break
        # step-size update with the usual safety clamp
        if err > 0:
            factor = 0.9 * (scale / err) ** 0.2
            h *= min(5.0, max(0.2, factor))
        else:
            h *= 5.0
        if max_step is not None:
            h = min(h, max_step)
    return np.asarray(times), values, np.asarray(dtr), blow_up


def master_drift(j_t: np.ndarray, c_t: float, kappa: float, n: int, t_end: float):
    """u(t) = exp(-n kappa (T - t)) J_T + (c_T / n) Id."""
    j_t = as_symmetric(j_t)
    dim = j_t.shape[0]

    def u(t: float) -> np.ndarray:
        return math.exp(-n * kappa * (t_end - t)) * j_t + (c_t / n) * np.eye(dim)

    return u


def integrate_master_ode(j_t: np.ndarray, c_t: float, kappa: float, n: int, t_end: float,
                         boundary: tuple, rtol: float = 1e-9,
                         max_step: float | None = None) -> RiccatiState:
    """Integrate U' = (U - u(t))^2 + (n-1) kappa U over [0, T].

    boundary is ("at-0", U0) for a forward run or ("at-T", UT) for a backward
    run via time reversal.  J_T must be traceless.
    """
    j_t = as_symmetric(j_t)
    if abs(np.trace(j_t)) > 1e-8 * max(1.0, np.max(np.abs(j_t))):
        raise ValidationError(f"drift deviator must be traceless, got trace {np.trace(j_t):.3e}")
    where, u_val = boundary
    u_val = as_symmetric(np.asarray(u_val, dtype=float))
    u_of_t = master_drift(j_t, c_t, kappa, n, t_end)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        d = y - u_of_t(t)
        return d @ d + (n - 1) * kappa * y

    if where == "at-0":
        times, values, dtr, blow = rk45_symmetric(rhs, u_val, 0.0, t_end, rtol=rtol,
                                                  max_step=max_step)
        return RiccatiState(times, values, dtr, blow)
    if where == "at-T":
        def rhs_rev(s: float, y: np.ndarray) -> np.ndarray:
            return -rhs(t_end - s, y)

        times, values, dtr, blow = rk45_symmetric(rhs_rev, u_val, 0.0, t_end, rtol=rtol,
                                                  max_step=max_step)
        times = t_end - times[::-1]
        values = values[::-1]
        dtr = -dtr[::-1]
        blow_fwd = None if blow is None else t_end - blow
        return RiccatiState(times, values, dtr, blow_fwd)
    raise ValidationError(f"unknown boundary tag {where!r}")


def flat_closed_form(u0: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """Solution of U' = (U - H)^2 at time t from U(0) = U0 (constant drift)."""
    u0 = as_symmetric(u0)
    h = as_symmetric(h)
    d = u0 - h
    w, v = sym_eig(d)
    core = np.empty_like(w)
    for i, wi in enumerate(w):
        if abs(wi) < 1e-14:
            core[i] = 0.0  # null directions of U0 - H are fixed points
            continue
        denom = 1.0 / wi - t
        if abs(denom) < 1e-14:
            raise BlowUpError(
                f"closed-form solution singular at t = {t} in an eigendirection "
                f"with initial gap {wi:.6g}",
                blow_up_time=1.0 / wi,
            )
        core[i] = 1.0 / denom
    return (v * core) @ v.T + h


# ---------------------------------------------------------------------------
# scalar branches


@dataclass(frozen=True)
class ScalarRiccatiParams:
    """sigma' = sigma^2 + alpha sigma + beta with sigma(0) = c; the shifted
    variable xi = sigma + alpha/2 solves xi' = xi^2 + lam."""

    alpha: float
    beta: float
    c: float

    @property
    def lam(self) -> float:
        return self.beta - 0.25 * self.alpha**2

    @property
    def branch(self) -> str:
        if abs(self.lam) <= LAMBDA_BRANCH_TOL:
            return "zero"
        return "positive" if self.lam > 0 else "negative"

    @property
    def xi0(self) -> float:
        return self.c + 0.5 * self.alpha


def scalar_xi(params: ScalarRiccatiParams, t: float) -> float:
    """xi at time t on the branch determined by lam's sign."""
    lam = params.lam
    xi0 = params.xi0
    branch = params.branch
    if branch == "positive":
        rt = math.sqrt(lam)
        c1 = math.atan2(xi0, rt)  # = arctan(xi0 / rt), principal
        arg = rt * t + c1
        if abs(arg) >= 0.5 * math.pi:
            blow = (0.5 * math.pi - c1) / rt
            raise BlowUpError(
                f"tangent branch past its pole; finite-time blow-up at t = {blow:.6g}",
                blow_up_time=blow,
            )
        return rt * math.tan(arg)
    if branch == "zero":
        if abs(xi0) < 1e-300:
            return 0.0  # equilibrium of the critically-damped branch
        c2 = -1.0 / xi0
        pole = -c2
        # the solution through t = 0 lives on the side of the pole containing 0
        if (pole > 0 and t >= pole) or (pole < 0 and t <= pole):
            raise BlowUpError(
                f"rational branch blow-up at t = {pole:.6g}", blow_up_time=pole,
            )
        return -1.0 / (t + c2)
    rt = math.sqrt(-lam)
    ratio = -xi0 / rt
    if abs(abs(ratio) - 1.0) <= 1e-12:
        return xi0  # constant equilibrium xi = +-sqrt(-lam)
    if abs(ratio) > 1.0:
        raise UnsupportedRegimeError(
            "initial value outside the bounded hyperbolic branch (coth regime)"
        )
    c3 = math.atanh(ratio)
    return -rt * math.tanh(rt * t + c3)


def scalar_sigma(params: ScalarRiccatiParams, t: float) -> float:
    return scalar_xi(params, t) - 0.5 * params.alpha


def xi_integral(lam: float, xi0: float, t_span: float) -> float:
    """Integral of xi over [0, t_span] with xi(0) = xi0, by antiderivative.

    Positive-lam branch: log(cos(a)/cos(rt*t + a)); zero: log(a/(t + a)) with
    a = -1/xi0; negative: log(cosh(a)/cosh(rt*t + a)).  t_span may be
    negative, which evaluates the time-reversed (terminal-anchored) form.
    """
    if abs(lam) <= LAMBDA_BRANCH_TOL:
        if abs(xi0) < 1e-300:
            return 0.0
        a = -1.0 / xi0
        ratio = a / (t_span + a)
        if ratio <= 0.0:
            raise BlowUpError("rational branch crosses its pole inside the span",
                              blow_up_time=-a)
        return math.log(ratio)
    if lam > 0:
        rt = math.sqrt(lam)
        a = math.atan2(xi0, rt)
        end = rt * t_span + a
        if abs(end) >= 0.5 * math.pi or abs(a) >= 0.5 * math.pi:
            raise BlowUpError("tangent branch crosses its pole inside the span",
                              blow_up_time=(0.5 * math.pi - a) / rt)
        return math.log(math.cos(a) / math.cos(end))
    rt = math.sqrt(-lam)
    ratio = -xi0 / rt
    if abs(abs(ratio) - 1.0) <= 1e-12:
        return xi0 * t_span
    if abs(ratio) > 1.0:
        raise UnsupportedRegimeError(
            "initial value outside the bounded hyperbolic branch (coth regime)"
        )
    a = math.atanh(ratio)
    return math.log(math.cosh(a) / math.cosh(rt * t_span + a))


# ---------------------------------------------------------------------------
# Hessian-trace bound for the heat semigroup (nonpositive curvature)


def hamilton_bound(kappa: float, n: int, t_end: float, ratio: float):
    """Upper bound on -Delta log P_T f at a point.

    ratio is (4 / (n^2 kappa)) * (Delta P_T f / P_T f) for kappa < 0; the
    regime ratio < 1 with kappa < 0 is surfaced as unsupported.
    """
    if kappa > 0:
        raise ValidationError("nonpositive curvature only")
    if t_end <= 0:
        raise ValidationError("need a positive time")
    if kappa == 0.0 or ratio == 1.0:
        return 1.0 / t_end
    if ratio < 1.0:
        raise UnsupportedRegimeError(
            "Laplacian ratio below 1 at negative curvature: regime not covered"
        )
    rt = 0.5 * n * abs(kappa) * math.sqrt(ratio - 1.0)
    if rt * t_end >= math.pi:
        raise NumericsError(
            "cotangent argument reached its pole; the Laplacian upper bound "
            "excludes this for admissible heat-semigroup data"
        )
    # equals (n kappa / 2)(sqrt(ratio-1) cot((n kappa T/2) sqrt(ratio-1)) - 1)
    return rt / math.tan(rt * t_end) - 0.5 * n * kappa


# ---------------------------------------------------------------------------
# entropy bracket from scalar comparisons


@dataclass(frozen=True)
class NgeBracket:
    upper: float
    lower: float
    branch: str
    corrections_upper: np.ndarray
    corrections_lower: np.ndarray


def nge_entropy_bracket(sigma: np.ndarray, kappa: float, n: int, t_end: float,
                        laplacian_ratio: float, commuted_ratio: float) -> NgeBracket:
    """Two-sided entropy bracket from one list of comparison eigenvalues.

    sigma are eigenvalues of the start-time matrix for the lower bound, or of
    the end-time (measure-averaged) matrix for the upper bound; the valid
    side is the one matching the data supplied, the other is returned for
    diagnostics.  laplacian_ratio = Delta P_T f / P_T f at the base point;
    commuted_ratio = P_T Delta f / P_T f there.

    Both sides share the affine part (T/2) * commuted_ratio - n^2 kappa T/4;
    corrections integrate the shifted scalar solution forward from sigma
    (lower) or backward to sigma (upper).
    """
    if kappa > 0:
        raise ValidationError("nonpositive curvature only")
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sigma.size != n:
        raise ValidationError(f"need {n} eigenvalues, got {sigma.size}")
    lam = kappa * laplacian_ratio - 0.25 * n**2 * kappa**2
    if abs(lam) <= LAMBDA_BRANCH_TOL:
        branch = "zero"
    else:
        branch = "positive" if lam > 0 else "negative"
    affine = 0.5 * t_end * commuted_ratio - 0.25 * n**2 * kappa * t_end

    xi0 = sigma + 0.5 * n * kappa
    corr_lower = np.asarray([xi_integral(lam, x, t_end) for x in xi0])
    # backward anchoring: integral over [0, T] of the solution ending at xi0
    # equals minus the forward integral over [-T, 0], i.e. -xi_integral(-T)
    corr_upper = np.asarray([-xi_integral(lam, x, -t_end) for x in xi0])
    lower = affine + 0.5 * float(np.sum(corr_lower))
    upper = affine + 0.5 * float(np.sum(corr_upper))
    return NgeBracket(upper, lower, branch, corr_upper, corr_lower)
