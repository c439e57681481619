"""Verification suites over the certification modules.

Each suite assembles a battery of checks, runs them (optionally on a
thread pool), and emits one report.  Every check draws from its own
generator seeded by (run seed, check tag), so results do not depend on
worker count or execution order; records are assembled in declared
order.  Aggregated records keep the worst case of their battery and the
per-case margins go to CSV artifacts.
"""

from __future__ import annotations

import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.integrate import solve_ivp

import idfi
from idfi.errors import IdfiError, NumericsError, UnsupportedRegimeError
from idfi.euclidean_improvers import (
    GNSParams,
    SmoothField,
    beckner_improved,
    dembo_bound,
    gns_improved,
    normalize_axis_width,
    product_field,
)
from idfi.linalg import random_well_conditioned, random_psd, sym_eig
from idfi.measures import (
    DiscreteProductSpace,
    GaussianSpec,
    make_gaussian,
    make_mixture,
    pushforward_linear,
)
from idfi.quadrature import gauss_hermite_grid, gauss_legendre_box
from idfi.riccati import (
    CommutingPair,
    ScalarRiccatiParams,
    hamilton_bound,
    integrate_master_ode,
    lower_envelope,
    nge_entropy_bracket,
    rk45_symmetric,
    scalar_sigma,
    upper_envelope,
    xi_integral,
)
from idfi.space_forms import SpaceForm
from idfi.space_forms.flat_fields import (
    FlatField,
    GaussComponent,
    commuted_log_hessian,
    smoothed_entropy,
    smoothed_log_derivatives,
)
from idfi.space_forms.semigroup import (
    constant_profile,
    entropy_direct,
    gaussian_bump,
    semigroup_derivatives,
    v_and_m_matrices,
)
from idfi.space_forms.stochastic import (
    endpoint_chi_square,
    lehec_entropy_estimate,
    radial_cdf,
    simulate_brownian,
    wang_residual,
)
from idfi.tensorization import calibrate_phi, tensorized_bound
from idfi.verifier.config import SuiteConfig
from idfi.verifier.report import CheckRecord, VerificationReport, eq_record, le_record

CASE_CSV_HEADER = "relation,case,lhs,rhs,margin"


def environment_info(cfg: SuiteConfig) -> dict:
    """Run environment for the report; excludes worker count and output
    location so reports are byte-comparable across those."""
    import scipy

    return {
        "package": "idfi",
        "version": idfi.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": cfg.seed,
        "tolerance_scale": cfg.tolerance_scale,
        "config": cfg.model_dump(mode="json", exclude={"jobs", "out_dir"}),
    }


def _rng(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(tag.encode())])


def _run_checks(checks, jobs: int) -> list[CheckRecord]:
    """Run (check_id, anchor, fn) triples; fn returns a record or a list.

    Unsupported regimes surface as records, any other error becomes a
    fail record and the suite continues.  Wall time of each check lands
    on its first record.
    """

    def run_one(cid, anchor, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except UnsupportedRegimeError as exc:
            out = CheckRecord(cid, anchor, "unsupported", detail=str(exc))
        except IdfiError as exc:
            out = CheckRecord(cid, anchor, "fail",
                              detail=f"{type(exc).__name__}: {exc}")
        except Exception as exc:
            out = CheckRecord(cid, anchor, "fail",
                              detail=f"{type(exc).__name__}: {exc}")
        recs = out if isinstance(out, list) else [out]
        recs[0] = replace(recs[0], seconds=round(time.perf_counter() - t0, 6))
        return recs

    if jobs > 1 and len(checks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_one, *c) for c in checks]
            nested = [f.result() for f in futures]
    else:
        nested = [run_one(*c) for c in checks]
    return [r for group in nested for r in group]


class WorstCase:
    """Battery aggregator: keeps every case margin, reports the worst."""

    def __init__(self):
        self.rows = []

    def add(self, label: str, lhs: float, rhs: float, margin: float):
        self.rows.append((label, float(lhs), float(rhs), float(margin)))

    def le(self, label: str, lhs: float, rhs: float):
        self.add(label, lhs, rhs, rhs - lhs)

    def eq(self, label: str, lhs: float, rhs: float):
        self.add(label, lhs, rhs, -abs(lhs - rhs))

    @property
    def count(self) -> int:
        return len(self.rows)

    def record(self, check_id: str, anchor: str, tolerance: float, **kw) -> CheckRecord:
        if not self.rows:
            return CheckRecord(check_id, anchor, "vacuous",
                               detail="empty battery", **kw)
        label, lhs, rhs, margin = min(self.rows, key=lambda r: r[3])
        status = "pass" if (math.isfinite(margin) and margin >= -tolerance) else "fail"
        return CheckRecord(check_id, anchor, status, lhs=lhs, rhs=rhs,
                           margin=margin, tolerance=tolerance, cases=self.count,
                           worst_case=label, **kw)

    def csv_rows(self, relation: str) -> list[str]:
        return [f"{relation},{label},{lhs!r},{rhs!r},{margin!r}"
                for label, lhs, rhs, margin in self.rows]


def _case_csv(batteries: dict[str, WorstCase]) -> str:
    lines = [CASE_CSV_HEADER]
    for relation in sorted(batteries):
        lines.extend(batteries[relation].csv_rows(relation))
    return "\n".join(lines) + "\n"


def _simpson(f, a: float, b: float, tol: float = 1e-9, max_depth: int = 18) -> float:
    """Adaptive Simpson quadrature for the scalar trace integrals."""

    def simp(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def rec(x0, x2, f0, f1, f2, whole, depth):
        xm = 0.5 * (x0 + x2)
        lm, rm = 0.5 * (x0 + xm), 0.5 * (xm + x2)
        fl, fr = f(lm), f(rm)
        left = simp(x0, xm, f0, fl, f1)
        right = simp(xm, x2, f1, fr, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(x0, xm, f0, fl, f1, left, depth + 1) + rec(
            xm, x2, f1, fr, f2, right, depth + 1)

    if b <= a:
        return 0.0
    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simp(a, b, fa, fm, fb), 0)


def _random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _random_spd(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    q = _random_orthogonal(rng, n)
    return (q * rng.uniform(lo, hi, size=n)) @ q.T


def _random_field(rng: np.random.Generator, dim: int, comps: int,
                  spread: float = 0.8) -> FlatField:
    parts = tuple(
        GaussComponent(float(rng.uniform(0.5, 1.5)),
                       spread * rng.standard_normal(dim),
                       _random_spd(rng, dim, 0.25, 1.4))
        for _ in range(comps)
    )
    return FlatField(parts)


def _isolate_cases(cases, one_case, id_prefix: str, anchor: str) -> list[CheckRecord]:
    """Run per-case work, turning a bad case into its own record so the
    rest of the battery still aggregates."""
    out = []
    for case in cases:
        try:
            one_case(case)
        except UnsupportedRegimeError as exc:
            out.append(CheckRecord(f"{id_prefix}-{case.label}", anchor,
                                   "unsupported", detail=str(exc)))
        except Exception as exc:
            out.append(CheckRecord(f"{id_prefix}-{case.label}", anchor, "fail",
                                   detail=f"{type(exc).__name__}: {exc}"))
    return out


def _logdet_checked(m: np.ndarray, what: str) -> float:
    w, _ = sym_eig(m)
    if np.min(w) <= 0.0:
        raise NumericsError(
            f"{what} log-determinant argument lost definiteness "
            f"(min eigenvalue {np.min(w):.3e}): Hamilton violation"
        )
    return float(np.sum(np.log(w)))


# ---------------------------------------------------------------------------
# suite: Euclidean functional inequalities


def _random_gaussian_spec(rng: np.random.Generator, n: int) -> GaussianSpec:
    c = rng.standard_normal((n, n))
    return GaussianSpec(rng.standard_normal(n), c @ c.T + 0.4 * np.eye(n))


def suite_part1(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    p = cfg.part1
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}

    def gaussian_saturation():
        rng = _rng(cfg.seed, "part1/gaussian-saturation")
        exact = WorstCase()
        quad = WorstCase()
        m_by_n = {1: cfg.quadrature_points, 2: cfg.quadrature_points,
                  3: min(cfg.quadrature_points, 28), 4: min(cfg.quadrature_points, 18)}
        for k in range(p.gaussian_cases):
            n = int(rng.integers(1, 5))
            spec = _random_gaussian_spec(rng, n)
            res = dembo_bound(make_gaussian(spec))
            if res.vacuous:
                raise NumericsError("saturation case reported a vacuous bound")
            exact.eq(f"case-{k}-n{n}", res.lhs, res.rhs)
            forced = make_mixture([make_gaussian(spec)], [1.0])
            resq = dembo_bound(forced, grid=gauss_hermite_grid(n, m_by_n[n]))
            quad.eq(f"case-{k}-n{n}", resq.lhs, resq.rhs)
        batteries["gaussian-saturation-analytic"] = exact
        batteries["gaussian-saturation-quadrature"] = quad
        return [
            exact.record("gaussian-saturation-analytic", "eq:lsi**", 1e-6 * ts,
                         estimators={"lhs": "analytic", "rhs": "analytic"}),
            quad.record("gaussian-saturation-quadrature", "eq:lsi**", 1e-3 * ts,
                        estimators={"lhs": "quadrature", "rhs": "quadrature"}),
        ]

    def gl_invariance():
        rng = _rng(cfg.seed, "part1/gl-invariance")
        bases = [
            make_mixture([make_gaussian(GaussianSpec(np.array([0.9]), np.array([[0.6]]))),
                          make_gaussian(GaussianSpec(np.array([-0.7]), np.array([[1.1]])))],
                         [0.5, 0.5]),
            make_mixture([make_gaussian(GaussianSpec(np.array([0.8, -0.2]), 0.8 * np.eye(2))),
                          make_gaussian(GaussianSpec(np.array([-0.6, 0.4]), np.diag([1.2, 0.6])))],
                         [0.45, 0.55]),
        ]
        deficits = [dembo_bound(b).margin for b in bases]
        agg = WorstCase()
        for k in range(p.invariance_cases):
            j = k % len(bases)
            a = random_well_conditioned(rng, bases[j].dim, cond_max=4.0)
            res = dembo_bound(pushforward_linear(bases[j], a))
            agg.eq(f"map-{k}-d{bases[j].dim}", res.margin, deficits[j])
        batteries["gl-invariance"] = agg
        return agg.record("gl-invariance", "eq:lsi**", 1e-6 * ts,
                          estimators={"lhs": "quadrature", "rhs": "quadrature"})

    def ordering_chain():
        rng = _rng(cfg.seed, "part1/ordering-chain")
        hadamard = WorstCase()
        amgm = WorstCase()
        for k in range(p.psd_cases):
            n = int(rng.integers(1, 7))
            if rng.uniform() < 0.3:
                m = random_well_conditioned(rng, n, cond_max=50.0)
                m = m @ m.T
            else:
                m = random_psd(rng, n) + float(10.0 ** rng.uniform(-3, 0)) * np.eye(n)
            w, _ = sym_eig(m)
            logdet = float(np.sum(np.log(w)))
            diag_sum = float(np.sum(np.log(np.diag(m))))
            trace_form = n * math.log(float(np.trace(m)) / n)
            hadamard.le(f"case-{k}-n{n}", 0.5 * logdet, 0.5 * diag_sum)
            amgm.le(f"case-{k}-n{n}", 0.5 * diag_sum, 0.5 * trace_form)
        batteries["ordering-hadamard"] = hadamard
        batteries["ordering-amgm"] = amgm
        return [
            hadamard.record("ordering-hadamard", "eq:lsi-diag", 1e-10 * ts,
                            estimators={"lhs": "analytic", "rhs": "analytic"}),
            amgm.record("ordering-amgm", "eq:lsi_dim", 1e-10 * ts,
                        estimators={"lhs": "analytic", "rhs": "analytic"}),
        ]

    def _bump(widths):
        widths = np.asarray(widths, dtype=float)
        n = widths.size

        def value(pts):
            pts = np.atleast_2d(pts)
            return np.exp(-0.5 * np.sum((pts / widths) ** 2, axis=1))

        def grad(pts):
            pts = np.atleast_2d(pts)
            return value(pts)[:, None] * (-pts / widths**2)

        return SmoothField(n, value, grad, box=([-6.0] * n, [6.0] * n))

    def gns_battery():
        rng = _rng(cfg.seed, "part1/gns")
        grid = gauss_legendre_box([-6.0, -6.0], [6.0, 6.0], m=50)
        params = GNSParams.from_exponents(2.0, 1.0, 2.0, 2)
        ineq = WorstCase()
        dom = WorstCase()
        for k in range(p.gns_cases):
            widths = rng.uniform(0.7, 2.5, size=2)
            res = gns_improved(_bump(widths), params, grid)
            ineq.le(f"case-{k}", res.lhs, res.rhs)
            dom.le(f"case-{k}", res.rhs, res.extras["rhs_classical"])
        iso = gns_improved(_bump([1.3, 1.3]), params, grid)
        isotropy = WorstCase()
        isotropy.eq("isotropic", iso.rhs, iso.extras["rhs_classical"])
        batteries["gns-inequality"] = ineq
        batteries["gns-amgm-domination"] = dom
        return [
            ineq.record("gns-inequality", "thm:gns", 1e-4 * ts,
                        estimators={"lhs": "quadrature", "rhs": "quadrature"}),
            dom.record("gns-amgm-domination", "eq:gns*", 1e-8 * ts,
                       estimators={"lhs": "quadrature", "rhs": "quadrature"}),
            isotropy.record("gns-isotropy-equality", "eq:gns*", 1e-8 * ts,
                            estimators={"lhs": "quadrature", "rhs": "quadrature"}),
        ]

    def beckner_battery():
        rng = _rng(cfg.seed, "part1/beckner")
        grid = gauss_hermite_grid(1, m=max(cfg.quadrature_points, 60))
        draws = [(float(rng.uniform(0.03, 0.12) * rng.choice([-1.0, 1.0])),
                  float(rng.uniform(0.02, 0.08) * rng.choice([-1.0, 1.0])))
                 for _ in range(p.beckner_cases)]

        def field(a, b):
            h = lambda x: (1.0 + a * (x**3 - 3.0 * x) / math.sqrt(6.0)
                           + b * (x**4 - 6.0 * x**2 + 3.0) / math.sqrt(24.0))
            dh = lambda x: (a * (3.0 * x**2 - 3.0) / math.sqrt(6.0)
                            + b * (4.0 * x**3 - 12.0 * x) / math.sqrt(24.0))
            return product_field([normalize_axis_width(h, dh)])

        out = []
        dom = WorstCase()
        for pv in (1.0, 1.5, 1.9):
            ineq = WorstCase()
            for k, (a, b) in enumerate(draws):
                res = beckner_improved(field(a, b), pv, grid)
                ineq.le(f"case-{k}", res.lhs, res.rhs)
                dom.le(f"p{pv}-case-{k}", res.rhs, res.extras["rhs_trace"])
            batteries[f"beckner-inequality-p{pv}"] = ineq
            out.append(ineq.record(f"beckner-inequality-p{pv}", "eq:dt*", 1e-8 * ts,
                                   estimators={"lhs": "quadrature", "rhs": "quadrature"}))
        batteries["beckner-trace-domination"] = dom
        out.append(dom.record("beckner-trace-domination", "eq:dt", 1e-10 * ts,
                              estimators={"lhs": "quadrature", "rhs": "quadrature"}))
        const = SmoothField(2, lambda q: np.ones(np.atleast_2d(q).shape[0]),
                            lambda q: np.zeros_like(np.atleast_2d(q)))
        resc = beckner_improved(const, 1.5)
        cc = WorstCase()
        cc.add("constant", resc.lhs, resc.rhs,
               -max(abs(resc.lhs), abs(resc.rhs)))
        out.append(cc.record("beckner-constant-zero", "lem:beckner", 1e-10 * ts,
                             estimators={"lhs": "quadrature", "rhs": "quadrature"}))
        return out

    records = _run_checks([
        ("gaussian-saturation", "eq:lsi**", gaussian_saturation),
        ("gl-invariance", "eq:lsi**", gl_invariance),
        ("ordering-chain", "eq:lsi-diag", ordering_chain),
        ("gns", "thm:gns", gns_battery),
        ("beckner", "eq:dt*", beckner_battery),
    ], cfg.jobs)
    artifacts = {"part1_cases.csv": _case_csv(batteries)}
    return VerificationReport("part1", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: discrete product tensorization


def suite_tensorization(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    par = cfg.tensorization
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}
    base = DiscreteProductSpace(2, 1, np.array([0.5, 0.5]))
    phis = {pv: calibrate_phi(pv, base) for pv in (1.0, 2.0)}

    def chain_battery():
        rng = _rng(cfg.seed, "tensorization/chain")
        lhs_chain = WorstCase()
        mean_chain = WorstCase()
        for dim in par.dims:
            sp = DiscreteProductSpace(2, dim, np.array([0.5, 0.5]))
            for k in range(par.functions_per_dim):
                pv = (1.0, 2.0)[k % 2]
                fv = np.exp(rng.standard_normal(sp.n_states))

                def f(states, _fv=fv, _n=dim):
                    idx = np.zeros(states.shape[0], dtype=int)
                    for i in range(_n):
                        idx = idx * 2 + states[:, i]
                    return _fv[idx]

                res = tensorized_bound(f, phis[pv], pv, sp)
                label = f"dim{dim}-case-{k}-p{pv}"
                lhs_chain.le(label, res.lhs, res.rhs_intrinsic)
                mean_chain.le(label, res.rhs_intrinsic, res.rhs_mean)
        batteries["tensorization-entropy"] = lhs_chain
        batteries["tensorization-mean"] = mean_chain
        return [
            lhs_chain.record("tensorization-entropy", "thm:tensor", 1e-9 * ts,
                             estimators={"lhs": "analytic", "rhs": "analytic"}),
            mean_chain.record("tensorization-mean", "eq:into_PS", 1e-9 * ts,
                              estimators={"lhs": "analytic", "rhs": "analytic"}),
        ]

    def factor_two():
        dim = max(par.dims)
        sp = DiscreteProductSpace(2, dim, np.array([0.5, 0.5]))

        def f(states):
            return np.where(states[:, 0] == 0, 1.0, math.exp(-20.0))

        res = tensorized_bound(f, phis[1.0], 1.0, sp)
        agg = WorstCase()
        agg.le(f"single-coordinate-dim{dim}", 2.0,
               res.rhs_mean / res.rhs_intrinsic)
        agg.le(f"entropy-holds-dim{dim}", res.lhs, res.rhs_intrinsic)
        batteries["tensorization-factor2"] = agg
        return agg.record("tensorization-factor2", "thm:tensor-intro", 1e-9 * ts,
                          estimators={"lhs": "analytic", "rhs": "analytic"})

    records = _run_checks([
        ("tensorization-chain", "thm:tensor", chain_battery),
        ("tensorization-factor2", "thm:tensor-intro", factor_two),
    ], cfg.jobs)
    artifacts = {"tensorization_cases.csv": _case_csv(batteries)}
    return VerificationReport("tensorization", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: matrix and scalar comparison solutions


def _bernoulli_rhs(pair: CommutingPair):
    def f(t, v):
        cp = math.exp(pair.gamma * t) * pair.a + pair.b
        return v @ v + cp @ v + v @ cp

    return f


def suite_riccati_core(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    par = cfg.riccati_core
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}

    def envelope_battery():
        rng = _rng(cfg.seed, "riccati/envelopes")
        low = WorstCase()
        high = WorstCase()
        eps, t_end = 0.05, 0.5
        showcase = []
        for k in range(par.pair_cases):
            n = int(rng.integers(2, par.max_dim + 1))
            q = _random_orthogonal(rng, n)
            a = (q * rng.uniform(-0.6, 0.6, size=n)) @ q.T
            beta = float(rng.uniform(-0.3, 0.3))
            gamma = float(rng.uniform(0.3, 1.2) * rng.choice([-1.0, 1.0]))
            pair = CommutingPair(a, beta * np.eye(n), gamma)
            v_eps = (q * rng.uniform(0.05, 0.6, size=n)) @ q.T
            f = _bernoulli_rhs(pair)
            for t in (0.2, 0.35, t_end):
                _, values, _, blow = rk45_symmetric(f, v_eps, eps, t)
                if blow is not None:
                    raise NumericsError("reference integration blew up")
                diff = float(np.max(np.abs(lower_envelope(pair, v_eps, eps, t)
                                           - values[-1])))
                low.add(f"case-{k}-n{n}-t{t}", diff, 0.0, -diff)
            _, values, _, _ = rk45_symmetric(f, v_eps, eps, t_end)
            v_term = values[-1]
            for t in (0.1, 0.3, 0.45):
                _, vals_t, _, _ = rk45_symmetric(f, v_eps, eps, t)
                diff = float(np.max(np.abs(upper_envelope(pair, v_term, t_end, t)
                                           - vals_t[-1])))
                high.add(f"case-{k}-n{n}-t{t}", diff, 0.0, -diff)
            if k == 0:
                for t in np.linspace(eps, t_end, 19):
                    _, vt, _, _ = rk45_symmetric(f, v_eps, eps, float(t))
                    showcase.append(
                        f"showcase,{t!r},{float(np.trace(lower_envelope(pair, v_eps, eps, float(t))))!r},"
                        f"{float(np.trace(vt[-1]))!r},"
                        f"{float(np.trace(upper_envelope(pair, v_term, t_end, float(t))))!r}"
                    )
        batteries["riccati-envelope-lower"] = low
        batteries["riccati-envelope-upper"] = high
        artifacts["riccati_showcase.csv"] = (
            "label,t,trace_lower,trace_exact,trace_upper\n" + "\n".join(showcase) + "\n")
        return [
            low.record("riccati-envelope-lower", "lem:bernoulli", 1e-6 * ts,
                       estimators={"lhs": "analytic", "rhs": "ode"},
                       detail="inversion factor stayed definite in every case"),
            high.record("riccati-envelope-upper", "lem:bernoulli", 1e-6 * ts,
                        estimators={"lhs": "analytic", "rhs": "ode"}),
        ]

    def _scalar_draws(rng, branch, count):
        out = []
        while len(out) < count:
            alpha = float(rng.uniform(-2.0, 2.0))
            if branch == "positive":
                beta = float(rng.uniform(0.2, 2.0)) + 0.25 * alpha**2
                c = float(rng.uniform(-1.5, 1.5))
            elif branch == "zero":
                beta = 0.25 * alpha**2
                c = float(rng.uniform(-1.5, 1.5))
            else:
                lam = -float(rng.uniform(0.2, 2.0))
                beta = lam + 0.25 * alpha**2
                c = float(rng.uniform(-0.9, 0.9)) * math.sqrt(-lam) - 0.5 * alpha
            params = ScalarRiccatiParams(alpha, beta, c)
            if params.branch != branch:
                continue
            lam, xi0 = params.lam, params.xi0
            if branch == "positive":
                horizon = (0.5 * math.pi - math.atan2(xi0, math.sqrt(lam))) / math.sqrt(lam)
                t = 0.8 * min(horizon, 1.2)
            elif branch == "zero":
                t = 1.0 if xi0 <= 0 else min(1.0, 0.8 / xi0)
            else:
                t = 1.0
            if t > 1e-3:
                out.append((params, t))
        return out

    def scalar_branch(branch):
        def run():
            rng = _rng(cfg.seed, f"riccati/scalar-{branch}")
            sol = WorstCase()
            integ = WorstCase()
            for k, (params, t) in enumerate(_scalar_draws(rng, branch, par.scalar_draws)):
                def rhs(_, y, p=params):
                    s = y[0]
                    ds = s * s + p.alpha * s + p.beta
                    return [ds, s + 0.5 * p.alpha]

                ivp = solve_ivp(rhs, (0.0, t), [params.c, 0.0], method="RK45",
                                rtol=1e-11, atol=1e-13, dense_output=False)
                if not ivp.success:
                    raise NumericsError(f"reference integration failed: {ivp.message}")
                sol.eq(f"{branch}-{k}", scalar_sigma(params, t), float(ivp.y[0, -1]))
                integ.eq(f"{branch}-{k}", xi_integral(params.lam, params.xi0, t),
                         float(ivp.y[1, -1]))
            batteries[f"riccati-scalar-{branch}"] = sol
            batteries[f"riccati-xi-integral-{branch}"] = integ
            return [
                sol.record(f"riccati-scalar-{branch}", "eq:xi", 1e-8 * ts,
                           estimators={"lhs": "analytic", "rhs": "ode"}),
                integ.record(f"riccati-xi-integral-{branch}", "eq:xi", 1e-8 * ts,
                             estimators={"lhs": "analytic", "rhs": "ode"}),
            ]

        return run

    artifacts: dict[str, str] = {}
    records = _run_checks([
        ("riccati-envelopes", "lem:bernoulli", envelope_battery),
        ("riccati-scalar-positive", "eq:xi", scalar_branch("positive")),
        ("riccati-scalar-zero", "eq:xi", scalar_branch("zero")),
        ("riccati-scalar-negative", "eq:xi", scalar_branch("negative")),
    ], cfg.jobs)
    artifacts["riccati_cases.csv"] = _case_csv(batteries)
    return VerificationReport("riccati_core", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: two-sided smoothed-entropy bounds on flat space


def suite_flat_local_lsi(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}
    relations = ("sandwich-upper", "sandwich-lower", "dominates-upper", "dominates-lower")
    anchors = {
        "sandwich-upper": "eq:intrinisc_lsi_dim",
        "sandwich-lower": "eq:intrinisc_lsi_dim_reverse",
        "dominates-upper": "eq:local_lsi_dim",
        "dominates-lower": "eq:local_lsi_dim_reverse",
    }
    for rel in relations:
        for kind in ("analytic", "quadrature"):
            batteries[f"flat-{rel}-{kind}"] = WorstCase()

    def one_case(case):
        rng = _rng(cfg.seed, f"flat-lsi/{case.label}")
        field = _random_field(rng, case.dim, case.components)
        x0 = 0.3 * rng.standard_normal(case.dim)
        horizon = case.horizon
        n = case.dim
        ent = smoothed_entropy(field, horizon, x0)
        kmat = commuted_log_hessian(field, horizon, x0)
        _, _, hlog = smoothed_log_derivatives(field, horizon, x0)
        ev = field.evolve(horizon)
        c = float(np.trace(ev.hess(x0))) / float(ev.value(x0))
        drift = 0.5 * horizon * c
        up_int = drift + 0.5 * _logdet_checked(
            np.eye(n) - horizon * kmat, "upper bound")
        lo_int = drift - 0.5 * _logdet_checked(
            np.eye(n) + horizon * hlog, "lower bound")
        tr_k = float(np.trace(kmat))
        tr_h = float(np.trace(hlog))
        arg_up = 1.0 - (horizon / n) * tr_k
        arg_lo = 1.0 + (horizon / n) * tr_h
        if arg_up <= 0 or arg_lo <= 0:
            raise NumericsError(
                "trace log argument lost positivity: Hamilton violation")
        up_dim = drift + 0.5 * n * math.log(arg_up)
        lo_dim = drift - 0.5 * n * math.log(arg_lo)
        kind = "analytic" if case.components == 1 else "quadrature"
        vals = {
            "sandwich-upper": (ent, up_int),
            "sandwich-lower": (lo_int, ent),
            "dominates-upper": (up_int, up_dim),
            "dominates-lower": (lo_dim, lo_int),
        }
        for rel, (lhs, rhs) in vals.items():
            batteries[f"flat-{rel}-{kind}"].le(case.label, lhs, rhs)
        return kind

    def run_battery():
        case_errors = _isolate_cases(cfg.flat_local_lsi.cases, one_case,
                                     "flat-case", "thm:flat")
        out = []
        for rel in relations:
            for kind, tol in (("analytic", 1e-6), ("quadrature", 1e-4)):
                agg = batteries[f"flat-{rel}-{kind}"]
                out.append(agg.record(
                    f"flat-{rel}-{kind}", anchors[rel], tol * ts,
                    estimators={"lhs": "quadrature", "rhs": "analytic"}))
        return out + case_errors

    def constant_zero():
        n = 2
        field = FlatField.single(np.zeros(n), np.zeros((n, n)), weight=2.5)
        horizon = cfg.horizon
        x0 = np.array([0.3, -0.1])
        ent = smoothed_entropy(field, horizon, x0)
        kmat = commuted_log_hessian(field, horizon, x0)
        _, _, hlog = smoothed_log_derivatives(field, horizon, x0)
        worst = max(abs(ent), float(np.max(np.abs(kmat))), float(np.max(np.abs(hlog))))
        agg = WorstCase()
        agg.add("constant", ent, 0.0, -worst)
        batteries["flat-constant-zero"] = agg
        return agg.record("flat-constant-zero", "thm:flat", 1e-12 * ts,
                          estimators={"lhs": "quadrature", "rhs": "analytic"})

    records = _run_checks([
        ("flat-battery", "thm:flat", run_battery),
        ("flat-constant-zero", "thm:flat", constant_zero),
    ], cfg.jobs)
    artifacts = {"flat_local_lsi_cases.csv": _case_csv(batteries)}
    return VerificationReport("flat_local_lsi", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: curved-space entropy sandwich, envelope and master routes


def _radial_case_data(case):
    space = case.space.build()
    x0 = space.origin()
    if case.profile == "constant":
        f = constant_profile(x0)
    else:
        f = gaussian_bump(x0, case.width)
    return space, x0, f


def suite_spaceform_lsi(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}
    rel_specs = [
        ("env-lower", "thm:manifolds_opt", 1e-4),
        ("env-upper", "thm:manifolds_opt", 1e-4),
        ("master-lower", "thm:manifolds_sec", 1e-4),
        ("master-upper", "thm:manifolds_sec", 1e-4),
        ("tight-lower", "prop:matrix-ineq", 1e-6),
        ("tight-upper", "prop:matrix-ineq", 1e-6),
    ]
    for rel, _, _ in rel_specs:
        batteries[f"spaceform-{rel}"] = WorstCase()
    trace_rows = ["case,route,t,trace"]

    def one_case(case):
        space, x0, f = _radial_case_data(case)
        n, kappa, horizon = space.n, space.kappa, case.horizon
        ent = entropy_direct(space, f, horizon, x0)
        bt = v_and_m_matrices(space, f, x0, horizon)
        pair = CommutingPair(-math.exp(-n * kappa * horizon) * bt.j_T,
                             (0.5 * (n - 1) * kappa - bt.c_T / n) * np.eye(n),
                             n * kappa)
        eps = 1e-6 * horizon

        def env_lo_trace(t):
            return float(np.trace(lower_envelope(pair, bt.v0, eps, t)))

        def env_up_trace(t):
            return float(np.trace(upper_envelope(pair, bt.v_T, horizon, t)))

        env_lo = 0.5 * _simpson(env_lo_trace, eps, horizon)
        env_up = 0.5 * _simpson(env_up_trace, 0.0, horizon)
        state_lo = integrate_master_ode(bt.j_T, bt.c_T, kappa, n, horizon,
                                        ("at-0", bt.v0))
        state_up = integrate_master_ode(bt.j_T, bt.c_T, kappa, n, horizon,
                                        ("at-T", bt.v_T))
        for state, label in ((state_lo, "master-lower"), (state_up, "master-upper")):
            if state.blow_up_time is not None:
                raise NumericsError(
                    f"{label} comparison integration blew up at t = {state.blow_up_time:.4g}")
        master_lo = 0.5 * state_lo.trace_integral()
        master_up = 0.5 * state_up.trace_integral()
        batteries["spaceform-env-lower"].le(case.label, env_lo, ent)
        batteries["spaceform-env-upper"].le(case.label, ent, env_up)
        batteries["spaceform-master-lower"].le(case.label, master_lo, ent)
        batteries["spaceform-master-upper"].le(case.label, ent, master_up)
        batteries["spaceform-tight-lower"].le(case.label, env_lo, master_lo)
        batteries["spaceform-tight-upper"].le(case.label, master_up, env_up)
        for t in np.linspace(eps, horizon, 33):
            trace_rows.append(f"{case.label},env-lower,{float(t)!r},{env_lo_trace(float(t))!r}")
            trace_rows.append(f"{case.label},env-upper,{float(t)!r},{env_up_trace(float(t))!r}")
        for state, route in ((state_lo, "master-lower"), (state_up, "master-upper")):
            for t, v in zip(state.times, state.values):
                trace_rows.append(f"{case.label},{route},{float(t)!r},{float(np.trace(v))!r}")

    def run_battery():
        case_errors = _isolate_cases(cfg.spaceform_lsi.cases, one_case,
                                     "spaceform-case", "thm:manifolds_sec")
        return [
            batteries[f"spaceform-{rel}"].record(
                f"spaceform-{rel}", anchor, tol * ts,
                estimators={"lhs": "ode", "rhs": "quadrature"}
                if "env" in rel or "master" in rel else {"lhs": "ode", "rhs": "ode"})
            for rel, anchor, tol in rel_specs
        ] + case_errors

    records = _run_checks([
        ("spaceform-battery", "thm:manifolds_sec", run_battery),
    ], cfg.jobs)
    artifacts = {
        "spaceform_lsi_cases.csv": _case_csv(batteries),
        "spaceform_lsi_traces.csv": "\n".join(trace_rows) + "\n",
    }
    return VerificationReport("spaceform_lsi", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: log-Hessian bounds for the heat semigroup


def suite_hamilton(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    par = cfg.hamilton
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}

    def flat_battery():
        rng = _rng(cfg.seed, "hamilton/flat")
        ham = WorstCase()
        liyau = WorstCase()
        for k in range(par.flat_cases):
            dim = int(rng.integers(1, 4))
            comps = int(rng.integers(1, 4))
            field = _random_field(rng, dim, comps)
            horizon = float(rng.uniform(0.2, 0.8))
            x = 0.5 * rng.standard_normal(dim)
            _, _, hlog = smoothed_log_derivatives(field, horizon, x)
            w, _ = sym_eig(-hlog)
            label = f"case-{k}-d{dim}m{comps}"
            ham.le(label, float(np.max(w)), 1.0 / horizon)
            liyau.le(label, float(np.sum(w)), dim / horizon)
        batteries["hamilton-flat"] = ham
        batteries["liyau-flat"] = liyau
        return [
            ham.record("hamilton-flat", "eq:Hamilton", 1e-8 * ts,
                       estimators={"lhs": "analytic", "rhs": "analytic"}),
            liyau.record("liyau-flat", "eq:Li-Yau", 1e-8 * ts,
                         estimators={"lhs": "analytic", "rhs": "analytic"}),
        ]

    def curved_battery():
        rng = _rng(cfg.seed, "hamilton/h3")
        space = SpaceForm.hyperbolic(3, -1.0)
        x0 = space.origin()
        frame = space.orthonormal_frame(x0)
        agg = WorstCase()
        out_of_regime = 0
        for k in range(par.curved_cases):
            width = float(rng.uniform(0.35, 0.6))
            horizon = float(rng.uniform(0.2, 0.5))
            dist = float(rng.uniform(0.0, 0.4))
            f = gaussian_bump(x0, width)
            x = space.exp(x0, dist * frame[:, 0])
            der = semigroup_derivatives(space, f, horizon, x)
            glog = der.grad / der.value
            m0 = np.outer(glog, glog) - der.hess / der.value
            c = float(np.trace(der.hess)) / der.value
            ratio = 4.0 * c / (space.n**2 * space.kappa)
            try:
                bound = hamilton_bound(space.kappa, space.n, horizon, ratio)
            except UnsupportedRegimeError:
                out_of_regime += 1
                continue
            w, _ = sym_eig(m0)
            agg.le(f"case-{k}-w{width:.2f}-T{horizon:.2f}-d{dist:.2f}",
                   float(np.max(w)), bound)
        batteries["hamilton-h3"] = agg
        return agg.record("hamilton-h3", "thm:Hamilton", 1e-4 * ts,
                          estimators={"lhs": "finite-difference", "rhs": "analytic"},
                          detail=f"{out_of_regime} draws fell outside the covered regime")

    def unsupported_battery():
        rng = _rng(cfg.seed, "hamilton/unsupported")
        space = SpaceForm.hyperbolic(3, -1.0)
        x0 = space.origin()
        out = []
        for k in range(par.unsupported_cases):
            horizon = float(rng.uniform(0.3, 0.5))
            f = gaussian_bump(x0, 2.0)
            der = semigroup_derivatives(space, f, horizon, x0)
            c = float(np.trace(der.hess)) / der.value
            ratio = 4.0 * c / (space.n**2 * space.kappa)
            try:
                hamilton_bound(space.kappa, space.n, horizon, ratio)
            except UnsupportedRegimeError as exc:
                out.append(CheckRecord(
                    f"hamilton-h3-unsupported-{k}", "thm:Hamilton", "unsupported",
                    lhs=ratio, detail=str(exc),
                    estimators={"lhs": "finite-difference"}))
            else:
                out.append(CheckRecord(
                    f"hamilton-h3-unsupported-{k}", "thm:Hamilton", "fail",
                    lhs=ratio,
                    detail="wide-profile draw unexpectedly fell inside the regime"))
        if not out:
            out.append(CheckRecord("hamilton-h3-unsupported", "thm:Hamilton",
                                   "vacuous", detail="empty battery"))
        return out

    records = _run_checks([
        ("hamilton-flat", "eq:Hamilton", flat_battery),
        ("hamilton-h3", "thm:Hamilton", curved_battery),
        ("hamilton-h3-unsupported", "thm:Hamilton", unsupported_battery),
    ], cfg.jobs)
    artifacts = {"hamilton_cases.csv": _case_csv(batteries)}
    return VerificationReport("hamilton", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: curved-space entropy bracket from scalar comparisons


def suite_nge_curved(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    ts = cfg.tolerance_scale
    batteries: dict[str, WorstCase] = {}
    lower_b = WorstCase()
    upper_b = WorstCase()
    const_b = WorstCase()

    def one_case(case):
        space, x0, f = _radial_case_data(case)
        n, kappa, horizon = space.n, space.kappa, case.horizon
        ent = entropy_direct(space, f, horizon, x0)
        bt = v_and_m_matrices(space, f, x0, horizon)
        sig_lo, _ = sym_eig(bt.m0)
        sig_up, _ = sym_eig(bt.m_T)
        lower = nge_entropy_bracket(sig_lo, kappa, n, horizon, bt.c_T, bt.c_T).lower
        upper = nge_entropy_bracket(sig_up, kappa, n, horizon, bt.c_T, bt.c_T).upper
        if case.profile == "constant":
            const_b.add(case.label, lower, upper,
                        -max(abs(lower), abs(upper), abs(ent)))
        lower_b.le(case.label, lower, ent)
        upper_b.le(case.label, ent, upper)

    def run_battery():
        case_errors = _isolate_cases(cfg.nge_curved.cases, one_case,
                                     "nge-case", "thm:nge_curved")
        batteries["nge-lower"] = lower_b
        batteries["nge-upper"] = upper_b
        batteries["nge-constant-zero"] = const_b
        out = [
            lower_b.record("nge-lower", "thm:nge_curved", 1e-4 * ts,
                           estimators={"lhs": "analytic", "rhs": "quadrature"}),
            upper_b.record("nge-upper", "thm:nge_curved", 1e-4 * ts,
                           estimators={"lhs": "quadrature", "rhs": "analytic"}),
        ]
        if const_b.count:
            out.append(const_b.record("nge-constant-zero", "thm:nge_curved", 1e-6 * ts,
                                      estimators={"lhs": "analytic", "rhs": "quadrature"}))
        return out + case_errors

    records = _run_checks([
        ("nge-battery", "thm:nge_curved", run_battery),
    ], cfg.jobs)
    artifacts = {"nge_curved_cases.csv": _case_csv(batteries)}
    return VerificationReport("nge_curved", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


# ---------------------------------------------------------------------------
# suite: stochastic machinery against exact laws and direct quadrature


def _stochastic_spaces() -> dict[str, SpaceForm]:
    return {
        "flat3": SpaceForm.flat(3),
        "h2": SpaceForm.hyperbolic(2, -1.0),
        "h3": SpaceForm.hyperbolic(3, -1.0),
        "s2": SpaceForm.sphere(1.0),
    }


def suite_stochastic_validation(cfg: SuiteConfig) -> VerificationReport:
    t0 = time.perf_counter()
    ts = cfg.tolerance_scale
    par = cfg.stochastic_validation
    cdf_rows = ["space,r,model_cdf,empirical_cdf"]

    def chi2_check(name, space, seed_offset):
        def run():
            x0 = space.origin()
            ens = simulate_brownian(space, x0, cfg.horizon, cfg.step_size,
                                    cfg.n_paths, cfg.seed + seed_offset)
            test = endpoint_chi_square(space, ens.endpoints, x0, cfg.horizon,
                                       n_bins=par.chi_square_bins)
            rho = np.sort(np.asarray(space.distance(x0, ens.endpoints)))
            r_grid, model = radial_cdf(space, cfg.horizon)
            for q in np.linspace(0.02, 0.98, 49):
                r = float(np.interp(q, model, r_grid))
                emp = float(np.searchsorted(rho, r) / rho.size)
                cdf_rows.append(f"{name},{r!r},{q!r},{emp!r}")
            return [
                le_record(f"chi2-{name}", "eq:def-follmer", 0.01,
                          float(test.p_value), 0.0,
                          cases=cfg.n_paths,
                          estimators={"lhs": "analytic", "rhs": "monte-carlo"},
                          detail=f"statistic {test.statistic:.2f} on {test.dof} dof"),
                le_record(f"paths-on-manifold-{name}", "eq:def-follmer",
                          float(ens.max_constraint_violation), 1e-8, 0.0,
                          cases=cfg.n_paths,
                          estimators={"lhs": "monte-carlo", "rhs": "analytic"}),
                le_record(f"frame-orthonormal-{name}", "eq:def-follmer",
                          float(ens.max_frame_drift), 1e-8, 0.0,
                          cases=cfg.n_paths,
                          estimators={"lhs": "monte-carlo", "rhs": "analytic"}),
            ]

        return run

    def lehec_check(name, space, center_dist, width, seed_offset):
        def run():
            x0 = space.origin()
            frame = space.orthonormal_frame(x0)
            center = space.exp(x0, center_dist * frame[:, 0])
            f = gaussian_bump(center, width)
            est, budget = lehec_entropy_estimate(space, f, x0, cfg.horizon,
                                                 cfg.step_size, cfg.n_paths,
                                                 cfg.seed + seed_offset)
            direct = entropy_direct(space, f, cfg.horizon, x0)
            return le_record(f"lehec-{name}", "thm:Lehec" if name == "flat3"
                             else "eq:lehec-formula",
                             abs(est - direct), 3.0 * budget, 0.0,
                             cases=cfg.n_paths,
                             estimators={"lhs": "monte-carlo", "rhs": "quadrature"},
                             std_errors={"estimate": budget},
                             detail=f"estimate {est:.6f} vs direct {direct:.6f}")

        return run

    def wang_check(name, space, center_dist, width, rhs_rule, seed_offset,
                   n_paths=None, constant=False):
        def run():
            x0 = space.origin()
            frame = space.orthonormal_frame(x0)
            center = space.exp(x0, center_dist * frame[:, 0]) if center_dist else x0
            f = constant_profile(center) if constant else gaussian_bump(center, width)
            x = space.exp(x0, 0.3 * frame[:, 0]) if name == "flat3" else x0
            horizon = 0.2
            res = wang_residual(space, f, horizon, x,
                                h=min(cfg.step_size, horizon / 100.0),
                                n_paths=n_paths or cfg.n_paths,
                                seed=cfg.seed + seed_offset)
            rhs = rhs_rule(res)
            return le_record(f"wang-{name}", "eq:wang" if name == "flat3" else "thm:wang",
                             res.residual, rhs, 0.0,
                             cases=res.n_paths,
                             estimators={"lhs": "finite-difference", "rhs": "monte-carlo"},
                             std_errors={"endpoint_mean": res.std_error})

        return run

    spaces = _stochastic_spaces()
    checks = [
        (f"chi2-{name}", "eq:def-follmer", chi2_check(name, sp, 11 + i))
        for i, (name, sp) in enumerate(spaces.items())
    ]
    checks += [
        ("lehec-flat3", "thm:Lehec", lehec_check("flat3", spaces["flat3"], 0.3, 1.0, 21)),
        ("lehec-h3", "eq:lehec-formula", lehec_check("h3", spaces["h3"], 0.35, 0.8, 22)),
        ("wang-flat3", "eq:wang",
         wang_check("flat3", spaces["flat3"], 0.0, 8.0,
                    lambda r: max(2e-4 * ts, 3.0 * (r.std_error + 1e-6)), 31)),
        ("wang-s2", "thm:wang",
         wang_check("s2", spaces["s2"], 0.35, 0.8,
                    lambda r: 3.0 * (r.std_error + 1e-6), 32)),
        ("wang-h3", "thm:wang",
         wang_check("h3", spaces["h3"], 0.35, 0.8,
                    lambda r: 3.0 * (r.std_error + 1e-6), 33)),
        ("wang-h3-constant", "thm:wang",
         wang_check("h3-constant", spaces["h3"], 0.0, 1.0, lambda r: 1e-8 * ts, 34,
                    n_paths=min(cfg.n_paths, 2000), constant=True)),
    ]
    records = _run_checks(checks, cfg.jobs)
    artifacts = {"stochastic_radial_cdf.csv": "\n".join(cdf_rows) + "\n"}
    return VerificationReport("stochastic_validation", records, environment_info(cfg),
                              wall_time_s=time.perf_counter() - t0,
                              artifacts=artifacts)


SUITES = {
    "part1": suite_part1,
    "tensorization": suite_tensorization,
    "riccati_core": suite_riccati_core,
    "flat_local_lsi": suite_flat_local_lsi,
    "spaceform_lsi": suite_spaceform_lsi,
    "hamilton": suite_hamilton,
    "nge_curved": suite_nge_curved,
    "stochastic_validation": suite_stochastic_validation,
}
