"""Numerical checks of the subsolution inequalities and the second-moment bounds.

The central object is the operator

    G[W](t, x) = W_t + b W_x - |sigma W_x|^2 / 2 + (eps / 2) sigma^2 W_xx,

applied to the shrunk subsolution ``(1 - eta) U`` and penalised by the control
mismatch, ``G[W, U] = G[W] - |sigma (W_x - U_x)|^2 / 2``. The region checks
evaluate it on grids and compare with the closed-form lower bounds; the
theorem bounds combine the value of the subsolution at the start point with
the integrated negative parts of those lower bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import HypothesisViolation, LemmaViolation
from .model import EscapeProblem
from .subsolution import Derivs, SchemeParams, Subsolution, a_M, f1, f1_bar

__all__ = [
    "AnalysisParams", "g_eps", "gamma1", "gamma2", "fd_steps", "g_eps_pair", "beta0", "fd_derivs", "RegionResult",
    "RegionReport", "check_region_lemmas", "certify_region_lemmas", "r_term",
    "j_integrals", "r_integral", "nonlinear_constants", "eta0", "eps0",
    "TheoremBound", "theorem_bound", "value_lower_bound", "decay_rate",
    "theorem_hypotheses", "min_xhat_for_theorem",
]


@dataclass(frozen=True)
class AnalysisParams:
    """Analysis-only knobs; ``eta`` never enters the simulation."""

    eta: float = 0.25
    nt: int = 201
    nx: int = 201
    slack: float = 1e-6
    hx: float | None = None
    ht: float | None = None


# --- operators -------------------------------------------------------------------

def _coeffs(x, problem: EscapeProblem, linearized: bool):
    if linearized:
        return -problem.c * (x - problem.x0), np.full(np.shape(x), problem.sbar)
    m = problem.model
    return m.b(x), m.sigma(x)


def g_eps(W: Derivs, x, eps: float, problem: EscapeProblem, linearized: bool = False):
    """Operator ``G[W]`` from precomputed derivatives of ``W`` at ``(t, x)``.

    ``linearized=True`` uses the Gauss-Markov coefficients ``-c (x - x0)`` and
    ``sbar`` instead of the model's ``b`` and ``sigma``.
    """
    b, s = _coeffs(np.asarray(x, float), problem, linearized)
    return W.dt + b * W.dx - 0.5 * (s * W.dx) ** 2 + 0.5 * eps * s ** 2 * W.dxx


def g_eps_pair(W: Derivs, U: Derivs, x, eps: float, problem: EscapeProblem,
               linearized: bool = False):
    """``G[W, U] = G[W] - |sigma (W_x - U_x)|^2 / 2``."""
    _, s = _coeffs(np.asarray(x, float), problem, linearized)
    return g_eps(W, x, eps, problem, linearized) - 0.5 * (s * (W.dx - U.dx)) ** 2


def fd_derivs(f: Callable, t, x, ht: float, hx: float) -> Derivs:
    """Central finite-difference derivatives of a scalar field ``f(t, x)``."""
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    v = f(t, x)
    vp, vm = f(t, x + hx), f(t, x - hx)
    return Derivs(v, (f(t + ht, x) - f(t - ht, x)) / (2 * ht), (vp - vm) / (2 * hx),
                  (vp - 2 * v + vm) / hx ** 2)


def beta0(sub: Subsolution, t, x, linearized: bool | None = None):
    """Jensen gap ``sigma^2 (sum rho |DF_i|^2 - |sum rho DF_i|^2)`` of the piece gradients."""
    if linearized is None:
        linearized = sub.kind == "mollified-linear"
    ps = sub.pieces(t, x)
    _, rho = sub.evaluate(t, x)
    g = np.stack([p.dx for p in ps])
    _, s = _coeffs(np.asarray(x, float), sub.problem, linearized)
    mean = np.sum(rho * g, axis=0)
    return s ** 2 * np.maximum(np.sum(rho * g * g, axis=0) - mean ** 2, 0.0)


def gamma1(eps: float, c: float) -> float:
    """``G[F1] = -eps c`` for the Gauss-Markov operator."""
    return -eps * c


def gamma2(t, p: SchemeParams):
    """``G[F2] = eps sbar^2 a(t)`` for the Gauss-Markov operator."""
    return p.eps * p.sbar ** 2 * a_M(t, p.c, p.sbar, p.M, p.T)


def fd_steps(problem: EscapeProblem, T: float, analysis: "AnalysisParams"):
    """Finite-difference steps, defaulting to ``1e-5`` of the domain width and of ``T``."""
    lo, hi = _domain_window(problem)
    hx = 1e-5 * (hi - lo) if analysis.hx is None else analysis.hx
    ht = 1e-5 * T if analysis.ht is None else analysis.ht
    return hx, ht


def _shrunk_pair(sub: Subsolution, t, x, eta: float, eps: float, linearized: bool):
    # G[(1 - eta) U, U] on the mollified family (before the handoff)
    U, _ = sub.evaluate(t, x)
    W = Derivs(*((1.0 - eta) * np.asarray(a) for a in U))
    return g_eps_pair(W, U, x, eps, sub.problem, linearized)


# --- approximation error terms -----------------------------------------------------

def r_term(t, p: SchemeParams, z: float | None = None):
    """Bound on the linearisation error of the LQR piece at time ``t``.

    ``z`` overrides the inner half-width derived from ``p``.
    """
    z = p.z if z is None else z
    # a_M(t) exp(c (T - t)) in a form that does not overflow for long horizons
    e1 = np.exp(p.c * (np.asarray(t, float) - p.T))
    den = 2.0 * p.c / p.M + p.sbar ** 2 * (1.0 - e1 * e1)
    a = p.c * e1 * e1 / den
    w = a * z + p.xhat * p.c * e1 / den
    return w * z ** 2 + w ** 2 * z + a * p.eps * z


def j_integrals(c: float, sbar: float, M: float, T: float, t_star: float):
    """Closed forms ``(J1, J2, J3, J4)`` with ``int_0^{T-t*} r = J1 z^3 + J2 z^2 xhat + J3 z xhat^2 + J4 eps z``."""
    s2 = sbar ** 2
    K = 2.0 * c / M + s2
    vT = K - s2 * np.exp(-2.0 * c * T)
    vs = K - s2 * np.exp(-2.0 * c * t_star)
    lg = np.log(vT / vs)
    q = sbar / np.sqrt(K)
    pT, ps = np.exp(-c * T), np.exp(-c * t_star)
    J1 = (1.0 / (2 * s2)) * (1.0 - c / s2) * lg + c / (2 * s2 * s2) * (K / vs - K / vT)
    J2 = ((1.0 - c / s2) / (sbar * np.sqrt(K)) * (np.arctanh(q * ps) - np.arctanh(q * pT))
          + (c / s2) * (ps / vs - pT / vT))
    J3 = c / (2 * s2) * (1.0 / vs - 1.0 / vT)
    J4 = lg / (2 * s2)
    return J1, J2, J3, J4


def r_integral(p: SchemeParams, method: str = "closed") -> float:
    """``int_0^{T - t*} r dt`` by the closed form or by adaptive quadrature."""
    if p.T <= p.tstar:
        return 0.0
    if method == "closed":
        J1, J2, J3, J4 = j_integrals(p.c, p.sbar, p.M, p.T, p.tstar)
        return float(J1 * p.z ** 3 + J2 * p.z ** 2 * p.xhat + J3 * p.z * p.xhat ** 2
                     + J4 * p.eps * p.z)
    if method == "quad":
        # integrate in s = T - t, where the integrand decays like exp(-c s)
        f = lambda s: float(r_term(p.T - s, p))
        val, _ = integrate.quad(f, p.tstar, p.T, epsabs=1e-14, epsrel=1e-12, limit=500)
        return val
    raise ValueError(method)


@dataclass(frozen=True)
class NonlinearConstants:
    """Grid suprema over the domain: ``C0``, ``C1``, ``c_star``, ``sigma_star2``."""

    C0: float
    C1: float
    c_star: float
    sigma_star2: float


def _domain_window(problem: EscapeProblem):
    d, x0 = problem.domain, problem.x0
    lo = d.lower if d.two else x0 - (d.upper - x0)
    return lo, d.upper


def nonlinear_constants(problem: EscapeProblem, n: int = 10_001) -> NonlinearConstants:
    """``C0 = sup |R1|/y^2 + |R2| |2 sbar + R2| / |y|``, ``c* = sup sigma^2 |D(b/sigma^2)|``.

    ``R1 = b(x) + c y`` and ``R2 = sigma(x) - sbar`` with ``y = x - x0``;
    ``C1 = sup |F1bar - F1| / |y|^3``. The suprema are taken on a grid and
    refined once around the maximiser.
    """
    m, c, sb = problem.model, problem.c, problem.sbar
    lo, hi = _domain_window(problem)

    def c0_fn(x):
        y = x - problem.x0
        r1 = m.b(x) + c * y
        r2 = m.sigma(x) - sb
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.abs(r1) / y ** 2 + np.abs(r2) * np.abs(2 * sb + r2) / np.abs(y)
        return np.where(np.abs(y) < 1e-9 * (hi - lo), 0.0, out)

    def cs_fn(x):
        return m.sigma(x) ** 2 * np.abs(m.d_b_over_s2(x))

    def c1_fn(x):
        y = x - problem.x0
        gap = np.abs(f1_bar(x, problem).v - f1(x, problem).v)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = gap / np.abs(y) ** 3
        return np.where(np.abs(y) < 1e-3 * (hi - lo), 0.0, out)

    return NonlinearConstants(_grid_sup(c0_fn, lo, hi, n), _grid_sup(c1_fn, lo, hi, n),
                              _grid_sup(cs_fn, lo, hi, n),
                              _grid_sup(lambda x: m.sigma(x) ** 2, lo, hi, n))


def _grid_sup(f, lo, hi, n):
    x = np.linspace(lo, hi, n)
    v = f(x)
    i = int(np.nanargmax(v))
    h = x[1] - x[0]
    xf = np.linspace(max(lo, x[i] - h), min(hi, x[i] + h), 201)
    return float(max(np.nanmax(v), np.nanmax(f(xf))))


def eta0(eps: float, problem: EscapeProblem, H: float, n: int = 10_001) -> float:
    """``sup`` over ``H <= |x - x0|`` of ``-eps s^2 D(b/s^2) / (-eps s^2 D(b/s^2) + b^2/s^2)``.

    Returns ``inf`` where the denominator is not positive and ``nan`` when the
    outer region is empty.
    """
    m, x0 = problem.model, problem.x0
    lo, hi = _domain_window(problem)
    parts = []
    if x0 + H <= hi:
        parts.append(np.linspace(x0 + H, hi, n))
    if x0 - H >= lo:
        parts.append(np.linspace(lo, x0 - H, n))
    if not parts:
        return float("nan")
    x = np.concatenate(parts)
    s2 = m.sigma(x) ** 2
    num = -eps * s2 * m.d_b_over_s2(x)
    den = num + m.b(x) ** 2 / s2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, np.inf)
    return float(np.max(ratio))


def eps0(problem: EscapeProblem, H: float, target: float = 0.25) -> float:
    """Largest ``eps`` with ``eta0(eps) <= target``, by bracketing root search."""
    f = lambda e: eta0(e, problem, H) - target
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e6:
            return float("inf")
    return float(optimize.brentq(f, 1e-12, hi, xtol=1e-14))


# --- region checks -----------------------------------------------------------------

@dataclass
class RegionResult:
    name: str
    worst_margin: float
    t: float
    x: float
    points: int

    def ok(self, slack: float) -> bool:
        return self.points == 0 or self.worst_margin >= -slack


@dataclass
class RegionReport:
    eps: float
    slack: float
    regions: list[RegionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok(self.slack) for r in self.regions)

    def worst(self, name: str) -> float:
        return min((r.worst_margin for r in self.regions if r.name == name and r.points),
                   default=np.inf)

    def raise_if_failed(self):
        for r in self.regions:
            if not r.ok(self.slack):
                raise LemmaViolation(r.name, r.t, r.x, r.worst_margin)


def _gamma_term(t, p: SchemeParams, problem: EscapeProblem, eta: float, nx: int = 401):
    # inf over x in [z, H] (both sides of x0) of the nonlinear correction
    m, x0 = problem.model, problem.x0
    k = problem.c / problem.sbar ** 2
    lo, hi = _domain_window(problem)
    y = np.linspace(p.z, p.H, nx)
    t = np.atleast_1d(np.asarray(t, float))
    gap = p.z - p.xhat * np.exp(p.c * (t - p.T))
    out = np.full(t.shape, np.inf)
    for side in (1, -1):
        x = x0 + side * y
        keep = (x >= lo) & (x <= hi)
        if not np.any(keep):
            continue
        x = x[keep]
        d = side * (2.0 * m.b(x) / m.sigma(x) ** 2 + 2.0 * k * (x - x0))
        e = 2.0 * p.eps * (k + m.d_b_over_s2(x))
        val = (p.c * eta / (2 * problem.sbar ** 2) * d[None, :] * gap[:, None]
               + eta * d[None, :] ** 2 / 8.0 + e[None, :])
        out = np.minimum(out, val.min(axis=1))
    return out


def _region2_integrand(t, p: SchemeParams, eta: float):
    # (c^2 eta / (2 sbar^2)) (z - xhat e^{c(t-T)})^2 - 2 eps c
    g = p.z - p.xhat * np.exp(p.c * (np.asarray(t, float) - p.T))
    return p.c ** 2 * eta / (2 * p.sbar ** 2) * g ** 2 - 2.0 * p.eps * p.c


def check_region_lemmas(problem: EscapeProblem, params: SchemeParams,
                        analysis: AnalysisParams = AnalysisParams(),
                        kind: str | None = None) -> RegionReport:
    """Evaluate ``G[(1-eta) U, U]`` against the region lower bounds.

    Regions, by distance from the rest point: inner ``[0, z]``, middle
    ``[z, H]`` and outer ``[H, A]``, on both sides for two-sided domains, over
    ``t`` in ``[0, T - t*]``. The linear kind uses the Gauss-Markov operator,
    the nonlinear kind the model's coefficients with the ``C0 r`` and ``Gamma``
    corrections.
    """
    if kind is None:
        kind = "mollified-linear" if problem.is_linear else "mollified-nonlinear"
    linear = kind == "mollified-linear"
    p, eta = params, analysis.eta
    sub = Subsolution(problem, p, kind)
    rep = RegionReport(p.eps, analysis.slack)
    t_end = p.T - p.tstar
    if t_end <= 0:
        return rep
    ts = np.linspace(0.0, t_end, analysis.nt)
    lo, hi = _domain_window(problem)
    x0 = problem.x0
    if not linear:
        const = nonlinear_constants(problem)
        corr = (1.0 - eta) * const.C0 * r_term(ts, p)
        gam = _gamma_term(ts, p, problem, eta)
    bands = {"inner": (0.0, p.z), "middle": (p.z, p.H), "outer": (p.H, np.inf)}
    for name, (a, b) in bands.items():
        for side in ((1, -1) if problem.domain.two else (1,)):
            edge = (hi - x0) if side > 0 else (x0 - lo)
            b_eff = min(b, edge)
            if a >= b_eff:
                rep.regions.append(RegionResult(f"{name}{'+' if side > 0 else '-'}",
                                                np.inf, np.nan, np.nan, 0))
                continue
            xs = x0 + side * np.linspace(a, b_eff, analysis.nx)
            T_, X_ = np.meshgrid(ts, xs, indexing="ij")
            G = _shrunk_pair(sub, T_, X_, eta, p.eps, linear)
            if name == "inner":
                bound = np.zeros(len(ts)) if linear else -corr
            elif name == "outer":
                bound = np.zeros(len(ts))
            elif linear:
                bound = np.minimum(0.5 * _region2_integrand(ts, p, eta), 0.0)
            else:
                B = _region2_integrand(ts, p, eta) / p.sbar ** 2
                bound = 0.5 * const.sigma_star2 * np.minimum(B + gam, 0.0) - corr
            margin = G - bound[:, None]
            i, j = np.unravel_index(int(np.argmin(margin)), margin.shape)
            rep.regions.append(RegionResult(f"{name}{'+' if side > 0 else '-'}",
                                            float(margin[i, j]), float(ts[i]), float(xs[j]),
                                            margin.size))
    return rep


@dataclass
class Certification:
    """Region check at ``eps`` plus the shrinkage witness at ``eps / 2``."""

    at_eps: RegionReport
    at_half: RegionReport
    shrink: dict[str, float]
    certified: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.certified.values())


def certify_region_lemmas(problem: EscapeProblem, params: SchemeParams,
                          analysis: AnalysisParams = AnalysisParams(),
                          kind: str | None = None) -> Certification:
    """Accept a region if its margin is above ``-slack`` or its negative part
    shrinks at least twofold when ``eps`` (and ``delta = 2 eps``) is halved.

    Halving keeps ``M``, ``xhat``, ``t*`` and ``eta`` fixed.
    """
    r1 = check_region_lemmas(problem, params, analysis, kind)
    half = params.with_eps(0.5 * params.eps, 0.5 * params.delta)
    r2 = check_region_lemmas(problem, half, analysis, kind)
    shrink, ok = {}, {}
    for a in r1.regions:
        b = next(r for r in r2.regions if r.name == a.name)
        neg_a, neg_b = max(-a.worst_margin, 0.0), max(-b.worst_margin, 0.0)
        shrink[a.name] = neg_a / neg_b if neg_b > 0 else np.inf
        ok[a.name] = a.ok(analysis.slack) or shrink[a.name] >= 2.0
    return Certification(r1, r2, shrink, ok)


# --- theorem bounds ----------------------------------------------------------------

def value_lower_bound(problem: EscapeProblem, p: SchemeParams) -> float:
    """Lower bound on the mollified subsolution at ``(0, x0)`` from the soft-min sandwich."""
    c, s2 = problem.c, problem.sbar ** 2
    K = 2.0 * c / p.M + s2
    n = 3 if problem.domain.two else 2
    return (c * p.xhat ** 2 / (K - s2 * np.exp(-2 * c * p.T))
            + 2.0 * problem.L - c * p.xhat ** 2 / s2 - p.delta * np.log(n))


def decay_rate(problem: EscapeProblem, xhat: float, T: float) -> float:
    """Limit of the value at the start point as ``M -> inf``: ``2L + (c xhat^2/sbar^2) e^{-2cT}/(1 - e^{-2cT})``."""
    c, s2 = problem.c, problem.sbar ** 2
    e = np.exp(-2.0 * c * T)
    return float(2.0 * problem.L + c * xhat ** 2 / s2 * e / (1.0 - e))


def min_xhat_for_theorem(eps: float, eta: float, M: float, c: float, sbar: float) -> float:
    """Smallest ``xhat`` with ``z^2 c eta >= 8 eps sbar^2``."""
    z = np.sqrt(8.0 * eps * sbar ** 2 / (c * eta))
    return float(2.0 * z * np.sqrt(M * sbar ** 2 / c))


def theorem_hypotheses(problem: EscapeProblem, p: SchemeParams, eta: float,
                       nonlinear: bool) -> dict[str, bool]:
    c, s2 = problem.c, problem.sbar ** 2
    out = {
        "delta = 2 eps": bool(np.isclose(p.delta, 2.0 * p.eps, rtol=1e-12)),
        "z^2 c eta >= 8 eps sbar^2": bool(p.z ** 2 * c * eta >= 8.0 * p.eps * s2 * (1 - 1e-12)),
        "eta < 1/4": bool(eta < 0.25),
    }
    if nonlinear:
        out["M >= 5c/sbar^2"] = bool(p.M >= 5.0 * c / s2)
        e0 = eta0(p.eps, problem, p.H)
        out["eta > eta0(eps)"] = bool(np.isnan(e0) or eta > e0)
    else:
        out["M >= 4c/sbar^2"] = bool(p.M >= 4.0 * c / s2)
        out["eta > eps/(eps + c H^2/sbar^2)"] = bool(eta > p.eps / (p.eps + c * p.H ** 2 / s2))
    return out


@dataclass
class TheoremBound:
    """Lower bound on ``-eps log Q`` and its ingredients."""

    bound: float
    I1: float
    I2: float
    uses_I1: bool
    components: dict[str, float]
    hypotheses: dict[str, bool]
    decay_rate: float


def _negative_set_integral(f, a: float, b: float, n: int = 10_001) -> float:
    # integral of min(f, 0) over [a, b]: sign scan, bisection of crossings
    if b <= a:
        return 0.0
    s = np.linspace(a, b, n)
    v = f(s)
    edges = [a]
    for i in np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]:
        edges.append(optimize.brentq(lambda u: float(f(np.array([u]))[0]), s[i], s[i + 1],
                                     xtol=1e-13))
    edges.append(b)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = float(f(np.array([0.5 * (lo + hi)]))[0])
        if mid < 0 and hi > lo:
            total += integrate.quad(lambda u: float(f(np.array([u]))[0]), lo, hi,
                                    epsabs=1e-12, limit=200)[0]
    return total


def theorem_bound(problem: EscapeProblem, params: SchemeParams,
                  analysis: AnalysisParams = AnalysisParams(), kind: str | None = None,
                  strict: bool = True) -> TheoremBound:
    """Lower bound on ``-eps log Q`` for the mollified scheme started at ``x0``.

    Linear kind: ``2 I1`` when ``T >= t*`` with
    ``I1 = (1 - eta) U(0, x0) - eps c min(max(b, t*), T)``, where
    ``b = -(1/c) log((z - sqrt(4 eps sbar^2 / (c eta))) / xhat)`` bounds the
    length of the set on which the middle-region bound is negative. Nonlinear
    kind: ``2 (I1 - (1 - eta) C0 int r)`` with the ``Gamma``-corrected integral
    over the negative set and ``-t* c* eps``. Otherwise ``2 I2`` with
    ``I2 = 2L - c T eps`` (``c*`` for the nonlinear kind).

    Raises
    ------
    HypothesisViolation
        When ``strict`` and a hypothesis fails.
    """
    if kind is None:
        kind = "mollified-linear" if problem.is_linear else "mollified-nonlinear"
    nonlinear = kind == "mollified-nonlinear"
    p, eta = params, analysis.eta
    hyp = theorem_hypotheses(problem, p, eta, nonlinear)
    if strict and not all(hyp.values()):
        raise HypothesisViolation([k for k, v in hyp.items() if not v])
    c, eps = problem.c, p.eps
    comps: dict[str, float] = {}
    if nonlinear:
        const = nonlinear_constants(problem)
        comps.update(C0=const.C0, c_star=const.c_star, sigma_star2=const.sigma_star2)
        I2 = 2.0 * problem.L - const.c_star * p.T * eps
    else:
        I2 = 2.0 * problem.L - c * p.T * eps
    rate = decay_rate(problem, p.xhat, p.T)
    if p.T < p.tstar:
        return TheoremBound(2.0 * I2, np.nan, I2, False, comps, hyp, rate)
    u0 = float(Subsolution(problem, p, kind).derivs(0.0, problem.x0).v)
    comps["U(0,x0)"] = u0
    t_end = p.T - p.tstar
    if not nonlinear:
        # eta = 0 leaves the whole middle region negative
        root = p.z - np.sqrt(4.0 * eps * p.sbar ** 2 / (c * eta)) if eta > 0 else -1.0
        b = -np.log(root / p.xhat) / c if root > 0 else np.inf
        length = min(max(b, p.tstar), p.T)
        comps.update(b=float(b), negative_length=float(length))
        I1 = (1.0 - eta) * u0 - eps * c * length
        bound = 2.0 * I1
    else:
        f = lambda s: (_region2_integrand(s, p, eta) / p.sbar ** 2
                       + _gamma_term(s, p, problem, eta))
        neg = _negative_set_integral(f, 0.0, t_end)
        rint = r_integral(p)
        comps.update(negative_integral=neg, r_integral=rint)
        I1 = (1.0 - eta) * u0 + 0.5 * const.sigma_star2 * neg - p.tstar * const.c_star * eps
        bound = 2.0 * (I1 - (1.0 - eta) * const.C0 * rint)
    return TheoremBound(float(bound), float(I1), float(I2), True, comps, hyp, rate)
