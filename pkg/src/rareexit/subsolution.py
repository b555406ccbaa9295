"""Subsolution pieces, their soft-min mollification and the sampling control.

All functions are vectorised over ``t`` and ``x`` with numpy broadcasting.
Positions inside the pieces are measured from the rest point, ``y = x - x0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, NamedTuple

import numpy as np

from .errors import ComplexRoots, InvalidM
from .model import EscapeProblem, quasipotential

__all__ = [
    "SCHEME_KINDS", "SchemeParams", "Derivs", "Subsolution", "a_M", "tstar",
    "crossing_roots", "mollify", "f1", "f1_bar", "f2M", "u0_piecewise",
    "default_M", "control",
]

SchemeKind = Literal["none", "quasipotential", "eps-zero-hjb",
                     "mollified-linear", "mollified-nonlinear"]
SCHEME_KINDS: tuple[str, ...] = ("none", "quasipotential", "eps-zero-hjb",
                                 "mollified-linear", "mollified-nonlinear")


def a_M(t, c: float, sbar: float, M: float, T: float):
    """Riccati coefficient of the LQR piece, ``a(T) = M/2``."""
    t = np.asarray(t, dtype=float)
    K = 2.0 * c / M + sbar ** 2
    e2 = np.exp(2.0 * c * (t - T))
    out = c * e2 / (K - sbar ** 2 * e2)
    out = np.where(t == T, 0.5 * M, out)
    return out if out.ndim else float(out)


def tstar(c: float, sbar: float, M: float) -> float:
    """Handoff duration ``t* = -(2/c) log(2c / (M sbar^2))``.

    Raises
    ------
    InvalidM
        If ``M sbar^2 <= 2c`` (the rule would give a non-positive duration).
    """
    if not M * sbar ** 2 > 2.0 * c:
        raise InvalidM(f"M sbar^2 = {M * sbar ** 2:.4g} must exceed 2c = {2 * c:.4g}")
    return float(-(2.0 / c) * np.log(2.0 * c / (M * sbar ** 2)))


def default_M(c: float, sbar: float, xhat: float, eps: float, kappa: float) -> float:
    """Scaling rule ``M = 2 c xhat^2 / (sbar^2 eps^(2 kappa))``."""
    return 2.0 * c * xhat ** 2 / (sbar ** 2 * eps ** (2.0 * kappa))


@dataclass(frozen=True)
class SchemeParams:
    """Scheme knobs. ``M``, ``z``, ``H`` are ``nan`` for kinds that do not use them."""

    eps: float
    T: float
    xhat: float = 1.0
    M: float = np.nan
    kappa: float = np.nan
    delta: float = np.nan
    tstar: float = 0.0
    c: float = 1.0
    sbar: float = 1.0
    z: float = field(init=False)
    H: float = field(init=False)

    def __post_init__(self):
        z = self.xhat * np.sqrt(self.c / (self.M * self.sbar ** 2)) / 2.0
        object.__setattr__(self, "z", float(z))
        object.__setattr__(self, "H", float(10.0 * z))

    @classmethod
    def build(cls, problem: EscapeProblem, eps: float, T: float, *, xhat: float = 1.0,
              M: float | None = None, kappa: float = 0.4, delta: float | None = None,
              t_star: float | None = None, lqr: bool = True) -> "SchemeParams":
        """Fill in defaults: ``M`` by the kappa rule, ``delta = 2 eps``, ``t*`` by equality.

        When ``M sbar^2 <= 2c`` the equality rule gives a negative duration and
        ``t*`` is set to 0.

        With ``lqr=False`` no terminal curvature is set (quasipotential, plain
        and eps=0 schemes).
        """
        c, sbar = problem.c, problem.sbar
        delta = 2.0 * eps if delta is None else float(delta)
        if not lqr:
            return cls(eps, T, xhat, np.nan, kappa, delta, 0.0, c, sbar)
        if M is None:
            M = default_M(c, sbar, xhat, eps, kappa)
        if t_star is not None:
            ts = float(t_star)
        elif M * sbar ** 2 > 2.0 * c:
            ts = tstar(c, sbar, M)
        else:
            # the lower bound on t* is negative here; hand off only at T
            ts = 0.0
        return cls(eps, T, xhat, float(M), kappa, delta, ts, c, sbar)

    def with_eps(self, eps: float, delta: float | None = None) -> "SchemeParams":
        return replace(self, eps=eps, delta=2.0 * eps if delta is None else delta)


class Derivs(NamedTuple):
    """Value and partial derivatives of a function of ``(t, x)``."""

    v: np.ndarray
    dt: np.ndarray
    dx: np.ndarray
    dxx: np.ndarray


# --- pieces -------------------------------------------------------------------

def f1(x, problem: EscapeProblem) -> Derivs:
    """Quadratic piece ``2L - (c/sbar^2)(x - x0)^2``."""
    x = np.asarray(x, dtype=float)
    k = problem.c / problem.sbar ** 2
    y = x - problem.x0
    zero = np.zeros_like(y)
    return Derivs(2.0 * problem.L - k * y ** 2, zero, -2.0 * k * y, zero - 2.0 * k)


def f1_bar(x, problem: EscapeProblem) -> Derivs:
    """Exact piece ``2L - S(x0, x)`` with gradient ``2 b / sigma^2``."""
    x = np.asarray(x, dtype=float)
    m = problem.model
    s2 = m.sigma(x) ** 2
    val = 2.0 * problem.L - quasipotential(m, x)
    return Derivs(np.asarray(val, dtype=float), np.zeros_like(x),
                  2.0 * m.b(x) / s2, 2.0 * m.d_b_over_s2(x))


def _lqr_factors(t, p: SchemeParams):
    # r = sqrt(c / (K - sbar^2 e^{2c(t-T)})), q = r e^{c(t-T)} = sqrt(a)
    e1 = np.exp(p.c * (np.asarray(t, dtype=float) - p.T))
    K = 2.0 * p.c / p.M + p.sbar ** 2
    r = np.sqrt(p.c / (K - p.sbar ** 2 * e1 * e1))
    return r * e1, r


def f2M(t, x, problem: EscapeProblem, p: SchemeParams, side: int = 1) -> Derivs:
    """LQR piece centred at ``x0 + side * xhat * e^{c(T-t)}``.

    The additive constant is the quadratic ``F1(x0 + xhat)``, which is the same
    for both sides.
    """
    t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
    y = x - problem.x0
    q, r = _lqr_factors(t, p)
    a = q * q
    w_scaled = q * y - side * p.xhat * r          # sqrt(a) * w
    const = 2.0 * problem.L - problem.c / problem.sbar ** 2 * p.xhat ** 2
    val = w_scaled ** 2 + const
    dx = 2.0 * q * w_scaled
    adot = 2.0 * p.c * a + 2.0 * p.sbar ** 2 * a * a
    with np.errstate(over="ignore", invalid="ignore"):
        m = side * p.xhat * np.exp(p.c * (p.T - t))
        w = y - m
        dt = adot * w ** 2 + 2.0 * a * w * (p.c * m)
    return Derivs(val, dt, dx, 2.0 * a)


def _u0_side(t, x, problem: EscapeProblem, T: float, side: int) -> Derivs:
    t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
    k = problem.c / problem.sbar ** 2
    c = problem.c
    A = (problem.domain.upper - problem.x0) if side > 0 else (problem.x0 - problem.domain.lower)
    y = side * (x - problem.x0)
    E = np.exp(c * (t - T))
    h = 1.0 - E * E
    g = A - y * E
    with np.errstate(divide="ignore", invalid="ignore"):
        v2 = k * g * g / h
        d2 = -2.0 * k * E * g / h
        dd2 = 2.0 * k * E * E / h
        t2 = k * (-2.0 * c * y * E * g / h + 2.0 * c * E * E * g * g / (h * h))
    use1 = y >= A * E
    v = np.where(use1, k * (A * A - y * y), v2)
    dx = np.where(use1, -2.0 * k * y, d2)
    dxx = np.where(use1, -2.0 * k, dd2)
    dt = np.where(use1, 0.0, t2)
    return Derivs(v, dt, side * dx, dxx)


def u0_piecewise(t, x, problem: EscapeProblem, T: float, side: int = 0) -> Derivs:
    """Eps = 0 solution of the Gauss-Markov escape problem.

    Parameters
    ----------
    side : int
        ``+1`` or ``-1`` for the one-sided pieces ``U0_+`` / ``U0_-``; ``0``
        gives ``U0_+`` for ``x >= x0`` and ``U0_-`` otherwise.
    """
    if side:
        return _u0_side(t, x, problem, T, side)
    up = _u0_side(t, x, problem, T, 1)
    dn = _u0_side(t, x, problem, T, -1)
    right = np.asarray(x, float) >= problem.x0
    return Derivs(*(np.where(right, a, b) for a, b in zip(up, dn)))


# --- mollification ------------------------------------------------------------

def mollify(values, grads, delta: float):
    """Soft minimum ``-delta log sum exp(-U_i / delta)`` with weights and gradient.

    Parameters
    ----------
    values, grads : array_like, shape (n, ...)
        Piece values and x-gradients stacked along the first axis.
    delta : float
        Smoothing scale; ``delta = 0`` gives the hard minimum.

    Returns
    -------
    value, gradient, weights
    """
    values = np.asarray(values, dtype=float)
    grads = np.asarray(grads, dtype=float)
    m = values.min(axis=0)
    if delta == 0.0:
        idx = values.argmin(axis=0)
        rho = (np.arange(values.shape[0]).reshape((-1,) + (1,) * m.ndim) == idx).astype(float)
        return m, np.sum(rho * grads, axis=0), rho
    e = np.exp(-(values - m) / delta)
    s = e.sum(axis=0)
    rho = e / s
    return m - delta * np.log(s), np.sum(rho * grads, axis=0), rho


# --- combined scheme ----------------------------------------------------------

@dataclass(frozen=True)
class Subsolution:
    """Combined subsolution ``U_bar^delta`` for one scheme kind.

    Parameters
    ----------
    problem : EscapeProblem
    params : SchemeParams
    kind : str
        One of :data:`SCHEME_KINDS`.
    """

    problem: EscapeProblem
    params: SchemeParams
    kind: str

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "eps-zero-hjb" and not self.problem.is_linear:
            raise ValueError("eps-zero-hjb requires the Gauss-Markov model")
        if self.kind.startswith("mollified") and self.params.tstar < self.params.T:
            x = np.linspace(*self.grid_bounds(), 401)
            u = self.derivs(self.params.T - self.params.tstar, x).v
            if np.any(u - self.outer(x).v > 1e-12):
                raise AssertionError("handoff dominance U(T - t*) <= F1 failed")

    @property
    def n_pieces(self) -> int:
        if self.kind in ("none", "quasipotential"):
            return 1
        if self.kind == "eps-zero-hjb":
            return 2 if self.problem.domain.two else 1
        return 3 if self.problem.domain.two else 2

    def grid_bounds(self) -> tuple[float, float]:
        d, x0 = self.problem.domain, self.problem.x0
        lo = d.lower if d.two else x0 - (d.upper - x0)
        return lo, d.upper

    def outer(self, x) -> Derivs:
        """The piece used after the handoff (``F1`` or ``F1_bar``)."""
        if self.kind == "mollified-linear":
            return f1(x, self.problem)
        return f1_bar(x, self.problem)

    def pieces(self, t, x) -> list[Derivs]:
        p, pr = self.params, self.problem
        if self.kind == "eps-zero-hjb":
            out = [_u0_side(t, x, pr, p.T, 1)]
            if pr.domain.two:
                out.append(_u0_side(t, x, pr, p.T, -1))
            return out
        if self.kind in ("none", "quasipotential"):
            return [self.outer(x)]
        out = [f2M(t, x, pr, p, 1)]
        if pr.domain.two:
            out.append(f2M(t, x, pr, p, -1))
        out.append(self.outer(x))
        return [Derivs(*np.broadcast_arrays(*d)) for d in out]

    def evaluate(self, t, x):
        """Return ``(Derivs, weights)`` of the mollified family before the handoff rule."""
        ps = self.pieces(t, x)
        if len(ps) == 1:
            d = ps[0]
            return d, np.ones((1,) + np.shape(d.v))
        vals = np.stack([d.v for d in ps])
        gx = np.stack([d.dx for d in ps])
        delta = self.params.delta
        u, du, rho = mollify(vals, gx, delta)
        ut = np.sum(rho * np.stack([d.dt for d in ps]), axis=0)
        if delta == 0.0:
            uxx = np.sum(rho * np.stack([d.dxx for d in ps]), axis=0)
        else:
            second = np.sum(rho * (gx ** 2 / delta - np.stack([d.dxx for d in ps])), axis=0)
            uxx = du ** 2 / delta - second
        return Derivs(u, ut, du, uxx), rho

    def derivs(self, t, x) -> Derivs:
        """Value and derivatives of the combined scheme, handoff rule applied."""
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        if self.kind == "none":
            z = np.zeros_like(x)
            return Derivs(z, z, z, z)
        if self.kind == "quasipotential":
            return self.outer(x)
        d, _ = self.evaluate(t, x)
        if not self.kind.startswith("mollified"):
            return d
        p = self.params
        late = (t > p.T - p.tstar) | (p.T <= p.tstar)
        if not np.any(late):
            return d
        o = self.outer(x)
        return Derivs(*(np.where(late, b, a) for a, b in zip(d, o)))

    def value_and_gradient(self, t, x):
        d = self.derivs(t, x)
        return d.v, d.dx

    def control(self, t, x):
        """Sampling control ``-sigma(x) dU/dx``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "none":
            return np.zeros(np.broadcast(np.asarray(t), x).shape)
        return -self.problem.model.sigma(x) * self.derivs(t, x).dx


def control(t, x, scheme: Subsolution):
    """Functional alias of :meth:`Subsolution.control`."""
    return scheme.control(t, x)


def crossing_roots(t, p: SchemeParams) -> tuple[float, float]:
    """Offsets from ``x0`` where ``F2_+ = F1`` (quadratic ``F1``), sorted.

    Raises
    ------
    ComplexRoots
        If the discriminant is negative.
    """
    c, s2, M = p.c, p.sbar ** 2, p.M
    K = 2.0 * c / M + s2
    e = np.exp(c * (t - p.T))
    disc = 2.0 * c * K / (M * s2 * s2) - 2.0 * c / (M * s2) * e * e
    if disc < 0:
        raise ComplexRoots(f"discriminant {disc:.3e} < 0 at t = {t}")
    root = np.sqrt(disc)
    f = s2 * p.xhat / K
    return f * (e - root), f * (e + root)
